"""Campaign execution and persistence.

A campaign directory holds exactly one manifest.json plus the declared
outputs: trials.jsonl (one record per line), summary.csv, and for
singularity campaigns scaling.csv. Trial records are pure functions of
(config, n, trial), so the JSON-lines stream is byte-identical across
reruns and across any --threads setting; wall-clock data lives only in
the manifest.
"""

from __future__ import annotations

import csv
import datetime as dt
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from ._version import __version__ as _version
from .config import config_to_dict
from .experiments import (
    ExperimentConfig,
    SingularitySummary,
    TrialRecord,
    fit_scaling,
    fit_tail_decay,
    singularity_trial,
    survey_trial,
)
from .statutil import Z_99, rule_of_three, wilson_interval

__all__ = ["CampaignResult", "run_singularity_campaign", "run_kernel_survey_campaign"]

_CHUNK = 256


@dataclass(frozen=True)
class CampaignResult:
    out_dir: Path
    manifest_path: Path
    jsonl_path: Path
    summary_path: Path
    scaling_path: Path | None
    summaries: tuple
    fit: object | None


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _utc_now() -> str:
    return dt.datetime.now(dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _sing_worker(args) -> list[tuple[int, int, bool]]:
    cfg, n, lo, hi = args
    return [(n, t, singularity_trial(cfg, n, t)) for t in range(lo, hi)]


def _survey_worker(args) -> list[TrialRecord]:
    cfg, n, lo, hi = args
    return [survey_trial(cfg, n, t) for t in range(lo, hi)]


def _chunked_jobs(cfg: ExperimentConfig, n: int):
    for lo in range(0, cfg.trials, _CHUNK):
        yield (cfg, n, lo, min(lo + _CHUNK, cfg.trials))


def _run_pool(worker, jobs, threads: int):
    if threads <= 1:
        for job in jobs:
            yield worker(job)
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            yield from pool.map(worker, jobs)


def _write_manifest(path: Path, command: str, cfg: ExperimentConfig,
                    started: str, outputs: dict, flags: dict, timing_s: float) -> None:
    manifest = {
        "tool": "bandlo",
        "version": _version,
        "command": command,
        "config": config_to_dict(cfg),
        "master_seed": cfg.master_seed,
        "started_utc": started,
        "finished_utc": _utc_now(),
        "outputs": {k: str(v) for k, v in outputs.items()},
        "flags": flags,
        "timing_s": timing_s,
    }
    path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")


def _collect_flags(cfg: ExperimentConfig) -> dict:
    clamped = []
    for n in cfg.n_list:
        pm = cfg.modulus_for(n)
        if pm is not None and pm.clamped:
            clamped.append(n)
    return {"prime_clamped_n": clamped}


def run_singularity_campaign(cfg: ExperimentConfig, out_dir: str | Path,
                             threads: int = 1) -> CampaignResult:
    """Theorem 1.1 campaign: singularity frequency per n, with scaling fit."""
    started = _utc_now()
    t0 = time.time()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    jsonl_path = out / "trials.jsonl"
    summary_path = out / "summary.csv"
    scaling_path = out / "scaling.csv"

    summaries = []
    with open(jsonl_path, "w") as jf:
        for n in cfg.n_list:
            pm = cfg.modulus_for(n)
            modulus = "Z" if pm is None else str(pm.p)
            count = 0
            for chunk in _run_pool(_sing_worker, _chunked_jobs(cfg, n), threads):
                for n_, t, singular in chunk:
                    count += bool(singular)
                    jf.write(_dump({"trial": t, "n": n_, "modulus": modulus,
                                    "singular": bool(singular)}) + "\n")
            ci_lo, ci_hi = wilson_interval(count, cfg.trials, Z_99)
            censored = count == 0
            summaries.append(SingularitySummary(
                n=n, modulus=modulus, trials=cfg.trials, singular_count=count,
                p_hat=count / cfg.trials, ci_lo=ci_lo, ci_hi=ci_hi,
                censored=censored,
                censored_bound=rule_of_three(cfg.trials) if censored else None,
            ))

    with open(summary_path, "w", newline="") as sf:
        w = csv.writer(sf)
        w.writerow(["n", "p", "trials", "singular_count", "P_hat",
                    "ci_lo", "ci_hi", "censored"])
        for s in summaries:
            w.writerow([s.n, s.modulus, s.trials, s.singular_count,
                        repr(s.p_hat), repr(s.ci_lo), repr(s.ci_hi),
                        int(s.censored)])

    fit = None
    uncensored = [s for s in summaries if not s.censored]
    if len(uncensored) >= 2:
        fit = fit_scaling(summaries, cfg.alpha)
        with open(scaling_path, "w", newline="") as ff:
            w = csv.writer(ff)
            w.writerow(["n", "n_alpha_half", "log_inv_p_hat"])
            for s, (x, y) in zip(uncensored, fit.pairs):
                w.writerow([s.n, repr(x), repr(y)])
    else:
        scaling_path = None

    outputs = {"trials": jsonl_path, "summary": summary_path}
    if scaling_path is not None:
        outputs["scaling"] = scaling_path
    manifest_path = out / "manifest.json"
    _write_manifest(manifest_path, "singprob", cfg, started, outputs,
                    _collect_flags(cfg), time.time() - t0)
    return CampaignResult(out, manifest_path, jsonl_path, summary_path,
                          scaling_path, tuple(summaries), fit)


def _record_to_json(rec: TrialRecord) -> dict:
    return {
        "trial": rec.trial,
        "n": rec.n,
        "p": rec.p,
        "row": rec.row,
        "row_block": rec.row_block,
        "kernel_dim": rec.kernel_dim,
        "partition_fallback": rec.partition_fallback,
        "vectors": [
            {
                "index": v.index,
                "tail_rho": [str(v.tail_rho_num), v.tail_rho_exp],
                "tail_ok": v.tail_ok,
                "blocks": [
                    {
                        "k": b.k, "size": b.size, "support": b.support,
                        "rho1": [str(b.rho1_num), b.rho1_exp],
                        "rho_mu": [str(b.rho_mu_num), b.rho_mu_exp],
                        "case": b.case, "t": b.t, "degenerate": b.degenerate,
                    }
                    for b in v.blocks
                ],
            }
            for v in rec.vectors
        ],
    }


def run_kernel_survey_campaign(cfg: ExperimentConfig, out_dir: str | Path,
                               threads: int = 1) -> CampaignResult:
    """Theorem 2.3 campaign: kernel-vector block structure per trial."""
    started = _utc_now()
    t0 = time.time()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    jsonl_path = out / "trials.jsonl"
    summary_path = out / "summary.csv"

    records: list[TrialRecord] = []
    with open(jsonl_path, "w") as jf:
        for n in cfg.n_list:
            for chunk in _run_pool(_survey_worker, _chunked_jobs(cfg, n), threads):
                for rec in chunk:
                    records.append(rec)
                    jf.write(_dump(_record_to_json(rec)) + "\n")

    by_n: dict[int, list[TrialRecord]] = {}
    for rec in records:
        by_n.setdefault(rec.n, []).append(rec)
    with open(summary_path, "w", newline="") as sf:
        w = csv.writer(sf)
        w.writerow(["n", "p", "trials", "median_tail_rho", "frac_tail_ok",
                    "mean_kernel_dim"])
        for n in cfg.n_list:
            recs = by_n[n]
            tails = sorted(
                float(Fraction(r.vectors[0].tail_rho_num,
                               1 << r.vectors[0].tail_rho_exp))
                for r in recs
            )
            mid = len(tails) // 2
            median = (tails[mid] if len(tails) % 2 == 1
                      else 0.5 * (tails[mid - 1] + tails[mid]))
            frac_ok = sum(r.tail_ok() for r in recs) / len(recs)
            mean_dim = sum(r.kernel_dim for r in recs) / len(recs)
            w.writerow([n, recs[0].p, len(recs), repr(median),
                        repr(frac_ok), repr(mean_dim)])

    fit = None
    if len(cfg.n_list) >= 2:
        fit = fit_tail_decay(records, cfg.alpha)

    manifest_path = out / "manifest.json"
    _write_manifest(manifest_path, "kernel-survey", cfg, started,
                    {"trials": jsonl_path, "summary": summary_path},
                    _collect_flags(cfg), time.time() - t0)
    return CampaignResult(out, manifest_path, jsonl_path, summary_path,
                          None, tuple(records), fit)
