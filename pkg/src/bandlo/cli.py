"""Command-line front end.

Subcommands: gen, rank, rho, lo-witness, singprob, kernel-survey, check.
Exit codes: 0 success, 1 usage/config error, 2 runtime error. Errors are
machine-parsable lines prefixed ``error:``. Relative --out paths resolve
under $BANDLO_OUTPUT_ROOT when it is set.

Rational constants on the command line are exact strings like 1/4, never
decimals.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from ._version import __version__
from .campaign import run_kernel_survey_campaign, run_singularity_campaign
from .config import ConfigError, parse_config_file
from .ensembles import BandProfile, IntegerMatrix, OffbandLaw, sample_matrix
from .fieldcore import PrimeModulus
from .lotools import (
    BudgetExhausted,
    LOPreconditionError,
    StepLaw,
    WalkExactError,
    collision_estimate_rho,
    find_lo_witness,
    support_size,
    verify_witness,
    walk_distribution,
)
from .rankengine import is_singular_Z, kernel_fp, reduce_mod
from .serialize import (
    FormatError,
    load_kernel_text,
    load_matrix,
    load_pmf_text,
    save_kernel_text,
    save_matrix,
    save_pmf_text,
)

__all__ = ["main"]


class UsageError(ValueError):
    pass


def _parse_fraction(text: str, name: str) -> Fraction:
    if "." in text:
        raise UsageError(f"{name}: use an exact fraction like 1/4, not a decimal")
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"{name}: cannot parse {text!r}") from exc


def _parse_vector(args) -> np.ndarray:
    if args.v is not None:
        try:
            return np.array([int(tok) for tok in args.v.replace(",", " ").split()],
                            dtype=np.int64)
        except ValueError as exc:
            raise UsageError(f"--v: expected integers, got {args.v!r}") from exc
    try:
        toks = Path(args.file).read_text().split()
        return np.array([int(t) for t in toks], dtype=np.int64)
    except OSError as exc:
        raise UsageError(f"cannot read vector file {args.file}: {exc}") from exc
    except ValueError as exc:
        raise UsageError(f"vector file {args.file} holds non-integers") from exc


def _parse_offband(text: str) -> OffbandLaw:
    parts = text.split(":")
    try:
        if parts[0] == "zero" and len(parts) == 1:
            return OffbandLaw.zero()
        if parts[0] == "rademacher" and len(parts) == 1:
            return OffbandLaw.rademacher()
        if parts[0] == "uniform" and len(parts) == 3:
            return OffbandLaw.uniform_range(int(parts[1]), int(parts[2]))
        if parts[0] == "constant" and len(parts) == 2:
            return OffbandLaw.constant(int(parts[1]))
    except ValueError:
        pass
    raise UsageError(
        f"--offband: expected zero | rademacher | uniform:a:b | constant:c, got {text!r}")


def _out_path(text: str) -> Path:
    path = Path(text)
    root = os.environ.get("BANDLO_OUTPUT_ROOT")
    if root and not path.is_absolute():
        return Path(root) / path
    return path


def _rho_string(mf) -> str:
    rho = mf.rho()
    return f"{rho.numerator}/2^{rho.denominator.bit_length() - 1}" if rho.denominator > 1 \
        else str(rho.numerator)


# ---------------------------------------------------------------------------
# subcommand handlers
# ---------------------------------------------------------------------------

def _cmd_gen(args) -> int:
    profile = BandProfile(
        n=args.n, d=args.d, kind=args.kind,
        offband=_parse_offband(args.offband) if args.kind == "general" else OffbandLaw.zero(),
        alpha=args.alpha,
    )
    matrix = sample_matrix(profile, args.seed)
    out = _out_path(args.out)
    save_matrix(out, matrix, modulus=None, binary=args.binary)
    nnz = int(np.count_nonzero(matrix.entries))
    meta = matrix.band_meta
    print(f"wrote {out}: kind={args.kind} n={args.n} d={args.d} "
          f"nonzero={nnz} "
          f"band_meta={'none' if meta is None else (meta.d, meta.has_corners)} "
          f"support_ok={matrix.check_band_meta()}")
    return 0


def _cmd_rank(args) -> int:
    entries, _ = load_matrix(args.matrix)
    matrix = IntegerMatrix(entries)
    if args.integer:
        singular = is_singular_Z(matrix)
        print(f"modulus=Z singular={str(singular).lower()} "
              "(rank/kernel are reported in prime mode)")
        return 0
    pm = PrimeModulus(args.prime)
    fp = reduce_mod(matrix, pm)
    kb = kernel_fp(fp)
    rank = fp.n_cols - kb.dim
    singular = rank < fp.n_rows if fp.n_rows == fp.n_cols else None
    print(f"modulus={pm.p} rank={rank} kernel_dim={kb.dim} "
          f"singular={'n/a' if singular is None else str(singular).lower()}")
    if args.kernel:
        if args.kernel_out:
            save_kernel_text(_out_path(args.kernel_out), pm.p, kb.vectors)
            print(f"kernel basis written to {_out_path(args.kernel_out)}")
        else:
            sys.stdout.write(f"kernel {pm.p} {kb.dim}\n")
            for row in kb.vectors:
                sys.stdout.write(" ".join(str(int(x)) for x in row) + "\n")
    return 0


def _cmd_rho(args) -> int:
    v = _parse_vector(args)
    mu = _parse_fraction(args.mu, "--mu")
    law = StepLaw(mu)
    if args.estimate:
        est = collision_estimate_rho(v, law, args.prime, args.trials, args.seed)
        print(f"rho in [{est.lower:.6g}, {est.upper:.6g}] at 99% "
              f"(q_hat={est.q_hat:.6g}, modal_freq={est.modal_freq:.6g}, "
              f"trials={est.trials})")
        return 0
    try:
        mf = walk_distribution(v, law, args.prime, "exact")
    except WalkExactError as exc:
        raise UsageError(f"{exc} (pass --estimate for Monte Carlo bounds)") from exc
    print(f"rho = {_rho_string(mf)} = {float(mf.rho()):.10g}")
    print(f"argmax = {mf.argmax()}")
    print(f"support = {support_size(v, args.prime)}")
    if args.neighborhood:
        nb = mf.neighborhood()
        print(f"neighborhood ({len(nb)}): {' '.join(str(int(x)) for x in nb)}")
    if args.dump:
        save_pmf_text(_out_path(args.dump), mf.nonzero_items(), mf.exponent)
        print(f"pmf written to {_out_path(args.dump)}")
    return 0


def _cmd_lo_witness(args) -> int:
    v = _parse_vector(args)
    mu = _parse_fraction(args.mu, "--mu")
    law = StepLaw(mu)
    base = math.e if args.log_base == "e" else 2.0
    wit = find_lo_witness(v, law, args.prime, budget=args.budget, log_base=base)
    if wit is None:
        print(json.dumps({"witness": None,
                          "finding": "no witness within search caps — reportable"},
                         sort_keys=True))
        return 0
    ok = verify_witness(v, law, args.prime, wit)
    record = {
        "T": list(wit.indices),
        "w": list(wit.w),
        "N": list(wit.neighborhood),
        "exceptional": list(wit.exceptional),
        "D": wit.budget,
        "rho": f"{wit.rho.numerator}/{wit.rho.denominator}",
        "log_base": "e" if args.log_base == "e" else "2",
        "verified": bool(ok),
    }
    print(json.dumps(record, sort_keys=True))
    return 0


def _run_campaign(args, runner, name: str) -> int:
    try:
        cfg, warnings = parse_config_file(args.config)
    except ConfigError as exc:
        for problem in exc.errors:
            print(f"error: {problem}", file=sys.stderr)
        return 1
    for w in warnings:
        print(f"warning: {w}")
    result = runner(cfg, _out_path(args.out), threads=args.threads)
    print(f"{name} campaign written to {result.out_dir}")
    return 0


def _cmd_singprob(args) -> int:
    code = _run_campaign(args, run_singularity_campaign, "singularity")
    return code


def _cmd_kernel_survey(args) -> int:
    return _run_campaign(args, run_kernel_survey_campaign, "kernel-survey")


def _check_campaign_dir(path: Path) -> list[str]:
    problems = []
    manifest_path = path / "manifest.json"
    if not manifest_path.exists():
        return [f"{path}: missing manifest.json"]
    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        return [f"{manifest_path}: invalid JSON ({exc})"]
    for key, out in manifest.get("outputs", {}).items():
        if not Path(out).exists():
            problems.append(f"{path}: declared output {key} missing at {out}")
    jsonl = manifest.get("outputs", {}).get("trials")
    if jsonl and Path(jsonl).exists():
        count = 0
        with open(jsonl) as fh:
            for lineno, line in enumerate(fh, 1):
                try:
                    json.loads(line)
                except json.JSONDecodeError:
                    problems.append(f"{jsonl}:{lineno}: invalid JSON line")
                    break
                count += 1
        expect = manifest["config"]["trials"] * len(manifest["config"]["n_list"])
        if count != expect:
            problems.append(f"{jsonl}: {count} records, manifest implies {expect}")
    return problems


def _check_file(path: Path) -> tuple[str, list[str]]:
    """Returns (kind, problems)."""
    if path.name == "manifest.json" or path.suffix == ".json":
        try:
            json.loads(path.read_text())
            return "json", []
        except json.JSONDecodeError as exc:
            return "json", [f"{path}: invalid JSON ({exc})"]
    if path.suffix == ".jsonl":
        problems = []
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                try:
                    json.loads(line)
                except json.JSONDecodeError:
                    problems.append(f"{path}:{lineno}: invalid JSON line")
                    break
        return "jsonl", problems
    if path.suffix == ".csv":
        import csv as _csv

        with open(path, newline="") as fh:
            rows = list(_csv.reader(fh))
        if not rows:
            return "csv", [f"{path}: empty CSV"]
        width = len(rows[0])
        bad = [i for i, r in enumerate(rows) if len(r) != width]
        return "csv", ([f"{path}: ragged rows at {bad[:5]}"] if bad else [])
    head = path.read_bytes()[:16]
    text_head = head.decode("ascii", errors="replace")
    if head.startswith(b"BLOMAT1\n"):
        try:
            load_matrix(path)
            return "matrix-binary", []
        except FormatError as exc:
            return "matrix-binary", [str(exc)]
    if text_head.startswith("kernel "):
        try:
            load_kernel_text(path)
            return "kernel", []
        except FormatError as exc:
            return "kernel", [str(exc)]
    # try matrix text, then pmf
    try:
        load_matrix(path)
        return "matrix-text", []
    except (FormatError, ValueError):
        pass
    try:
        load_pmf_text(path)
        return "pmf", []
    except (FormatError, ValueError) as exc:
        return "unknown", [f"{path}: unrecognized format ({exc})"]


def _cmd_check(args) -> int:
    failed = False
    for target in args.paths:
        path = Path(target)
        if not path.exists():
            print(f"error: {path}: does not exist")
            failed = True
            continue
        if path.is_dir():
            problems = _check_campaign_dir(path)
            kind = "campaign"
        else:
            kind, problems = _check_file(path)
        if problems:
            failed = True
            for pr in problems:
                print(f"error: {pr}")
        else:
            print(f"ok: {path} ({kind})")
    return 1 if failed else 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bandlo",
        description="Random band matrices over finite fields: ensembles, exact "
                    "rank/kernel, Littlewood-Offord tools, and experiments.",
    )
    parser.add_argument("--version", action="version", version=f"bandlo {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="sample a band matrix and write it to a file")
    g.add_argument("--kind", choices=["general", "block", "periodic", "modified"],
                   required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--d", type=int, required=True)
    g.add_argument("--offband", default="zero",
                   help="zero | rademacher | uniform:a:b | constant:c (general kind)")
    g.add_argument("--alpha", type=float, default=None)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--out", required=True)
    g.add_argument("--binary", action="store_true")
    g.set_defaults(func=_cmd_gen)

    r = sub.add_parser("rank", help="exact rank / singularity of a matrix file")
    r.add_argument("matrix")
    mode = r.add_mutually_exclusive_group(required=True)
    mode.add_argument("--prime", type=int)
    mode.add_argument("--integer", action="store_true")
    r.add_argument("--kernel", action="store_true", help="dump the canonical kernel basis")
    r.add_argument("--kernel-out", default=None)
    r.set_defaults(func=_cmd_rank)

    rh = sub.add_parser("rho", help="exact concentration of a walk on Z_p")
    src = rh.add_mutually_exclusive_group(required=True)
    src.add_argument("--v", help="comma- or space-separated integers")
    src.add_argument("--file")
    rh.add_argument("--mu", required=True, help="exact fraction, e.g. 1/4")
    rh.add_argument("--prime", type=int, required=True)
    rh.add_argument("--neighborhood", action="store_true")
    rh.add_argument("--estimate", action="store_true",
                    help="Monte Carlo collision bounds instead of exact convolution")
    rh.add_argument("--trials", type=int, default=100000)
    rh.add_argument("--seed", type=int, default=0)
    rh.add_argument("--dump", default=None,
                    help="write the exact pmf (residue numerator exponent lines)")
    rh.set_defaults(func=_cmd_rho)

    lw = sub.add_parser("lo-witness", help="inverse Littlewood-Offord witness search")
    src = lw.add_mutually_exclusive_group(required=True)
    src.add_argument("--v")
    src.add_argument("--file")
    lw.add_argument("--mu", required=True)
    lw.add_argument("--prime", type=int, required=True)
    lw.add_argument("--budget", type=int, default=20000)
    lw.add_argument("--log-base", choices=["e", "2"], default="e")
    lw.set_defaults(func=_cmd_lo_witness)

    sp = sub.add_parser("singprob", help="singularity probability campaign")
    sp.add_argument("config")
    sp.add_argument("--out", required=True)
    sp.add_argument("--threads", type=int, default=1)
    sp.set_defaults(func=_cmd_singprob)

    ks = sub.add_parser("kernel-survey", help="kernel structure survey campaign")
    ks.add_argument("config")
    ks.add_argument("--out", required=True)
    ks.add_argument("--threads", type=int, default=1)
    ks.set_defaults(func=_cmd_kernel_survey)

    ck = sub.add_parser("check", help="validate output files against their schemas")
    ck.add_argument("paths", nargs="+")
    ck.set_defaults(func=_cmd_check)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; the contract says 1
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except (UsageError, ConfigError, LOPreconditionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, FormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except BudgetExhausted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failures
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
