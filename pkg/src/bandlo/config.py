"""Campaign configuration files.

A flat, typed key=value format (INI sections) mirroring ExperimentConfig:

    [profile]
    kind = periodic
    alpha = 3/4
    # d_list = 30 42 52 62        (optional; default is ceil(n^alpha))
    # offband = uniform:-2:2      (general kind only)

    [constants]
    rho = 1/2
    tau = 1/4
    mu = 1/4
    K = 8

    [run]
    n_list = 96 144 192 240
    trials = 200
    master_seed = 1
    prime_policy = choose_prime    # fixed | choose_prime | integer
    prime_cap = 1048576
    # prime = 101                  (fixed policy)
    I_policy = center              # center | uniform | fixed
    # I_fixed = 0

Unknown keys are hard errors: a silent typo in a constant would corrupt
the science. Rational constants are exact strings like 1/4 — decimal
points are rejected.
"""

from __future__ import annotations

import configparser
from fractions import Fraction
from pathlib import Path

from .ensembles import OffbandLaw
from .experiments import ExperimentConfig

__all__ = ["ConfigError", "parse_config_file", "config_to_dict"]

_SCHEMA = {
    "profile": {"kind", "alpha", "d_list", "offband"},
    "constants": {"rho", "tau", "mu", "k"},
    "run": {
        "n_list", "trials", "master_seed", "prime_policy", "prime",
        "prime_cap", "i_policy", "i_fixed", "dense_threshold",
    },
}


class ConfigError(ValueError):
    """Carries the exhaustive list of configuration problems."""

    def __init__(self, errors: list[str]):
        super().__init__("; ".join(errors))
        self.errors = errors


def _exact_fraction(text: str, key: str, errors: list[str]) -> Fraction | None:
    if "." in text:
        errors.append(f"{key}: use an exact fraction like 1/4, not a decimal ({text!r})")
        return None
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        errors.append(f"{key}: cannot parse fraction {text!r}")
        return None


def _int_list(text: str, key: str, errors: list[str]) -> tuple[int, ...] | None:
    try:
        return tuple(int(tok) for tok in text.replace(",", " ").split())
    except ValueError:
        errors.append(f"{key}: expected integers, got {text!r}")
        return None


def _parse_offband(text: str, errors: list[str]) -> OffbandLaw:
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
    errors.append(
        f"offband: expected zero | rademacher | uniform:a:b | constant:c, got {text!r}")
    return OffbandLaw.zero()


def parse_config_file(path: str | Path) -> tuple[ExperimentConfig, list[str]]:
    """Parse and validate; returns (config, warnings) or raises ConfigError
    with every problem listed."""
    parser = configparser.ConfigParser(interpolation=None)
    read = parser.read(path)
    errors: list[str] = []
    if not read:
        raise ConfigError([f"cannot read config file {path}"])

    for section in parser.sections():
        if section not in _SCHEMA:
            errors.append(f"unknown section [{section}]")
            continue
        for key in parser[section]:
            if key not in _SCHEMA[section]:
                errors.append(f"unknown key {key!r} in [{section}]")

    def get(section: str, key: str, default: str | None = None) -> str | None:
        return parser.get(section, key, fallback=default)

    kind = get("profile", "kind", "general")
    alpha = _exact_fraction(get("profile", "alpha", "3/4"), "alpha", errors)
    d_list_text = get("profile", "d_list")
    d_list = _int_list(d_list_text, "d_list", errors) if d_list_text else None
    offband = _parse_offband(get("profile", "offband", "zero"), errors)

    rho = _exact_fraction(get("constants", "rho", "1/2"), "rho", errors)
    tau = _exact_fraction(get("constants", "tau", "1/4"), "tau", errors)
    mu = _exact_fraction(get("constants", "mu", "1/4"), "mu", errors)
    try:
        k_support = int(get("constants", "k", "8"))
    except ValueError:
        errors.append("K: expected an integer")
        k_support = 8

    n_list_text = get("run", "n_list")
    if n_list_text is None:
        errors.append("missing required key n_list in [run]")
        n_list = None
    else:
        n_list = _int_list(n_list_text, "n_list", errors)
    trials_text = get("run", "trials")
    if trials_text is None:
        errors.append("missing required key trials in [run]")
        trials = 0
    else:
        try:
            trials = int(trials_text)
        except ValueError:
            errors.append(f"trials: expected an integer, got {trials_text!r}")
            trials = 0
    try:
        master_seed = int(get("run", "master_seed", "0"))
    except ValueError:
        errors.append("master_seed: expected an integer")
        master_seed = 0

    policy_raw = get("run", "prime_policy", "choose_prime")
    policy_map = {"fixed": "fixed", "choose_prime": "choose", "integer": "integer"}
    if policy_raw not in policy_map:
        errors.append(f"prime_policy: expected fixed|choose_prime|integer, got {policy_raw!r}")
        policy = "choose"
    else:
        policy = policy_map[policy_raw]
    prime_text = get("run", "prime")
    prime_fixed = None
    if prime_text is not None:
        try:
            prime_fixed = int(prime_text)
        except ValueError:
            errors.append(f"prime: expected an integer, got {prime_text!r}")
    try:
        prime_cap = int(get("run", "prime_cap", str(1 << 20)))
    except ValueError:
        errors.append("prime_cap: expected an integer")
        prime_cap = 1 << 20
    i_policy = get("run", "i_policy", "center")
    i_fixed_text = get("run", "i_fixed")
    i_fixed = None
    if i_fixed_text is not None:
        try:
            i_fixed = int(i_fixed_text)
        except ValueError:
            errors.append(f"I_fixed: expected an integer, got {i_fixed_text!r}")
    try:
        dense_threshold = int(get("run", "dense_threshold", str(1 << 22)))
    except ValueError:
        errors.append("dense_threshold: expected an integer")
        dense_threshold = 1 << 22

    if errors:
        raise ConfigError(errors)

    cfg = ExperimentConfig(
        kind=kind,
        offband=offband,
        alpha=float(alpha),
        n_list=n_list,
        d_list=d_list,
        rho=float(rho),
        tau=float(tau),
        mu=mu,
        k_support=k_support,
        prime_policy=policy,
        prime_fixed=prime_fixed,
        prime_cap=prime_cap,
        trials=trials,
        master_seed=master_seed,
        i_policy=i_policy,
        i_fixed=i_fixed,
        dense_threshold=dense_threshold,
    )
    problems = cfg.validate()
    if problems:
        raise ConfigError(problems)
    return cfg, cfg.warnings()


def config_to_dict(cfg: ExperimentConfig) -> dict:
    """Exact, manifest-ready rendering (fractions as strings)."""
    return {
        "kind": cfg.kind,
        "offband": {"kind": cfg.offband.kind, "a": cfg.offband.a,
                    "b": cfg.offband.b, "c": cfg.offband.c},
        "alpha": repr(cfg.alpha),
        "n_list": list(cfg.n_list),
        "d_list": list(cfg.d_list) if cfg.d_list is not None else None,
        "rho": repr(cfg.rho),
        "tau": repr(cfg.tau),
        "mu": str(cfg.mu),
        "K": cfg.k_support,
        "prime_policy": cfg.prime_policy,
        "prime_fixed": cfg.prime_fixed,
        "prime_cap": cfg.prime_cap,
        "trials": cfg.trials,
        "master_seed": cfg.master_seed,
        "I_policy": cfg.i_policy,
        "I_fixed": cfg.i_fixed,
        "dense_threshold": cfg.dense_threshold,
    }
