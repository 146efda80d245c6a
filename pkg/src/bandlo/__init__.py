"""bandlo: random band matrices over finite fields, exactly.

Sampling of band matrix ensembles, exact rank/kernel computations over
F_p (band-aware) and over Z (CRT), Littlewood-Offord walk machinery with
an inverse witness finder, and reproducible Monte Carlo experiment
campaigns probing singularity decay and kernel-vector structure.
"""

from ._version import __version__
from .ensembles import (
    BandMeta,
    BandProfile,
    IntegerMatrix,
    IntervalPartition,
    OffbandLaw,
    RowContext,
    diagonal_block,
    extract_comparison_matrix,
    lower_block,
    partition_intervals,
    row_context,
    sample_matrix,
    upper_block,
    zero_row,
)
from .experiments import (
    CaseLabel,
    ExperimentConfig,
    ScalingFit,
    SingularitySummary,
    TrialRecord,
    classify_blocks,
    enumerate_singularity_probability,
    estimate_singularity_probability,
    fit_scaling,
    fit_tail_decay,
    kernel_structure_survey,
    singular_row_span_check,
)
from .fieldcore import PrimeModulus, choose_prime, is_prime, mod_inv, next_prime, prev_prime
from .lotools import (
    BudgetExhausted,
    FourierLemmaResult,
    LOPreconditionError,
    LOWitness,
    MassFunction,
    RhoEstimate,
    StepLaw,
    WalkExactError,
    check_fourier_lemma,
    collision_estimate_rho,
    find_lo_witness,
    neighborhood,
    rho_mu,
    support_size,
    verify_witness,
    walk_distribution,
)
from .rankengine import (
    FpMatrix,
    KernelBasis,
    is_singular_fp,
    is_singular_Z,
    kernel_fp,
    rank_fp,
    reduce_mod,
)
from .campaign import run_kernel_survey_campaign, run_singularity_campaign

__all__ = [name for name in dir() if not name.startswith("_")]
