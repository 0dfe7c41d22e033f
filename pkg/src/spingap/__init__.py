"""spingap: spectral-gap laboratory for Metropolis samplers on mean-field spin models.

Three model families (a one-coordinate warm-up chain, the mean-field
Ising model, and the mean-field Blume-Emery-Griffiths model), their
naive and orbit-jump Metropolis chains, exact class-space reductions,
spectral/conductance analysis, trajectory samplers, and verifiers that
confront the mixing theorems with exact computation.
"""

from .models import (
    AlphabetError,
    ClassTable,
    EnergyClass,
    ModelSpec,
    OddSizeError,
    beg,
    beg_row_log_profile,
    class_of,
    class_table,
    enumerate_beg_classes,
    enumerate_states,
    ising,
    log_weight,
    magnetization,
    quadrupole,
    warmup,
)
from .kernels import (
    BirthDeathChain,
    FiniteKernel,
    Partition,
    beg_lumped,
    beg_lumped_tabulated,
    beg_rate_discrepancies,
    equi_energy_proposal,
    export_kernel_text,
    ising_lumped_bd,
    lumped_projection,
    metropolis_chain,
    metropolize,
    partition_by,
    restriction,
    signed_lumped_chain,
    single_flip_proposal,
    small_world_proposal,
    unsigned_class_partition,
    warmup_block_partition,
)
from .spectral import (
    AsymptoticVariance,
    BoundEvaluation,
    Spectrum,
    SpectralSummary,
    avar_spectral,
    bd_path_bound,
    cheeger_interval,
    conductance_exact,
    cut_bottleneck_log,
    decomposition_bound,
    gap,
    gershgorin_bound,
    interval_conductance,
    lazy_mixture_bound,
    spectral_gap,
    spectral_summary,
    spectrum,
    tv_bound,
)
from .sampling import (
    RunConfig,
    RunStats,
    Sampler,
    batch_means_avar,
    bose_einstein_sample,
    cost_profile,
    run_estimate,
    sample_uniform_class,
    step,
)
from .verify import (
    BoundReport,
    FitResult,
    beg_unimodality_scan,
    ising_fast_bound,
    ising_profile_scan,
    is_unimodal,
    ols_fit,
    rate_function,
    rate_function_argmin,
    scaled_params,
    scaled_params_consistent,
    signed_containment,
    verify_beg_fast,
    verify_beg_slow,
    verify_ising_fast,
    verify_ising_slow,
    verify_scaled_ising,
    verify_warmup,
)

__version__ = "0.1.0"
