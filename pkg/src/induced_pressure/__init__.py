"""Induced topological pressure for locally constant potentials on subshifts of finite type."""
from .errors import (
    CapExceededError,
    ConvergenceError,
    InducedPressureError,
    NotIrreducibleError,
    NotMixingError,
    ValidationError,
)
from .induced import (
    BowenFunction,
    DefinitionalScan,
    InducedProblem,
    PartitionSumReport,
    RDiagnosticReport,
    RootResult,
    bs_dimension,
    definitional_scan,
    induced_pressure_definitional,
    induced_pressure_root,
    p_partition_sum,
    partition_sums,
    q_partition_sum,
    r_diagnostic,
    solve_bowen,
)
from .measures import (
    EquilibriumReport,
    GibbsBands,
    MarkovMeasure,
    VariationalResult,
    equilibrium_check,
    gibbs_constant_estimate,
    gibbs_measure,
    integrate,
    markov_entropy,
    markov_measure,
    pressure_quotient,
    variational_search,
)
from .potentials import (
    LocallyConstantPotential,
    birkhoff_sum,
    lift,
    max_value,
    min_value,
    recode_to_memory2,
    sup_norm,
)
from .pressure import (
    SpectralData,
    TransferMatrix,
    build_transfer_matrix,
    perron_eigendata,
    pressure_definitional,
    pressure_spectral,
)
from .sft import Sft, count_words, enumerate_words, is_irreducible, is_mixing, period, primitivity_exponent

__version__ = "0.1.0"
