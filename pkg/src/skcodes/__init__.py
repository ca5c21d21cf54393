"""
Secret- and private-key agreement from correlated binary sources by
syndrome (Slepian-Wolf) coding with small linear codes and LDPC codes.
"""

from .errors import CapacityError, DimensionError, DomainError, ParameterError, RankError, SkCodesError
from .evalbench import (
    AuditReport,
    KberResult,
    emit_report,
    estimate_kber,
    exact_secrecy_audit,
    kber_sweep,
    monotonicity_check,
)
from .gf2 import BitWord, Gf2Matrix, independent_rows, mat_vec_mul, to_systematic, xor_add
from .keygen import KeyOutcome, Transcript, run_model1, run_model2, run_model3, run_model4
from .ldpc import (
    HALF_RATE_IRREGULAR,
    DegreeDistribution,
    LdpcCode,
    bp_syndrome_decode,
    build_irregular_ldpc,
    build_regular_ldpc,
    parse_alist,
    read_alist,
    write_alist,
)
from .lincode import (
    LinearCode,
    coset_index,
    coset_leader_table,
    exact_ml_error_prob,
    make_systematic_code,
    ml_decode_noise,
    named_code,
    sample_random_code,
    sw_reconstruct,
)
from .sources import (
    Model1,
    Model2,
    Model3,
    Model4,
    SourceModel,
    TreeTopology,
    binary_entropy,
    capacity,
    exact_joint_pmf,
    make_model,
    sample_sequences,
)
from .typeset import RegularPartition, build_regular_partition, empirical_type, is_typical, prop1_bound

__version__ = "0.1.0"

__all__ = [
    "CapacityError",
    "DimensionError",
    "DomainError",
    "ParameterError",
    "RankError",
    "SkCodesError",
    "AuditReport",
    "KberResult",
    "emit_report",
    "estimate_kber",
    "exact_secrecy_audit",
    "kber_sweep",
    "monotonicity_check",
    "BitWord",
    "Gf2Matrix",
    "independent_rows",
    "mat_vec_mul",
    "to_systematic",
    "xor_add",
    "KeyOutcome",
    "Transcript",
    "run_model1",
    "run_model2",
    "run_model3",
    "run_model4",
    "HALF_RATE_IRREGULAR",
    "DegreeDistribution",
    "LdpcCode",
    "bp_syndrome_decode",
    "build_irregular_ldpc",
    "build_regular_ldpc",
    "parse_alist",
    "read_alist",
    "write_alist",
    "LinearCode",
    "coset_index",
    "coset_leader_table",
    "exact_ml_error_prob",
    "make_systematic_code",
    "ml_decode_noise",
    "named_code",
    "sample_random_code",
    "sw_reconstruct",
    "Model1",
    "Model2",
    "Model3",
    "Model4",
    "SourceModel",
    "TreeTopology",
    "binary_entropy",
    "capacity",
    "exact_joint_pmf",
    "make_model",
    "sample_sequences",
    "RegularPartition",
    "build_regular_partition",
    "empirical_type",
    "is_typical",
    "prop1_bound",
    "__version__",
]
