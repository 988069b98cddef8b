"""qualbn: qualitative-behaviour toolkit for discrete Bayesian networks."""

from .errors import (
    ImpossibleEvidenceError,
    NetworkFormatError,
    OracleTooLargeError,
    QualbnError,
    StructuralError,
    SuiteBindError,
    SuiteParseError,
)
from .model import (
    Deterministic,
    ExplicitCpt,
    Network,
    NodeDef,
    NoisyOr,
    Scenario,
    Violation,
    expand_local,
    networks_equivalent,
    topological_order,
    validate_network,
    validate_scenario,
)
from .inference import (
    Factor,
    Posterior,
    all_marginals,
    d_separated,
    d_separated_sets,
    joint_enumerate,
    query,
)
from .suite import (
    AssertionSuite,
    BoundSuite,
    bind_suite,
    parse_suite,
    serialize_suite,
)
from .checker import (
    ArcSignResult,
    CheckReport,
    ComparisonReport,
    PriorExport,
    check,
    compare,
    derive_signs,
    export_prior,
)
from .native_format import read_native, write_native
from .xdsl_format import read_xdsl

__version__ = "0.1.0"

__all__ = [
    "ArcSignResult",
    "AssertionSuite",
    "BoundSuite",
    "CheckReport",
    "ComparisonReport",
    "Deterministic",
    "ExplicitCpt",
    "Factor",
    "ImpossibleEvidenceError",
    "Network",
    "NetworkFormatError",
    "NodeDef",
    "NoisyOr",
    "OracleTooLargeError",
    "Posterior",
    "PriorExport",
    "QualbnError",
    "Scenario",
    "StructuralError",
    "SuiteBindError",
    "SuiteParseError",
    "Violation",
    "all_marginals",
    "bind_suite",
    "check",
    "compare",
    "d_separated",
    "d_separated_sets",
    "derive_signs",
    "expand_local",
    "export_prior",
    "joint_enumerate",
    "networks_equivalent",
    "parse_suite",
    "query",
    "read_native",
    "read_xdsl",
    "serialize_suite",
    "topological_order",
    "validate_network",
    "validate_scenario",
    "write_native",
]
