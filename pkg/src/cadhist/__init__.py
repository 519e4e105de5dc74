"""Parse, normalize, validate, interpret, and evaluate parametric CAD
design histories written in a small FeatureScript-style language."""

from .emitter import emit_feature, emit_program
from .evaluate import EvalProtocol, MetricsReport, evaluate_sets
from .geometry import (
    InterpretError,
    Mesh,
    bbox_prompt,
    bounding_box,
    interpret,
    interpret_combined,
    mesh_volume,
)
from .jsonio import program_from_json, program_to_json
from .lexer import Dialect, ParseError
from .metrics import (
    EdgeParams,
    chamfer_distance,
    coverage,
    edge_chamfer_distance,
    invalidity_ratio,
    jensen_shannon_divergence,
    minimum_matching_distance,
    normal_consistency,
)
from .model import (
    Feature,
    OpKind,
    Program,
    dependency_graph,
    validate_structure,
)
from .normalize import (
    DEFAULT_PASS_ORDER,
    NormalizeError,
    PassConfig,
    NormalizeResult,
    ValidationResult,
    normalize,
    validate_equivalence,
)
from .parser import parse_program
from .sampling import PointCloud, sample_surface, unit_normalize

__version__ = "0.1.0"

__all__ = [
    "Dialect",
    "DEFAULT_PASS_ORDER",
    "EdgeParams",
    "EvalProtocol",
    "Feature",
    "InterpretError",
    "Mesh",
    "MetricsReport",
    "NormalizeError",
    "NormalizeResult",
    "OpKind",
    "ParseError",
    "PassConfig",
    "PointCloud",
    "Program",
    "ValidationResult",
    "bbox_prompt",
    "bounding_box",
    "chamfer_distance",
    "coverage",
    "dependency_graph",
    "edge_chamfer_distance",
    "emit_feature",
    "emit_program",
    "evaluate_sets",
    "interpret",
    "interpret_combined",
    "invalidity_ratio",
    "jensen_shannon_divergence",
    "mesh_volume",
    "minimum_matching_distance",
    "normal_consistency",
    "normalize",
    "parse_program",
    "program_from_json",
    "program_to_json",
    "sample_surface",
    "unit_normalize",
    "validate_equivalence",
    "validate_structure",
    "__version__",
]
