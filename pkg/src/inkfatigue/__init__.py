"""Online-handwriting fatigue analysis.

Parse pen-tablet recordings, compute fatigue-sensitive kinematic and pressure
features, compare assessment sets with exact Wilcoxon signed-rank tests, and
summarize recovery. A deterministic synthetic-ink generator makes the whole
pipeline verifiable end to end.
"""

from .errors import (
    ConfigError,
    DuplicateError,
    EmptyInputError,
    FormatError,
    InkError,
    InsufficientDataError,
    RangeError,
    ShapeError,
    TooShortError,
)
from .features import (
    DEFAULT_CATALOG,
    PENDOWN_CATALOG,
    FeatureVector,
    extract_features,
    feature_table,
)
from .model import (
    AuxRecord,
    Category,
    InkSignal,
    Sample,
    SessionSet,
    SetId,
    StudyCorpus,
    TaskRecord,
    load_corpus,
    parse_task_file,
    serialize_task,
    write_corpus,
)
from .protocol import (
    RecoverySummary,
    canonical_set_pairs,
    jump_height,
    power_output,
    summarize_recovery,
    task_category,
)
from .stats import (
    Cell,
    ComparisonMatrix,
    MatrixRow,
    TestResult,
    bonferroni,
    build_matrix,
    compare_sets,
    default_rows,
    rank_sum_test,
    wilcoxon_signed_rank,
)
from .synth import Perturbation, SynthProfile, generate_corpus, generate_task

__version__ = "0.1.0"

__all__ = [
    "AuxRecord",
    "Category",
    "Cell",
    "ComparisonMatrix",
    "ConfigError",
    "DEFAULT_CATALOG",
    "DuplicateError",
    "EmptyInputError",
    "FeatureVector",
    "FormatError",
    "InkError",
    "InkSignal",
    "InsufficientDataError",
    "MatrixRow",
    "PENDOWN_CATALOG",
    "Perturbation",
    "RangeError",
    "RecoverySummary",
    "Sample",
    "SessionSet",
    "SetId",
    "ShapeError",
    "StudyCorpus",
    "SynthProfile",
    "TaskRecord",
    "TestResult",
    "TooShortError",
    "bonferroni",
    "build_matrix",
    "canonical_set_pairs",
    "compare_sets",
    "default_rows",
    "extract_features",
    "feature_table",
    "generate_corpus",
    "generate_task",
    "jump_height",
    "load_corpus",
    "parse_task_file",
    "power_output",
    "rank_sum_test",
    "serialize_task",
    "summarize_recovery",
    "task_category",
    "wilcoxon_signed_rank",
    "write_corpus",
]
