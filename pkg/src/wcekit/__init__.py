"""Word-level confidence estimation toolkit for speech translation.

Generates good/bad reference labels from alignments, extracts recognition-
and translation-side features, trains and applies a linear-chain CRF
labeler, projects and fuses confidence scores across languages, selects
features by backward elimination, evaluates with per-class F-measures and
threshold sweeps, and re-scores translation lattices.
"""

from .types import (
    CATEGORICAL,
    NUMERIC,
    ConfusionNetwork,
    EditType,
    FeatureTable,
    Label,
    NumericError,
    QuintupletRecord,
    Sentence,
    Side,
    Slot,
    Token,
    ValidationError,
    WordAlignment,
)
from .align import (
    EditPath,
    EditStep,
    MatchResources,
    TerConfig,
    align_ter_shift,
    align_wer,
    collapse_labels,
)

__version__ = "0.1.0"

__all__ = [
    "CATEGORICAL",
    "NUMERIC",
    "ConfusionNetwork",
    "EditPath",
    "EditStep",
    "EditType",
    "FeatureTable",
    "Label",
    "MatchResources",
    "NumericError",
    "QuintupletRecord",
    "Sentence",
    "Side",
    "Slot",
    "TerConfig",
    "Token",
    "ValidationError",
    "WordAlignment",
    "align_ter_shift",
    "align_wer",
    "collapse_labels",
    "__version__",
]
