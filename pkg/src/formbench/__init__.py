"""Form-extraction benchmark toolkit.

Generate benchmarks whose ground truth is correct by
construction (seed -> discover -> reconcile -> reskin), export them in
text and image modalities, screen them, run models over them, and score
the output with structure-aware EM/ANLS.
"""

__version__ = "0.1.0"

from .docmodel import (  # noqa: F401
    DocumentModel, FieldKind, InvalidDocumentError, ModalityKind,
    ParseError, TextSpan, Widget, read_document, validate_document,
    write_document,
)
from .genpipe import (  # noqa: F401
    DiscoveryResponse, FieldMapping, GroundTruthRecord, SeedMap,
    estimate_max_chars, reconcile_mapping, reskin_document, seed_fill,
)
from .qa import ExclusionLedger, Finding, apply_ledger, screen_document  # noqa: F401
from .scoring import (  # noqa: F401
    DocumentScore, ScoreConfig, classify_compliance, inline_defs,
    match_arrays, normalize_value, score_document, unwrap_envelope,
)
