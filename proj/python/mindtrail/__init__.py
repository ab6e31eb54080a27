"""Python bindings for the mindtrail session engine."""

from ._core import (
    MindtrailError,
    Service,
    aggregate,
    count_syllables,
    pathways_delta,
    phase_timeline,
    replay,
    score_pathways,
    validate_export,
)

__all__ = [
    "MindtrailError",
    "Service",
    "aggregate",
    "count_syllables",
    "pathways_delta",
    "phase_timeline",
    "replay",
    "score_pathways",
    "validate_export",
]
