"""Shared obligation/verdict status codes."""

from __future__ import annotations

from enum import Enum

from . import reasoning


class ObligationStatus(str, Enum):
    PROVED = "Proved"
    FAILED = "Failed"
    UNKNOWN = "Unknown"


def status_of_verdict(verdict: reasoning.EntailmentVerdict) -> ObligationStatus:
    if isinstance(verdict, reasoning.Entailed):
        return ObligationStatus.PROVED
    if isinstance(verdict, reasoning.NotEntailed):
        return ObligationStatus.FAILED
    return ObligationStatus.UNKNOWN
