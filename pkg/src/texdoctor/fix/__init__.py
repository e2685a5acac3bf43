"""Fix suggestion and validated repair."""

from .base import FixCandidate, SuggestionProvider
from .engine import (
    DocumentFix, Reason, RepairResult, RepairStatus, Validation, fix_document, repair,
    static_diagnostics, validate,
)
from .remote import RemoteConfig, RemoteError, RemoteProvider
from .rules import RuleProvider, suggest_rule_based

__all__ = [
    "DocumentFix", "FixCandidate", "Reason", "RemoteConfig", "RemoteError", "RemoteProvider",
    "RepairResult", "RepairStatus", "RuleProvider", "SuggestionProvider", "Validation",
    "fix_document", "repair", "static_diagnostics", "suggest_rule_based", "validate",
]
