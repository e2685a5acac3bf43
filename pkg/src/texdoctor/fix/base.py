"""Fix candidates and the provider interface."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, runtime_checkable

from ..latex import Ast, Patch
from ..localize import Diagnostic
from ..packagedb import PackageDb


@dataclass(frozen=True)
class FixCandidate:
    patch: Patch
    provider_id: str
    rule_id: str | None = None
    rationale: str = ""


@runtime_checkable
class SuggestionProvider(Protocol):
    """Produces fix candidates; implementations must not mutate their inputs."""

    id: str

    def suggest(self, diag: Diagnostic, ast: Ast, db: PackageDb, attempt: int) -> list[FixCandidate]: ...
