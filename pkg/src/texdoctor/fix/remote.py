"""Optional suggestion provider backed by an HTTP endpoint.

The endpoint receives a JSON request describing the diagnostic and a window
of source text and answers with edits in document offsets. Every returned
candidate goes through the same validation as rule-based ones.
"""

from __future__ import annotations

import json
import logging
import os
import threading
import urllib.error
import urllib.request
from dataclasses import dataclass

from ..latex import Ast, Edit, Patch, PatchError, SourceDocument
from ..localize import Diagnostic
from ..packagedb import PackageDb
from .base import FixCandidate

log = logging.getLogger(__name__)

PROTOCOL_VERSION = 1
WINDOW_LINES = 30


class RemoteError(RuntimeError):
    pass


@dataclass
class RemoteConfig:
    url: str | None = None
    token_env: str = "TEXDOCTOR_REMOTE_TOKEN"
    timeout: float = 20.0
    retries: int = 1
    max_in_flight: int = 4
    enabled: bool = False

    @classmethod
    def from_dict(cls, d: dict) -> RemoteConfig:
        known = {k: d[k] for k in cls.__dataclass_fields__ if k in d}
        return cls(**known)


def build_request(diag: Diagnostic, ast: Ast, db: PackageDb, attempt: int) -> dict:
    doc = ast.source
    line = diag.line
    first = max(1, line - WINDOW_LINES)
    last = min(doc.line_count, line + WINDOW_LINES)
    start = doc.line_bounds(first)[0]
    end = doc.line_bounds(last)[1]
    names = [p for p in diag.details.get("providers", "").split(",") if p]
    names += [p.name for p in ast.packages]
    excerpt = {n: db.records[n].to_dict() for n in dict.fromkeys(names) if n in db}
    return {
        "v": PROTOCOL_VERSION,
        "attempt": attempt,
        "diagnostic": diag.to_dict() | {"details": dict(diag.details)},
        "source_window": {"text": doc.text[start:end], "start_offset": start, "start_line": first},
        "db_excerpt": excerpt,
    }


def parse_response(payload: dict, doc: SourceDocument, provider_id: str) -> list[FixCandidate]:
    """Turn a response body into candidates; malformed entries raise RemoteError."""
    items = payload.get("candidates")
    if items is None:
        items = [payload]
    out = []
    for item in items:
        try:
            edits = tuple(
                Edit.replace(doc, int(e["start"]), int(e["end"]), str(e["replacement"])) for e in item["edits"]
            )
            patch = Patch(edits, str(item.get("rationale") or "remote suggestion"))
            patch.check(len(doc.text))
        except (KeyError, TypeError, ValueError, PatchError) as exc:
            raise RemoteError(f"malformed suggestion: {exc}") from exc
        if edits:
            out.append(FixCandidate(patch, provider_id, item.get("rule_id"), str(item.get("rationale", ""))))
    return out


class RemoteProvider:
    """Suggestion provider posting requests to ``config.url``."""

    id = "remote"

    def __init__(self, config: RemoteConfig) -> None:
        self.config = config
        self._slots = threading.BoundedSemaphore(max(1, config.max_in_flight))

    def _post(self, body: bytes) -> dict:
        headers = {"Content-Type": "application/json"}
        token = os.environ.get(self.config.token_env)
        if token:
            headers["Authorization"] = f"Bearer {token}"
        req = urllib.request.Request(self.config.url, data=body, headers=headers, method="POST")
        with urllib.request.urlopen(req, timeout=self.config.timeout) as resp:
            return json.loads(resp.read().decode("utf-8"))

    def suggest(self, diag: Diagnostic, ast: Ast, db: PackageDb, attempt: int) -> list[FixCandidate]:
        if not self.config.enabled or not self.config.url:
            return []
        body = json.dumps(build_request(diag, ast, db, attempt)).encode("utf-8")
        last: Exception | None = None
        with self._slots:
            for _ in range(1 + max(0, self.config.retries)):
                try:
                    payload = self._post(body)
                except (urllib.error.URLError, TimeoutError, OSError, json.JSONDecodeError) as exc:
                    last = exc
                    log.debug("remote provider failed: %s", exc)
                    continue
                return parse_response(payload, ast.source, self.id)
        raise RemoteError(f"remote provider unavailable: {last}")
