"""Declarative package knowledge: provided symbols, conflicts, load order."""

from __future__ import annotations

import enum
import json
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from types import MappingProxyType

SCHEMA_VERSION = 1


class SchemaError(ValueError):
    def __init__(self, message: str, line: int | None = None) -> None:
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


class DuplicatePackage(SchemaError):
    pass


class ConflictKind(str, enum.Enum):
    INCOMPATIBLE = "Incompatible"
    ORDER_SENSITIVE = "OrderSensitive"


class SymbolKind(str, enum.Enum):
    COMMAND = "command"
    ENVIRONMENT = "environment"


@dataclass(frozen=True)
class PackageRecord:
    name: str
    provides_commands: frozenset[str] = frozenset()
    provides_environments: frozenset[str] = frozenset()
    default_options: str | None = None
    notes: str = ""
    priority: int = 0
    # always-loaded records (the LaTeX kernel) are never suggested as fixes
    builtin: bool = False
    # packages this one loads itself, e.g. tikz loads xcolor
    loads: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("package name must be non-empty")
        for s in (*self.provides_commands, *self.provides_environments):
            if s.startswith("\\"):
                raise ValueError(f"symbol {s!r} of {self.name} must not start with a backslash")

    def provides(self, kind: SymbolKind | str, name: str) -> bool:
        pool = self.provides_commands if SymbolKind(kind) is SymbolKind.COMMAND else self.provides_environments
        return name in pool

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "priority": self.priority,
            "provides_commands": sorted(self.provides_commands),
            "provides_environments": sorted(self.provides_environments),
            "default_options": self.default_options,
            "notes": self.notes,
        }
        if self.builtin:
            d["builtin"] = True
        if self.loads:
            d["loads"] = list(self.loads)
        return d

    def usepackage_line(self) -> str:
        opts = f"[{self.default_options}]" if self.default_options else ""
        return f"\\usepackage{opts}{{{self.name}}}"


@dataclass(frozen=True)
class ConflictRule:
    a: str
    b: str
    kind: ConflictKind
    a_before_b: bool = False
    resolution_hint: str = ""

    def __post_init__(self) -> None:
        if self.a == self.b:
            raise ValueError("a conflict rule needs two distinct packages")

    def violated_by(self, loaded: list[str]) -> bool:
        if self.a not in loaded or self.b not in loaded:
            return False
        if self.kind is ConflictKind.INCOMPATIBLE:
            return True
        first_a, first_b = loaded.index(self.a), loaded.index(self.b)
        return (first_a > first_b) if self.a_before_b else (first_b > first_a)


@dataclass(frozen=True)
class PackageDb:
    records: Mapping[str, PackageRecord] = field(default_factory=dict)
    conflicts: tuple[ConflictRule, ...] = ()
    symbol_index: Mapping[tuple[SymbolKind, str], tuple[str, ...]] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "records", MappingProxyType(dict(self.records)))
        object.__setattr__(self, "conflicts", tuple(self.conflicts))
        index: dict[tuple[SymbolKind, str], list[str]] = {}
        for rec in self.records.values():
            for s in rec.provides_commands:
                index.setdefault((SymbolKind.COMMAND, s), []).append(rec.name)
            for s in rec.provides_environments:
                index.setdefault((SymbolKind.ENVIRONMENT, s), []).append(rec.name)
        ranked = {k: tuple(sorted(v, key=self._rank_key)) for k, v in index.items()}
        object.__setattr__(self, "symbol_index", MappingProxyType(ranked))

    def _rank_key(self, name: str) -> tuple[int, str]:
        return (-self.records[name].priority, name)

    def __contains__(self, name: object) -> bool:
        return name in self.records

    def __len__(self) -> int:
        return len(self.records)

    def get(self, name: str) -> PackageRecord | None:
        return self.records.get(name)

    def builtin_records(self) -> list[PackageRecord]:
        return [r for r in self.records.values() if r.builtin]

    def provider_of(self, kind: SymbolKind | str, name: str, *, include_builtin: bool = False) -> list[PackageRecord]:
        """Packages providing ``name``, highest priority first, ties alphabetical."""
        names = self.symbol_index.get((SymbolKind(kind), name), ())
        out = [self.records[n] for n in names]
        return out if include_builtin else [r for r in out if not r.builtin]

    def is_builtin(self, kind: SymbolKind | str, name: str) -> bool:
        return any(r.builtin for r in self.provider_of(kind, name, include_builtin=True))

    def closure(self, loaded: Iterable[str]) -> set[str]:
        """Loaded packages plus everything they load transitively."""
        seen: set[str] = set()
        todo = list(loaded)
        while todo:
            name = todo.pop()
            if name in seen:
                continue
            seen.add(name)
            rec = self.records.get(name)
            if rec:
                todo.extend(rec.loads)
        return seen

    def available(self, kind: SymbolKind | str, name: str, loaded: Iterable[str]) -> bool:
        """Whether ``name`` is defined given the loaded packages."""
        active = self.closure(loaded)
        return any(r.builtin or r.name in active for r in self.provider_of(kind, name, include_builtin=True))

    def all_symbols(self, kind: SymbolKind | str) -> set[str]:
        k = SymbolKind(kind)
        return {s for (sk, s) in self.symbol_index if sk is k}

    def conflicts_in(self, loaded: Iterable[str]) -> list[ConflictRule]:
        """Rules violated by the load list, in db order."""
        order = list(dict.fromkeys(loaded))
        return [c for c in self.conflicts if c.violated_by(order)]

    def to_dict(self) -> dict:
        packages = [rec.to_dict() for rec in self.records.values()]
        conflicts = [
            {"a": c.a, "b": c.b, "kind": c.kind.value, "a_before_b": c.a_before_b, "resolution_hint": c.resolution_hint}
            for c in self.conflicts
        ]
        return {"version": SCHEMA_VERSION, "packages": packages, "conflicts": conflicts}


def provider_of(db: PackageDb, kind: SymbolKind | str, name: str) -> list[PackageRecord]:
    return db.provider_of(kind, name)


def conflicts_in(db: PackageDb, loaded: Iterable[str]) -> list[ConflictRule]:
    return db.conflicts_in(loaded)


def _find_line(text: str, needle: str) -> int | None:
    i = text.find(needle)
    return text.count("\n", 0, i) + 1 if i >= 0 else None


def _str_list(value, what: str, text: str, anchor: str) -> list[str]:
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise SchemaError(f"{what} must be a list of strings", _find_line(text, anchor))
    return value


def loads_db(text: str) -> PackageDb:
    """Build a PackageDb from JSON text. An empty or whitespace-only text is an empty db."""
    if not text.strip():
        return PackageDb()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(exc.msg, exc.lineno) from None
    if not isinstance(data, dict):
        raise SchemaError("top level must be an object", 1)
    if data.get("version") != SCHEMA_VERSION:
        raise SchemaError(f"unsupported or missing version (expected {SCHEMA_VERSION})", _find_line(text, '"version"') or 1)
    records: dict[str, PackageRecord] = {}
    raw_packages = data.get("packages", [])
    if not isinstance(raw_packages, list):
        raise SchemaError("packages must be a list", _find_line(text, '"packages"'))
    for p in raw_packages:
        if not isinstance(p, dict) or not isinstance(p.get("name"), str) or not p["name"]:
            raise SchemaError("each package needs a non-empty string name", _find_line(text, json.dumps(p)[:20]))
        name = p["name"]
        anchor = f'"{name}"'
        if name in records:
            i = text.find(f'"name": {anchor}')
            i = text.find(f'"name": {anchor}', i + 1) if i >= 0 else -1
            raise DuplicatePackage(f"package {name!r} declared twice", text.count("\n", 0, i) + 1 if i >= 0 else None)
        priority = p.get("priority", 0)
        if not isinstance(priority, int) or isinstance(priority, bool):
            raise SchemaError(f"priority of {name!r} must be an integer", _find_line(text, anchor))
        default_options = p.get("default_options")
        if default_options is not None and not isinstance(default_options, str):
            raise SchemaError(f"default_options of {name!r} must be a string or null", _find_line(text, anchor))
        try:
            records[name] = PackageRecord(
                name=name,
                provides_commands=frozenset(_str_list(p.get("provides_commands", []), "provides_commands", text, anchor)),
                provides_environments=frozenset(_str_list(p.get("provides_environments", []), "provides_environments", text, anchor)),
                default_options=default_options,
                notes=str(p.get("notes", "")),
                priority=priority,
                builtin=bool(p.get("builtin", False)),
                loads=tuple(_str_list(p.get("loads", []), "loads", text, anchor)),
            )
        except ValueError as exc:
            if isinstance(exc, SchemaError):
                raise
            raise SchemaError(str(exc), _find_line(text, anchor)) from None
    conflicts: list[ConflictRule] = []
    raw_conflicts = data.get("conflicts", [])
    if not isinstance(raw_conflicts, list):
        raise SchemaError("conflicts must be a list", _find_line(text, '"conflicts"'))
    for c in raw_conflicts:
        line = _find_line(text, '"conflicts"')
        if not isinstance(c, dict) or not all(isinstance(c.get(k), str) for k in ("a", "b", "kind")):
            raise SchemaError("each conflict needs string fields a, b and kind", line)
        try:
            kind = ConflictKind(c["kind"])
            conflicts.append(
                ConflictRule(c["a"], c["b"], kind, bool(c.get("a_before_b", False)), str(c.get("resolution_hint", "")))
            )
        except ValueError as exc:
            raise SchemaError(f"conflict {c['a']}/{c['b']}: {exc}", line) from None
    return PackageDb(records, tuple(conflicts))


def load_db(source: str | Path | None = None) -> PackageDb:
    """Load a db file; ``None`` loads the database shipped with the package."""
    if source is None:
        return default_db()
    return loads_db(Path(source).read_text(encoding="utf-8"))


_DEFAULT: PackageDb | None = None


def default_db() -> PackageDb:
    global _DEFAULT
    if _DEFAULT is None:
        text = resources.files("texdoctor").joinpath("data/packages.json").read_text(encoding="utf-8")
        _DEFAULT = loads_db(text)
    return _DEFAULT
