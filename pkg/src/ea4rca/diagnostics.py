"""Diagnostic records shared by the validator, parser and generator."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import List, Sequence, Tuple


class Severity(enum.Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class Diagnostic:
    """One finding against a design, anchored to a config path.

    ``path`` uses the dotted/indexed form of the config layout, rooted at
    ``$``, e.g. ``$.pus[2].psts[0].dacs[1].mode``.
    """

    code: str
    path: str
    message: str
    severity: Severity = Severity.ERROR

    def render(self) -> str:
        return f"{self.code} {self.path}: {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    diagnostics: Tuple[Diagnostic, ...] = ()

    @property
    def ok(self) -> bool:
        return not any(d.severity is Severity.ERROR for d in self.diagnostics)

    @property
    def errors(self) -> Tuple[Diagnostic, ...]:
        return tuple(d for d in self.diagnostics if d.severity is Severity.ERROR)

    @property
    def warnings(self) -> Tuple[Diagnostic, ...]:
        return tuple(d for d in self.diagnostics if d.severity is Severity.WARNING)

    def render(self) -> str:
        if not self.diagnostics:
            return "ok: no findings"
        return "\n".join(d.render() for d in self.diagnostics)


def rooted_path(path: str) -> str:
    """Anchor a dotted path at the document root marker ``$``."""

    if not path:
        return "$"
    if path.startswith("$"):
        return path
    return f"$.{path}"


class DiagnosticCollector:
    """Accumulates findings while a checking pass walks a design."""

    def __init__(self) -> None:
        self._items: List[Diagnostic] = []

    def error(self, code: str, path: str, message: str) -> None:
        self._items.append(Diagnostic(code, rooted_path(path), message, Severity.ERROR))

    def warning(self, code: str, path: str, message: str) -> None:
        self._items.append(Diagnostic(code, rooted_path(path), message, Severity.WARNING))

    def extend(self, items: Sequence[Diagnostic]) -> None:
        self._items.extend(items)

    def report(self) -> ValidationReport:
        return ValidationReport(tuple(self._items))
