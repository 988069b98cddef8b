"""Exception types shared across the toolkit.

All deliberate failure modes derive from :class:`QualbnError` so callers
(CLI, server) can separate controlled errors from genuine bugs.
"""

from __future__ import annotations

from dataclasses import dataclass


class QualbnError(Exception):
    """Base class for all controlled errors raised by qualbn."""


class StructuralError(QualbnError):
    """A network, node or query is structurally unusable (cycle, bad reference,
    malformed local structure, non-positive ESS, ...)."""


class ImpossibleEvidenceError(QualbnError):
    """The requested evidence set has joint probability zero."""

    def __init__(self, evidence: dict[str, str]):
        self.evidence = dict(evidence)
        items = ", ".join(f"{n}={s}" for n, s in sorted(self.evidence.items()))
        super().__init__(f"impossible evidence: {{{items}}} has probability 0")


class OracleTooLargeError(QualbnError):
    """The joint state space exceeds the enumeration oracle's cap."""


@dataclass(frozen=True)
class ParseIssue:
    """One diagnostic from a text parser, anchored to a source location."""

    line: int
    column: int
    message: str

    def __str__(self) -> str:
        return f"line {self.line}, col {self.column}: {self.message}"


class SuiteParseError(QualbnError):
    """Assertion-suite text failed to parse; carries every diagnostic found."""

    def __init__(self, issues: list[ParseIssue]):
        self.issues = tuple(issues)
        super().__init__(
            "suite parse failed:\n" + "\n".join(str(i) for i in self.issues)
        )


class SuiteBindError(QualbnError):
    """Suite references entities that do not exist in the target network."""

    def __init__(self, problems: list[str]):
        self.problems = tuple(problems)
        super().__init__("suite does not bind:\n" + "\n".join(self.problems))


class NetworkFormatError(QualbnError):
    """A model file failed to parse or failed validation; carries every issue."""

    def __init__(self, issues: list[ParseIssue]):
        self.issues = tuple(issues)
        super().__init__(
            "model file rejected:\n" + "\n".join(str(i) for i in self.issues)
        )
