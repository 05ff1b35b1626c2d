"""Verdicts, witnesses and per-run statistics shared by all engines."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any

from .cnf import Clause


class Verdict(enum.IntEnum):
    SAFE = 0
    UNSAFE = 1
    UNKNOWN = 2


@dataclass
class Witness:
    """Input stimulus replaying a counterexample.

    ``inputs[t]`` drives frame ``t``; Bad holds at the last frame.  ``init``
    fixes the latches left unconstrained by the reset (``None`` when all are).
    """

    inputs: list[tuple[bool, ...]]
    init: tuple[bool, ...] | None = None

    @property
    def length(self) -> int:
        """Number of transitions before the bad frame."""
        return len(self.inputs) - 1

    def to_text(self) -> str:
        lines = ["1"]
        if self.init is not None:
            lines.append("init " + "".join("1" if b else "0" for b in self.init))
        lines += ["".join("1" if b else "0" for b in vec) for vec in self.inputs]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Witness":
        lines = text.splitlines()
        if not lines or lines[0].strip() != "1":
            raise ValueError("witness must start with a line '1'")
        init = None
        body = lines[1:]
        if body and body[0].startswith("init"):
            init = tuple(ch == "1" for ch in body[0][4:].strip())
            body = body[1:]
        return cls([tuple(ch == "1" for ch in ln.strip()) for ln in body], init)


@dataclass
class CheckResult:
    verdict: Verdict
    engine: str
    invariant: list[Clause] | None = None
    witness: Witness | None = None
    depth: int | None = None  # frames at convergence, k for kind, cex length for UNSAFE
    queries: int = 0
    seconds: float = 0.0
    rows: list[dict[str, Any]] = field(default_factory=list)  # per-iteration stats
    extra: dict[str, Any] = field(default_factory=dict)

    @property
    def safe(self) -> bool:
        return self.verdict is Verdict.SAFE

    @property
    def unsafe(self) -> bool:
        return self.verdict is Verdict.UNSAFE
