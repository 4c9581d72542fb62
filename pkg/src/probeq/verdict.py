from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple

Word = Tuple[str, ...]

POSITIVE = {
    "zero",
    "probably-zero",
    "equivalent",
    "probably-equivalent",
    "equal",
    "probably-equal",
}
NEGATIVE = {"nonzero", "inequivalent", "unequal"}


@dataclass(frozen=True)
class Verdict:
    """Outcome of a zeroness / equivalence / identity test.

    ``kind`` is one of the strings in ``POSITIVE`` or ``NEGATIVE``. Negative
    verdicts are always certain; ``witness`` (and ``point`` for cost
    automata) is set when the algorithm produces one.
    """

    kind: str
    witness: Optional[Word] = None
    point: Optional[tuple] = None
    seed: Optional[int] = None
    trials: Optional[int] = None
    info: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.kind not in POSITIVE | NEGATIVE:
            raise ValueError(f"unknown verdict kind {self.kind!r}")

    @property
    def positive(self) -> bool:
        return self.kind in POSITIVE

    @property
    def probabilistic(self) -> bool:
        return self.kind.startswith("probably-")
