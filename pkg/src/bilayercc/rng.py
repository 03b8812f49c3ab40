"""Deterministic seed derivation for reproducible (parallel) simulation.

Every random decision in the library is drawn from a generator obtained
through a `Seed`: a 64-bit master value plus a path of labels naming the
sub-task ("graph", ("pt", 3, "t", 17), ...).  Equal (master, path) pairs
always produce the same Philox stream, so workers can rebuild the stream
for any sub-task without coordination and results do not depend on how
work is scheduled.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1


def _label_word(label) -> int:
    if isinstance(label, (int, np.integer)):
        return int(label) & _MASK64
    if isinstance(label, str):
        # stable across platforms and Python hash randomization
        return int.from_bytes(hashlib.sha256(label.encode("utf-8")).digest()[:8], "little")
    raise TypeError(f"seed path label must be int or str, got {type(label).__name__}")


@dataclass(frozen=True)
class Seed:
    """Master seed plus a derivation path of int/str labels."""

    master: int
    path: tuple = ()

    def child(self, *labels) -> "Seed":
        return Seed(self.master, self.path + tuple(labels))

    def generator(self) -> np.random.Generator:
        """Counter-based generator keyed by (master, path)."""
        entropy = [int(self.master) & _MASK64] + [_label_word(x) for x in self.path]
        return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def as_seed(seed) -> Seed:
    """Accept a Seed or a bare integer master seed."""
    if isinstance(seed, Seed):
        return seed
    return Seed(int(seed))
