"""Small numerical utilities shared across modules."""

from __future__ import annotations

import math

import numpy as np


def sinpi(z):
    """``sin(pi z)``, exactly zero at integers."""
    z = np.asarray(z, dtype=float)
    k = np.round(z)
    return np.where(np.mod(k, 2) == 0, 1.0, -1.0) * np.sin(math.pi * (z - k))


def cispi(z):
    """``exp(-i pi z)``, exactly real at integers."""
    z = np.asarray(z, dtype=float)
    k = np.round(z)
    return np.where(np.mod(k, 2) == 0, 1.0, -1.0) * np.exp(-1j * math.pi * (z - k))


class NeumaierSum:
    """Compensated running sum (Neumaier's variant of Kahan summation)."""

    __slots__ = ("total", "comp")

    def __init__(self):
        self.total = 0.0
        self.comp = 0.0

    def add(self, x: float) -> None:
        t = self.total + x
        if abs(self.total) >= abs(x):
            self.comp += (self.total - t) + x
        else:
            self.comp += (x - t) + self.total
        self.total = t

    @property
    def value(self) -> float:
        return self.total + self.comp
