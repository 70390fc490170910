"""Numerical tolerances shared across modules."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

# Highest degree for which factorial sums stay accurate in double precision.
MAX_DEGREE = 16


@dataclass(frozen=True)
class Tolerances:
    orth: float = 1e-9     # rotation validity (R^T R = I, det R = 1)
    imag: float = 1e-9     # imaginary residue allowed before dropping it
    rep: float = 1e-9      # representation property
    euler: float = 1e-10   # Euler round trip
    gimbal: float = 1e-9   # |sin beta| below this selects gamma = 0

    def replace(self, **kw) -> "Tolerances":
        return dataclasses.replace(self, **kw)


_current = Tolerances()


def get_tolerances() -> Tolerances:
    return _current


def set_tolerances(tol: Tolerances) -> None:
    """Install process-wide default tolerances."""
    global _current
    _current = tol
