"""Clebsch-Gordan coefficients and coupling tensors.

Complex tensors ``Qhat^{L,(l,l')}`` are nonzero only on ``M = m + m'``.
Real tensors are obtained by conjugating with the transition matrices; the
real tensor of shape (2L+1, 2l+1, 2l'+1) is ``Q^{L,(l,l')}`` and its
transpose ``Q^{(l,l'),L}`` of shape (2l+1, 2l'+1, 2L+1) is the
index-permuted view, both satisfying

    D^L(R) Q^{L,(l,l')} = Q^{L,(l,l')} (D^l(R) kron D^l'(R)).
"""

from __future__ import annotations

import math
import threading

import numpy as np

from .config import Tolerances, get_tolerances
from .errors import ImaginaryResidue, IndexOutOfRange, ShapeMismatch, TriangleViolation
from .harmonics import _check_degree, _transition, log_factorial


def triangle_ok(l: int, lp: int, L: int) -> bool:
    return abs(l - lp) <= L <= l + lp


def check_triangle(l: int, lp: int, L: int) -> None:
    for d in (l, lp, L):
        _check_degree(d)
    if not triangle_ok(l, lp, L):
        raise TriangleViolation(f"(l={l}, l'={lp}, L={L}) violates the triangle rule")


def coupled_degrees(l: int, lp: int) -> range:
    """Degrees L admissible for the product of degrees l and l'."""
    return range(abs(l - lp), l + lp + 1)


def _cg_base(l: int, lp: int, m: int, mp: int, L: int, M: int) -> float:
    """Racah factorial sum, valid when M = m + m'."""
    pre = 0.5 * (
        math.log(2 * L + 1)
        + log_factorial(L + l - lp) + log_factorial(L - l + lp) + log_factorial(l + lp - L)
        - log_factorial(l + lp + L + 1)
        + log_factorial(L + M) + log_factorial(L - M)
        + log_factorial(l - m) + log_factorial(l + m)
        + log_factorial(lp - mp) + log_factorial(lp + mp)
    )
    # k ranges over integers keeping all six factorial arguments nonnegative
    k_lo = max(0, lp - L - m, l - L + mp)
    k_hi = min(l + lp - L, l - m, lp + mp)
    total = 0.0
    for k in range(k_lo, k_hi + 1):
        den = (log_factorial(k) + log_factorial(l + lp - L - k) + log_factorial(l - m - k)
               + log_factorial(lp + mp - k) + log_factorial(L - lp + m + k)
               + log_factorial(L - l - mp + k))
        total += (-1.0) ** k * math.exp(pre - den)
    return total


def cg_scalar(l: int, lp: int, m: int, mp: int, L: int, M: int) -> float:
    """Clebsch-Gordan coefficient <l, l'; m, m' | l, l'; L, M>.

    The factorial sum is used for M >= 0 and l >= l'; the remaining cases
    follow from the sign-flip and exchange symmetries.
    """
    check_triangle(l, lp, L)
    for val, deg, name in ((m, l, "m"), (mp, lp, "m'"), (M, L, "M")):
        if abs(val) > deg:
            raise IndexOutOfRange(f"{name}={val} outside [-{deg}, {deg}]")
    if M != m + mp:
        return 0.0
    sign = 1.0
    if l < lp:
        l, lp, m, mp = lp, l, mp, m
        sign *= (-1.0) ** (L - l - lp)
    if M < 0:
        m, mp, M = -m, -mp, -M
        sign *= (-1.0) ** (L - l - lp)
    return sign * _cg_base(l, lp, m, mp, L, M)


class _TensorCache:
    """Memo table filled once per key behind a lock; reads afterwards are lock-free."""

    def __init__(self, build):
        self._build = build
        self._data: dict = {}
        self._lock = threading.Lock()

    def get(self, key):
        val = self._data.get(key)
        if val is None:
            with self._lock:
                val = self._data.get(key)
                if val is None:
                    val = self._build(*key)
                    val.setflags(write=False)
                    self._data[key] = val
        return val


def _build_complex(l: int, lp: int, L: int) -> np.ndarray:
    q = np.zeros((2 * L + 1, 2 * l + 1, 2 * lp + 1))
    for m in range(-l, l + 1):
        for mp in range(-lp, lp + 1):
            M = m + mp
            if abs(M) <= L:
                q[M + L, m + l, mp + lp] = cg_scalar(l, lp, m, mp, L, M)
    return q


_complex_cache = _TensorCache(_build_complex)


def cg_tensor_complex(l: int, lp: int, L: int, orientation: str = "L,(l,l')") -> np.ndarray:
    """Complex-form tensor ``Qhat`` (its entries are real numbers).

    ``orientation`` is ``"L,(l,l')"`` for shape (2L+1, 2l+1, 2l'+1) or
    ``"(l,l'),L"`` for the transposed shape (2l+1, 2l'+1, 2L+1).
    """
    check_triangle(l, lp, L)
    q = _complex_cache.get((l, lp, L))
    if orientation == "L,(l,l')":
        return q
    if orientation == "(l,l'),L":
        return q.transpose(1, 2, 0)
    raise ValueError(f"unknown orientation {orientation!r}")


def _phased_transition(l: int) -> np.ndarray:
    # a global phase (-i)^l leaves D^l unchanged and makes every real tensor real
    return _transition(l) * (-1j) ** l


def _build_real(l: int, lp: int, L: int, imag_tol: float = 1e-9) -> np.ndarray:
    qh = _build_complex(l, lp, L).reshape(2 * L + 1, -1)
    cl, clp, cL = _phased_transition(l), _phased_transition(lp), _phased_transition(L)
    q = cL @ qh @ np.kron(cl.conj().T, clp.conj().T)
    resid = np.abs(q.imag).max()
    if resid > imag_tol:
        raise ImaginaryResidue(f"real CG tensor ({l},{lp},{L}) has imaginary residue {resid:.3g}")
    return np.ascontiguousarray(q.real.reshape(2 * L + 1, 2 * l + 1, 2 * lp + 1))


_real_cache = _TensorCache(_build_real)


def cg_tensor_real(l: int, lp: int, L: int, orientation: str = "L,(l,l')",
                   tol: Tolerances | None = None) -> np.ndarray:
    """Real coupling tensor ``Q^{L,(l,l')}`` or its transpose ``Q^{(l,l'),L}``."""
    check_triangle(l, lp, L)
    tol = tol or get_tolerances()
    if tol.imag < 1e-9:
        q = _build_real(l, lp, L, tol.imag)
    else:
        q = _real_cache.get((l, lp, L))
    if orientation == "L,(l,l')":
        return q
    if orientation == "(l,l'),L":
        return q.transpose(1, 2, 0)
    raise ValueError(f"unknown orientation {orientation!r}")


def project_composite(L: int, l: int, lp: int, a) -> np.ndarray:
    """Contract ``Q^{L,(l,l')}_{i,:,:}`` with a (2l+1, 2l'+1, ...) array over its first two axes."""
    arr = np.asarray(a, dtype=float)
    if arr.shape[:2] != (2 * l + 1, 2 * lp + 1):
        raise ShapeMismatch(f"expected leading shape {(2 * l + 1, 2 * lp + 1)}, got {arr.shape}")
    q = cg_tensor_real(l, lp, L)
    return np.tensordot(q, arr, axes=([1, 2], [0, 1]))
