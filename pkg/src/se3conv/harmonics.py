"""Real spherical harmonics, ZYZ Euler angles and Wigner matrices.

Conventions
-----------
* Rotations are 3x3 numpy arrays acting on column vectors.
* Euler angles are ZYZ: ``R = Rz(alpha) @ Ry(beta) @ Rz(gamma)``.
* Order index ``m`` runs from ``-l`` to ``l`` and is stored at position ``m + l``.
* Real harmonics are homogeneous polynomials, ``Y_l(t x) = t**l Y_l(x)``,
  normalized on the unit sphere, and rotate as ``Y_l(R x) = D^l(R) Y_l(x)``.

Factorials are evaluated through ``math.lgamma`` so every formula stays
finite up to ``MAX_DEGREE``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .config import MAX_DEGREE, Tolerances, get_tolerances
from .errors import DegreeTooLarge, ImaginaryResidue, NotARotation

TWO_PI = 2.0 * math.pi


def _check_degree(l: int) -> int:
    l = int(l)
    if l < 0:
        raise ValueError(f"degree must be nonnegative, got {l}")
    if l > MAX_DEGREE:
        raise DegreeTooLarge(f"degree {l} exceeds supported ceiling {MAX_DEGREE}")
    return l


def log_factorial(n: int) -> float:
    return math.lgamma(n + 1.0)


# ---------------------------------------------------------------------------
# Rotations and Euler angles


@dataclass(frozen=True)
class EulerZYZ:
    alpha: float
    beta: float
    gamma: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.alpha, self.beta, self.gamma)


def rotation_z(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rotation_y(b: float) -> np.ndarray:
    c, s = math.cos(b), math.sin(b)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rotation_from_euler(e: EulerZYZ | tuple[float, float, float]) -> np.ndarray:
    """Return ``Rz(alpha) Ry(beta) Rz(gamma)``."""
    a, b, g = e.as_tuple() if isinstance(e, EulerZYZ) else e
    return rotation_z(a) @ rotation_y(b) @ rotation_z(g)


def rotations_from_euler(alpha, beta, gamma) -> np.ndarray:
    """Vectorized ``rotation_from_euler`` returning an array of shape (n, 3, 3)."""
    a, b, g = (np.asarray(v, dtype=float).ravel() for v in (alpha, beta, gamma))
    ca, sa, cb, sb, cg, sg = np.cos(a), np.sin(a), np.cos(b), np.sin(b), np.cos(g), np.sin(g)
    out = np.empty((a.size, 3, 3))
    out[:, 0, 0] = ca * cb * cg - sa * sg
    out[:, 0, 1] = -ca * cb * sg - sa * cg
    out[:, 0, 2] = ca * sb
    out[:, 1, 0] = sa * cb * cg + ca * sg
    out[:, 1, 1] = -sa * cb * sg + ca * cg
    out[:, 1, 2] = sa * sb
    out[:, 2, 0] = -sb * cg
    out[:, 2, 1] = sb * sg
    out[:, 2, 2] = cb
    return out


def check_rotation(r, tol: Tolerances | None = None) -> np.ndarray:
    """Return ``r`` as a float array or raise ``NotARotation``."""
    tol = tol or get_tolerances()
    m = np.asarray(r, dtype=float)
    if m.shape != (3, 3) or not np.all(np.isfinite(m)):
        raise NotARotation(f"expected a finite 3x3 matrix, got shape {m.shape}")
    orth_err = np.abs(m.T @ m - np.eye(3)).max()
    det_err = abs(np.linalg.det(m) - 1.0)
    if orth_err > tol.orth or det_err > tol.orth:
        raise NotARotation(f"orthogonality error {orth_err:.3g}, determinant error {det_err:.3g}")
    return m


def _wrap(angle: float) -> float:
    a = math.fmod(angle, TWO_PI)
    if a < 0.0:
        a += TWO_PI
    # fmod can return exactly 2*pi after the shift for tiny negatives
    return 0.0 if a >= TWO_PI else a


def euler_from_rotation(r, tol: Tolerances | None = None) -> EulerZYZ:
    """Invert ``rotation_from_euler``.

    At gimbal lock (``|sin beta| < tol.gimbal``) the representative with
    ``gamma = 0`` is returned.
    """
    tol = tol or get_tolerances()
    m = check_rotation(r, tol)
    sb = math.hypot(m[0, 2], m[1, 2])
    beta = math.atan2(sb, m[2, 2])
    if sb < tol.gimbal:
        if m[2, 2] > 0:
            # R = Rz(alpha + gamma)
            alpha = math.atan2(m[1, 0], m[0, 0])
            beta = 0.0
        else:
            # R = Rz(alpha) Ry(pi)
            alpha = math.atan2(-m[0, 1], m[1, 1])
            beta = math.pi
        return EulerZYZ(_wrap(alpha), beta, 0.0)
    alpha = math.atan2(m[1, 2], m[0, 2])
    gamma = math.atan2(m[2, 1], -m[2, 0])
    return EulerZYZ(_wrap(alpha), beta, _wrap(gamma))


def rotation_angle(r: np.ndarray) -> np.ndarray:
    """Rotation angle in [0, pi] of one matrix or a stack of matrices."""
    tr = np.trace(np.asarray(r), axis1=-2, axis2=-1)
    return np.arccos(np.clip((tr - 1.0) / 2.0, -1.0, 1.0))


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed random rotation via QR of a Gaussian matrix."""
    q, rr = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(rr))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


# ---------------------------------------------------------------------------
# Real spherical harmonics


@lru_cache(maxsize=None)
def _pibar_coeffs(l: int, m: int) -> tuple[tuple[int, float], ...]:
    """(k, coefficient) pairs of the polynomial Pibar^l_m in (|x|^2, z)."""
    out = []
    half = 0.5 * (log_factorial(l - m) - log_factorial(l + m))
    for k in range((l - m) // 2 + 1):
        logc = (
            -l * math.log(2.0)
            + log_factorial(l) - log_factorial(k) - log_factorial(l - k)
            + log_factorial(2 * l - 2 * k) - log_factorial(l) - log_factorial(l - 2 * k)
            + log_factorial(l - 2 * k) - log_factorial(l - 2 * k - m)
            + half
        )
        out.append((k, (-1.0) ** k * math.exp(logc)))
    return tuple(out)


# cos and sin of q*pi/2 for q mod 4, exact
_COS_Q = (1, 0, -1, 0)
_SIN_Q = (0, 1, 0, -1)


def _ab_polys(m: int, x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a = np.zeros_like(x)
    b = np.zeros_like(x)
    for p in range(m + 1):
        q = (m - p) % 4
        term = math.comb(m, p) * x ** p * y ** (m - p)
        if _COS_Q[q]:
            a = a + _COS_Q[q] * term
        if _SIN_Q[q]:
            b = b + _SIN_Q[q] * term
    return a, b


def eval_real_spherical_harmonics(l: int, x) -> np.ndarray:
    """Evaluate the 2l+1 real harmonics of degree ``l`` at ``x``.

    ``x`` has shape (3,) or (..., 3); the result has shape (..., 2l+1).
    """
    l = _check_degree(l)
    pts = np.asarray(x, dtype=float)
    if pts.shape[-1] != 3:
        raise ValueError("last axis of x must have length 3")
    px, py, pz = pts[..., 0], pts[..., 1], pts[..., 2]
    r2 = px * px + py * py + pz * pz
    out = np.zeros(pts.shape[:-1] + (2 * l + 1,))
    for m in range(l + 1):
        pib = np.zeros_like(px)
        for k, c in _pibar_coeffs(l, m):
            pib = pib + c * r2 ** k * pz ** (l - 2 * k - m)
        if m == 0:
            out[..., l] = math.sqrt((2 * l + 1) / (4 * math.pi)) * pib
        else:
            a, b = _ab_polys(m, px, py)
            norm = math.sqrt((2 * l + 1) / (2 * math.pi))
            out[..., l + m] = norm * pib * a
            out[..., l - m] = norm * pib * b
    return out


# ---------------------------------------------------------------------------
# Transition matrices and Wigner matrices


@lru_cache(maxsize=None)
def _transition(l: int) -> np.ndarray:
    c = np.zeros((2 * l + 1, 2 * l + 1), dtype=complex)
    s = 1.0 / math.sqrt(2.0)
    for m in range(-l, l + 1):
        # case table entries (m, m) and (m, -m); the table's first index is
        # stored as the column index so that C D_hat C^* is real
        if m < 0:
            c[m + l, m + l] = -1j * s
            c[-m + l, m + l] = s
        elif m > 0:
            c[m + l, m + l] = (-1) ** m * s
            c[-m + l, m + l] = 1j * (-1) ** m * s
        else:
            c[l, l] = 1.0
    c.setflags(write=False)
    return c


def transition_matrix(l: int) -> np.ndarray:
    """Unitary complex-to-real change of basis ``C^l`` (copy)."""
    return _transition(_check_degree(l)).copy()


@lru_cache(maxsize=None)
def _small_d_terms(l: int) -> tuple:
    """Per (m', m) list of (coefficient, cos power, sin power)."""
    terms = []
    for mp in range(-l, l + 1):
        for m in range(-l, l + 1):
            half = 0.5 * (log_factorial(l + mp) + log_factorial(l - mp)
                          + log_factorial(l + m) + log_factorial(l - m))
            s_lo = max(0, m - mp)
            s_hi = min(l + m, l - mp)
            row = []
            for s in range(s_lo, s_hi + 1):
                logden = (log_factorial(l + m - s) + log_factorial(s)
                          + log_factorial(mp - m + s) + log_factorial(l - mp - s))
                coef = (-1.0) ** (mp - m + s) * math.exp(half - logden)
                row.append((coef, 2 * l + m - mp - 2 * s, mp - m + 2 * s))
            terms.append((mp + l, m + l, tuple(row)))
    return tuple(terms)


def wigner_small_d(l: int, beta) -> np.ndarray:
    """Wigner small-d matrix ``d^l_{m'm}(beta)``; shape (..., 2l+1, 2l+1)."""
    l = _check_degree(l)
    b = np.asarray(beta, dtype=float)
    cb, sb = np.cos(b / 2.0), np.sin(b / 2.0)
    out = np.zeros(b.shape + (2 * l + 1, 2 * l + 1))
    for i, j, row in _small_d_terms(l):
        acc = np.zeros_like(b)
        for coef, pc, ps in row:
            acc = acc + coef * cb ** pc * sb ** ps
        out[..., i, j] = acc
    return out


def wigner_D_complex(l: int, e: EulerZYZ | tuple[float, float, float]) -> np.ndarray:
    """Complex Wigner matrix ``exp(-i m' alpha) d_{m'm}(beta) exp(-i m gamma)``."""
    a, b, g = e.as_tuple() if isinstance(e, EulerZYZ) else e
    return wigner_D_complex_euler(l, a, b, g)


def wigner_D_complex_euler(l: int, alpha, beta, gamma) -> np.ndarray:
    l = _check_degree(l)
    a, b, g = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (alpha, beta, gamma)))
    ms = np.arange(-l, l + 1)
    ea = np.exp(-1j * a[..., None] * ms)
    eg = np.exp(-1j * g[..., None] * ms)
    return ea[..., :, None] * wigner_small_d(l, b) * eg[..., None, :]


def _realify(l: int, dhat: np.ndarray, tol: Tolerances) -> np.ndarray:
    c = _transition(l)
    d = c @ dhat @ c.conj().T
    resid = np.abs(d.imag).max() if d.size else 0.0
    if resid > tol.imag:
        raise ImaginaryResidue(f"imaginary residue {resid:.3g} in real Wigner matrix")
    return np.ascontiguousarray(d.real)


def wigner_D_real(l: int, r, tol: Tolerances | None = None) -> np.ndarray:
    """Real Wigner matrix ``D^l(R)`` of a rotation matrix."""
    tol = tol or get_tolerances()
    e = euler_from_rotation(r, tol)
    return _realify(_check_degree(l), wigner_D_complex(l, e), tol)


def wigner_D_real_euler(l: int, alpha, beta, gamma, tol: Tolerances | None = None) -> np.ndarray:
    """Vectorized real Wigner matrices from Euler angle arrays; shape (..., 2l+1, 2l+1)."""
    tol = tol or get_tolerances()
    l = _check_degree(l)
    return _realify(l, wigner_D_complex_euler(l, alpha, beta, gamma), tol)


def euler_from_rotations(rotations, tol: Tolerances | None = None) -> np.ndarray:
    """Vectorized ``euler_from_rotation`` for a stack (..., 3, 3); returns (..., 3).

    Inputs are assumed to be valid rotations (no validation).
    """
    tol = tol or get_tolerances()
    m = np.asarray(rotations, dtype=float)
    sb = np.hypot(m[..., 0, 2], m[..., 1, 2])
    beta = np.arctan2(sb, m[..., 2, 2])
    alpha = np.arctan2(m[..., 1, 2], m[..., 0, 2])
    gamma = np.arctan2(m[..., 2, 1], -m[..., 2, 0])
    lock = sb < tol.gimbal
    up = m[..., 2, 2] > 0
    alpha = np.where(lock & up, np.arctan2(m[..., 1, 0], m[..., 0, 0]), alpha)
    alpha = np.where(lock & ~up, np.arctan2(-m[..., 0, 1], m[..., 1, 1]), alpha)
    beta = np.where(lock, np.where(up, 0.0, math.pi), beta)
    gamma = np.where(lock, 0.0, gamma)
    return np.stack([np.mod(alpha, TWO_PI), beta, np.mod(gamma, TWO_PI)], axis=-1)


def wigner_D_real_many(l: int, rotations, tol: Tolerances | None = None) -> np.ndarray:
    """Real Wigner matrices for a stack (..., 3, 3) of rotation matrices."""
    ang = euler_from_rotations(rotations, tol)
    return wigner_D_real_euler(l, ang[..., 0], ang[..., 1], ang[..., 2], tol)
