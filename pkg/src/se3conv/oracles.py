"""Brute-force reference implementations and the equivariance checker.

Nothing here calls into the fast convolution paths of ``conv`` or the
transforms of ``activation``; the references work directly with sampled
functions, explicit loops and library-independent formulas.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import lpmv

from .errors import SizeMismatch
from .harmonics import random_rotation, wigner_D_real, wigner_D_real_many
from .sampling import RotationSampleSet


# ---------------------------------------------------------------------------
# Reports


@dataclass
class CheckResult:
    name: str
    max_abs_error: float
    tolerance: float
    runtime_ms: float = 0.0
    note: str = ""

    @property
    def passed(self) -> bool:
        return bool(self.max_abs_error <= self.tolerance)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"CHECK {self.name} err={self.max_abs_error:.3e} tol={self.tolerance:.3e} {status} {self.runtime_ms:.0f}ms"


@dataclass
class VerificationReport:
    checks: list[CheckResult] = field(default_factory=list)

    def add(self, c: CheckResult) -> None:
        self.checks.append(c)

    @property
    def n_passed(self) -> int:
        return sum(c.passed for c in self.checks)

    @property
    def all_passed(self) -> bool:
        return self.n_passed == len(self.checks)

    def render(self) -> str:
        lines = [c.line() for c in self.checks]
        lines.append(f"SUMMARY {self.n_passed}/{len(self.checks)}")
        return "\n".join(lines) + "\n"


def timed(name: str, tolerance: float, fn: Callable[[], float]) -> CheckResult:
    t0 = time.perf_counter()
    err = float(fn())
    if not math.isfinite(err):
        err = math.inf
    return CheckResult(name, err, tolerance, 1000.0 * (time.perf_counter() - t0))


# ---------------------------------------------------------------------------
# Harmonic references


def legendre_real_sh(l: int, x) -> np.ndarray:
    """Real harmonics from associated Legendre functions (no Condon-Shortley phase),
    scaled by |x|^l; shape (..., 2l+1)."""
    p = np.asarray(x, dtype=float)
    r = np.linalg.norm(p, axis=-1)
    safe = np.where(r > 0, r, 1.0)
    ct = np.clip(p[..., 2] / safe, -1.0, 1.0)
    ph = np.arctan2(p[..., 1], p[..., 0])
    out = np.zeros(p.shape[:-1] + (2 * l + 1,))
    for m in range(0, l + 1):
        norm = math.sqrt((2 * l + 1) / (4 * math.pi) * math.factorial(l - m) / math.factorial(l + m))
        leg = (-1) ** m * lpmv(m, l, ct)  # scipy includes the Condon-Shortley phase
        if m == 0:
            out[..., l] = norm * leg
        else:
            out[..., l + m] = math.sqrt(2) * norm * leg * np.cos(m * ph)
            out[..., l - m] = math.sqrt(2) * norm * leg * np.sin(m * ph)
    return out * (r ** l)[..., None]


def dense_contraction(q: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Triple loop ``out_i = sum_{m,m'} q[i,m,m'] a[m,m']``."""
    out = np.zeros(q.shape[0])
    for i in range(q.shape[0]):
        s = 0.0
        for m in range(q.shape[1]):
            for mp in range(q.shape[2]):
                s += q[i, m, mp] * a[m, mp]
        out[i] = s
    return out


def naive_pointcloud_conv(f, points, kernel: Callable[[np.ndarray], float]) -> np.ndarray:
    """Double loop with the source index outermost (reverse of the library order)."""
    x = np.asarray(points, dtype=float)
    out = np.zeros(len(x))
    for j in reversed(range(len(x))):
        for i in range(len(x)):
            out[i] += f[j] * float(kernel(x[i] - x[j]))
    return out


# ---------------------------------------------------------------------------
# Wigner decomposition and SO(3) convolution on exact grids


def numeric_wigner_decompose(samples: np.ndarray, grid: RotationSampleSet, lmax: int) -> list[np.ndarray]:
    """Coefficient matrices ``(2l+1) sum_s w_s f(R_s) D^l(R_s)`` of sampled functions.

    ``samples`` has shape (..., |grid|). Wigner matrices are built rotation by
    rotation from the matrices (not from stored Euler angles); returns blocks of
    shape (..., 2l+1, 2l+1).
    """
    vals = np.asarray(samples, dtype=float)
    if vals.shape[-1] != len(grid):
        raise SizeMismatch(f"{vals.shape[-1]} samples for a set of {len(grid)} rotations")
    out = [np.zeros(vals.shape[:-1] + (2 * l + 1, 2 * l + 1)) for l in range(lmax + 1)]
    for s, (r, w) in enumerate(zip(grid.rotations, grid.weights)):
        v = vals[..., s]
        for l in range(lmax + 1):
            out[l] += (2 * l + 1) * w * v[..., None, None] * wigner_D_real(l, r)
    return out


def synthesize(coeffs: Sequence[np.ndarray], rotations: np.ndarray) -> np.ndarray:
    """Evaluate ``sum_l <F^l, D^l(R)>`` for coefficient blocks of shape (..., 2l+1, 2l+1)
    at a stack of rotations (S, 3, 3); returns (..., S)."""
    out = 0.0
    for l, f in enumerate(coeffs):
        d = wigner_D_real_many(l, rotations)
        out = out + np.einsum("...ab,sab->...s", f, d)
    return out


def brute_force_so3_conv(f_samples: np.ndarray, g: Callable[[np.ndarray], np.ndarray],
                         grid: RotationSampleSet) -> np.ndarray:
    """``(f * g)(R_s) = sum_h w_h f(H_h) g(H_h^{-1} R_s)`` on the grid.

    ``g`` maps a stack of rotations (..., 3, 3) to values (...).
    """
    f = np.asarray(f_samples, dtype=float)
    if f.shape[-1] != len(grid):
        raise SizeMismatch(f"{f.shape[-1]} samples for a set of {len(grid)} rotations")
    rel = np.einsum("hba,sbc->hsac", grid.rotations, grid.rotations)  # H^T R
    gv = g(rel)
    return np.einsum("...h,h,hs->...s", f, grid.weights, gv)


@dataclass
class SeparableTerm:
    """One kernel term ``coef[d, c] * kappa(y) * theta(S)`` of an SE(3) kernel."""

    coef: np.ndarray                                  # (D, C)
    kappa: Callable[[np.ndarray], np.ndarray]         # (..., 3) -> (...)
    theta: Callable[[np.ndarray], np.ndarray]         # (..., 3, 3) -> (...)


def brute_force_se3_conv(f_samples: np.ndarray, points, grid: RotationSampleSet,
                         terms: Sequence[SeparableTerm], bias=None) -> np.ndarray:
    """Direct evaluation of the SE(3) convolution with measure ``delta_X (x) mu``.

    ``out[i, s, d] = sum_terms sum_{j,h,c} w_h f[j,h,c] coef[d,c] kappa(H_h^{-1}(X_i - X_j)) theta(H_h^{-1} R_s)``.
    ``f_samples`` has shape (N, |grid|, C).
    """
    f = np.asarray(f_samples, dtype=float)
    x = np.asarray(points, dtype=float)
    if f.shape[0] != len(x) or f.shape[1] != len(grid):
        raise SizeMismatch(f"samples shape {f.shape} does not match {len(x)} points x {len(grid)} rotations")
    rot = grid.rotations
    diff = x[:, None, :] - x[None, :, :]
    local = np.einsum("hba,ijb->ijha", rot, diff)     # H^T (X_i - X_j)
    rel = np.einsum("hba,sbc->hsac", rot, rot)        # H^T R
    d_out = terms[0].coef.shape[0]
    out = np.zeros((len(x), len(grid), d_out))
    for t in terms:
        k = t.kappa(local)                             # (N, N, H)
        th = t.theta(rel)                              # (H, S)
        tmp = np.einsum("jhc,ijh,h->ihc", f, k, grid.weights)
        out += np.einsum("ihc,hs,dc->isd", tmp, th, t.coef)
    if bias is not None:
        out += np.asarray(bias, dtype=float)
    return out


# ---------------------------------------------------------------------------
# Vector-form TFN layer and plain CNN references


def vector_tfn_layer(vectors: Sequence[np.ndarray], points, weights: dict, bias: np.ndarray,
                     kernel: Callable[[int, np.ndarray], np.ndarray], q: Callable[[int, int, int], np.ndarray],
                     out_vector_channels: Sequence[int]) -> list[np.ndarray]:
    """Vector-form TFN layer with explicit point loops.

    ``out^L[i, :, dv] = sum Q^{L,(l,l')} (v^l[j, :, cv] kron kappa^{l'}_r(X_i - X_j)) w[(l,l',L)][dv, cv, r]``
    plus ``bias`` on degree 0. ``kernel(l', y)`` returns (R, 2l'+1); ``q`` returns the
    real coupling tensor of shape (2L+1, 2l+1, 2l'+1).
    """
    x = np.asarray(points, dtype=float)
    n = len(x)
    out = [np.zeros((n, 2 * L + 1, dv)) for L, dv in enumerate(out_vector_channels)]
    for (l, lp, L), w in weights.items():
        if L >= len(out) or l >= len(vectors):
            continue
        qm = q(l, lp, L).reshape(2 * L + 1, -1)
        for i in range(n):
            for j in range(n):
                kv = kernel(lp, x[i] - x[j])
                for cv in range(w.shape[1]):
                    for r in range(kv.shape[0]):
                        proj = qm @ np.kron(vectors[l][j, :, cv], kv[r])
                        for dv in range(w.shape[0]):
                            out[L][i, :, dv] += w[dv, cv, r] * proj
    out[0][:, 0, : len(bias)] += bias
    return out


def rotated_cnn_eval(f, points, kernel_bank: Callable[[np.ndarray], np.ndarray],
                     layers: Sequence[tuple[np.ndarray, np.ndarray]], r: np.ndarray,
                     x_index: int, activation: Callable[[np.ndarray], np.ndarray] | None = None) -> np.ndarray:
    """Plain point-cloud CNN run on the rotated cloud ``R X`` and read at ``R X[x_index]``.

    ``kernel_bank(y)`` returns the K kernel values at one displacement; layers are
    (A of shape (D, K, C), bias of shape (D,)); activation between layers only.
    """
    x = np.asarray(points, dtype=float) @ np.asarray(r).T
    y = np.asarray(f, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    n = len(x)
    for depth, (a, b) in enumerate(layers):
        nxt = np.zeros((n, a.shape[0]))
        for i in range(n):
            acc = np.array(b, dtype=float)
            for j in range(n):
                kv = kernel_bank(x[i] - x[j])
                acc = acc + np.einsum("dkc,k,c->d", a, kv, y[j])
            nxt[i] = acc
        y = nxt
        if activation is not None and depth < len(layers) - 1:
            y = activation(y)
    return y[x_index]


# ---------------------------------------------------------------------------
# Equivariance


def equivariance_check(layer: Callable, field, points, trials: int, tolerance: float,
                       rng: np.random.Generator, name: str = "equivariance",
                       rotations: Sequence[np.ndarray] | None = None,
                       translate: bool = True) -> CheckResult:
    """Compare ``layer`` on a transformed input against the transformed output.

    ``layer(field, points)`` returns a field. Each trial draws a rotation R (or
    takes it from ``rotations``), a translation t and a point permutation P, then
    measures ``layer(P(R.f), P(R X + t)) - P(D(R) layer(f, X))``.
    """
    t0 = time.perf_counter()
    x = np.asarray(points, dtype=float)
    base = layer(field, x)
    err = 0.0
    rots = list(rotations) if rotations is not None else [random_rotation(rng) for _ in range(trials)]
    for r in rots:
        t = rng.normal(size=3) if translate else np.zeros(3)
        perm = rng.permutation(len(x))
        moved = layer(field.rotated(r).permuted(perm), (x @ r.T + t)[perm])
        expect = base.rotated(r).permuted(perm)
        err = max(err, moved.max_abs_diff(expect))
    return CheckResult(name, err, tolerance, 1000.0 * (time.perf_counter() - t0))
