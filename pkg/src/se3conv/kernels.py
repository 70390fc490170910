"""Radial profiles and steerable kernel bases ``kappa^l_{rm}(x) = phi_r(|x|^2) Y_lm(x)``.

Zernike radial polynomials are normalized so that
``3 * int_0^1 R_n(r^2) R_n'(r^2) r^(2l+2) dr = delta_{nn'}``, which makes the
3D Zernike functions ``Z_nlm(x) = R_n(|x|^2) Y_lm(x)`` orthonormal for the
measure ``3 dx`` on the unit ball.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BadZernikeIndex, IndexOutOfRange
from .harmonics import eval_real_spherical_harmonics


def zernike_radial_coeffs(n: int, l: int) -> np.ndarray:
    """Coefficients ``R_{n,v}`` (v = 0..k) of the radial Zernike polynomial in ``t = |x|^2``."""
    if l < 0 or n < l or (n - l) % 2:
        raise BadZernikeIndex(f"need n >= l >= 0 and even n - l, got n={n}, l={l}")
    k = (n - l) // 2
    pre = (-1) ** k / 4.0 ** k * math.sqrt((2 * l + 4 * k + 3) / 3.0) * math.comb(2 * k, k)
    return np.array([
        pre * (-1) ** v * math.comb(k, v) * math.comb(2 * (k + l + v) + 1, 2 * k) / math.comb(k + l + v, k)
        for v in range(k + 1)
    ])


def zernike_radial(n: int, l: int, t) -> np.ndarray:
    """Evaluate ``R^l_n(t)``."""
    c = zernike_radial_coeffs(n, l)
    return np.polynomial.polynomial.polyval(np.asarray(t, dtype=float), c)


@dataclass(frozen=True)
class RadialProfile:
    """One radial function ``phi`` attached to a degree.

    kind is ``"zernike"`` (uses ``n``) or ``"gaussian"`` (uses ``rho`` and ``sigma``).
    """

    kind: str
    degree: int
    n: int = 0
    rho: float = 0.0
    sigma: float = 1.0
    support_radius: float = 1.0

    def __post_init__(self):
        if self.support_radius <= 0:
            raise ValueError("support_radius must be positive")
        if self.kind == "zernike":
            zernike_radial_coeffs(self.n, self.degree)
        elif self.kind == "gaussian":
            if self.sigma <= 0 or self.rho < 0:
                raise ValueError("gaussian shell needs sigma > 0 and rho >= 0")
        else:
            raise ValueError(f"unknown radial kind {self.kind!r}")


def gaussian_shell(r: int, count: int, degree: int, support_radius: float = 1.0,
                   sigma: float | None = None) -> RadialProfile:
    """Shell ``r`` of ``count`` evenly spaced shells on ``[0, support_radius]``."""
    spacing = support_radius / max(count - 1, 1)
    rho = r * spacing
    return RadialProfile("gaussian", degree, rho=rho, sigma=sigma or spacing,
                         support_radius=support_radius)


@dataclass(frozen=True)
class KernelBasisSpec:
    """Steerable kernel family: ``profiles[l']`` lists the radial functions of degree l'."""

    profiles: tuple[tuple[RadialProfile, ...], ...]
    support_radius: float = 1.0

    def __post_init__(self):
        if not self.profiles or any(len(p) == 0 for p in self.profiles):
            raise ValueError("kernel basis needs at least one profile per degree")
        for lp, plist in enumerate(self.profiles):
            for p in plist:
                if p.degree != lp:
                    raise ValueError(f"profile of degree {p.degree} listed under degree {lp}")
                if p.support_radius != self.support_radius:
                    raise ValueError("all profiles must share the support radius")

    @property
    def max_degree(self) -> int:
        return len(self.profiles) - 1

    def radial_count(self, lp: int) -> int:
        return len(self.profiles[lp])

    @classmethod
    def gaussian(cls, max_degree: int, count: int, support_radius: float = 1.0,
                 sigma: float | None = None) -> "KernelBasisSpec":
        prof = tuple(
            tuple(gaussian_shell(r, count, lp, support_radius, sigma) for r in range(count))
            for lp in range(max_degree + 1)
        )
        return cls(prof, support_radius)

    @classmethod
    def zernike(cls, max_degree: int, count: int, support_radius: float = 1.0) -> "KernelBasisSpec":
        prof = tuple(
            tuple(RadialProfile("zernike", lp, n=lp + 2 * r, support_radius=support_radius)
                  for r in range(count))
            for lp in range(max_degree + 1)
        )
        return cls(prof, support_radius)


def _radial_times_harmonic(p: RadialProfile, x: np.ndarray) -> np.ndarray:
    l = p.degree
    r2 = np.einsum("...i,...i->...", x, x)
    rad = np.sqrt(r2)
    inside = rad <= p.support_radius
    if p.kind == "zernike":
        s = x / p.support_radius
        out = zernike_radial(p.n, l, r2 / p.support_radius ** 2)[..., None] * eval_real_spherical_harmonics(l, s)
    else:
        # unit-normalize before the harmonic; the origin carries no direction
        safe = np.where(rad > 0, rad, 1.0)
        u = x / safe[..., None]
        y = eval_real_spherical_harmonics(l, u)
        if l > 0:
            y = np.where((rad > 0)[..., None], y, 0.0)
        shell = np.exp(-((rad - p.rho) ** 2) / (2.0 * p.sigma ** 2))
        out = shell[..., None] * y
    return np.where(inside[..., None], out, 0.0)


def eval_kernel(spec: KernelBasisSpec, l: int, r: int, x) -> np.ndarray:
    """Values ``kappa^l_{r,:}(x)``; shape (..., 2l+1)."""
    if not 0 <= l <= spec.max_degree:
        raise IndexOutOfRange(f"degree {l} outside [0, {spec.max_degree}]")
    if not 0 <= r < spec.radial_count(l):
        raise IndexOutOfRange(f"radial index {r} outside [0, {spec.radial_count(l)})")
    return _radial_times_harmonic(spec.profiles[l][r], np.asarray(x, dtype=float))


def eval_kernel_all(spec: KernelBasisSpec, l: int, x) -> np.ndarray:
    """All radial indices at once; shape (..., R_l, 2l+1)."""
    x = np.asarray(x, dtype=float)
    return np.stack([_radial_times_harmonic(p, x) for p in spec.profiles[l]], axis=-2)
