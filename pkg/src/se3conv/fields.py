"""Feature fields: Wigner coefficient matrices attached to the points of a cloud.

A field on a cloud X describes functions ``f_c : SE(3) -> R`` through

    f_c(X_i, R) = sum_l < f^l[i, :, :, c], D^l(R) >      (Frobenius product)

so ``blocks[l]`` has shape (N, 2l+1, 2l+1, C_l), stored degree-major, then
point, matrix row, matrix column, channel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeMismatch
from .harmonics import wigner_D_real


@dataclass
class FeatureField:
    blocks: list[np.ndarray]

    def __post_init__(self):
        if not self.blocks:
            raise ShapeMismatch("a field needs at least the degree-0 block")
        n = self.blocks[0].shape[0]
        for l, b in enumerate(self.blocks):
            if b.ndim != 4 or b.shape[0] != n or b.shape[1:3] != (2 * l + 1, 2 * l + 1):
                raise ShapeMismatch(f"block {l} has shape {b.shape}, expected (N, {2 * l + 1}, {2 * l + 1}, C)")

    @property
    def n_points(self) -> int:
        return self.blocks[0].shape[0]

    @property
    def max_degree(self) -> int:
        return len(self.blocks) - 1

    @property
    def channels(self) -> list[int]:
        return [b.shape[3] for b in self.blocks]

    def uniform_channels(self) -> int:
        """Common channel count; raises if degrees differ."""
        cs = set(self.channels)
        if len(cs) != 1:
            raise ShapeMismatch(f"channel counts differ across degrees: {self.channels}")
        return cs.pop()

    @classmethod
    def zeros(cls, n: int, lmax: int, channels: int | list[int]) -> "FeatureField":
        cs = channels if isinstance(channels, list) else [channels] * (lmax + 1)
        return cls([np.zeros((n, 2 * l + 1, 2 * l + 1, cs[l])) for l in range(lmax + 1)])

    @classmethod
    def random(cls, rng: np.random.Generator, n: int, lmax: int, channels: int) -> "FeatureField":
        return cls([rng.normal(size=(n, 2 * l + 1, 2 * l + 1, channels)) for l in range(lmax + 1)])

    def copy(self) -> "FeatureField":
        return FeatureField([b.copy() for b in self.blocks])

    def truncate(self, lmax: int) -> "FeatureField":
        return FeatureField([b for b in self.blocks[: lmax + 1]])

    def padded(self, lmax: int) -> "FeatureField":
        """Extend with zero blocks up to degree ``lmax``."""
        c = self.blocks[-1].shape[3]
        extra = [np.zeros((self.n_points, 2 * l + 1, 2 * l + 1, c)) for l in range(self.max_degree + 1, lmax + 1)]
        return FeatureField(list(self.blocks) + extra)

    def rotated(self, r: np.ndarray) -> "FeatureField":
        """Apply ``f^l -> D^l(R) f^l`` at every point (the rotation part of the SE(3) action)."""
        out = []
        for l, b in enumerate(self.blocks):
            d = wigner_D_real(l, r)
            out.append(np.einsum("ab,ibmc->iamc", d, b))
        return FeatureField(out)

    def permuted(self, perm) -> "FeatureField":
        return FeatureField([b[perm] for b in self.blocks])

    def scaled(self, a: float) -> "FeatureField":
        return FeatureField([a * b for b in self.blocks])

    def __add__(self, other: "FeatureField") -> "FeatureField":
        lmax = max(self.max_degree, other.max_degree)
        x, y = self.padded(lmax), other.padded(lmax)
        return FeatureField([p + q for p, q in zip(x.blocks, y.blocks)])

    def max_abs_diff(self, other: "FeatureField") -> float:
        lmax = max(self.max_degree, other.max_degree)
        x, y = self.padded(lmax), other.padded(lmax)
        return max(float(np.abs(p - q).max(initial=0.0)) for p, q in zip(x.blocks, y.blocks))

    def max_abs(self) -> float:
        return max(float(np.abs(b).max(initial=0.0)) for b in self.blocks)

    def evaluate(self, d_blocks: list[np.ndarray]) -> np.ndarray:
        """Sample the represented functions at rotations.

        ``d_blocks[l]`` holds D^l at S rotations with shape (S, 2l+1, 2l+1);
        returns (N, S, C).
        """
        c = self.uniform_channels()
        out = np.zeros((self.n_points, d_blocks[0].shape[0], c))
        for l, b in enumerate(self.blocks):
            out += np.einsum("iabc,sab->isc", b, d_blocks[l])
        return out
