"""Wigner transforms over rotation sample sets and the WT-ReLU nonlinearity.

The inverse transform samples a field at the rotations of a set. The forward
transform is the weighted sum ``(2l+1) sum_s w_s f(R_s) D^l(R_s)``; the
``(2l+1)`` factor compensates the normalized Haar mass ``1/(2l+1)`` of each
Wigner entry, so forward after inverse is the identity on every exact grid
whose band covers twice the field's degree.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ShapeMismatch
from .fields import FeatureField
from .harmonics import wigner_D_real_euler, wigner_D_real_many
from .sampling import RotationSampleSet


def sample_wigner_blocks(s: RotationSampleSet, lmax: int) -> list[np.ndarray]:
    """D^l at every rotation of the set, for l <= lmax; each (|S|, 2l+1, 2l+1)."""
    if s.euler is not None:
        a, b, g = s.euler.T
        return [wigner_D_real_euler(l, a, b, g) for l in range(lmax + 1)]
    return [wigner_D_real_many(l, s.rotations) for l in range(lmax + 1)]


@dataclass
class RotationDomainSignal:
    sample_set: RotationSampleSet
    values: np.ndarray  # (N, |S|, C)

    def __post_init__(self):
        if self.values.ndim != 3 or self.values.shape[1] != len(self.sample_set):
            raise ShapeMismatch(f"values shape {self.values.shape} does not match {len(self.sample_set)} samples")


def inverse_wt(field: FeatureField, s: RotationSampleSet,
               d_blocks: list[np.ndarray] | None = None) -> RotationDomainSignal:
    """Evaluate ``sum_l <f^l, D^l(R)>`` at each rotation of the set."""
    d_blocks = d_blocks or sample_wigner_blocks(s, field.max_degree)
    return RotationDomainSignal(s, field.evaluate(d_blocks))


def forward_wt(signal: RotationDomainSignal, lmax: int,
               d_blocks: list[np.ndarray] | None = None) -> FeatureField:
    """Coefficients ``(2l+1) sum_s w_s f(R_s) D^l(R_s)`` for l <= lmax."""
    d_blocks = d_blocks or sample_wigner_blocks(signal.sample_set, lmax)
    w = signal.sample_set.weights
    wv = signal.values * w[None, :, None]
    return FeatureField([(2 * l + 1) * np.einsum("isc,sab->iabc", wv, d_blocks[l])
                         for l in range(lmax + 1)])


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def relu_activation(field: FeatureField, s: RotationSampleSet, lmax_out: int | None = None,
                    fn: Callable[[np.ndarray], np.ndarray] = relu,
                    d_blocks: list[np.ndarray] | None = None) -> FeatureField:
    """Forward transform of ``fn`` applied to the sampled field; ``fn`` defaults to ReLU."""
    lmax_out = field.max_degree if lmax_out is None else lmax_out
    d_blocks = d_blocks or sample_wigner_blocks(s, max(field.max_degree, lmax_out))
    sig = inverse_wt(field, s, d_blocks)
    return forward_wt(RotationDomainSignal(s, fn(sig.values)), lmax_out, d_blocks)


def reconstruction_error(field: FeatureField, s: RotationSampleSet) -> list[float]:
    """Per-degree max error of forward after inverse transform on the set."""
    back = forward_wt(inverse_wt(field, s), field.max_degree)
    return [float(np.abs(p - q).max()) for p, q in zip(field.blocks, back.blocks)]
