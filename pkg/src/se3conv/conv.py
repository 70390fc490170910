"""Point-cloud convolutions: TFN layers, SE(3)-conv layers and the weight map iota.

Index conventions
-----------------
* Composite ``comp[(l, l')]`` has shape (N, 2l+1, 2l+1, 2l'+1, R, C) with axes
  (point i, row a, column m, kernel order b, radial r, channel c) and holds
  ``sum_j f^l[j, a, m, c] kappa^{l'}_{r, b}(X_i - X_j)``.
* TFN weights ``V[(l, l', L)]`` have shape (2L+1, D, C, R_l', 2l+1), axes (j, d, c, r, m).
* SE(3) weights ``W[(l', L)]`` have shape (2L+1, D, C, R_l', 2l'+1, 2L+1), axes (j, d, c, r, m', M).
* Bias ``b`` of shape (D,) is added to the degree-0 output only.

The SE(3)-conv layer uses the rotational kernel basis ``(2L+1) D^L_{Mn}``,
whose Haar coefficient matrix is the unit matrix ``e_{Mn}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .clebsch_gordan import cg_tensor_real, coupled_degrees, triangle_ok
from .errors import BandLimitMismatch, ShapeMismatch, SizeMismatch, TriangleViolation
from .fields import FeatureField
from .harmonics import wigner_D_real
from .kernels import KernelBasisSpec, eval_kernel_all


def _as_points(points) -> np.ndarray:
    x = np.asarray(points, dtype=float)
    if x.ndim != 2 or x.shape[1] != 3 or x.shape[0] < 1:
        raise ShapeMismatch(f"point cloud must have shape (N, 3) with N >= 1, got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("point cloud has non-finite coordinates")
    return x


def _check_field_cloud(field: FeatureField, x: np.ndarray) -> int:
    if field.n_points != x.shape[0]:
        raise SizeMismatch(f"field has {field.n_points} points, cloud has {x.shape[0]}")
    return field.uniform_channels()


# ---------------------------------------------------------------------------
# Weights


@dataclass
class TFNWeights:
    blocks: dict[tuple[int, int, int], np.ndarray]
    bias: np.ndarray

    def __post_init__(self):
        self.bias = np.asarray(self.bias, dtype=float)
        for (l, lp, L), v in self.blocks.items():
            if not triangle_ok(l, lp, L):
                raise TriangleViolation(f"TFN block (l={l}, l'={lp}, L={L}) violates the triangle rule")
            if v.ndim != 5 or v.shape[0] != 2 * L + 1 or v.shape[4] != 2 * l + 1:
                raise ShapeMismatch(f"TFN block {(l, lp, L)} has shape {v.shape}")
            if v.shape[1] != self.bias.shape[0]:
                raise ShapeMismatch(f"TFN block {(l, lp, L)} has {v.shape[1]} outputs, bias has {self.bias.shape[0]}")

    @property
    def out_channels(self) -> int:
        return self.bias.shape[0]


@dataclass
class SE3Weights:
    blocks: dict[tuple[int, int], np.ndarray]
    bias: np.ndarray

    def __post_init__(self):
        self.bias = np.asarray(self.bias, dtype=float)
        for (lp, L), w in self.blocks.items():
            if w.ndim != 6 or w.shape[0] != 2 * L + 1 or w.shape[4] != 2 * lp + 1 or w.shape[5] != 2 * L + 1:
                raise ShapeMismatch(f"SE(3) block {(lp, L)} has shape {w.shape}")
            if w.shape[1] != self.bias.shape[0]:
                raise ShapeMismatch(f"SE(3) block {(lp, L)} has {w.shape[1]} outputs, bias has {self.bias.shape[0]}")

    @property
    def out_channels(self) -> int:
        return self.bias.shape[0]

    @classmethod
    def random(cls, rng: np.random.Generator, spec: KernelBasisSpec, lmax_out: int,
               in_channels: int, out_channels: int) -> "SE3Weights":
        blocks = {}
        for lp in range(spec.max_degree + 1):
            for L in range(lmax_out + 1):
                blocks[(lp, L)] = rng.normal(size=(2 * L + 1, out_channels, in_channels,
                                                   spec.radial_count(lp), 2 * lp + 1, 2 * L + 1))
        return cls(blocks, rng.normal(size=out_channels))


def random_tfn_weights(rng: np.random.Generator, spec: KernelBasisSpec, lmax_in: int, lmax_out: int,
                       in_channels: int, out_channels: int) -> TFNWeights:
    blocks = {}
    for l in range(lmax_in + 1):
        for lp in range(spec.max_degree + 1):
            for L in coupled_degrees(l, lp):
                if L <= lmax_out:
                    blocks[(l, lp, L)] = rng.normal(size=(2 * L + 1, out_channels, in_channels,
                                                          spec.radial_count(lp), 2 * l + 1))
    return TFNWeights(blocks, rng.normal(size=out_channels))


# ---------------------------------------------------------------------------
# Plain and steerable point-cloud convolution


def pointcloud_conv(f, points, kernel: Callable[[np.ndarray], np.ndarray],
                    exclude_self: bool = False) -> np.ndarray:
    """Scalar convolution ``sum_j f(X_j) kappa(X_i - X_j)`` over the cloud.

    ``kernel`` receives the stacked displacements (N, 3) and returns N values
    (a scalar is broadcast).
    """
    x = _as_points(points)
    vals = np.asarray(f, dtype=float)
    if vals.shape[0] != x.shape[0]:
        raise SizeMismatch(f"{vals.shape[0]} values for {x.shape[0]} points")
    out = np.zeros(x.shape[0])
    for i in range(x.shape[0]):
        k = np.broadcast_to(np.asarray(kernel(x[i] - x), dtype=float), (x.shape[0],)).copy()
        if exclude_self:
            k[i] = 0.0
        out[i] = float(np.dot(vals, k))
    return out


def kernel_table(points: np.ndarray, spec: KernelBasisSpec, exclude_self: bool = False) -> list[np.ndarray]:
    """``kappa^{l'}(X_i - X_j)`` for every degree; entries of shape (N, N, R, 2l'+1)."""
    diff = points[:, None, :] - points[None, :, :]
    tabs = []
    n = points.shape[0]
    for lp in range(spec.max_degree + 1):
        k = eval_kernel_all(spec, lp, diff)
        if exclude_self:
            k[np.arange(n), np.arange(n)] = 0.0
        tabs.append(k)
    return tabs


def steerable_feature_conv(field: FeatureField, points, spec: KernelBasisSpec,
                           exclude_self: bool = False) -> dict[tuple[int, int], np.ndarray]:
    """Composite arrays ``sum_j f^l(X_j) (x) kappa^{l'}(X_i - X_j)`` keyed by (l, l')."""
    x = _as_points(points)
    _check_field_cloud(field, x)
    tabs = kernel_table(x, spec, exclude_self)
    return {(l, lp): np.einsum("jamc,ijrb->iambrc", f, tabs[lp])
            for l, f in enumerate(field.blocks) for lp in range(spec.max_degree + 1)}


def _projected(comp: dict, lmax_in: int, lp_max: int, lmax_out: int) -> dict:
    """``Q^{L,(l,l')}_{I,a,b} comp[(l,l')]_{i,a,m,b,r,c}`` keyed (L, l, l'); shape (N, 2L+1, 2l+1, R, C)."""
    out = {}
    for l in range(lmax_in + 1):
        for lp in range(lp_max + 1):
            for L in coupled_degrees(l, lp):
                if L <= lmax_out:
                    q = cg_tensor_real(l, lp, L)
                    out[(L, l, lp)] = np.einsum("Iab,iambrc->iImrc", q, comp[(l, lp)])
    return out


def _default_lmax_out(field: FeatureField, spec: KernelBasisSpec, lmax_out: int | None) -> int:
    return field.max_degree + spec.max_degree if lmax_out is None else lmax_out


# ---------------------------------------------------------------------------
# Layers


def tfn_layer(field: FeatureField, points, v: TFNWeights, spec: KernelBasisSpec,
              lmax_out: int | None = None, exclude_self: bool = False) -> FeatureField:
    """TFN layer on Wigner coefficient fields.

    ``out^L[:, :, j, d] = sum Q^{L,(l,l')} (f^l[:, m, c] * kappa^{l'}_r) V^{(l,l'),L}[j, d, c, r, m] + b^L_d``.
    Blocks with input degree above the field's band are ignored; missing blocks count as zero.
    """
    x = _as_points(points)
    c = _check_field_cloud(field, x)
    lmax_out = _default_lmax_out(field, spec, lmax_out)
    n, d = x.shape[0], v.out_channels
    for (l, lp, L), blk in v.blocks.items():
        if lp > spec.max_degree:
            continue
        if blk.shape[2] != c or blk.shape[3] != spec.radial_count(lp):
            raise ShapeMismatch(f"TFN block {(l, lp, L)} shape {blk.shape} incompatible with C={c}, "
                                f"R={spec.radial_count(lp)}")
    comp = steerable_feature_conv(field, x, spec, exclude_self)
    proj = _projected(comp, field.max_degree, spec.max_degree, lmax_out)
    out = [np.zeros((n, 2 * L + 1, 2 * L + 1, d)) for L in range(lmax_out + 1)]
    for (L, l, lp), p in proj.items():
        blk = v.blocks.get((l, lp, L))
        if blk is not None:
            out[L] += np.einsum("iImrc,jdcrm->iIjd", p, blk)
    out[0][:, 0, 0, :] += v.bias
    return FeatureField(out)


def r3_component(field: FeatureField, points, spec: KernelBasisSpec, lp: int, r: int, mp: int,
                 lmax_out: int | None = None, exclude_self: bool = False) -> FeatureField:
    """Wigner coefficients of ``f * (kappa^{l'}_{r m'} (x) delta_I)``.

    ``out^L[:, I, J] = sum_l Q^{L,(l,l')}_{I,:,:} (f^l * kappa^{l'}_r) Q^{(l,l'),L}_{:, m', J}``.
    """
    x = _as_points(points)
    _check_field_cloud(field, x)
    if not 0 <= lp <= spec.max_degree or abs(mp) > lp:
        raise TriangleViolation(f"kernel index (l'={lp}, m'={mp}) not in the basis")
    g = _r3_all(field, x, spec, lmax_out, exclude_self)
    return FeatureField([blk[lp][:, :, :, :, r, mp + lp] if lp in blk else
                         np.zeros((x.shape[0], 2 * L + 1, 2 * L + 1, field.uniform_channels()))
                         for L, blk in enumerate(g)])


def _r3_all(field: FeatureField, x: np.ndarray, spec: KernelBasisSpec, lmax_out: int | None,
            exclude_self: bool) -> list[dict[int, np.ndarray]]:
    """R^3 components for every kernel; ``g[L][l']`` has shape (N, 2L+1, 2L+1, C, R, 2l'+1)."""
    lmax_out = _default_lmax_out(field, spec, lmax_out)
    comp = steerable_feature_conv(field, x, spec, exclude_self)
    proj = _projected(comp, field.max_degree, spec.max_degree, lmax_out)
    g: list[dict[int, np.ndarray]] = [dict() for _ in range(lmax_out + 1)]
    for (L, l, lp), p in proj.items():
        q = cg_tensor_real(l, lp, L, "(l,l'),L")
        term = np.einsum("iImrc,mnJ->iIJcrn", p, q)
        if lp in g[L]:
            g[L][lp] += term
        else:
            g[L][lp] = term
    return g


def so3_component(field: FeatureField, theta: Sequence[np.ndarray]) -> FeatureField:
    """Wigner coefficients of ``f * (delta_0 (x) theta)``: ``f^l theta^l`` per point and channel.

    ``theta[l]`` is the Haar coefficient matrix ``int theta(R) D^l(R) dmu(R)``.
    """
    if len(theta) < field.max_degree + 1:
        raise BandLimitMismatch(f"theta has degrees up to {len(theta) - 1}, field up to {field.max_degree}")
    out = []
    for l, b in enumerate(field.blocks):
        t = np.asarray(theta[l], dtype=float)
        if t.shape != (2 * l + 1, 2 * l + 1):
            raise BandLimitMismatch(f"theta block {l} has shape {t.shape}")
        out.append(np.einsum("iakc,kb->iabc", b, t))
    return FeatureField(out)


def se3_conv_layer(field: FeatureField, points, w: SE3Weights, spec: KernelBasisSpec,
                   lmax_out: int | None = None, exclude_self: bool = False) -> FeatureField:
    """SE(3)-conv layer with kernels ``kappa^{l'}_{r m'} (x) (2L+1) D^L_{Mn}``.

    Computed as the R^3 component for every spatial kernel followed by the SO(3)
    component against ``e_{Mn}``, which moves column M to column n.
    """
    x = _as_points(points)
    c = _check_field_cloud(field, x)
    lmax_out = _default_lmax_out(field, spec, lmax_out)
    for (lp, L), blk in w.blocks.items():
        if lp <= spec.max_degree and (blk.shape[2] != c or blk.shape[3] != spec.radial_count(lp)):
            raise ShapeMismatch(f"SE(3) block {(lp, L)} shape {blk.shape} incompatible with C={c}, "
                                f"R={spec.radial_count(lp)}")
    g = _r3_all(field, x, spec, lmax_out, exclude_self)
    n, d = x.shape[0], w.out_channels
    out = [np.zeros((n, 2 * L + 1, 2 * L + 1, d)) for L in range(lmax_out + 1)]
    for L in range(lmax_out + 1):
        for lp, gl in g[L].items():
            blk = w.blocks.get((lp, L))
            if blk is not None:
                # column M of the R^3 output feeds column n through e_{Mn}
                out[L] += np.einsum("iIMcrm,ndcrmM->iInd", gl, blk)
    out[0][:, 0, 0, :] += w.bias
    return FeatureField(out)


# ---------------------------------------------------------------------------
# Weight isomorphism


def iota(w: SE3Weights) -> TFNWeights:
    """TFN weights ``V^{(l,l'),L}[j,d,c,r,m] = sum_{m',M} Q^{(l,l'),L}_{m,m',M} W^{l',L}[j,d,c,r,m',M]``.

    Every triangle-valid input degree l is populated.
    """
    blocks = {}
    for (lp, L), blk in sorted(w.blocks.items()):
        for l in coupled_degrees(lp, L):
            q = cg_tensor_real(l, lp, L, "(l,l'),L")
            blocks[(l, lp, L)] = np.einsum("mnM,jdcrnM->jdcrm", q, blk)
    return TFNWeights(blocks, w.bias.copy())


@lru_cache(maxsize=None)
def _iota_inv_matrix(lp: int, L: int) -> tuple[np.ndarray, bool]:
    """Matrix (n_se3, n_tfn) of the inverse map for one (l', L) block, and whether
    the closed-form ``(2l+1)/(2L+1)`` scaling reproduces the exact inverse."""
    ls = list(coupled_degrees(lp, L))
    fwd = np.concatenate([cg_tensor_real(l, lp, L, "(l,l'),L").reshape(2 * l + 1, -1) for l in ls], axis=0)
    closed = np.concatenate([(2 * l + 1) / (2 * L + 1) * cg_tensor_real(l, lp, L, "(l,l'),L").reshape(2 * l + 1, -1)
                             for l in ls], axis=0).T
    ok = bool(np.abs(closed @ fwd - np.eye(fwd.shape[1])).max() < 1e-12)
    if ok:
        return closed, True
    return np.linalg.pinv(fwd), False


def iota_inv_uses_closed_form(lp: int, L: int) -> bool:
    return _iota_inv_matrix(lp, L)[1]


def iota_inv(v: TFNWeights) -> SE3Weights:
    """SE(3) weights ``W^{l',L}[j,d,c,r,m',M] = sum_{l,m} (2l+1)/(2L+1) Q^{L,(l,l')}_{M,m,m'} V^{(l,l'),L}[j,d,c,r,m]``.

    Falls back to the exact left inverse for any block where the closed form fails.
    """
    keys = sorted({(lp, L) for (_, lp, L) in v.blocks})
    blocks = {}
    for lp, L in keys:
        mat, _ = _iota_inv_matrix(lp, L)
        ls = list(coupled_degrees(lp, L))
        ref = next(b for (l, p, q), b in v.blocks.items() if (p, q) == (lp, L))
        jd_c_r = ref.shape[:4]
        stacked = np.concatenate([
            v.blocks.get((l, lp, L), np.zeros(jd_c_r + (2 * l + 1,))) for l in ls], axis=4)
        flat = np.einsum("kt,jdcrt->jdcrk", mat, stacked)
        blocks[(lp, L)] = flat.reshape(jd_c_r + (2 * lp + 1, 2 * L + 1))
    return SE3Weights(blocks, v.bias.copy())


# ---------------------------------------------------------------------------
# Separable layers


def spatial_kernel_index(spec: KernelBasisSpec) -> list[tuple[int, int, int]]:
    """Flat enumeration (l', r, m') of the spatial kernel basis."""
    return [(lp, r, mp) for lp in range(spec.max_degree + 1)
            for r in range(spec.radial_count(lp)) for mp in range(-lp, lp + 1)]


def r3_layer(field: FeatureField, points, spec: KernelBasisSpec, a: np.ndarray, bias=None,
             lmax_out: int | None = None, exclude_self: bool = False) -> FeatureField:
    """``sum_{k,c} A[d,k,c] f_c * (kappa_k (x) delta_I) + a_d`` with kernels indexed by
    ``spatial_kernel_index``; ``A`` has shape (D, K, C)."""
    x = _as_points(points)
    c = _check_field_cloud(field, x)
    idx = spatial_kernel_index(spec)
    a = np.asarray(a, dtype=float)
    if a.shape[1:] != (len(idx), c):
        raise ShapeMismatch(f"A has shape {a.shape}, expected (D, {len(idx)}, {c})")
    g = _r3_all(field, x, spec, lmax_out, exclude_self)
    offsets, k = {}, 0
    for lp in range(spec.max_degree + 1):
        offsets[lp] = k
        k += spec.radial_count(lp) * (2 * lp + 1)
    out = []
    for L, gl in enumerate(g):
        acc = np.zeros((x.shape[0], 2 * L + 1, 2 * L + 1, a.shape[0]))
        for lp, arr in gl.items():
            nk = spec.radial_count(lp) * (2 * lp + 1)
            sub = a[:, offsets[lp]:offsets[lp] + nk, :].reshape(a.shape[0], spec.radial_count(lp), 2 * lp + 1, c)
            acc += np.einsum("iIJcrm,drmc->iIJd", arr, sub)
        out.append(acc)
    if bias is not None:
        out[0][:, 0, 0, :] += np.asarray(bias, dtype=float)
    return FeatureField(out)


def wigner_theta_basis(lmax: int) -> list[list[np.ndarray]]:
    """Haar coefficients of the kernels ``(2L+1) D^L_{Mn}``, i.e. unit matrices ``e_{Mn}``."""
    basis = []
    for L in range(lmax + 1):
        for M in range(2 * L + 1):
            for n in range(2 * L + 1):
                th = [np.zeros((2 * l + 1, 2 * l + 1)) for l in range(lmax + 1)]
                th[L][M, n] = 1.0
                basis.append(th)
    return basis


def so3_layer(field: FeatureField, thetas: Sequence[Sequence[np.ndarray]], b: np.ndarray,
              bias=None) -> FeatureField:
    """``sum_{j,c} B[d,j,c] f_c * (delta_0 (x) theta_j) + b_d``; ``B`` has shape (D, J, C)."""
    c = field.uniform_channels()
    b = np.asarray(b, dtype=float)
    if b.shape[1:] != (len(thetas), c):
        raise ShapeMismatch(f"B has shape {b.shape}, expected (D, {len(thetas)}, {c})")
    out = [np.zeros(blk.shape[:3] + (b.shape[0],)) for blk in field.blocks]
    for j, th in enumerate(thetas):
        conv = so3_component(field, th)
        for l, blk in enumerate(conv.blocks):
            out[l] += np.einsum("iabc,dc->iabd", blk, b[:, j, :])
    if bias is not None:
        out[0][:, 0, 0, :] += np.asarray(bias, dtype=float)
    return FeatureField(out)


# ---------------------------------------------------------------------------
# TFN vector features


@dataclass(frozen=True)
class EmbedInfo:
    """Vector channel counts per degree; vector channel v of degree l sits at
    channel ``v // (2l+1)``, column ``v % (2l+1)``."""

    vector_channels: tuple[int, ...]
    channels: int


def embed_channels(vector_channels: Sequence[int]) -> int:
    return max(max(1, math.ceil(cv / (2 * l + 1))) for l, cv in enumerate(vector_channels))


def embed_tfn_input(vectors: Sequence[np.ndarray]) -> tuple[FeatureField, EmbedInfo]:
    """Reshape vector features ``vectors[l]`` of shape (N, 2l+1, Cv_l) into a zero-padded
    matrix field with a uniform channel count."""
    counts = tuple(int(v.shape[2]) for v in vectors)
    c = embed_channels(counts)
    n = vectors[0].shape[0]
    blocks = []
    for l, v in enumerate(vectors):
        if v.shape[:2] != (n, 2 * l + 1):
            raise ShapeMismatch(f"vector block {l} has shape {v.shape}")
        b = np.zeros((n, 2 * l + 1, 2 * l + 1, c))
        for cv in range(v.shape[2]):
            b[:, :, cv % (2 * l + 1), cv // (2 * l + 1)] = v[:, :, cv]
        blocks.append(b)
    return FeatureField(blocks), EmbedInfo(counts, c)


def extract_tfn_output(field: FeatureField, vector_channels: Sequence[int]) -> list[np.ndarray]:
    """Inverse of ``embed_tfn_input`` for the given vector channel counts."""
    out = []
    for l, cv_count in enumerate(vector_channels):
        b = field.blocks[l]
        v = np.zeros((field.n_points, 2 * l + 1, cv_count))
        for cv in range(cv_count):
            v[:, :, cv] = b[:, :, cv % (2 * l + 1), cv // (2 * l + 1)]
        out.append(v)
    return out


def embed_tfn_weights(w: dict[tuple[int, int, int], np.ndarray], bias: np.ndarray,
                      in_vector_channels: Sequence[int], out_vector_channels: Sequence[int],
                      spec: KernelBasisSpec) -> TFNWeights:
    """Embed vector-form TFN weights ``w[(l,l',L)]`` of shape (Dv_L, Cv_l, R_l') and a
    degree-0 bias of shape (Dv_0,) into matrix-form weights."""
    c = embed_channels(in_vector_channels)
    d = embed_channels(out_vector_channels)
    blocks = {}
    for (l, lp, L), wv in w.items():
        blk = np.zeros((2 * L + 1, d, c, spec.radial_count(lp), 2 * l + 1))
        for dv in range(wv.shape[0]):
            for cv in range(wv.shape[1]):
                blk[dv % (2 * L + 1), dv // (2 * L + 1), cv // (2 * l + 1), :, cv % (2 * l + 1)] = wv[dv, cv]
        blocks[(l, lp, L)] = blk
    b = np.zeros(d)
    b[: len(bias)] = bias
    return TFNWeights(blocks, b)


# ---------------------------------------------------------------------------
# Multiview networks


@dataclass
class ScalarLayer:
    """Scalar point-cloud layer ``sum_{k,c} A[d,k,c] f_c * kappa_k + a_d``."""

    a: np.ndarray      # (D, K, C) with K = len(spatial_kernel_index(spec))
    bias: np.ndarray   # (D,)


def _kernel_bank(spec: KernelBasisSpec, y: np.ndarray) -> np.ndarray:
    """All spatial kernels at displacement(s) y; shape (..., K) in ``spatial_kernel_index`` order."""
    parts = [eval_kernel_all(spec, lp, y).reshape(y.shape[:-1] + (-1,)) for lp in range(spec.max_degree + 1)]
    return np.concatenate(parts, axis=-1)


def multiview_eval(f, points, spec: KernelBasisSpec, layers: Sequence[ScalarLayer], r: np.ndarray,
                   x_index: int, activation: Callable[[np.ndarray], np.ndarray] | None = None,
                   exclude_self: bool = False) -> np.ndarray:
    """Output channels at ``(R^{-1} x, R^{-1})`` of the network of R^3 x I layers, with
    ``x = R X[x_index]``, applied to the lifted field ``f(x, H) = f(x)``.

    At a fixed rotation H the R^3 x I layers only see ``kappa(H^{-1}(X_i - X_j))``, so the
    network is evaluated at H = R^{-1} across all points. ``activation`` is applied between
    layers, not after the last one.
    """
    x = _as_points(points)
    vals = np.asarray(f, dtype=float)
    if vals.ndim == 1:
        vals = vals[:, None]
    if vals.shape[0] != x.shape[0]:
        raise SizeMismatch(f"{vals.shape[0]} values for {x.shape[0]} points")
    h_inv = np.asarray(r, dtype=float)  # H = R^{-1}, so H^{-1} = R
    diff = x[:, None, :] - x[None, :, :]
    kern = _kernel_bank(spec, diff @ h_inv.T)
    if exclude_self:
        kern[np.arange(len(x)), np.arange(len(x))] = 0.0
    y = vals
    for n, layer in enumerate(layers):
        y = np.einsum("dkc,ijk,jc->id", layer.a, kern, y) + layer.bias
        if activation is not None and n < len(layers) - 1:
            y = activation(y)
    return y[x_index]


def evaluate_at_rotation(field: FeatureField, h: np.ndarray) -> np.ndarray:
    """Values ``sum_l <f^l(X_i), D^l(H)>`` at every point; shape (N, C)."""
    return field.evaluate([wigner_D_real(l, h)[None] for l in range(field.max_degree + 1)])[:, 0, :]
