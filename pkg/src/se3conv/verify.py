"""Registry of numerical checks run by ``se3conv verify`` and the acceptance tests."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import oracles
from .activation import forward_wt, inverse_wt, relu_activation, sample_wigner_blocks, RotationDomainSignal
from .clebsch_gordan import (cg_scalar, cg_tensor_complex, cg_tensor_real, coupled_degrees,
                             project_composite, triangle_ok)
from .conv import (ScalarLayer, SE3Weights, _kernel_bank, embed_tfn_input, embed_tfn_weights,
                   evaluate_at_rotation, extract_tfn_output, iota, iota_inv, iota_inv_uses_closed_form,
                   multiview_eval, pointcloud_conv, r3_component, r3_layer, random_tfn_weights,
                   se3_conv_layer, so3_component, so3_layer, spatial_kernel_index, tfn_layer)
from .errors import TriangleViolation
from .fields import FeatureField
from .harmonics import (eval_real_spherical_harmonics, euler_from_rotation, random_rotation,
                        rotation_from_euler, rotation_z, transition_matrix, wigner_D_complex, wigner_D_real,
                        wigner_D_real_euler, wigner_small_d, EulerZYZ)
from .kernels import KernelBasisSpec, RadialProfile, eval_kernel, eval_kernel_all, zernike_radial
from .oracles import CheckResult, SeparableTerm, VerificationReport, timed
from .sampling import exact_euler_grid, fps_min_distances, fps_rotations, geodesic_distance, icosahedral_group

DEFAULT_SEED = 20240611


@dataclass(frozen=True)
class Check:
    name: str
    suite: str
    tolerance: float
    fn: Callable[[np.random.Generator], float]


_REGISTRY: list[Check] = []


def check(name: str, suite: str, tolerance: float):
    def deco(fn):
        _REGISTRY.append(Check(name, suite, tolerance, fn))
        return fn
    return deco


def _random_points(rng, n, scale=0.45):
    return rng.uniform(-scale, scale, size=(n, 3))


def _unit(rng, n):
    v = rng.normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _sphere_quadrature(n_theta: int):
    """Gauss-Legendre in cos(theta) times uniform phi; returns points (P, 3) and weights."""
    x, w = np.polynomial.legendre.leggauss(n_theta)
    phi = np.arange(2 * n_theta) * math.pi / n_theta
    ct, ph = np.meshgrid(x, phi, indexing="ij")
    st = np.sqrt(1 - ct ** 2)
    pts = np.stack([st * np.cos(ph), st * np.sin(ph), ct], axis=-1).reshape(-1, 3)
    wts = (w[:, None] * np.full(phi.shape, math.pi / n_theta)[None, :]).ravel()
    return pts, wts


# ---------------------------------------------------------------------------
# harmonics


@check("sh_steerability", "harmonics", 1e-9)
def _sh_steer(rng):
    err = 0.0
    for l in range(5):
        for _ in range(100):
            r = random_rotation(rng)
            x = _unit(rng, 1)[0] * rng.uniform(0.5, 1.5)
            err = max(err, np.abs(eval_real_spherical_harmonics(l, r @ x)
                                  - wigner_D_real(l, r) @ eval_real_spherical_harmonics(l, x)).max())
    return err


@check("wigner_representation", "harmonics", 1e-9)
def _wigner_rep(rng):
    err = 0.0
    for l in range(5):
        err = max(err, np.abs(wigner_D_real(l, np.eye(3)) - np.eye(2 * l + 1)).max())
        for _ in range(50):
            r1, r2 = random_rotation(rng), random_rotation(rng)
            d1, d2 = wigner_D_real(l, r1), wigner_D_real(l, r2)
            err = max(err, np.abs(wigner_D_real(l, r1 @ r2) - d1 @ d2).max(),
                      np.abs(d1.T @ d1 - np.eye(2 * l + 1)).max())
    return err


@check("wigner_identity", "harmonics", 1e-12)
def _wigner_identity(rng):
    return max(np.abs(wigner_D_real(l, np.eye(3)) - np.eye(2 * l + 1)).max() for l in range(9))


@check("schur_orthogonality_grid9", "harmonics", 1e-9)
def _schur9(rng):
    return _schur_error(exact_euler_grid(9), 4)


def _schur_error(grid, lmax, pair_limit=None):
    a, b, g = grid.euler.T
    cols, diag = [], []
    for l in range(lmax + 1):
        d = wigner_D_real_euler(l, a, b, g).reshape(len(grid), -1)
        cols.append(d)
        diag += [l] * d.shape[1]
    big = np.concatenate(cols, axis=1)
    gram = big.T @ (grid.weights[:, None] * big)
    deg = np.array(diag)
    expect = np.diag(1.0 / (2 * deg + 1))
    mask = np.ones_like(gram, dtype=bool)
    if pair_limit is not None:
        mask = (deg[:, None] + deg[None, :]) < pair_limit
    return float(np.abs(gram - expect)[mask].max())


@check("sh_orthonormality", "harmonics", 1e-9)
def _sh_orth(rng):
    pts, wts = _sphere_quadrature(12)
    ys = np.concatenate([eval_real_spherical_harmonics(l, pts) for l in range(5)], axis=1)
    gram = ys.T @ (wts[:, None] * ys)
    return float(np.abs(gram - np.eye(gram.shape[0])).max())


@check("sh_homogeneity", "harmonics", 1e-12)
def _sh_homog(rng):
    err = 0.0
    for x in _unit(rng, 20):
        for l in range(5):
            y = eval_real_spherical_harmonics(l, x)
            for t in (0.5, 2.0):
                err = max(err, np.abs(eval_real_spherical_harmonics(l, t * x) - t ** l * y).max())
    return err


@check("sh_legendre_oracle", "harmonics", 1e-10)
def _sh_leg(rng):
    x = rng.normal(size=(50, 3))
    return max(np.abs(eval_real_spherical_harmonics(l, x) - oracles.legendre_real_sh(l, x)).max()
               for l in range(7))


@check("euler_roundtrip", "harmonics", 1e-12)
def _euler_rt(rng):
    err = 0.0
    mats = [random_rotation(rng) for _ in range(100)]
    mats += [rotation_z(0.3), rotation_from_euler((1.0, math.pi, 0.0)), np.eye(3)]
    for r in mats:
        err = max(err, np.abs(rotation_from_euler(euler_from_rotation(r)) - r).max())
    e = euler_from_rotation(rotation_z(0.7))
    err = max(err, abs(e.alpha - 0.7), abs(e.beta), abs(e.gamma))
    return err


@check("wigner_small_d_closed_forms", "harmonics", 1e-12)
def _small_d(rng):
    b = rng.uniform(0, math.pi, size=20)
    err = float(np.abs(wigner_small_d(1, b)[:, 1, 1] - np.cos(b)).max())
    for l in range(6):
        err = max(err, np.abs(wigner_small_d(l, 0.0) - np.eye(2 * l + 1)).max())
        d = wigner_small_d(l, 0.7)
        err = max(err, np.abs(d.T @ d - np.eye(2 * l + 1)).max())
        dc = wigner_D_complex(l, EulerZYZ(*rng.uniform(0, 2, size=3)))
        err = max(err, np.abs(dc.conj().T @ dc - np.eye(2 * l + 1)).max())
    return err


@check("wigner_trace_class_function", "harmonics", 1e-10)
def _trace(rng):
    return max(abs(np.trace(wigner_D_real(1, r)) - np.trace(r))
               for r in (random_rotation(rng) for _ in range(50)))


@check("structural_wigner_dimensions", "harmonics", 0.0)
def _dims(rng):
    r = random_rotation(rng)
    return float(sum(wigner_D_real(l, r).shape != (2 * l + 1, 2 * l + 1) for l in range(17)))


# ---------------------------------------------------------------------------
# clebsch


def _cg_both(l, lp, L):
    return [(cg_tensor_real(l, lp, L), cg_tensor_real(l, lp, L, "(l,l'),L")),
            (cg_tensor_complex(l, lp, L), cg_tensor_complex(l, lp, L, "(l,l'),L"))]


@check("cg_orthogonality", "clebsch", 1e-10)
def _cg_orth(rng):
    err = 0.0
    for l in range(4):
        for lp in range(4):
            n = (2 * l + 1) * (2 * lp + 1)
            for form in (0, 1):
                total = np.zeros((n, n))
                for L in coupled_degrees(l, lp):
                    q_down, q_up = _cg_both(l, lp, L)[form]
                    total += q_up.reshape(n, 2 * L + 1) @ q_down.reshape(2 * L + 1, n)
                    for L2 in coupled_degrees(l, lp):
                        q2_up = _cg_both(l, lp, L2)[form][1]
                        prod = q_down.reshape(2 * L + 1, n) @ q2_up.reshape(n, 2 * L2 + 1)
                        expect = np.eye(2 * L + 1) if L == L2 else 0.0
                        err = max(err, np.abs(prod - expect).max())
                err = max(err, np.abs(total - np.eye(n)).max())
    return err


@check("cg_decomposition", "clebsch", 1e-9)
def _cg_dec(rng):
    err = 0.0
    for _ in range(50):
        r = random_rotation(rng)
        e = euler_from_rotation(r)
        dr = [wigner_D_real(l, r) for l in range(7)]
        dc = [wigner_D_complex(l, e) for l in range(7)]
        for l in range(4):
            for lp in range(4):
                for L in coupled_degrees(l, lp):
                    q = cg_tensor_real(l, lp, L).reshape(2 * L + 1, -1)
                    err = max(err, np.abs(dr[L] @ q - q @ np.kron(dr[l], dr[lp])).max())
                    qc = cg_tensor_complex(l, lp, L).reshape(2 * L + 1, -1)
                    err = max(err, np.abs(dc[L] @ qc - qc @ np.kron(dc[l], dc[lp])).max())
    return err


def _qhat(l, lp, L, m, mp, M):
    if not triangle_ok(l, lp, L) or abs(m) > l or abs(mp) > lp or abs(M) > L:
        return 0.0
    return cg_tensor_complex(l, lp, L, "(l,l'),L")[m + l, mp + lp, M + L]


@check("cg_symmetries", "clebsch", 1e-12)
def _cg_sym(rng):
    err = 0.0
    for l in range(4):
        for lp in range(4):
            for L in coupled_degrees(l, lp):
                for m in range(-l, l + 1):
                    for mp in range(-lp, lp + 1):
                        for M in range(-L, L + 1):
                            q = _qhat(l, lp, L, m, mp, M)
                            s = (-1) ** (l + lp - L)
                            rel = [
                                s * _qhat(l, lp, L, -m, -mp, -M),
                                s * _qhat(lp, l, L, mp, m, M),
                                (-1) ** (l - m) * math.sqrt((2 * L + 1) / (2 * lp + 1)) * _qhat(l, L, lp, m, -M, -mp),
                                (-1) ** (lp + mp) * math.sqrt((2 * L + 1) / (2 * l + 1)) * _qhat(L, lp, l, -M, mp, -m),
                                (-1) ** (l - m) * math.sqrt((2 * L + 1) / (2 * lp + 1)) * _qhat(L, l, lp, M, -m, mp),
                                (-1) ** (lp + mp) * math.sqrt((2 * L + 1) / (2 * l + 1)) * _qhat(lp, L, l, -mp, M, m),
                            ]
                            err = max(err, max(abs(q - v) for v in rel))
    return err


@check("cg_scaled_orthogonality", "clebsch", 1e-10)
def _cg_bis(rng):
    # sum_{l,m} (2l+1)/(2L+1) Q^{L,(l,l')}_{N,m,n'} Q^{(l,l'),L}_{m,m',M} = delta_{m'n'} delta_{MN}
    err = 0.0
    for lp in range(4):
        for L in range(4):
            tot = np.zeros((2 * L + 1, 2 * lp + 1, 2 * lp + 1, 2 * L + 1))
            for l in coupled_degrees(lp, L):
                qd = cg_tensor_real(l, lp, L)
                qu = cg_tensor_real(l, lp, L, "(l,l'),L")
                tot += (2 * l + 1) / (2 * L + 1) * np.einsum("Nmn,mpM->NnpM", qd, qu)
            expect = np.einsum("np,NM->NnpM", np.eye(2 * lp + 1), np.eye(2 * L + 1))
            err = max(err, np.abs(tot - expect).max())
    return err


@check("cg_scalar_values", "clebsch", 1e-12)
def _cg_vals(rng):
    err = abs(cg_scalar(1, 1, 0, 1, 2, 0))
    err = max(err, abs(cg_scalar(1, 1, 1, -1, 0, 0) - 1 / math.sqrt(3)))
    for l in range(5):
        for m in range(-l, l + 1):
            err = max(err, abs(cg_scalar(l, 0, m, 0, l, m) - 1.0))
    q = cg_tensor_complex(1, 1, 2)
    err = max(err, np.abs((q ** 2).sum(axis=(1, 2)) - 1.0).max())
    q1 = cg_tensor_complex(1, 1, 1, "(l,l'),L")
    err = max(err, np.abs(q1 + q1.transpose(1, 0, 2)).max())
    return err


@check("cg_project_composite_oracle", "clebsch", 1e-12)
def _cg_proj(rng):
    err = 0.0
    for l in range(3):
        for lp in range(3):
            for L in coupled_degrees(l, lp):
                a = rng.normal(size=(2 * l + 1, 2 * lp + 1))
                err = max(err, np.abs(project_composite(L, l, lp, a)
                                      - oracles.dense_contraction(cg_tensor_real(l, lp, L), a)).max())
    return err


@check("structural_cg_existence", "clebsch", 0.0)
def _cg_exist(rng):
    bad = 0
    for l in range(5):
        for lp in range(5):
            for L in range(9):
                try:
                    q = cg_tensor_real(l, lp, L)
                    exists = q.shape == (2 * L + 1, 2 * l + 1, 2 * lp + 1)
                except TriangleViolation:
                    exists = False
                bad += exists != (abs(l - lp) <= L <= l + lp)
    return float(bad)


# ---------------------------------------------------------------------------
# basis


@check("kernel_steerability", "basis", 1e-9)
def _kern_steer(rng):
    err = 0.0
    for spec in (KernelBasisSpec.gaussian(3, 3), KernelBasisSpec.zernike(3, 2)):
        for _ in range(20):
            r = random_rotation(rng)
            x = _unit(rng, 1)[0] * rng.uniform(0.1, 0.95)
            for l in range(4):
                for rr in range(spec.radial_count(l)):
                    err = max(err, np.abs(eval_kernel(spec, l, rr, r @ x)
                                          - wigner_D_real(l, r) @ eval_kernel(spec, l, rr, x)).max())
    return err


def _radial_gram(lmax_n=4):
    x, w = np.polynomial.legendre.leggauss(30)
    r, w = (x + 1) / 2, w / 2
    err = 0.0
    for l in range(lmax_n + 1):
        ns = list(range(l, lmax_n + 1, 2))
        vals = np.array([zernike_radial(n, l, r ** 2) * r ** l for n in ns])
        gram = 3.0 * (vals * w * r ** 2) @ vals.T
        err = max(err, np.abs(gram - np.eye(len(ns))).max())
    return err


@check("zernike_radial_orthogonality", "basis", 1e-8)
def _zr(rng):
    return _radial_gram(4)


@check("zernike_ball_orthogonality", "basis", 1e-8)
def _zb(rng):
    xr, wr = np.polynomial.legendre.leggauss(12)
    rad, wr = (xr + 1) / 2, wr / 2
    sph, ws = _sphere_quadrature(8)
    pts = (rad[:, None, None] * sph[None, :, :]).reshape(-1, 3)
    wts = (wr[:, None] * rad[:, None] ** 2 * ws[None, :]).ravel()
    spec_cols = []
    for n in range(5):
        for l in range(n % 2, n + 1, 2):
            spec = KernelBasisSpec(_single_zernike(n, l))
            spec_cols.append(eval_kernel(spec, l, 0, pts))
    big = np.concatenate(spec_cols, axis=1)
    gram = 3.0 * big.T @ (wts[:, None] * big)
    return float(np.abs(gram - np.eye(gram.shape[0])).max())


def _single_zernike(n, l):
    """Profiles whose only degree-l entry is the Zernike function of index n."""
    prof = [tuple([RadialProfile("zernike", d, n=d)]) for d in range(l)]
    prof.append((RadialProfile("zernike", l, n=n),))
    return tuple(prof)


@check("gaussian_shell_normalization", "basis", 1e-10)
def _gauss_norm(rng):
    spec = KernelBasisSpec.gaussian(3, 3, support_radius=2.0)
    err = 0.0
    for x in _unit(rng, 10) * 0.4:
        for l in range(4):
            for r in range(3):
                p = spec.profiles[l][r]
                k1, k2 = eval_kernel(spec, l, r, x), eval_kernel(spec, l, r, 2 * x)
                phi1 = math.exp(-((np.linalg.norm(x) - p.rho) ** 2) / (2 * p.sigma ** 2))
                phi2 = math.exp(-((np.linalg.norm(2 * x) - p.rho) ** 2) / (2 * p.sigma ** 2))
                err = max(err, np.abs(k1 / phi1 - k2 / phi2).max())
    shell = KernelBasisSpec.gaussian(0, 2)
    p = shell.profiles[0][1]
    err = max(err, abs(eval_kernel(shell, 0, 1, np.array([p.rho, 0, 0]))[0] - 1 / math.sqrt(4 * math.pi)))
    return err


# ---------------------------------------------------------------------------
# sampling


@check("grid_schur_b4", "sampling", 1e-10)
def _grid4(rng):
    g = exact_euler_grid(4)
    return max(_schur_error(g, 7, pair_limit=8), abs(g.weights.sum() - 1.0))


@check("structural_ico_size", "sampling", 0.0)
def _ico_size(rng):
    return float(abs(len(icosahedral_group()) - 60))


@check("ico_group_axioms", "sampling", 1e-9)
def _ico_axioms(rng):
    g = icosahedral_group().rotations
    err = float(np.abs(g[0] - np.eye(3)).max())
    prods = np.einsum("aij,bjk->abik", g, g).reshape(-1, 3, 3)
    d = np.abs(prods[:, None] - g[None]).max(axis=(2, 3)).min(axis=1)
    err = max(err, d.max())
    inv = np.abs(g.transpose(0, 2, 1)[:, None] - g[None]).max(axis=(2, 3)).min(axis=1)
    ang = np.round(np.degrees(np.arccos(np.clip((np.trace(g, axis1=1, axis2=2) - 1) / 2, -1, 1))))
    orders_ok = set(ang) <= {0.0, 72.0, 120.0, 144.0, 180.0}
    return max(err, inv.max(), 0.0 if orders_ok else 1.0)


@check("fps_properties", "sampling", 1e-12)
def _fps(rng):
    a = fps_rotations(64, seed=3)
    b = fps_rotations(64, seed=3)
    err = float(np.abs(a.rotations - b.rotations).max())
    err = max(err, np.abs(fps_rotations(1).rotations[0] - np.eye(3)).max())
    half = fps_rotations(2).rotations[1]
    err = max(err, abs(float(geodesic_distance(np.eye(3), half)) - math.pi))
    steps = np.diff(fps_min_distances(a))
    return max(err, float(steps.max(initial=0.0)))


# ---------------------------------------------------------------------------
# conv


def _small_problem(rng, n=10, lmax=2, lpmax=2, count=2, c=2):
    spec = KernelBasisSpec.gaussian(lpmax, count, support_radius=1.2)
    return spec, _random_points(rng, n), FeatureField.random(rng, n, lmax, c)


@check("equivalence_se3_to_tfn", "conv", 1e-10)
def _eq1(rng):
    err = 0.0
    for _ in range(20):
        spec, x, f = _small_problem(rng, n=int(rng.integers(3, 9)), lmax=int(rng.integers(1, 4)),
                                    lpmax=int(rng.integers(0, 3)))
        w = SE3Weights.random(rng, spec, f.max_degree + spec.max_degree, 2, 2)
        err = max(err, se3_conv_layer(f, x, w, spec).max_abs_diff(tfn_layer(f, x, iota(w), spec)))
    return err


@check("equivalence_tfn_to_se3", "conv", 1e-10)
def _eq2(rng):
    err = 0.0
    for _ in range(20):
        spec, x, f = _small_problem(rng, n=int(rng.integers(3, 9)), lmax=int(rng.integers(1, 4)),
                                    lpmax=int(rng.integers(0, 3)))
        v = random_tfn_weights(rng, spec, f.max_degree, f.max_degree + spec.max_degree, 2, 2)
        err = max(err, tfn_layer(f, x, v, spec).max_abs_diff(se3_conv_layer(f, x, iota_inv(v), spec)))
    return err


@check("iota_roundtrip", "conv", 1e-10)
def _iota_rt(rng):
    err = 0.0
    spec = KernelBasisSpec.gaussian(3, 2)
    for _ in range(5):
        w = SE3Weights.random(rng, spec, 4, 2, 3)
        back = iota_inv(iota(w))
        err = max(err, max(np.abs(back.blocks[k] - w.blocks[k]).max() for k in w.blocks))
        v = iota(SE3Weights.random(rng, spec, 4, 2, 3))
        v = type(v)({k: rng.normal(size=b.shape) for k, b in v.blocks.items()}, v.bias)
        again = iota(iota_inv(v))
        err = max(err, max(np.abs(again.blocks[k] - v.blocks[k]).max() for k in v.blocks))
    return err


@check("iota_inv_closed_form_valid", "conv", 0.0)
def _iota_cf(rng):
    return float(sum(not iota_inv_uses_closed_form(lp, L) for lp in range(5) for L in range(7)))


def _equiv(rng, which):
    spec = KernelBasisSpec.gaussian(2, 2, support_radius=1.2)
    n = 16
    x = _random_points(rng, n)
    f = FeatureField.random(rng, n, 3, 2)
    if which == "se3":
        w = SE3Weights.random(rng, spec, 4, 2, 2)
        layer = lambda fld, pts: se3_conv_layer(fld, pts, w, spec, lmax_out=4)
    else:
        v = random_tfn_weights(rng, spec, 3, 4, 2, 2)
        layer = lambda fld, pts: tfn_layer(fld, pts, v, spec, lmax_out=4)
    return oracles.equivariance_check(layer, f, x, 20, 1e-8, rng).max_abs_error


@check("equivariance_se3_layer", "conv", 1e-8)
def _equiv_se3(rng):
    return _equiv(rng, "se3")


@check("equivariance_tfn_layer", "conv", 1e-8)
def _equiv_tfn(rng):
    return _equiv(rng, "tfn")


@check("layer_linearity", "conv", 1e-12)
def _linearity(rng):
    spec, x, f = _small_problem(rng, n=5, lmax=1, lpmax=1)
    g = FeatureField.random(rng, 5, 1, 2)
    w1, w2 = SE3Weights.random(rng, spec, 2, 2, 2), SE3Weights.random(rng, spec, 2, 2, 2)
    a, b = 0.7, -1.3
    zero_bias = np.zeros(2)
    for w in (w1, w2):
        w.bias = zero_bias
    comb = SE3Weights({k: a * w1.blocks[k] + b * w2.blocks[k] for k in w1.blocks}, zero_bias)
    lhs = se3_conv_layer(f, x, comb, spec)
    rhs = se3_conv_layer(f, x, w1, spec).scaled(a) + se3_conv_layer(f, x, w2, spec).scaled(b)
    err = lhs.max_abs_diff(rhs)
    lhs = se3_conv_layer(f.scaled(a) + g.scaled(b), x, w1, spec)
    rhs = se3_conv_layer(f, x, w1, spec).scaled(a) + se3_conv_layer(g, x, w1, spec).scaled(b)
    err = max(err, lhs.max_abs_diff(rhs))
    vi = iota(comb)
    vs = iota(w1), iota(w2)
    err = max(err, max(np.abs(vi.blocks[k] - a * vs[0].blocks[k] - b * vs[1].blocks[k]).max() for k in vi.blocks))
    return err


@check("pointcloud_conv_oracle", "conv", 1e-12)
def _pc(rng):
    x = _random_points(rng, 7)
    f = rng.normal(size=7)
    spec = KernelBasisSpec.gaussian(1, 2)
    kern = lambda y: eval_kernel(spec, 1, 1, y)[..., 0]
    return float(np.abs(pointcloud_conv(f, x, kern) - oracles.naive_pointcloud_conv(f, x, kern)).max())


@check("tfn_vector_embedding", "conv", 1e-12)
def _embed(rng):
    spec = KernelBasisSpec.gaussian(1, 2)
    n = 4
    x = _random_points(rng, n)
    cin, cout = (2, 4, 3), (3, 5, 2)
    vecs = [rng.normal(size=(n, 2 * l + 1, c)) for l, c in enumerate(cin)]
    w = {}
    for l in range(3):
        for lp in range(2):
            for L in coupled_degrees(l, lp):
                if L < 3:
                    w[(l, lp, L)] = rng.normal(size=(cout[L], cin[l], spec.radial_count(lp)))
    bias = rng.normal(size=cout[0])
    fld, info = embed_tfn_input(vecs)
    err = max(np.abs(a - b).max() for a, b in zip(extract_tfn_output(fld, info.vector_channels), vecs))
    v = embed_tfn_weights(w, bias, cin, cout, spec)
    got = extract_tfn_output(tfn_layer(fld, x, v, spec, lmax_out=2), cout)
    ref = oracles.vector_tfn_layer(vecs, x, w, bias, lambda lp, y: eval_kernel_all(spec, lp, y),
                                   cg_tensor_real, cout)
    return max(err, max(np.abs(a - b).max() for a, b in zip(got, ref)))


# ---------------------------------------------------------------------------
# separability (oracle-backed)


def _poly_theta(rng, degree):
    """Random polynomial of the given degree in the entries of a rotation matrix."""
    vecs = rng.normal(size=(degree, 2, 3))
    coefs = rng.normal(size=degree + 1)

    def theta(s):
        acc = coefs[0] * np.ones(s.shape[:-2])
        prod = np.ones(s.shape[:-2])
        for k in range(degree):
            prod = prod * np.einsum("i,...ij,j->...", vecs[k, 0], s, vecs[k, 1])
            acc = acc + coefs[k + 1] * prod
        return acc
    return theta


def _theta_coeffs(theta, grid, lmax):
    return [b for b in oracles.numeric_wigner_decompose(theta(grid.rotations), grid, lmax)]


def _analysis(coeffs):
    return [c / (2 * l + 1) for l, c in enumerate(coeffs)]


def _field_samples(f: FeatureField, grid):
    """(N, |grid|, C) samples of the functions a field represents."""
    blocks = [np.moveaxis(b, 3, 1) for b in f.blocks]   # (N, C, a, b)
    return np.moveaxis(oracles.synthesize(blocks, grid.rotations), 1, 2)


def _field_from_samples(samples, grid, lmax):
    coeffs = oracles.numeric_wigner_decompose(np.moveaxis(samples, 1, 2), grid, lmax)  # (N, D, a, b)
    return FeatureField([np.moveaxis(c, 1, 3) for c in coeffs])


@check("so3_conv_coefficients", "oracles", 1e-8)
def _so3conv(rng):
    grid = exact_euler_grid(4)
    lmax = 3
    fc = [rng.normal(size=(2 * l + 1, 2 * l + 1)) for l in range(lmax + 1)]
    gc = [rng.normal(size=(2 * l + 1, 2 * l + 1)) for l in range(lmax + 1)]
    fs = oracles.synthesize(fc, grid.rotations)
    out = oracles.brute_force_so3_conv(fs, lambda s: oracles.synthesize(gc, s.reshape(-1, 3, 3)).reshape(s.shape[:-2]), grid)
    got = _analysis(oracles.numeric_wigner_decompose(out, grid, lmax))
    fa, ga = _analysis(fc), _analysis(gc)
    return max(np.abs(got[l] - fa[l] @ ga[l]).max() for l in range(lmax + 1))


@check("numeric_decompose_matches_forward_wt", "oracles", 1e-12)
def _ndec(rng):
    grid = exact_euler_grid(3)
    f = FeatureField.random(rng, 3, 2, 2)
    sig = inverse_wt(f, grid)
    fw = forward_wt(sig, 2)
    nd = _field_from_samples(sig.values, grid, 2)
    return fw.max_abs_diff(nd)


@check("separability_two_pass", "oracles", 1e-8)
def _sep(rng):
    grid = exact_euler_grid(4)
    n = 6
    x = _random_points(rng, n, 0.4)
    f = FeatureField.random(rng, n, 2, 1)
    spec = KernelBasisSpec.gaussian(2, 2, support_radius=1.2)
    samples = _field_samples(f, grid)
    err = 0.0
    for lp, r, mp in [(0, 1, 0), (1, 0, -1), (2, 1, 2)]:
        theta = _poly_theta(rng, 3)
        tc = _analysis(_theta_coeffs(theta, grid, 4))
        two_pass = so3_component(r3_component(f, x, spec, lp, r, mp), tc)
        term = SeparableTerm(np.ones((1, 1)), lambda y, lp=lp, r=r, mp=mp: eval_kernel(spec, lp, r, y)[..., mp + lp], theta)
        brute = oracles.brute_force_se3_conv(samples, x, grid, [term])
        err = max(err, two_pass.max_abs_diff(_field_from_samples(brute, grid, two_pass.max_degree)))
    return err


@check("separability_layer_factorization", "oracles", 1e-10)
def _sep_layer(rng):
    grid = exact_euler_grid(4)
    n = 5
    x = _random_points(rng, n, 0.4)
    cin, dmid, dout = 2, 3, 2
    f = FeatureField.random(rng, n, 2, cin)
    spec = KernelBasisSpec.gaussian(1, 1, support_radius=1.2)
    idx = spatial_kernel_index(spec)
    thetas = [_poly_theta(rng, 3), _poly_theta(rng, 2)]
    tcs = [_analysis(_theta_coeffs(t, grid, 3)) for t in thetas]
    a = rng.normal(size=(dmid, len(idx), cin))
    b = rng.normal(size=(dout, len(thetas), dmid))
    bias = rng.normal(size=dout)
    two_layers = so3_layer(r3_layer(f, x, spec, a), tcs, b, bias)
    c = np.einsum("ijm,mkl->ijkl", b, a)   # (B.A)_{ijkl}
    terms = []
    for j, th in enumerate(thetas):
        for k, (lp, r, mp) in enumerate(idx):
            terms.append(SeparableTerm(c[:, j, k, :],
                                       lambda y, lp=lp, r=r, mp=mp: eval_kernel(spec, lp, r, y)[..., mp + lp], th))
    brute = oracles.brute_force_se3_conv(_field_samples(f, grid), x, grid, terms, bias)
    return two_layers.max_abs_diff(_field_from_samples(brute, grid, two_layers.max_degree))


@check("multiview_two_layer", "oracles", 1e-9)
def _mv(rng):
    n = 8
    x = _random_points(rng, n)
    spec = KernelBasisSpec.gaussian(1, 2, support_radius=1.2)
    k = len(spatial_kernel_index(spec))
    f = rng.normal(size=(n, 2))
    layers = [ScalarLayer(rng.normal(size=(4, k, 2)), rng.normal(size=4)),
              ScalarLayer(rng.normal(size=(3, k, 4)), rng.normal(size=3))]
    relu = lambda v: np.maximum(v, 0.0)
    bank = lambda y: _kernel_bank(spec, y)
    err = 0.0
    for _ in range(5):
        r = random_rotation(rng)
        for i in range(n):
            got = multiview_eval(f, x, spec, layers, r, i, relu)
            ref = oracles.rotated_cnn_eval(f, x, bank, [(l.a, l.bias) for l in layers], r, i, relu)
            err = max(err, np.abs(got - ref).max())
    return err


@check("multiview_single_layer_wigner", "oracles", 1e-11)
def _mv1(rng):
    n = 8
    x = _random_points(rng, n)
    spec = KernelBasisSpec.gaussian(2, 2, support_radius=1.2)
    k = len(spatial_kernel_index(spec))
    f = rng.normal(size=(n, 2))
    layer = ScalarLayer(rng.normal(size=(3, k, 2)), rng.normal(size=3))
    lifted = FeatureField([f[:, None, None, :]])
    coeffs = r3_layer(lifted, x, spec, layer.a, layer.bias)
    bank = lambda y: _kernel_bank(spec, y)
    err = 0.0
    for _ in range(5):
        r = random_rotation(rng)
        vals = evaluate_at_rotation(coeffs, r.T)
        for i in range(n):
            ref = oracles.rotated_cnn_eval(f, x, bank, [(layer.a, layer.bias)], r, i)
            err = max(err, np.abs(vals[i] - ref).max())
    return err


# ---------------------------------------------------------------------------
# activation


@check("wt_roundtrip_exact_grid", "activation", 1e-9)
def _wt_rt(rng):
    lmax = 3
    grid = exact_euler_grid(2 * lmax + 1)
    f = FeatureField.random(rng, 3, lmax, 2)
    return forward_wt(inverse_wt(f, grid), lmax).max_abs_diff(f)


def _relu_equiv_error(fields, s, rotations):
    d_blocks = sample_wigner_blocks(s, max(f.max_degree for f in fields))
    err = 0.0
    for f in fields:
        base = relu_activation(f, s, d_blocks=d_blocks)
        for r in rotations:
            err = max(err, relu_activation(f.rotated(r), s, d_blocks=d_blocks).max_abs_diff(base.rotated(r)))
    return err


@check("relu_ico_exact_equivariance", "activation", 1e-10)
def _relu_ico(rng):
    g = icosahedral_group()
    fields = [FeatureField.random(rng, 4, l, 2) for l in (1, 2, 3)]
    return _relu_equiv_error(fields, g, g.rotations)


RELU_TREND_DEGREE = 3


def _relu_rms_error(f, s, rotations):
    d_blocks = sample_wigner_blocks(s, f.max_degree)
    base = relu_activation(f, s, d_blocks=d_blocks)
    acc = []
    for r in rotations:
        diff = relu_activation(f.rotated(r), s, d_blocks=d_blocks) + base.rotated(r).scaled(-1.0)
        acc.append(sum(float((b ** 2).sum()) for b in diff.blocks))
    return math.sqrt(float(np.mean(acc)))


@check("relu_density_trend_fps256_vs_ico60", "activation", float(np.nextafter(1.0, 0.0)))
def _relu_trend(rng):
    """Ratio of RMS full-SO(3) equivariance errors, 256 FPS samples over the 60 group elements."""
    f = FeatureField.random(rng, 32, RELU_TREND_DEGREE, 2)
    rots = [random_rotation(rng) for _ in range(10)]
    return _relu_rms_error(f, fps_rotations(256), rots) / _relu_rms_error(f, icosahedral_group(), rots)


@check("relu_nonnegative_identity", "activation", 1e-10)
def _relu_id(rng):
    grid = exact_euler_grid(3)
    f = FeatureField.zeros(2, 1, 2)
    f.blocks[0][:] = rng.uniform(0.5, 2.0, size=f.blocks[0].shape)
    f.blocks[1][:] = 0.05 * rng.normal(size=f.blocks[1].shape)
    return relu_activation(f, grid).max_abs_diff(f)


# ---------------------------------------------------------------------------
# worked examples from the operation contracts


@check("harmonics_worked_examples", "harmonics", 1e-12)
def _harm_examples(rng):
    err = float(np.abs(rotation_from_euler((math.pi / 2, 0.0, 0.0)) @ [1, 0, 0] - [0, 1, 0]).max())
    for _ in range(10):
        a, b, g = rng.uniform(0, 2 * math.pi), rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi)
        z = rotation_from_euler((a, b, g)) @ [0, 0, 1]
        err = max(err, np.abs(z - [math.sin(b) * math.cos(a), math.sin(b) * math.sin(a), math.cos(b)]).max())
    y1 = eval_real_spherical_harmonics(1, np.array([0.0, 0.0, 1.0]))
    err = max(err, abs(y1[1] - math.sqrt(3 / (4 * math.pi))), abs(y1[0]), abs(y1[2]))
    err = max(err, abs(eval_real_spherical_harmonics(0, rng.normal(size=3))[0] - 1 / math.sqrt(4 * math.pi)))
    c3 = transition_matrix(3)
    err = max(err, abs(np.count_nonzero(np.abs(c3) > 0) - 13), abs(np.count_nonzero(np.abs(c3).sum(axis=1)) - 7))
    c1 = transition_matrix(1)
    err = max(err, np.abs(c1 @ c1.conj().T - np.eye(3)).max(), abs(transition_matrix(0)[0, 0] - 1))
    alpha = rng.uniform(0, 2 * math.pi)
    d = wigner_D_complex(1, EulerZYZ(alpha, 0.0, 0.0))
    err = max(err, np.abs(d - np.diag(np.exp(-1j * alpha * np.arange(-1, 2)))).max())
    err = max(err, abs(wigner_D_real(0, random_rotation(rng))[0, 0] - 1.0))
    return err


@check("clebsch_worked_examples", "clebsch", 1e-12)
def _cg_examples(rng):
    err = abs(cg_tensor_real(0, 0, 0)[0, 0, 0] - 1.0)
    for l in range(5):
        q = cg_tensor_real(l, 0, l)[:, :, 0]
        err = max(err, np.abs(q - np.eye(2 * l + 1)).max())
        a = rng.normal(size=(2 * l + 1, 1))
        err = max(err, np.abs(project_composite(l, l, 0, a) - a[:, 0]).max())
    err = max(err, np.abs(project_composite(2, 1, 1, np.zeros((3, 3)))).max())
    return err


@check("basis_worked_examples", "basis", 1e-10)
def _basis_examples(rng):
    from .kernels import zernike_radial_coeffs
    err = float(np.abs(zernike_radial_coeffs(0, 0) - [1.0]).max())
    err = max(err, max(abs(len(zernike_radial_coeffs(l, l)) - 1) for l in range(6)))
    x, w = np.polynomial.legendre.leggauss(20)
    r, w = (x + 1) / 2, w / 2
    err = max(err, abs(float(np.sum(w * r ** 2 * zernike_radial(2, 0, r ** 2) * zernike_radial(0, 0, r ** 2)))))
    spec = KernelBasisSpec.gaussian(2, 3)
    err = max(err, np.abs(eval_kernel(spec, 2, 1, np.array([0.0, 1.2, 0.0]))).max())
    p = spec.profiles[0][1]
    u = _unit(rng, 1)[0]
    peak = eval_kernel(spec, 0, 1, p.rho * u)[0]
    err = max(err, abs(peak - 1 / math.sqrt(4 * math.pi)))
    err = max(err, max(0.0, eval_kernel(spec, 0, 1, (p.rho + 0.05) * u)[0] - peak))
    return err


@check("conv_worked_examples", "conv", 1e-12)
def _conv_examples(rng):
    from .conv import steerable_feature_conv
    spec = KernelBasisSpec.gaussian(2, 2, support_radius=1.2)
    # single point at the origin: out = f(0) kappa(0)
    err = abs(pointcloud_conv([2.5], np.zeros((1, 3)), lambda y: 1.5 + 0 * y[..., 0])[0] - 3.75)
    x = _random_points(rng, 6)
    f = FeatureField.random(rng, 6, 2, 2)
    comp = steerable_feature_conv(f, x, spec)
    shifted = steerable_feature_conv(f, x + rng.normal(size=3), spec)
    err = max(err, max(np.abs(comp[k] - shifted[k]).max() for k in comp))
    r = random_rotation(rng)
    rot = steerable_feature_conv(f.rotated(r), x @ r.T, spec)
    for (l, lp), c in comp.items():
        expect = np.einsum("Aa,Bb,iambrc->iAmBrc", wigner_D_real(l, r), wigner_D_real(lp, r), c)
        err = max(err, np.abs(rot[(l, lp)] - expect).max())
    # degree-0 kernels reduce to scalar convolutions of every coefficient
    g = r3_component(f, x, spec, 0, 1, 0)
    kern = lambda y: eval_kernel(spec, 0, 1, y)[..., 0]
    for l in range(3):
        for a in range(2 * l + 1):
            for b in range(2 * l + 1):
                ref = oracles.naive_pointcloud_conv(f.blocks[l][:, a, b, 0], x, kern)
                err = max(err, np.abs(g.blocks[l][:, a, b, 0] - ref).max())
    # theta = constant 1 keeps only the degree-0 block
    theta = [np.zeros((2 * l + 1, 2 * l + 1)) for l in range(3)]
    theta[0][0, 0] = 1.0
    out = so3_component(f, theta)
    err = max(err, np.abs(out.blocks[0] - f.blocks[0]).max(), max(np.abs(b).max() for b in out.blocks[1:]))
    # single point, degree-0 kernel: out^l = Q^{l,(l,0)} (f^l kappa_0(0)) V
    one = FeatureField.random(rng, 1, 2, 1)
    spec0 = KernelBasisSpec.gaussian(0, 1)
    c0 = eval_kernel(spec0, 0, 0, np.zeros(3))[0]
    v = random_tfn_weights(rng, spec0, 2, 2, 1, 1)
    v.bias[:] = 0.0
    got = tfn_layer(one, np.zeros((1, 3)), v, spec0)
    for l in range(3):
        ref = c0 * np.einsum("am,jm->aj", one.blocks[l][0, :, :, 0], v.blocks[(l, 0, l)][:, 0, 0, 0, :])
        err = max(err, np.abs(got.blocks[l][0, :, :, 0] - ref).max())
    return err


@check("activation_worked_examples", "activation", 1e-12)
def _act_examples(rng):
    grid = exact_euler_grid(3)
    f = FeatureField.zeros(1, 1, 1)
    f.blocks[0][0, 0, 0, 0] = 1.7
    err = float(np.abs(inverse_wt(f, grid).values - 1.7).max())
    r0 = random_rotation(rng)
    f.blocks[1][0, :, :, 0] = wigner_D_real(1, r0).T
    vals = inverse_wt(f, grid).values[0, :, 0]
    expect = 1.7 + np.trace(np.einsum("ab,sbc->sac", r0, grid.rotations), axis1=1, axis2=2)
    err = max(err, np.abs(vals - expect).max())
    const = RotationDomainSignal(grid, np.full((2, len(grid), 1), -0.4))
    back = forward_wt(const, 2)
    err = max(err, np.abs(back.blocks[0] + 0.4).max(), max(np.abs(b).max() for b in back.blocks[1:]))
    err = max(err, relu_activation(FeatureField.zeros(2, 2, 1), icosahedral_group()).max_abs())
    return err


@check("brute_force_worked_examples", "oracles", 1e-12)
def _bf_examples(rng):
    grid = exact_euler_grid(2)
    samples = rng.normal(size=(1, len(grid), 1))
    k0 = 0.8
    term = SeparableTerm(np.ones((1, 1)), lambda y: k0 + 0 * y[..., 0], lambda s: np.ones(s.shape[:-2]))
    out = oracles.brute_force_se3_conv(samples, np.zeros((1, 3)), grid, [term])
    err = float(np.abs(out - k0 * float(grid.weights @ samples[0, :, 0])).max())
    zero = SeparableTerm(np.ones((1, 1)), lambda y: 0 * y[..., 0], lambda s: np.ones(s.shape[:-2]))
    err = max(err, np.abs(oracles.brute_force_se3_conv(samples, np.zeros((1, 3)), grid, [zero])).max())
    return err


# ---------------------------------------------------------------------------
# runner


SUITES = ("harmonics", "clebsch", "basis", "sampling", "conv", "activation", "oracles")

ACCEPTANCE = {
    1: ["sh_steerability"],
    2: ["wigner_representation"],
    3: ["schur_orthogonality_grid9"],
    4: ["cg_orthogonality", "cg_decomposition"],
    5: ["cg_symmetries"],
    6: ["so3_conv_coefficients"],
    7: ["separability_two_pass", "separability_layer_factorization"],
    8: ["equivalence_se3_to_tfn", "equivalence_tfn_to_se3", "iota_roundtrip"],
    9: ["equivariance_se3_layer", "equivariance_tfn_layer"],
    10: ["relu_ico_exact_equivariance", "relu_density_trend_fps256_vs_ico60"],
    11: ["multiview_two_layer"],
    12: ["structural_ico_size", "structural_wigner_dimensions", "structural_cg_existence"],
    13: ["zernike_radial_orthogonality", "zernike_ball_orthogonality"],
}


def all_checks() -> list[Check]:
    return list(_REGISTRY)


def get_check(name: str) -> Check:
    for c in _REGISTRY:
        if c.name == name:
            return c
    raise KeyError(name)


def run_check(c: Check, seed: int = DEFAULT_SEED, tolerance: float | None = None) -> CheckResult:
    # each check gets its own stream so results do not depend on which others ran
    rng = np.random.default_rng([seed, sum(map(ord, c.name))])
    tol = c.tolerance if tolerance is None else tolerance
    return timed(c.name, tol, lambda: c.fn(rng))


def run_suite(suite: str | None = None, seed: int = DEFAULT_SEED, tolerance: float | None = None,
              progress: Callable[[CheckResult], None] | None = None) -> VerificationReport:
    if suite is not None and suite not in SUITES:
        raise KeyError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    rep = VerificationReport()
    for c in _REGISTRY:
        if suite is None or c.suite == suite:
            res = run_check(c, seed, tolerance)
            rep.add(res)
            if progress:
                progress(res)
    return rep
