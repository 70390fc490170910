import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from se3conv.clebsch_gordan import cg_tensor_real
from se3conv.conv import (ScalarLayer, SE3Weights, TFNWeights, _kernel_bank, embed_channels, embed_tfn_input,
                          embed_tfn_weights, evaluate_at_rotation, extract_tfn_output, iota, iota_inv,
                          iota_inv_uses_closed_form, kernel_table, multiview_eval, pointcloud_conv,
                          r3_component, r3_layer, random_tfn_weights, se3_conv_layer, so3_component, so3_layer,
                          spatial_kernel_index, steerable_feature_conv, tfn_layer, wigner_theta_basis)
from se3conv.errors import BandLimitMismatch, ShapeMismatch, SizeMismatch, TriangleViolation
from se3conv.fields import FeatureField
from se3conv.harmonics import random_rotation
from se3conv.kernels import KernelBasisSpec, eval_kernel, eval_kernel_all
from se3conv.oracles import equivariance_check, naive_pointcloud_conv, rotated_cnn_eval, vector_tfn_layer

seeds = st.integers(0, 2 ** 32 - 1)


def setup(seed, n=6, lmax=2, lpmax=1, count=2, c=2):
    rng = np.random.default_rng(seed)
    spec = KernelBasisSpec.gaussian(lpmax, count, support_radius=1.2)
    x = rng.uniform(-0.45, 0.45, size=(n, 3))
    return rng, spec, x, FeatureField.random(rng, n, lmax, c)


def test_pointcloud_conv_examples():
    assert pointcloud_conv([3.0], np.zeros((1, 3)), lambda y: 2.0)[0] == 6.0
    rng = np.random.default_rng(0)
    x = rng.normal(size=(3, 3))
    f = rng.normal(size=3)
    assert np.all(pointcloud_conv(f, x, lambda y: 0.0) == 0)
    k = lambda y: np.exp(-(y * y).sum(axis=-1)) * y[..., 0]
    assert np.abs(pointcloud_conv(f, x, k) - naive_pointcloud_conv(f, x, k)).max() < 1e-12
    excl = pointcloud_conv(f, x, lambda y: 1.0, exclude_self=True)
    assert np.allclose(excl, f.sum() - f)
    with pytest.raises(SizeMismatch):
        pointcloud_conv(f[:2], x, k)


def test_kernel_table_exclude_self():
    spec = KernelBasisSpec.gaussian(1, 2)
    x = np.random.default_rng(1).normal(size=(4, 3)) * 0.3
    tab = kernel_table(x, spec, exclude_self=True)
    assert np.all(tab[0][np.arange(4), np.arange(4)] == 0)
    full = kernel_table(x, spec)
    assert np.any(full[0][np.arange(4), np.arange(4)] != 0)


def test_composite_single_point():
    rng, spec, _, f = setup(0, n=1)
    comp = steerable_feature_conv(f, np.zeros((1, 3)), spec)
    k0 = eval_kernel_all(spec, 0, np.zeros(3))
    assert np.allclose(comp[(1, 0)][0], np.einsum("amc,rb->ambrc", f.blocks[1][0], k0))
    assert np.all(comp[(2, 1)] == 0)


def test_weights_validation():
    with pytest.raises(TriangleViolation):
        TFNWeights({(0, 1, 2): np.zeros((5, 1, 1, 1, 1))}, np.zeros(1))
    with pytest.raises(ShapeMismatch):
        TFNWeights({(1, 1, 1): np.zeros((3, 1, 1, 1, 2))}, np.zeros(1))
    with pytest.raises(ShapeMismatch):
        SE3Weights({(1, 1): np.zeros((3, 2, 1, 1, 3, 3))}, np.zeros(1))


def test_layer_shape_errors():
    rng, spec, x, f = setup(1)
    w = SE3Weights.random(rng, spec, 2, 3, 2)
    with pytest.raises(ShapeMismatch):
        se3_conv_layer(f, x, w, spec)
    with pytest.raises(SizeMismatch):
        se3_conv_layer(f, x[:-1], SE3Weights.random(rng, spec, 2, 2, 2), spec)
    ragged = FeatureField([np.zeros((6, 1, 1, 2)), np.zeros((6, 3, 3, 1))])
    with pytest.raises(ShapeMismatch):
        tfn_layer(ragged, x, random_tfn_weights(rng, spec, 1, 2, 2, 2), spec)


def test_zero_weights_give_bias_only():
    rng, spec, x, f = setup(2)
    w = SE3Weights.random(rng, spec, 3, 2, 2)
    zero = SE3Weights({k: np.zeros_like(b) for k, b in w.blocks.items()}, np.array([0.5, -1.0]))
    out = se3_conv_layer(f, x, zero, spec)
    assert np.allclose(out.blocks[0][:, 0, 0, :], [0.5, -1.0])
    out.blocks[0][:, 0, 0, :] = 0
    assert out.max_abs() == 0
    v0 = iota(zero)
    assert all(np.all(b == 0) for b in v0.blocks.values())
    assert tfn_layer(FeatureField.zeros(6, 2, 2), x, iota(w), spec).max_abs_diff(
        FeatureField.zeros(6, 0, 2).padded(3)) == pytest.approx(np.abs(w.bias).max())


def test_default_output_band():
    rng, spec, x, f = setup(3, lmax=2, lpmax=1)
    out = tfn_layer(f, x, random_tfn_weights(rng, spec, 2, 3, 2, 2), spec)
    assert out.max_degree == 3
    out = tfn_layer(f, x, random_tfn_weights(rng, spec, 2, 3, 2, 2), spec, lmax_out=1)
    assert out.max_degree == 1


@given(seeds)
@settings(max_examples=10, deadline=None)
def test_equivalence_both_directions(seed):
    rng, spec, x, f = setup(seed)
    w = SE3Weights.random(rng, spec, 3, 2, 3)
    assert se3_conv_layer(f, x, w, spec).max_abs_diff(tfn_layer(f, x, iota(w), spec)) < 1e-10
    v = random_tfn_weights(rng, spec, 2, 3, 2, 3)
    assert tfn_layer(f, x, v, spec).max_abs_diff(se3_conv_layer(f, x, iota_inv(v), spec)) < 1e-10


@given(seeds)
@settings(max_examples=10, deadline=None)
def test_iota_round_trips(seed):
    rng = np.random.default_rng(seed)
    spec = KernelBasisSpec.gaussian(3, 2)
    w = SE3Weights.random(rng, spec, 4, 2, 2)
    back = iota_inv(iota(w))
    assert max(np.abs(back.blocks[k] - w.blocks[k]).max() for k in w.blocks) < 1e-10
    v = iota(SE3Weights.random(rng, spec, 4, 2, 2))
    again = iota(iota_inv(v))
    assert max(np.abs(again.blocks[k] - v.blocks[k]).max() for k in v.blocks) < 1e-10


def test_iota_inverse_closed_form_everywhere():
    assert all(iota_inv_uses_closed_form(lp, L) for lp in range(5) for L in range(7))


def test_iota_is_cg_contraction():
    rng = np.random.default_rng(5)
    spec = KernelBasisSpec.gaussian(1, 1)
    w = SE3Weights.random(rng, spec, 2, 1, 1)
    v = iota(w)
    q = cg_tensor_real(2, 1, 1, "(l,l'),L")
    blk = w.blocks[(1, 1)][:, 0, 0, 0]
    ref = np.einsum("mnM,jnM->jm", q, blk)
    assert np.allclose(v.blocks[(2, 1, 1)][:, 0, 0, 0], ref, atol=1e-15)


@given(seeds, st.floats(-2, 2), st.floats(-2, 2))
@settings(max_examples=10, deadline=None)
def test_linearity(seed, a, b):
    rng, spec, x, f = setup(seed, n=4, lmax=1)
    g = FeatureField.random(rng, 4, 1, 2)
    w1, w2 = SE3Weights.random(rng, spec, 2, 2, 2), SE3Weights.random(rng, spec, 2, 2, 2)
    w1.bias[:] = 0
    w2.bias[:] = 0
    comb = SE3Weights({k: a * w1.blocks[k] + b * w2.blocks[k] for k in w1.blocks}, np.zeros(2))
    lhs = se3_conv_layer(f, x, comb, spec)
    rhs = se3_conv_layer(f, x, w1, spec).scaled(a) + se3_conv_layer(f, x, w2, spec).scaled(b)
    assert lhs.max_abs_diff(rhs) < 1e-12 * max(1.0, rhs.max_abs())
    lhs = tfn_layer(f.scaled(a) + g.scaled(b), x, iota(w1), spec)
    rhs = tfn_layer(f, x, iota(w1), spec).scaled(a) + tfn_layer(g, x, iota(w1), spec).scaled(b)
    assert lhs.max_abs_diff(rhs) < 1e-12 * max(1.0, rhs.max_abs())


@pytest.mark.parametrize("form", ["se3", "tfn"])
def test_equivariance(form):
    rng, spec, x, f = setup(11, n=10, lmax=3, lpmax=2)
    if form == "se3":
        w = SE3Weights.random(rng, spec, 3, 2, 2)
        layer = lambda fld, pts: se3_conv_layer(fld, pts, w, spec, lmax_out=3)
    else:
        v = random_tfn_weights(rng, spec, 3, 3, 2, 2)
        layer = lambda fld, pts: tfn_layer(fld, pts, v, spec, lmax_out=3, exclude_self=True)
    res = equivariance_check(layer, f, x, 20, 1e-8, rng)
    assert res.passed, res.line()


def test_so3_component():
    rng, spec, x, f = setup(4)
    theta = [np.zeros((2 * l + 1, 2 * l + 1)) for l in range(3)]
    theta[0][0, 0] = 1.0
    out = so3_component(f, theta)
    assert np.array_equal(out.blocks[0], f.blocks[0])
    assert not out.blocks[1].any()
    scalar = FeatureField([np.full((2, 1, 1, 1), 3.0)])
    assert so3_component(scalar, [np.array([[0.5]])]).blocks[0][0, 0, 0, 0] == 1.5
    with pytest.raises(BandLimitMismatch):
        so3_component(f, theta[:2])
    with pytest.raises(BandLimitMismatch):
        so3_component(f, [np.eye(1), np.eye(2), np.eye(5)])


def test_r3_component_degree_zero_kernel_is_scalar_conv():
    rng, spec, x, f = setup(6)
    g = r3_component(f, x, spec, 0, 1, 0)
    kern = lambda y: eval_kernel(spec, 0, 1, y)[..., 0]
    for l in range(3):
        ref = pointcloud_conv(f.blocks[l][:, 1 if l else 0, 0, 1], x, kern)
        assert np.allclose(g.blocks[l][:, 1 if l else 0, 0, 1], ref, atol=1e-14)
    assert r3_component(FeatureField.zeros(6, 2, 2), x, spec, 1, 0, -1).max_abs() == 0
    with pytest.raises(TriangleViolation):
        r3_component(f, x, spec, 1, 0, 2)


def test_se3_layer_is_sum_of_separable_layers():
    # the SE(3) kernel basis is kappa (x) (2L+1) D^L_{Mn}, whose Haar coefficients are e_{Mn}
    rng, spec, x, f = setup(7, lmax=1, lpmax=1, count=1, c=1)
    w = SE3Weights.random(rng, spec, 2, 1, 1)
    idx = spatial_kernel_index(spec)
    thetas = wigner_theta_basis(2)
    a = np.zeros((len(idx), len(idx), 1))
    a[:, :, 0] = np.eye(len(idx))
    mid = r3_layer(f, x, spec, a, lmax_out=2)
    total = None
    offs = {}
    for k, (lp, r, mp) in enumerate(idx):
        offs[(lp, r, mp)] = k
    b = np.zeros((1, len(thetas), len(idx)))
    j = 0
    for L in range(3):
        for M in range(2 * L + 1):
            for n in range(2 * L + 1):
                for (lp, r, mp), k in offs.items():
                    b[0, j, k] = w.blocks[(lp, L)][n, 0, 0, r, mp + lp, M]
                j += 1
    total = so3_layer(mid, thetas, b, w.bias)
    assert total.max_abs_diff(se3_conv_layer(f, x, w, spec)) < 1e-12


def test_separable_layer_shapes():
    rng, spec, x, f = setup(8)
    k = len(spatial_kernel_index(spec))
    with pytest.raises(ShapeMismatch):
        r3_layer(f, x, spec, np.zeros((2, k + 1, 2)))
    with pytest.raises(ShapeMismatch):
        so3_layer(f, [[np.eye(1), np.eye(3), np.eye(5)]], np.zeros((2, 2, 2)))


def test_embedding_round_trip_and_channels():
    rng = np.random.default_rng(9)
    counts = (2, 4, 11)
    vecs = [rng.normal(size=(3, 2 * l + 1, c)) for l, c in enumerate(counts)]
    f, info = embed_tfn_input(vecs)
    assert info.channels == embed_channels(counts) == 3
    back = extract_tfn_output(f, counts)
    assert all(np.array_equal(a, b) for a, b in zip(back, vecs))
    with pytest.raises(ShapeMismatch):
        embed_tfn_input([np.zeros((3, 1, 1)), np.zeros((3, 2, 1))])


def test_embedded_tfn_matches_vector_oracle():
    rng = np.random.default_rng(10)
    spec = KernelBasisSpec.gaussian(1, 2)
    x = rng.uniform(-0.4, 0.4, size=(4, 3))
    cin, cout = (3, 2), (2, 4, 1)
    vecs = [rng.normal(size=(4, 2 * l + 1, c)) for l, c in enumerate(cin)]
    w = {(l, lp, L): rng.normal(size=(cout[L], cin[l], 2))
         for l in range(2) for lp in range(2) for L in range(abs(l - lp), min(l + lp, 2) + 1)}
    bias = rng.normal(size=2)
    fld, _ = embed_tfn_input(vecs)
    v = embed_tfn_weights(w, bias, cin, cout, spec)
    got = extract_tfn_output(tfn_layer(fld, x, v, spec, lmax_out=2), cout)
    ref = vector_tfn_layer(vecs, x, w, bias, lambda lp, y: eval_kernel_all(spec, lp, y), cg_tensor_real, cout)
    assert max(np.abs(a - b).max() for a, b in zip(got, ref)) < 1e-12


def test_multiview_matches_rotated_cnn():
    rng = np.random.default_rng(12)
    spec = KernelBasisSpec.gaussian(1, 2, support_radius=1.2)
    x = rng.uniform(-0.45, 0.45, size=(6, 3))
    k = len(spatial_kernel_index(spec))
    f = rng.normal(size=6)
    layers = [ScalarLayer(rng.normal(size=(3, k, 1)), rng.normal(size=3)),
              ScalarLayer(rng.normal(size=(2, k, 3)), rng.normal(size=2))]
    relu = lambda v: np.maximum(v, 0)
    r = random_rotation(rng)
    for i in range(6):
        got = multiview_eval(f, x, spec, layers, r, i, relu)
        ref = rotated_cnn_eval(f, x, lambda y: _kernel_bank(spec, y), [(l.a, l.bias) for l in layers], r, i, relu)
        assert np.abs(got - ref).max() < 1e-9


def test_single_r3_layer_evaluated_at_rotation():
    rng = np.random.default_rng(13)
    spec = KernelBasisSpec.gaussian(2, 2, support_radius=1.2)
    x = rng.uniform(-0.45, 0.45, size=(5, 3))
    k = len(spatial_kernel_index(spec))
    f = rng.normal(size=(5, 1))
    a, bias = rng.normal(size=(2, k, 1)), rng.normal(size=2)
    out = r3_layer(FeatureField([f[:, None, None, :]]), x, spec, a, bias)
    r = random_rotation(rng)
    vals = evaluate_at_rotation(out, r.T)
    for i in range(5):
        ref = rotated_cnn_eval(f, x, lambda y: _kernel_bank(spec, y), [(a, bias)], r, i)
        assert np.abs(vals[i] - ref).max() < 1e-11
