import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from sympy import S
from sympy.physics.quantum.cg import CG

from se3conv.clebsch_gordan import (cg_scalar, cg_tensor_complex, cg_tensor_real, check_triangle,
                                    coupled_degrees, project_composite, triangle_ok)
from se3conv.errors import IndexOutOfRange, ShapeMismatch, TriangleViolation
from se3conv.harmonics import euler_from_rotation, random_rotation, wigner_D_complex, wigner_D_real
from se3conv.oracles import dense_contraction

triples = [(l, lp, L) for l in range(4) for lp in range(4) for L in coupled_degrees(l, lp)]


def test_triangle_rule():
    assert triangle_ok(1, 1, 2) and triangle_ok(2, 0, 2)
    assert not triangle_ok(1, 1, 3) and not triangle_ok(3, 0, 2)
    with pytest.raises(TriangleViolation):
        check_triangle(0, 0, 1)
    assert list(coupled_degrees(2, 3)) == [1, 2, 3, 4, 5]


@pytest.mark.parametrize("l,lp,L", triples)
def test_scalar_matches_sympy(l, lp, L):
    for m in range(-l, l + 1):
        for mp in range(-lp, lp + 1):
            M = m + mp
            if abs(M) > L:
                continue
            ref = float(CG(S(l), S(m), S(lp), S(mp), S(L), S(M)).doit())
            assert abs(cg_scalar(l, lp, m, mp, L, M) - ref) < 1e-13


def test_scalar_examples():
    assert cg_scalar(1, 1, 0, 1, 2, 0) == 0.0
    assert abs(cg_scalar(1, 1, 1, -1, 0, 0) - 1 / math.sqrt(3)) < 1e-15
    for l in range(6):
        for m in range(-l, l + 1):
            assert abs(cg_scalar(l, 0, m, 0, l, m) - 1.0) < 1e-14


def test_scalar_errors():
    with pytest.raises(TriangleViolation):
        cg_scalar(1, 1, 0, 0, 3, 0)
    with pytest.raises(IndexOutOfRange):
        cg_scalar(1, 1, 2, 0, 2, 2)
    with pytest.raises(IndexOutOfRange):
        cg_scalar(1, 1, 0, 0, 1, -2)


def test_large_degree_stable():
    # row normalization at moderately large degree
    l, lp, L = 8, 7, 9
    q = cg_tensor_complex(l, lp, L)
    assert np.abs((q ** 2).sum(axis=(1, 2)) - 1).max() < 1e-11


def test_tensor_examples():
    assert cg_tensor_complex(0, 0, 0).shape == (1, 1, 1)
    assert cg_tensor_real(0, 0, 0)[0, 0, 0] == pytest.approx(1.0, abs=1e-15)
    q = cg_tensor_complex(1, 1, 2)
    assert np.abs((q ** 2).sum(axis=(1, 2)) - 1).max() < 1e-14
    q = cg_tensor_complex(1, 1, 1, "(l,l'),L")
    assert np.abs(q + q.transpose(1, 0, 2)).max() < 1e-15
    for l in range(5):
        assert np.abs(cg_tensor_real(l, 0, l)[:, :, 0] - np.eye(2 * l + 1)).max() < 1e-14
    with pytest.raises(TriangleViolation):
        cg_tensor_real(1, 1, 3)
    with pytest.raises(ValueError):
        cg_tensor_real(1, 1, 1, "sideways")


def test_orientations_are_transposes():
    for l, lp, L in triples:
        for fn in (cg_tensor_real, cg_tensor_complex):
            assert np.array_equal(fn(l, lp, L, "(l,l'),L"), fn(l, lp, L).transpose(1, 2, 0))


def test_real_tensors_are_real_and_cached_readonly():
    q = cg_tensor_real(2, 1, 2)
    assert q.dtype == np.float64
    assert cg_tensor_real(2, 1, 2) is q
    with pytest.raises(ValueError):
        q[0, 0, 0] = 1.0


@pytest.mark.parametrize("form", ["real", "complex"])
def test_completeness(form):
    fn = cg_tensor_real if form == "real" else cg_tensor_complex
    for l, lp in itertools.product(range(4), repeat=2):
        n = (2 * l + 1) * (2 * lp + 1)
        total = sum(fn(l, lp, L, "(l,l'),L").reshape(n, -1) @ fn(l, lp, L).reshape(-1, n)
                    for L in coupled_degrees(l, lp))
        assert np.abs(total - np.eye(n)).max() < 1e-12


@pytest.mark.parametrize("form", ["real", "complex"])
def test_orthogonality(form):
    fn = cg_tensor_real if form == "real" else cg_tensor_complex
    for l, lp in itertools.product(range(4), repeat=2):
        n = (2 * l + 1) * (2 * lp + 1)
        for L1, L2 in itertools.product(coupled_degrees(l, lp), repeat=2):
            prod = fn(l, lp, L1).reshape(-1, n) @ fn(l, lp, L2, "(l,l'),L").reshape(n, -1)
            expect = np.eye(2 * L1 + 1) if L1 == L2 else np.zeros((2 * L1 + 1, 2 * L2 + 1))
            assert np.abs(prod - expect).max() < 1e-12


@given(st.integers(0, 2 ** 32 - 1))
@settings(max_examples=10, deadline=None)
def test_decomposition(seed):
    r = random_rotation(np.random.default_rng(seed))
    e = euler_from_rotation(r)
    for l, lp, L in triples:
        q = cg_tensor_real(l, lp, L).reshape(2 * L + 1, -1)
        lhs = wigner_D_real(L, r) @ q
        rhs = q @ np.kron(wigner_D_real(l, r), wigner_D_real(lp, r))
        assert np.abs(lhs - rhs).max() < 1e-10
        qc = cg_tensor_complex(l, lp, L).reshape(2 * L + 1, -1)
        lhs = wigner_D_complex(L, e) @ qc
        rhs = qc @ np.kron(wigner_D_complex(l, e), wigner_D_complex(lp, e))
        assert np.abs(lhs - rhs).max() < 1e-10


def test_exchange_symmetry():
    for l, lp, L in triples:
        a = cg_tensor_complex(l, lp, L, "(l,l'),L")
        b = cg_tensor_complex(lp, l, L, "(l,l'),L")
        assert np.abs(a - (-1) ** (l + lp - L) * b.transpose(1, 0, 2)).max() < 1e-14


def test_project_composite():
    rng = np.random.default_rng(0)
    assert np.all(project_composite(2, 1, 1, np.zeros((3, 3))) == 0)
    a = rng.normal(size=(5, 1))
    assert np.abs(project_composite(2, 2, 0, a) - a[:, 0]).max() < 1e-14
    for l, lp, L in triples:
        a = rng.normal(size=(2 * l + 1, 2 * lp + 1))
        ref = dense_contraction(cg_tensor_real(l, lp, L), a)
        assert np.abs(project_composite(L, l, lp, a) - ref).max() < 1e-13
    batched = rng.normal(size=(3, 3, 4))
    out = project_composite(1, 1, 1, batched)
    assert out.shape == (3, 4)
    with pytest.raises(ShapeMismatch):
        project_composite(1, 1, 1, np.zeros((3, 2)))


def test_real_coupling_of_vectors_is_cross_product():
    # degree-1 real harmonics are (y, z, x); the L=1 coupling is proportional to the cross product
    rng = np.random.default_rng(2)
    u, v = rng.normal(size=3), rng.normal(size=3)
    perm = [1, 2, 0]
    out = project_composite(1, 1, 1, np.outer(u[perm], v[perm]))
    cross = np.cross(u, v)[perm]
    ratio = out / cross
    assert np.abs(ratio - ratio[0]).max() < 1e-12
    assert abs(abs(ratio[0]) - 1 / math.sqrt(2)) < 1e-12
