import math

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from se3conv.config import get_tolerances, set_tolerances
from se3conv.errors import DegreeTooLarge, NotARotation
from se3conv.harmonics import (EulerZYZ, eval_real_spherical_harmonics, euler_from_rotation,
                               euler_from_rotations, random_rotation, rotation_angle, rotation_from_euler,
                               rotation_y, rotation_z, rotations_from_euler, transition_matrix,
                               wigner_D_complex, wigner_D_real, wigner_D_real_euler, wigner_D_real_many,
                               wigner_small_d)
from se3conv.oracles import legendre_real_sh

angles = st.tuples(st.floats(0, 2 * math.pi), st.floats(0, math.pi), st.floats(0, 2 * math.pi))
seeds = st.integers(0, 2 ** 32 - 1)


def sympy_real_sh(l, m, x):
    """Real harmonic from sympy's complex Ynm with the Condon-Shortley phase removed."""
    th, ph = sympy.symbols("theta phi")
    r = np.linalg.norm(x)
    theta, phi = math.acos(x[2] / r), math.atan2(x[1], x[0])
    y = complex(sympy.Ynm(l, abs(m), th, ph).expand(func=True).subs({th: theta, ph: phi}).evalf(20))
    if m == 0:
        return y.real
    sign = (-1) ** abs(m)
    return math.sqrt(2) * sign * (y.real if m > 0 else y.imag)


def test_euler_examples():
    assert np.allclose(rotation_from_euler((0, 0, 0)), np.eye(3))
    assert np.allclose(rotation_from_euler((math.pi / 2, 0, 0)) @ [1, 0, 0], [0, 1, 0], atol=1e-15)
    e = euler_from_rotation(np.eye(3))
    assert (e.alpha, e.beta, e.gamma) == (0.0, 0.0, 0.0)
    e = euler_from_rotation(rotation_z(1.1))
    assert abs(e.alpha - 1.1) < 1e-14 and e.beta == 0.0 and e.gamma == 0.0


def test_euler_gimbal_beta_pi():
    r = rotation_from_euler((0.4, math.pi, 1.0))
    e = euler_from_rotation(r)
    assert abs(e.beta - math.pi) < 1e-12
    assert e.gamma == 0.0
    assert np.abs(rotation_from_euler(e) - r).max() < 1e-12


@given(angles)
def test_euler_z_axis_image(e):
    a, b, g = e
    z = rotation_from_euler(e) @ [0, 0, 1]
    assert np.allclose(z, [math.sin(b) * math.cos(a), math.sin(b) * math.sin(a), math.cos(b)], atol=1e-14)


@given(seeds)
def test_euler_roundtrip(seed):
    r = random_rotation(np.random.default_rng(seed))
    assert np.abs(rotation_from_euler(euler_from_rotation(r)) - r).max() < 1e-12


def test_euler_vectorized_matches_scalar():
    rng = np.random.default_rng(1)
    rs = np.array([random_rotation(rng) for _ in range(20)] + [rotation_z(0.3), rotation_y(math.pi)])
    e = euler_from_rotations(rs)
    assert np.abs(rotations_from_euler(*e.T) - rs).max() < 1e-12


def test_not_a_rotation():
    with pytest.raises(NotARotation):
        euler_from_rotation(np.diag([1.0, 1.0, -1.0]))
    with pytest.raises(NotARotation):
        wigner_D_real(1, 1.01 * np.eye(3))
    with pytest.raises(NotARotation):
        wigner_D_real(1, np.eye(2))
    with pytest.raises(NotARotation):
        wigner_D_real(1, np.full((3, 3), np.nan))


def test_tolerance_is_configurable():
    saved = get_tolerances()
    r = np.eye(3) + 1e-7
    try:
        set_tolerances(saved.replace(orth=1e-5))
        wigner_D_real(1, r)
    finally:
        set_tolerances(saved)
    with pytest.raises(NotARotation):
        wigner_D_real(1, r)


def test_degree_ceiling():
    with pytest.raises(DegreeTooLarge):
        wigner_D_real(17, np.eye(3))
    with pytest.raises(ValueError):
        eval_real_spherical_harmonics(-1, np.ones(3))


def test_sh_constants():
    assert abs(eval_real_spherical_harmonics(0, np.array([0.3, -2.0, 5.0]))[0] - 0.28209479177387814) < 1e-16
    y = eval_real_spherical_harmonics(1, np.array([0.0, 0.0, 1.0]))
    assert abs(y[1] - 0.4886025119029199) < 1e-15
    assert y[0] == 0.0 and y[2] == 0.0
    # no Condon-Shortley phase: Y_{1,1} is +sqrt(3/4pi) x
    assert abs(eval_real_spherical_harmonics(1, np.array([1.0, 0, 0]))[2] - math.sqrt(3 / (4 * math.pi))) < 1e-15


@pytest.mark.parametrize("l", range(5))
def test_sh_matches_sympy(l):
    rng = np.random.default_rng(l)
    for x in rng.normal(size=(3, 3)):
        u = x / np.linalg.norm(x)
        y = eval_real_spherical_harmonics(l, u)
        for m in range(-l, l + 1):
            assert abs(y[m + l] - sympy_real_sh(l, m, u)) < 1e-12


@pytest.mark.parametrize("l", range(9))
def test_sh_matches_legendre_oracle(l):
    x = np.random.default_rng(l).normal(size=(40, 3))
    assert np.abs(eval_real_spherical_harmonics(l, x) - legendre_real_sh(l, x)).max() < 1e-10 * max(1, 3 ** l)


@given(st.integers(0, 6), seeds, st.floats(0.1, 3.0))
def test_sh_homogeneous(l, seed, t):
    x = np.random.default_rng(seed).normal(size=3)
    y = eval_real_spherical_harmonics(l, x)
    assert np.allclose(eval_real_spherical_harmonics(l, t * x), t ** l * y, rtol=1e-12, atol=1e-12)


def test_sh_batched_shape():
    x = np.random.default_rng(0).normal(size=(4, 5, 3))
    assert eval_real_spherical_harmonics(3, x).shape == (4, 5, 7)


@given(st.integers(0, 6), seeds)
def test_steerability(l, seed):
    rng = np.random.default_rng(seed)
    r = random_rotation(rng)
    x = rng.normal(size=3)
    x /= np.linalg.norm(x)
    lhs = eval_real_spherical_harmonics(l, r @ x)
    rhs = wigner_D_real(l, r) @ eval_real_spherical_harmonics(l, x)
    assert np.abs(lhs - rhs).max() < 1e-10


def test_transition_matrix():
    assert transition_matrix(0).shape == (1, 1) and transition_matrix(0)[0, 0] == 1
    for l in range(6):
        c = transition_matrix(l)
        assert np.abs(c @ c.conj().T - np.eye(2 * l + 1)).max() < 1e-15
    c3 = transition_matrix(3)
    assert np.count_nonzero(c3) == 13
    assert np.count_nonzero(np.abs(c3).sum(axis=1)) == 7


def test_small_d():
    for l in range(6):
        assert np.abs(wigner_small_d(l, 0.0) - np.eye(2 * l + 1)).max() < 1e-15
    b = np.linspace(0, math.pi, 7)
    assert np.abs(wigner_small_d(1, b)[:, 1, 1] - np.cos(b)).max() < 1e-15
    d = wigner_small_d(2, 0.7)
    assert np.abs(d @ d.T - np.eye(5)).max() < 1e-12


def test_small_d_matches_sympy():
    from sympy.physics.quantum.spin import Rotation
    beta = 0.9
    for l in range(4):
        d = wigner_small_d(l, beta)
        for m in range(-l, l + 1):
            for mp in range(-l, l + 1):
                ref = complex(Rotation.d(l, m, mp, beta).doit().evalf(20))
                assert abs(d[m + l, mp + l] - ref) < 1e-12


def test_complex_wigner():
    assert np.allclose(wigner_D_complex(3, EulerZYZ(0, 0, 0)), np.eye(7))
    d = wigner_D_complex(1, EulerZYZ(0.8, 0, 0))
    assert np.abs(d - np.diag(np.exp(-1j * 0.8 * np.array([-1, 0, 1])))).max() < 1e-15
    rng = np.random.default_rng(3)
    for l in range(5):
        d = wigner_D_complex(l, EulerZYZ(*rng.uniform(0, 3, size=3)))
        assert np.abs(d.conj().T @ d - np.eye(2 * l + 1)).max() < 1e-12


def test_real_wigner_is_realification():
    rng = np.random.default_rng(4)
    r = random_rotation(rng)
    e = euler_from_rotation(r)
    for l in range(5):
        c = transition_matrix(l)
        dr = c @ wigner_D_complex(l, e) @ c.conj().T
        assert np.abs(dr.imag).max() < 1e-13
        assert np.abs(dr.real - wigner_D_real(l, r)).max() < 1e-13


def test_wigner_degree_one_conjugate_to_rotation():
    rng = np.random.default_rng(5)
    for _ in range(20):
        r = random_rotation(rng)
        assert wigner_D_real(0, r).tolist() == [[1.0]]
        d1 = wigner_D_real(1, r)
        assert abs(np.trace(d1) - np.trace(r)) < 1e-10
        # in the (y, z, x) ordering of the m = -1, 0, 1 harmonics D^1 is R itself
        p = np.array([[0, 1, 0], [0, 0, 1], [1, 0, 0]])
        assert np.abs(d1 - p @ r @ p.T).max() < 1e-12


@given(st.integers(0, 6), seeds)
@settings(max_examples=40)
def test_representation_and_orthogonality(l, seed):
    rng = np.random.default_rng(seed)
    r1, r2 = random_rotation(rng), random_rotation(rng)
    d1, d2 = wigner_D_real(l, r1), wigner_D_real(l, r2)
    assert np.abs(wigner_D_real(l, r1 @ r2) - d1 @ d2).max() < 1e-10
    assert np.abs(d1.T @ d1 - np.eye(2 * l + 1)).max() < 1e-10
    assert np.abs(wigner_D_real(l, r1.T) - d1.T).max() < 1e-10


def test_vectorized_wigner_agrees():
    rng = np.random.default_rng(6)
    rs = np.array([random_rotation(rng) for _ in range(10)])
    e = euler_from_rotations(rs)
    for l in range(4):
        many = wigner_D_real_many(l, rs)
        by_euler = wigner_D_real_euler(l, *e.T)
        one = np.array([wigner_D_real(l, r) for r in rs])
        assert np.abs(many - one).max() < 1e-13
        assert np.abs(by_euler - one).max() < 1e-13


def test_rotation_angle():
    assert abs(rotation_angle(rotation_z(0.5)) - 0.5) < 1e-15
    assert abs(rotation_angle(rotation_y(math.pi)) - math.pi) < 1e-7
