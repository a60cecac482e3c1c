"""Derivative stack: potential, gradient, mass-scaled Hessian, third tensor."""

import numpy as np
import numpy.testing as npt
import pytest

from nbodylab.errors import CollisionError
from nbodylab.potential import (
    Configuration,
    MassVector,
    acceleration,
    eval_potential,
    gradient,
    hessian_w,
    third_contract,
)


def random_problem(rng, n, d, spread=2.0, min_sep=0.3):
    masses = MassVector(rng.uniform(0.2, 3.0, size=n))
    while True:
        coords = rng.uniform(-spread, spread, size=(n, d))
        diff = coords[:, None, :] - coords[None, :, :]
        dist = np.sqrt((diff**2).sum(-1))
        np.fill_diagonal(dist, np.inf)
        if dist.min() > min_sep:
            return masses, Configuration(coords)


def fd_gradient(masses, coords, h=1e-6):
    base = coords.coords
    out = np.zeros_like(base)
    for i in range(base.shape[0]):
        for a in range(base.shape[1]):
            qp, qm = base.copy(), base.copy()
            qp[i, a] += h
            qm[i, a] -= h
            out[i, a] = (eval_potential(masses, Configuration(qp))
                         - eval_potential(masses, Configuration(qm))) / (2 * h)
    return out


@pytest.mark.parametrize("n,d", [(3, 1), (3, 2), (4, 2), (5, 3)])
def test_gradient_matches_finite_differences(n, d):
    rng = np.random.default_rng(11)
    for _ in range(5):
        masses, cfg = random_problem(rng, n, d)
        g = gradient(masses, cfg)
        fd = fd_gradient(masses, cfg)
        npt.assert_allclose(g, fd, rtol=0, atol=1e-5 * max(1.0, np.abs(g).max()))


@pytest.mark.parametrize("n,d", [(3, 1), (3, 2), (4, 3)])
def test_hessian_w_matches_finite_differences_of_acceleration(n, d):
    # W rows are mass-scaled: row (i,a) differentiates acceleration_i, not force_i
    rng = np.random.default_rng(12)
    masses, cfg = random_problem(rng, n, d)
    w = hessian_w(masses, cfg).matrix
    h = 1e-6
    base = cfg.coords
    for j in range(n):
        for b in range(d):
            qp, qm = base.copy(), base.copy()
            qp[j, b] += h
            qm[j, b] -= h
            col = (acceleration(masses, Configuration(qp))
                   - acceleration(masses, Configuration(qm))).reshape(-1) / (2 * h)
            npt.assert_allclose(w[:, j * d + b], col, rtol=0,
                                atol=1e-4 * max(1.0, np.abs(w).max()))


def test_third_contract_matches_finite_differences_of_hessian():
    rng = np.random.default_rng(13)
    masses, cfg = random_problem(rng, 3, 2)
    x, y, z = rng.normal(size=(3, 6))
    h = 1e-5

    def hess_contract(coords):
        # plain (unscaled) second derivative contracted with x, y
        m = hessian_w(masses, coords).matrix
        scale = np.repeat(masses.values, 2)
        return float(x @ (scale[:, None] * m) @ y)

    fd = 0.0
    for idx in range(6):
        qp = cfg.coords.copy().reshape(-1)
        qm = qp.copy()
        qp[idx] += h
        qm[idx] -= h
        step = (hess_contract(Configuration(qp.reshape(3, 2)))
                - hess_contract(Configuration(qm.reshape(3, 2)))) / (2 * h)
        fd += step * z[idx]
    val = third_contract(masses, cfg, x, y, z)
    npt.assert_allclose(val, fd, rtol=1e-5, atol=1e-7)


def test_third_contract_symmetric_in_arguments():
    rng = np.random.default_rng(14)
    masses, cfg = random_problem(rng, 4, 2)
    x, y, z = rng.normal(size=(3, 8))
    ref = third_contract(masses, cfg, x, y, z)
    for perm in ((x, z, y), (y, x, z), (z, y, x)):
        npt.assert_allclose(third_contract(masses, cfg, *perm), ref, rtol=1e-12)


@pytest.mark.parametrize("lam", [0.5, 2.0, 7.3])
def test_homogeneity_scalings(lam):
    rng = np.random.default_rng(15)
    masses, cfg = random_problem(rng, 4, 2)
    scaled = Configuration(lam * cfg.coords)
    npt.assert_allclose(eval_potential(masses, scaled),
                        eval_potential(masses, cfg) / lam, rtol=1e-10)
    npt.assert_allclose(gradient(masses, scaled),
                        gradient(masses, cfg) / lam**2, rtol=1e-10)
    npt.assert_allclose(hessian_w(masses, scaled).matrix,
                        hessian_w(masses, cfg).matrix / lam**3, rtol=1e-10)
    v = rng.normal(size=8)
    npt.assert_allclose(third_contract(masses, scaled, v, v, v),
                        third_contract(masses, cfg, v, v, v) / lam**4, rtol=1e-9)


def test_gradient_row_sums_vanish_per_axis():
    rng = np.random.default_rng(16)
    for n, d in ((3, 2), (5, 3)):
        masses, cfg = random_problem(rng, n, d)
        g = gradient(masses, cfg)
        npt.assert_allclose(g.sum(axis=0), np.zeros(d), atol=1e-12)


def test_spectrum_real_for_positive_masses_and_matches_eigvals():
    rng = np.random.default_rng(17)
    masses, cfg = random_problem(rng, 4, 2)
    hw = hessian_w(masses, cfg)
    spec = hw.spectrum()
    raw = np.sort(np.linalg.eigvals(hw.matrix).real)
    npt.assert_allclose(spec, raw, atol=1e-9)
    assert spec.shape == (8,)


def test_trace_formula_one_dimensional():
    # tr(W) = sum over pairs of 2 (m_i + m_j) / r_ij^3 in one dimension
    rng = np.random.default_rng(18)
    masses, cfg = random_problem(rng, 4, 1)
    x = cfg.coords[:, 0]
    m = masses.values
    expected = 0.0
    for i in range(4):
        for j in range(i + 1, 4):
            expected += 2.0 * (m[i] + m[j]) / abs(x[i] - x[j]) ** 3
    npt.assert_allclose(np.trace(hessian_w(masses, cfg).matrix), expected, rtol=1e-12)


def test_flattening_is_body_major():
    rng = np.random.default_rng(19)
    masses, cfg = random_problem(rng, 3, 2)
    w = hessian_w(masses, cfg).matrix
    h = 1e-6
    # perturbing body 2 along axis 1 must read out column index 2*2+1
    qp, qm = cfg.coords.copy(), cfg.coords.copy()
    qp[2, 1] += h
    qm[2, 1] -= h
    col = (acceleration(masses, Configuration(qp))
           - acceleration(masses, Configuration(qm))).reshape(-1) / (2 * h)
    npt.assert_allclose(w[:, 5], col, atol=1e-4 * max(1.0, np.abs(w).max()))


def test_collisions_raise():
    masses = MassVector(np.ones(3))
    coords = Configuration(np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]))
    with pytest.raises(CollisionError):
        eval_potential(masses, coords)
    with pytest.raises(CollisionError):
        gradient(masses, coords)


def test_mass_vector_and_configuration_basics():
    mv = MassVector(np.array([1.0, 2.0, -0.5]))
    assert mv.n == 3
    npt.assert_allclose(mv.total, 2.5)
    assert not mv.all_positive()
    assert MassVector(np.ones(2)).all_positive()
    one_d = Configuration(np.array([-1.0, 0.0, 2.0]))
    assert one_d.coords.shape == (3, 1)
    npt.assert_allclose(one_d.flat(), [-1.0, 0.0, 2.0])
