import math

import numpy as np
import pytest

import wavekernel as wk


def unit(x_max=1.0, step=0.005):
    return wk.Potential.constant(np.ones((1, 1), dtype=complex), x_max, step)


def test_zero_potential_gives_free_wave():
    p = wk.Potential.zero(1, 1.0, 0.005)
    field = wk.solve_goursat(p, 1.0, 0.01)
    assert field.iterations == 1
    f = wk.Control.bump(1.0, 0.1, 0.9, np.ones(1, dtype=complex))
    snap = wk.propagate(p, field, f, 1.0, 100)
    expected = np.array([f(1.0 - x)[0] for x in snap["x"]])
    assert np.max(np.abs(snap["u"][0] - expected)) <= 1e-12


def test_bessel_kernel():
    c = 1.0
    p = wk.Potential.constant(np.full((1, 1), c, dtype=complex), 1.0, 0.005)
    field = wk.solve_goursat(p, 1.0, 0.01)
    got = field.w(0.3, 0.9)[0, 0]
    assert abs(got - wk.bessel_kernel_constant(c, 0.3, 0.9)) <= 1e-3
    assert wk.check_goursat(p, field)["diagonal"] == 0.0
    assert wk.apriori_bound_excess(p, field) <= 0.0


def test_round_trip_and_condition():
    p = wk.Potential.preset("hermitian2", 1.0, 0.005)
    field = wk.solve_goursat(p, 1.0, 0.01)
    f = wk.Control.bump(1.0, 0.1, 0.8, np.array([1.0, 0.5j]))
    u = wk.apply_W(p, field, f, 1.0, 100)
    system = wk.build_volterra(field, 1.0, 100)
    back = wk.invert_W(system, u)
    samples = f.sample(100)
    assert np.linalg.norm(back - samples) <= 1e-10 * np.linalg.norm(samples)
    cond = wk.condition_estimate(system)
    assert cond["sigma_min"] <= cond["sigma_max"]
    assert math.isfinite(wk.inverse_h2_norm(system))


def test_oracle_agreement():
    p = unit(2.0)
    field = wk.solve_goursat(p, 1.0, 0.01)
    f = wk.Control.bump(1.0, 0.1, 0.9, np.ones(1, dtype=complex))
    a = wk.propagate(p, field, f, 1.0, 100)
    b = wk.fd_solve(p, f, 1.0, 100)
    assert wk.compare(a, b)["rel_l2"] <= 1e-3


def test_certification_report():
    p = unit()
    field = wk.solve_goursat(p, 1.0, 0.01)
    report = wk.certify_h2_bound(p, field, 1.0, trials=10, seed=3, N=64)
    assert report["violations"] == 0
    assert report["empirical_ratio"] <= report["bound_h2"]


def test_errors_map_to_python_exceptions():
    p = unit()
    with pytest.raises(ValueError):
        wk.solve_goursat(p, 1.0, 0.03)
    with pytest.raises(IndexError):
        wk.solve_goursat(p, 2.0, 0.01)
    with pytest.raises(RuntimeError):
        wk.solve_goursat(wk.Potential.constant(np.full((1, 1), 400.0, dtype=complex), 1.0, 0.025), 1.0, 0.05,
                         tol=1e-14, max_sweeps=2)
    with pytest.raises(ValueError):
        wk.Potential.constant(np.array([[1.0, 1.0], [0.0, 1.0]], dtype=complex), 1.0, 0.01)


def test_weyl_solution_exponential():
    p = wk.Potential.constant(np.full((1, 1), 4.0, dtype=complex), 1.0, 0.01)
    K = wk.weyl_solution(p, 1.0, np.full((1, 1), 4.0, dtype=complex))
    assert abs(K.at(0.5)[0, 0] - math.exp(-1.0)) <= 1e-8
