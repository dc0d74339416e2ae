import numpy as np
import pytest

from conftest import make_operator
from viscodg.dg_core import NumericalInstability
from viscodg.timeint import LSRK54, RK4A, RK4B, RK4C, estimate_dt, trace_constant


def exact_solution(lam, t):
    # y' = lam y + cos t, y(0) = 1
    part = (-lam * np.cos(t) + np.sin(t)) / (lam**2 + 1)
    return (1 + lam / (lam**2 + 1)) * np.exp(lam * t) + part


def test_coefficients_consistent():
    assert RK4A[0] == 0 and RK4C[0] == 0
    # a single step on y' = y reproduces the degree-4 Taylor polynomial
    q = LSRK54(0.1).step(lambda y, t: y, np.array([1.0]), 0.0, 0.1)
    assert q[0] == pytest.approx(1 + 0.1 + 0.1**2 / 2 + 0.1**3 / 6 + 0.1**4 / 24, abs=1e-6)
    assert len(RK4B) == 5


def test_fourth_order_with_forcing():
    lam = -1.0 + 2.0j
    rhs = lambda q, t: lam * q + np.cos(t)          # noqa: E731
    steps = np.array([16, 32, 64, 128])
    errs = []
    for n in steps:
        q = LSRK54(1.0 / n).advance(rhs, np.array([1.0 + 0j]), 0.0, 1.0)
        errs.append(abs(q[0] - exact_solution(lam, 1.0)))
    order = -np.polyfit(np.log(steps), np.log(errs), 1)[0]
    assert order == pytest.approx(4.0, abs=0.1)


def test_last_step_lands_on_t1():
    times = []
    LSRK54(0.3).advance(lambda q, t: 0 * q, np.zeros(2), 0.0, 1.0, callback=lambda n, t, q: times.append(t))
    assert times == pytest.approx([0.3, 0.6, 0.9, 1.0])
    with pytest.raises(ValueError):
        LSRK54(0.0)


def test_step_does_not_mutate_input():
    q0 = np.ones(3)
    LSRK54(0.1).step(lambda q, t: -q, q0, 0.0, 0.1)
    assert np.all(q0 == 1.0)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_nan_guard_reports_step(sandstone):
    op = make_operator(sandstone, n=2, N=1)
    blow = lambda q, t: q * 1e200                   # noqa: E731
    with pytest.raises(NumericalInstability) as err:
        LSRK54(1.0, check_every=1).advance(blow, np.ones(op.shape), 0.0, 10.0)
    assert err.value.step is not None and err.value.element is not None


def test_dt_scaling(sandstone):
    coarse = make_operator(sandstone, n=2, N=3)
    fine = make_operator(sandstone, n=4, N=3)
    assert estimate_dt(fine, relaxation_cap=False) == pytest.approx(
        estimate_dt(coarse, relaxation_cap=False) / 2)
    assert estimate_dt(coarse, cfl=0.25, relaxation_cap=False) == pytest.approx(
        estimate_dt(coarse, cfl=0.5, relaxation_cap=False) / 2)
    assert trace_constant(3) == 10
    with pytest.raises(ValueError):
        estimate_dt(coarse, cfl=0.0)


def test_relaxation_cap_binds_on_coarse_mesh(sandstone):
    op = make_operator(sandstone, n=1, N=1, bounds=(0, 100.0, 0, 100.0))
    capped = estimate_dt(op)
    assert capped < estimate_dt(op, relaxation_cap=False)
    rate = max(np.abs(np.linalg.eigvals(c.Qs @ c.S)).max() for c in op.coeffs)
    assert capped == pytest.approx(0.5 / rate)


def test_default_step_is_stable(sandstone, rng):
    """dt from the estimate keeps every mode of the operator inside the LSRK region."""
    from viscodg.verify import operator_spectrum

    op = make_operator(sandstone, n=2, N=3, alpha=1.0)
    ev = operator_spectrum(op).eigenvalues * estimate_dt(op)
    g = np.ones_like(ev)
    res = np.zeros_like(ev)
    for a, b in zip(RK4A, RK4B):
        res = a * res + ev * g
        g = g + b * res
    assert np.abs(g).max() <= 1.0 + 1e-12
