import numpy as np
import pytest

from serilin.errors import GridMismatchError, SolverError
from serilin.hierarchy import (
    HierarchyState,
    HomotopySpec,
    advance_with_refeeding,
    burgers_forcing,
    partial_sum,
    refeed,
    step_hierarchy,
)

rng = np.random.default_rng(1234)


# --------------------------------------------------------------------------
# HomotopySpec
# --------------------------------------------------------------------------

def test_burgers_spec_defaults_to_target_one():
    spec = HomotopySpec.burgers_linear(0.5, 2.0)
    assert spec.target_delta == 1.0


def test_plap_ordinary_derivatives():
    spec = HomotopySpec.plap_ordinary(2.7)
    assert spec.target_delta == pytest.approx(0.7)
    assert spec.homotopy_derivs[0] == 1.0
    assert all(d == 0.0 for d in spec.homotopy_derivs[1:])


def test_plap_dual_derivatives():
    spec = HomotopySpec.plap_dual(3.0, max_order=5)
    assert spec.target_delta == pytest.approx(-0.5)
    assert spec.homotopy_derivs == (-1.0, 2.0, -6.0, 24.0, -120.0)


def test_invalid_specs_rejected():
    with pytest.raises(ValueError):
        HomotopySpec("NoSuchKind")
    with pytest.raises(ValueError):
        HomotopySpec("BurgersLinear", reynolds=-1.0)
    with pytest.raises(ValueError):
        HomotopySpec("PLapOrdinary", homotopy_derivs=(2.0,))
    with pytest.raises(ValueError):
        HomotopySpec("PLapDual", homotopy_derivs=(-1.0, 3.0))


# --------------------------------------------------------------------------
# burgers_forcing
# --------------------------------------------------------------------------

def smooth_fields(n, m=64):
    x = np.arange(m) / m
    return [np.cos(2 * np.pi * (k + 1) * x + 0.3 * k) + 0.1 * k for k in range(n)]


def reference_forcing_list(u, v):
    # the first five forcings written out longhand
    return {
        1: -v * u[0] + 0.5 * u[0] ** 2,
        2: (u[0] - v) * u[1],
        3: (u[0] - v) * u[2] + 0.5 * u[1] ** 2,
        4: (u[0] - v) * u[3] + u[1] * u[2],
        5: (u[0] - v) * u[4] + 0.5 * u[2] ** 2 + u[1] * u[3],
    }


def test_forcing_matches_longhand_list():
    u = smooth_fields(5)
    ref = reference_forcing_list(u, v=0.37)
    for k in range(1, 6):
        np.testing.assert_allclose(burgers_forcing(k, u, 0.37), ref[k],
                                   rtol=0, atol=1e-14)


def test_forcing_order_two_factorizes():
    u = smooth_fields(2)
    np.testing.assert_allclose(burgers_forcing(2, u, 1.3), (u[0] - 1.3) * u[1])


def test_forcing_order_three_with_zero_u1():
    u = smooth_fields(3)
    u[1] = np.zeros_like(u[1])
    np.testing.assert_allclose(burgers_forcing(3, u, 0.2), (u[0] - 0.2) * u[2])


def test_forcing_order_five_constant_fields():
    v = 0.7
    shape = (11,)
    u = [np.full(shape, c) for c in (v, 1.0, 2.0, 3.0, -4.2)]
    # (u0 - v) u4 + u2^2/2 + u1 u3 = 0 + 2 + 3
    np.testing.assert_allclose(burgers_forcing(5, u, v), np.full(shape, 5.0))


def test_forcing_errors():
    u = smooth_fields(3)
    with pytest.raises(ValueError):
        burgers_forcing(0, u, 0.0)
    with pytest.raises(ValueError):
        burgers_forcing(4, u, 0.0)
    bad = [u[0], np.zeros(7), u[2]]
    with pytest.raises(GridMismatchError):
        burgers_forcing(3, bad, 0.0)


# --------------------------------------------------------------------------
# partial_sum / refeed
# --------------------------------------------------------------------------

def random_state(order, m=32, t=0.4):
    return HierarchyState(tuple(rng.standard_normal(m) for _ in range(order + 1)),
                          time=t)


def test_partial_sum_identity_and_zero_delta():
    st = random_state(0)
    np.testing.assert_array_equal(partial_sum(st, 1.0).values, st.coeffs[0])
    st = random_state(3)
    np.testing.assert_array_equal(partial_sum(st, 0.0).values, st.coeffs[0])


def test_partial_sum_horner_example():
    st = HierarchyState((np.full(5, 1.0), np.full(5, 2.0), np.full(5, 3.0)))
    np.testing.assert_allclose(partial_sum(st, 0.5).values, np.full(5, 2.75))


def test_partial_sum_is_polynomial_in_delta():
    st = random_state(4)
    deltas = np.linspace(-1.1, 1.3, 6)   # order + 2 samples
    samples = np.stack([partial_sum(st, d).values for d in deltas])
    # interpolating polynomial of degree <= 4 must reproduce a 7th point
    probe = 0.731
    vander = np.vander(deltas, 5, increasing=True)
    coef = np.linalg.solve(vander, samples)
    interp = np.vander([probe], 5, increasing=True) @ coef
    np.testing.assert_allclose(interp[0], partial_sum(st, probe).values,
                               rtol=1e-9, atol=1e-9)


def test_partial_sum_linear_in_each_coefficient():
    st = random_state(3)
    bump = rng.standard_normal(st.coeffs[0].shape)
    coeffs = list(st.coeffs)
    coeffs[2] = coeffs[2] + 2.0 * bump
    shifted = HierarchyState(tuple(coeffs), time=st.time)
    d = 0.6
    np.testing.assert_allclose(
        partial_sum(shifted, d).values,
        partial_sum(st, d).values + 2.0 * d ** 2 * bump, rtol=1e-12, atol=1e-12)


def test_refeed_fixed_point_and_definition():
    st = HierarchyState((np.array([2.0, -1.0]), np.zeros(2)))
    out = refeed(st, 0.9)
    np.testing.assert_array_equal(out.coeffs[0], st.coeffs[0])
    a, b = rng.standard_normal(8), rng.standard_normal(8)
    st = HierarchyState((a, b), time=1.5)
    out = refeed(st, 1.0)
    np.testing.assert_allclose(out.coeffs[0], a + b)
    np.testing.assert_array_equal(out.coeffs[1], np.zeros(8))
    assert out.time == st.time


def test_refeed_idempotent_and_sum_preserving():
    st = random_state(5)
    once = refeed(st, 0.77)
    twice = refeed(once, 0.77)
    for c1, c2 in zip(once.coeffs, twice.coeffs):
        np.testing.assert_array_equal(c1, c2)
    np.testing.assert_array_equal(partial_sum(once, 0.77).values,
                                  partial_sum(st, 0.77).values)


def test_state_validation():
    with pytest.raises(GridMismatchError):
        HierarchyState((np.zeros(4), np.zeros(5)))
    with pytest.raises(ValueError):
        HierarchyState((np.zeros(4),), time=-1.0)


# --------------------------------------------------------------------------
# step_hierarchy
# --------------------------------------------------------------------------

def test_step_zero_data_zero_forcing_stays_zero():
    st = HierarchyState.from_initial(np.zeros(16), 3)

    def stepper(n, coeff, f, dt):
        assert f is None
        return coeff * np.exp(-dt)

    out = step_hierarchy(st, 0.1, stepper)
    assert out.time == pytest.approx(0.1)
    for c in out.coeffs:
        np.testing.assert_array_equal(c, np.zeros(16))


def test_step_single_mode_exponential_decay():
    m = 32
    x = np.arange(m) / m
    st = HierarchyState.from_initial(np.sin(2 * np.pi * x), 0)
    lam = 4.0 * np.pi ** 2

    def stepper(n, coeff, f, dt):
        return coeff * np.exp(-lam * dt)

    out = st
    for _ in range(10):
        out = step_hierarchy(out, 0.01, stepper)
    np.testing.assert_allclose(out.coeffs[0], np.exp(-lam * 0.1) * st.coeffs[0],
                               rtol=1e-12, atol=1e-14)


def test_stepper_failure_carries_order():
    st = HierarchyState.from_initial(np.ones(4), 2)

    def stepper(n, coeff, f, dt):
        if n == 2:
            raise RuntimeError("boom")
        return coeff

    with pytest.raises(SolverError) as err:
        step_hierarchy(st, 0.1, stepper)
    assert err.value.order == 2


def test_forcing_builder_sees_advanced_lower_orders():
    st = HierarchyState((np.ones(4), np.ones(4)))
    seen = {}

    def forcing(n, working):
        if n == 1:
            seen["u0"] = working[0].copy()
        return None

    def stepper(n, coeff, f, dt):
        return coeff * 2.0

    step_hierarchy(st, 0.5, stepper, forcing)
    np.testing.assert_array_equal(seen["u0"], 2.0 * np.ones(4))


def test_advance_with_refeeding_callback_and_cadence():
    st = HierarchyState((np.full(4, 1.0), np.full(4, 1.0)))
    steps = []

    def stepper(n, coeff, f, dt):
        return coeff

    out = advance_with_refeeding(st, 0.1, 4, stepper, refeed_every=2, delta=1.0,
                                 callback=lambda s, i: steps.append(i))
    assert steps == [1, 2, 3, 4]
    # two refeeds each fold u_1 into u_0: 1+1 -> 2 then unchanged (u_1 zeroed)
    np.testing.assert_allclose(out.coeffs[0], np.full(4, 2.0))
    np.testing.assert_array_equal(out.coeffs[1], np.zeros(4))
