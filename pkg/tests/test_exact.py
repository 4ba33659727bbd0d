import numpy as np
import pytest
from scipy.integrate import quad

from serilin import exact
from serilin.errors import DomainError, SingularEvaluationError
from serilin.spectral import dns_burgers

rng = np.random.default_rng(31)


# --------------------------------------------------------------------------
# point-mass closed form
# --------------------------------------------------------------------------

def test_delta_limit_value_at_center():
    # delta -> 0, R=2, t=1, x=v gives sqrt(2/pi)
    val = exact.burgers_delta_exact(1.0, 0.5, 0.0, 0.5, 2.0)
    assert val == pytest.approx(np.sqrt(2 / np.pi), rel=1e-14)


def test_delta_solution_decays_at_infinity():
    for x in (-40.0, 40.0):
        assert abs(exact.burgers_delta_exact(1.0, x, 1.0, 1.0, 2.0)) < 1e-100


def test_delta_solution_matches_line_oracle():
    # the closed form evolves a point mass of weight two; its antiderivative
    # is twice the unit step
    spec = exact.LineOracleSpec(g=None, delta=1.0, v=1.0, reynolds=2.0,
                                window=40.0,
                                antiderivative=lambda y: 2.0 * (y > 0),
                                panels=160, nodes_per_panel=24)
    for x in (-1.0, 0.5, 2.0):
        closed = exact.burgers_delta_exact(1.0, x, 1.0, 1.0, 2.0)
        oracle = exact.cole_hopf_line_oracle(spec, 1.0, np.array([x]))[0]
        assert abs(closed - oracle) < 1e-8


def test_delta_requires_positive_time():
    with pytest.raises(DomainError):
        exact.burgers_delta_exact(0.0, 0.0, 1.0, 1.0, 2.0)
    with pytest.raises(DomainError):
        exact.burgers_delta_u1(-1.0, 0.0, 1.0, 2.0)


def test_u1_vanishes_on_the_characteristic():
    assert exact.burgers_delta_u1(2.0, 2.0 * 0.7, 0.7, 2.0) == pytest.approx(0.0)


def test_u1_matches_first_difference_quotient():
    x = np.linspace(-3, 5, 41)
    t, v, r = 1.0, 0.5, 2.0
    u0 = exact.burgers_delta_exact(t, x, 0.0, v, r)

    def quotient(d):
        return (exact.burgers_delta_exact(t, x, d, v, r) - u0) / d

    rich = 2.0 * quotient(5e-3) - quotient(1e-2)
    np.testing.assert_allclose(rich, exact.burgers_delta_u1(t, x, v, r),
                               atol=1e-5)


def test_u1_satisfies_order_one_equation():
    # FD residual of u1_t + v u1_x - u1_xx / R - (v - u0) u0_x on a fine grid
    t, v, r = 1.0, 0.5, 2.0
    hx, ht = 1e-3, 1e-4
    x = np.linspace(-2.0, 3.0, 501)
    u1 = lambda tt, xx: exact.burgers_delta_u1(tt, xx, v, r)
    u0 = lambda tt, xx: exact.burgers_delta_exact(tt, xx, 0.0, v, r)
    dt = (u1(t + ht, x) - u1(t - ht, x)) / (2 * ht)
    dx = (u1(t, x + hx) - u1(t, x - hx)) / (2 * hx)
    dxx = (u1(t, x + hx) - 2 * u1(t, x) + u1(t, x - hx)) / hx ** 2
    du0 = (u0(t, x + hx) - u0(t, x - hx)) / (2 * hx)
    residual = dt + v * dx - dxx / r - (v - u0(t, x)) * du0
    assert np.max(np.abs(residual)) < 1e-4


def test_delta_derivative_smoothness_invariant():
    # central difference of the closed form at delta=0 against the u1 display
    x = np.linspace(-4, 6, 31)
    t, v, r = 0.7, 0.5, 2.0
    h = 1e-4
    central = (exact.burgers_delta_exact(t, x, h, v, r)
               - exact.burgers_delta_exact(t, x, -h, v, r)) / (2 * h)
    np.testing.assert_allclose(central, exact.burgers_delta_u1(t, x, v, r),
                               atol=1e-6)


def test_taylor_coefficients_reproduce_closed_forms():
    x = np.linspace(-3, 5, 21)
    t, v, r = 1.0, 0.5, 2.0
    co = exact.burgers_delta_taylor(t, x, v, r, 2)
    np.testing.assert_allclose(co[0], exact.burgers_delta_exact(t, x, 0.0, v, r),
                               atol=1e-10)
    np.testing.assert_allclose(co[1], exact.burgers_delta_u1(t, x, v, r),
                               atol=1e-8)


# --------------------------------------------------------------------------
# periodic cosine-squared closed form
# --------------------------------------------------------------------------

def test_cosine_squared_delta_zero_is_linear_evolution():
    x = np.arange(64) / 64
    t, v, r = 0.05, 1.0, 500.0
    val = exact.cosine_squared_exact(t, x, 0.0, v, r)
    expect = 0.5 * np.cos(4 * np.pi * (x - v * t)) * np.exp(
        -16 * np.pi ** 2 * t / r)
    np.testing.assert_allclose(val, expect, atol=1e-14)
    # continuity of the closed form at delta -> 0
    near = exact.cosine_squared_exact(t, x, 1e-8, v, r)
    np.testing.assert_allclose(near, expect, atol=1e-7)


def test_cosine_squared_decays_uniformly():
    x = np.arange(32) / 32
    val = exact.cosine_squared_exact(50.0, x, 1.0, 0.002, 500.0)
    assert np.max(np.abs(val)) < 1e-6


def test_cosine_squared_periodic_quadrature_oracle():
    # independent check: wrapped-kernel convolution ratio on a fine grid
    t, v, r, delta = 0.01, 1.0 / 500.0, 500.0, 1.0
    y = (np.arange(4096) + 0.5) / 4096
    g = 0.5 * np.cos(4 * np.pi * y)
    anti = np.sin(4 * np.pi * y) / (8 * np.pi)
    weight = np.exp(-delta * r / 2 * anti)
    xs = np.linspace(0, 1, 17, endpoint=False)
    oracle = []
    for x in xs:
        z = x - y - (1 - delta) * v * t
        kern = np.zeros_like(y)
        for w in range(-6, 7):
            kern += np.exp(-r * (z - w) ** 2 / (4 * t))
        oracle.append(np.mean(kern * g * weight) / np.mean(kern * weight))
    mine = exact.cosine_squared_exact(t, xs, delta, v, r)
    np.testing.assert_allclose(mine, np.asarray(oracle), atol=1e-8)


def test_cosine_squared_rejects_nonpositive_time():
    with pytest.raises(DomainError):
        exact.cosine_squared_exact(0.0, 0.1, 1.0, 1.0, 500.0)


# --------------------------------------------------------------------------
# line oracle
# --------------------------------------------------------------------------

def test_line_oracle_delta_zero_is_heat_advection():
    g = lambda y: np.exp(-y ** 2)
    spec = exact.LineOracleSpec(g=g, delta=0.0, v=0.4, reynolds=2.0,
                                window=30.0)
    t = 0.8
    x = np.array([-1.0, 0.0, 1.5])
    # analytic convolution of a Gaussian with the advected heat kernel
    s2 = 1.0 / 2.0 + 4 * t / 2.0   # variances add: 1/2 and 2t/R
    expect = np.sqrt(1.0 / (2 * s2)) * np.exp(
        -(x - (1 - 0.0) * 0.4 * t) ** 2 / (2 * s2))
    got = exact.cole_hopf_line_oracle(spec, t, x)
    np.testing.assert_allclose(got, expect, rtol=1e-10)


def test_line_oracle_positive_data_is_finite():
    g = lambda y: np.exp(-np.abs(y))
    spec = exact.LineOracleSpec(g=g, delta=0.9, v=0.1, reynolds=3.0,
                                window=35.0)
    vals = exact.cole_hopf_line_oracle(spec, 0.5, np.linspace(-3, 3, 11))
    assert np.all(np.isfinite(vals))


def test_line_oracle_box_data_matches_rescaled_dns():
    # line problem u_t + u u_x = nu u_xx, box initial data on [-1, 1],
    # nu = 1/2, compared through the rescaling x = 40 y - 20, t = 40 s
    # to the periodic solver at reynolds 80
    nu = 0.5
    g = lambda y: ((y > -1) & (y < 1)).astype(float)
    spec = exact.LineOracleSpec(g=g, delta=1.0, v=0.0, reynolds=1.0 / nu,
                                window=24.0, panels=192, nodes_per_panel=16)
    m = 1024
    ygrid = np.arange(m) / m
    dns = dns_burgers(g(40.0 * ygrid - 20.0), 2e-5, 1.0 / 40.0, 40.0 / nu,
                      sample_times=(1.0 / 40.0,))
    xs = 40.0 * ygrid[::8] - 20.0
    keep = np.abs(xs) < 12
    mine = exact.cole_hopf_line_oracle(spec, 1.0, xs[keep])
    theirs = dns.states[-1].coeffs[0][::8][keep]
    assert np.max(np.abs(mine - theirs)) < 2e-3


def test_line_oracle_singular_denominator_raises():
    # complex delta chosen so the two half-line weights cancel at x ~ 0
    r = 2.0
    spec = exact.LineOracleSpec(g=None, delta=2j * np.pi / r, v=0.0,
                                reynolds=r, window=30.0,
                                antiderivative=lambda y: (y > 0).astype(float))
    with pytest.raises(SingularEvaluationError):
        exact.cole_hopf_line_oracle(spec, 1.0, np.array([0.0]))


def test_line_oracle_validation():
    with pytest.raises(ValueError):
        exact.LineOracleSpec(g=None, delta=1.0, v=0.0, reynolds=1.0,
                             window=10.0)
    spec = exact.LineOracleSpec(g=lambda y: np.exp(-y * y), delta=1.0, v=0.0,
                                reynolds=1.0, window=10.0)
    with pytest.raises(DomainError):
        exact.cole_hopf_line_oracle(spec, 0.0, 0.0)


# --------------------------------------------------------------------------
# ball solution and expansion coefficients
# --------------------------------------------------------------------------

def test_ball_solution_center_values():
    assert exact.plap_ball_exact(2.0, 1, 0.0) == pytest.approx(0.5)
    assert exact.plap_ball_exact(3.0, 1, 0.0) == pytest.approx(2.0 / 3.0)


def test_ball_solution_domain_errors():
    with pytest.raises(DomainError):
        exact.plap_ball_exact(3.0, 1, 1.5)
    with pytest.raises(DomainError):
        exact.plap_ball_exact(0.5, 1, 0.0)


def test_ball_u1_boundary_and_fd():
    assert exact.plap_ball_u1(1, 1.0) == pytest.approx(0.0, abs=1e-14)
    assert exact.plap_ball_u1(1, -1.0) == pytest.approx(0.0, abs=1e-14)
    x = np.linspace(-1, 1, 201)
    eps = 1e-5
    fd = (exact.plap_ball_exact(2 + eps, 1, x)
          - exact.plap_ball_exact(2 - eps, 1, x)) / (2 * eps)
    np.testing.assert_allclose(exact.plap_ball_u1(1, x), fd, atol=1e-9)


def test_dual_coefficients_sum_to_solution():
    x = np.linspace(-1, 1, 1001)
    delta = -0.5   # p' = 3/2, p = 3
    s = sum(delta ** n * exact.plap_ball_dual_un(n, x) for n in range(13))
    assert np.max(np.abs(s - exact.plap_ball_exact(3.0, 1, x))) < 1e-4


def test_dual_coefficient_sign_flip_at_order_one():
    x = np.linspace(-1, 1, 101)
    np.testing.assert_allclose(exact.plap_ball_dual_un(1, x),
                               -exact.plap_ball_u1(1, x), atol=1e-14)


def test_dual_series_tail_is_geometric_inside_radius_two():
    x = np.linspace(-1, 1, 201)
    for delta in (-1.9, -0.5, 0.5, 1.9):
        norms = [np.max(np.abs(delta ** n * exact.plap_ball_dual_un(n, x)))
                 for n in range(6, 16)]
        ratios = [b / a for a, b in zip(norms, norms[1:]) if a > 0]
        assert max(ratios) < 1.0   # geometric decay of the tail terms


# --------------------------------------------------------------------------
# self-similar point-source solution
# --------------------------------------------------------------------------

def test_heat_kernel_value():
    assert exact.barenblatt(2.0, 1, 1.0, 0.0) == pytest.approx(
        1.0 / np.sqrt(4 * np.pi), rel=1e-12)


def test_constants_p3():
    kp, qp, cp, lam = exact.barenblatt_constants(3.0, 1)
    assert kp == pytest.approx(0.25)
    assert qp == pytest.approx(1.0 / 6.0)
    assert lam == pytest.approx(3.0 / 8.0)
    assert cp == pytest.approx((10.0 / 9.0) ** 0.375 * (1.0 / 6.0) ** 0.25)


def test_constants_domain_errors():
    with pytest.raises(DomainError):
        exact.barenblatt_constants(2.0, 1)
    with pytest.raises(DomainError):
        exact.barenblatt_constants(0.9, 1)


@pytest.mark.parametrize("p", [1.7, 2.5, 3.0])
@pytest.mark.parametrize("t", [0.5, 1.0])
def test_unit_mass(p, t):
    total = 2.0 * quad(lambda x: exact.barenblatt(p, 1, t, x), 0.0, np.inf,
                       limit=200)[0]
    assert total == pytest.approx(1.0, abs=1e-6)


def test_support_properties():
    kp, qp, cp, _ = exact.barenblatt_constants(3.0, 1)
    radius = (cp / qp) ** (2.0 / 3.0)   # (c/q)^((p-1)/p) at p=3
    for t in (0.5, 1.0, 2.0):
        edge = radius * t ** kp
        assert exact.barenblatt(3.0, 1, t, edge * 1.0001) == 0.0
        assert exact.barenblatt(3.0, 1, t, edge * 0.999) > 0.0
    assert exact.barenblatt(1.7, 1, 1.0, 50.0) > 0.0


def test_u1_matches_p_derivative():
    x = np.linspace(-4, 4, 41)

    def quotient(eps):
        up = np.array([exact.barenblatt(2 + eps, 1, 1.0, xx) for xx in x])
        dn = np.array([exact.barenblatt(2 - eps, 1, 1.0, xx) for xx in x])
        return (up - dn) / (2 * eps)

    rich = (4.0 * quotient(5e-4) - quotient(1e-3)) / 3.0
    np.testing.assert_allclose(exact.barenblatt_u1(1.0, x), rich, atol=1e-5)


def test_u1_decays_and_solves_equation():
    assert abs(exact.barenblatt_u1(1.0, 30.0)) < 1e-90
    # residual of u1_t - u1_xx - d/dx(log|u0_x| u0_x) away from the origin
    t = 1.0
    x = np.linspace(0.3, 4.0, 301)
    hx, ht = 1e-4, 1e-5
    u1 = exact.barenblatt_u1
    dt = (u1(t + ht, x) - u1(t - ht, x)) / (2 * ht)
    dxx = (u1(t, x + hx) - 2 * u1(t, x) + u1(t, x - hx)) / hx ** 2

    def flux(xx):
        g = -xx / (2 * t) * exact.heat_kernel(t, xx)
        return g * np.log(np.abs(g))

    dflux = (flux(x + hx) - flux(x - hx)) / (2 * hx)
    residual = dt - dxx - dflux
    assert np.max(np.abs(residual)) < 1e-3


def test_time_domain_errors():
    with pytest.raises(DomainError):
        exact.barenblatt(3.0, 1, 0.0, 0.0)
    with pytest.raises(DomainError):
        exact.barenblatt_u1(0.0, 0.0)
