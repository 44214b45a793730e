import math
import warnings

import numpy as np
import pytest

from ottosta.cycle import make_cycle_spec, run_cycle
from ottosta.errors import NoCrossingError, NonOperatingError, SingularPointError
from ottosta.ermakov import sta_times
from ottosta.medium import Medium, Reservoirs, mu_lambda
from ottosta.optimize import (
    SWEEP_FIELDS,
    SweepGrid,
    adiabatic_optimum,
    crossing_times,
    efficiency_at_max_power_sweep,
    golden_section,
    maximize_bracketed,
    nf_factor,
    optimize_x,
    regime_label,
    stationarity_residual,
)
from oracles import maximize_ref

N = 500
MED = Medium(N, 0.0)


def res(sigma_c, a, n=N):
    return Reservoirs.from_ratio(sigma_c / n, a)


def work_at(x, medium, reservoirs, tau, mode, family="accidental"):
    return run_cycle(make_cycle_spec(medium, reservoirs, x, tau, family), mode).w_total


# -- scalar maximizer -------------------------------------------------------


def test_golden_section_matches_reference_maximizer():
    f = lambda x: math.sin(3 * x) * math.exp(-x)
    x, fx, it = golden_section(f, 0.0, 1.0, xtol=1e-10)
    x_ref, f_ref = maximize_ref(f, 1e-6, 1.0)
    assert x == pytest.approx(x_ref, abs=1e-7)
    assert fx == pytest.approx(f_ref, rel=1e-12)
    assert 0 < it < 200


def test_bracketing_finds_global_of_multimodal():
    f = lambda x: math.cos(40 * math.log(x)) + 0.3 * x
    x, fx, _ = maximize_bracketed(f, 1e-3, 1.0, n_grid=200)
    x_ref, f_ref = maximize_ref(f, 1e-3, 1.0, n=20001)
    assert fx >= f_ref - 1e-10


# -- optimize_x -------------------------------------------------------------


@pytest.mark.parametrize("mode", ["adiabatic", "sudden", "closed_form", "numeric"])
def test_local_maximum_certificate(mode):
    r = res(1.0, 0.3)
    opt = optimize_x(MED, r, 1.5, mode=mode)
    assert 0 < opt.x_opt < 1
    for dx in (-1e-4, 1e-4):
        assert opt.w_max >= work_at(opt.x_opt + dx, MED, r, 1.5, mode)


@pytest.mark.parametrize("mode", ["adiabatic", "closed_form"])
def test_first_order_condition(mode):
    r = res(1.0, 0.3)
    opt = optimize_x(MED, r, 1.5, mode=mode)
    h = 1e-5 * opt.x_opt
    slope = (work_at(opt.x_opt + h, MED, r, 1.5, mode) - work_at(opt.x_opt - h, MED, r, 1.5, mode)) / (2 * h)
    assert abs(slope) < 1e-6 * opt.w_max / opt.x_opt


def test_accidental_optimum_between_limits():
    r = res(1.0, 0.3)
    xs = {m: optimize_x(MED, r, 1.5, mode=m).x_opt for m in ("sudden", "closed_form", "adiabatic")}
    lo, hi = sorted((xs["sudden"], xs["adiabatic"]))
    assert lo < xs["closed_form"] < hi


def test_numeric_and_closed_form_optimum_agree():
    r = res(1.0, 0.3)
    a = optimize_x(MED, r, 1.5, mode="numeric")
    b = optimize_x(MED, r, 1.5, mode="closed_form")
    assert a.x_opt == pytest.approx(b.x_opt, abs=1e-6)
    assert a.efficiency_at_opt == pytest.approx(b.efficiency_at_opt, abs=1e-7)


def test_non_operating_raises():
    hot_enough = Reservoirs.from_ratio(0.002, 0.99995)
    with pytest.raises(NonOperatingError):
        optimize_x(MED, hot_enough, 1.5, mode="sudden")


def test_infeasible_trials_are_skipped():
    opt = optimize_x(Medium(50, 1.0), res(1.0, 0.2, 50), 0.6, family="poly_b", mode="numeric")
    spec = make_cycle_spec(Medium(50, 1.0), res(1.0, 0.2, 50), opt.x_opt, 0.6, "poly_b")
    assert spec.compression.feasible and spec.expansion.feasible


@pytest.mark.parametrize("sigma_c", [1e-3, 1e-2])
@pytest.mark.parametrize("a", [0.04, 0.25, 0.6])
def test_high_temperature_numeric_matches_closed_form(sigma_c, a):
    r = res(sigma_c, a)
    num = optimize_x(MED, r, 1.0, mode="adiabatic")
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        closed = adiabatic_optimum(MED, r)
    assert abs(num.x_opt - closed.x_opt) < 1e-4
    assert num.regime == "high_T"


@pytest.mark.parametrize("a", [0.01, 0.1, 0.25, 0.5, 0.81])
def test_curzon_ahlborn_ceiling(a):
    for sigma_c in (1e-5, 1e-4, 1e-3):
        closed = adiabatic_optimum(MED, res(sigma_c, a))
        assert closed.efficiency_at_opt <= 1 - math.sqrt(a) + 1e-9
        opt = optimize_x(MED, res(sigma_c, a), 1.0, mode="adiabatic")
        # |W| is flat to roundoff within ~sqrt(eps) of its maximum
        assert opt.efficiency_at_opt <= 1 - math.sqrt(a) + 5e-8
        assert opt.efficiency_at_opt == pytest.approx(1 - math.sqrt(a), abs=1e-3)


@pytest.mark.parametrize("sigma_c", [1.0, 5.0, 20.0, 50.0])
def test_intermediate_regime_below_curzon_ahlborn(sigma_c):
    assert regime_label(sigma_c, N) == "intermediate"
    assert mu_lambda(0.5, sigma_c) >= 1
    for a in (0.001, 0.01, 0.04, 0.2):
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                closed = adiabatic_optimum(MED, res(sigma_c, a))
        except NonOperatingError:
            assert a * mu_lambda(0.5, sigma_c) > 0.95
            continue
        assert closed.efficiency_at_opt <= 1 - math.sqrt(a)
        if sigma_c <= 5:
            assert closed.efficiency_at_opt == pytest.approx(1 - math.sqrt(a * mu_lambda(0.5, sigma_c)), abs=5e-4)


def test_stationarity_holds_for_adiabatic_optimum():
    for sigma_c in (1e-3, 1e-2):
        r = res(sigma_c, 0.25)
        opt = optimize_x(MED, r, 1.0, mode="adiabatic")
        assert abs(opt.stationarity_residual) < 10 * sigma_c * sigma_c + 1e-7
        assert stationarity_residual(opt.x_opt, MED, r, 1.0, "adiabatic") == opt.stationarity_residual


def test_stationarity_residual_shrinks_with_temperature():
    m = Medium(50, 1.0)
    got = []
    for sigma_c in (1e-2, 1e-3):
        for family in ("accidental", "poly_omega"):
            opt = optimize_x(m, res(sigma_c, 0.3, 50), 1.5, family=family)
            assert abs(opt.stationarity_residual) < 0.1 * sigma_c
            got.append(abs(opt.stationarity_residual))
    assert got[2] < got[0] and got[3] < got[1]


def test_residual_not_computed_outside_high_temperature():
    assert math.isnan(optimize_x(MED, res(1.0, 0.3), 1.5, mode="closed_form").stationarity_residual)


# -- N_F ----------------------------------------------------------------------


def test_nf_limits():
    for x in (0.1, 0.3, 0.77):
        assert nf_factor("adiabatic", x) == 1.0
        assert nf_factor("cd", x) == 1.0
        assert nf_factor("sudden", x) == pytest.approx(x * x, rel=1e-14)


def test_nf_accidental_dual_method():
    tau = (1 - 0.3) / 2
    analytic = nf_factor("accidental", 0.3, tau)
    fd = nf_factor("accidental", 0.3, tau, method="fd")
    ode = nf_factor("accidental", 0.3, tau, method="ode")
    assert abs(analytic - fd) < 1e-6
    assert abs(analytic - ode) < 1e-6


def test_nf_limits_of_accidental_family():
    assert nf_factor("accidental", 0.4, 1e-6) == pytest.approx(0.16, rel=1e-4)
    assert nf_factor("accidental", 0.4, sta_times(0.4)) == pytest.approx(1.0, abs=1e-9)


def test_nf_polynomial_family_finite():
    v = nf_factor("poly_omega", 0.3, 1.0)
    assert math.isfinite(v) and v > 0


def test_nf_validation():
    with pytest.raises(ValueError):
        nf_factor("accidental", 0.3)
    with pytest.raises(ValueError):
        nf_factor("warp", 0.3, 1.0)
    with pytest.raises(ValueError):
        nf_factor("accidental", 1.3, 1.0)
    with pytest.raises(ValueError):
        nf_factor("accidental", 0.3, 1.0, method="guess")


def test_singular_point_error_type():
    assert issubclass(SingularPointError, ZeroDivisionError)


# -- adiabatic_optimum -------------------------------------------------------


def test_adiabatic_optimum_classical():
    opt = adiabatic_optimum(MED, res(1e-3, 0.25))
    assert opt.efficiency_at_opt == pytest.approx(0.5, abs=1e-3)
    assert opt.w_max == pytest.approx(N / (0.25 * 1e-3 / N) * (1 - opt.x_opt) ** 2)
    assert opt.regime == "adiabatic_closed"


def test_adiabatic_optimum_low_temperature():
    m = Medium(10, 0.0)
    r = Reservoirs.from_ratio(50.0, 0.002)
    with pytest.warns(RuntimeWarning):
        opt = adiabatic_optimum(m, r)
    assert opt.x_opt == pytest.approx(math.sqrt(r.beta_h * 11 / 4), rel=0.02)
    assert regime_label(500.0, 10) == "low_T"


def test_adiabatic_optimum_no_window():
    with pytest.raises(NonOperatingError):
        adiabatic_optimum(Medium(10), Reservoirs.from_ratio(50.0, 0.9))


def test_regime_labels():
    assert regime_label(0.01, 500) == "high_T"
    assert regime_label(1.0, 500) == "intermediate"
    assert regime_label(50.0, 500) == "intermediate"
    assert regime_label(0.5, 500) == "numeric"
    assert regime_label(100.0, 500) == "numeric"
    assert regime_label(600.0, 500) == "low_T"


# -- sweeps and crossings ---------------------------------------------------


def test_sweep_grid_validation():
    with pytest.raises(ValueError):
        SweepGrid("stroke_time_tau", (1.0, 1.0))
    with pytest.raises(ValueError):
        SweepGrid("colour", (1.0,))


def test_a_sweep_records_and_gaps():
    values = (0.1, 0.3, 0.5, 0.99995)
    g = efficiency_at_max_power_sweep("temperature_ratio_a", values, MED, res(1.0, 0.3), tau=1.5)
    rows = g.records()
    assert len(rows) == 3 * len(values)
    assert all(tuple(r) == SWEEP_FIELDS for r in rows)
    sudden = g.curve("sudden")
    assert math.isnan(sudden[-1])
    assert [r["regime"] for r in rows if r["axis_value"] == 0.99995 and r["curve"] == "sudden"] == ["non_operating"]
    acc, ad = g.curve("accidental"), g.curve("adiabatic")
    ok = ~np.isnan(sudden)
    assert np.all(sudden[ok] <= acc[ok]) and np.all(acc[ok] <= ad[ok])
    assert np.all(np.diff(ad[:3]) < 0)


def test_tau_sweep_limits():
    g = efficiency_at_max_power_sweep("stroke_time_tau", (1e-3, 50.0), MED, res(1.0, 0.3))
    acc, sq, ad = g.curve("accidental"), g.curve("sudden"), g.curve("adiabatic")
    assert abs(acc[0] - sq[0]) < 1e-3
    assert abs(acc[1] - ad[1]) < 1e-3


def test_lambda_and_n_axes():
    g = efficiency_at_max_power_sweep("lambda", (0.0, 2.0), Medium(50), res(1.0, 0.3, 50), curves=("adiabatic",))
    assert g.fixed["n_particles"] == 50
    assert np.all(np.isfinite(g.curve("adiabatic")))
    g = efficiency_at_max_power_sweep("n_particles", (10, 100), Medium(50), res(1.0, 0.3, 50), curves=("poly_omega",))
    assert np.all(np.isfinite(g.curve("poly_omega")))


def test_crossing_times():
    c = crossing_times(0.3, MED, 1.0 / N)
    assert 0 < c.tau1_prime < c.tau1
    assert c.sta_verified
    assert c.q_tau1 == pytest.approx(1.0, abs=1e-6)
    assert c.q_tau1_prime > 1 + 1e-4
    at = optimize_x(MED, Reservoirs.from_ratio(1.0 / N, 0.3), c.tau1, mode="closed_form")
    assert at.efficiency_at_opt == pytest.approx(c.eta_ad_opt, abs=1e-4)


def test_crossing_times_none_in_range():
    with pytest.raises(NoCrossingError):
        crossing_times(0.3, MED, 1.0 / N, tau_max=1.0)
