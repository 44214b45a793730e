import math

import numpy as np
import pytest

from ottosta.cycle import (
    RECORD_FIELDS,
    CycleSpec,
    efficiency_bounds,
    make_cycle_spec,
    power,
    run_cycle,
    stroke_pair,
    sudden_q,
    work_total,
)
from ottosta.ermakov import sta_times
from ottosta.medium import Medium, Reservoirs, ground_state_energy, thermal_energy
from oracles import q_closed_ref, q_sudden_ref, thermal_ref

MED = Medium(50, 1.0)
RES = Reservoirs.from_ratio(1 / 50, 0.1)


def first_law_residual(r):
    scale = max(abs(v) for v in (r.w1, r.w3, r.q2, r.q4))
    return abs(r.w1 + r.w3 + r.q2 + r.q4) / scale


def test_cycle_spec_validation():
    comp, exp_ = stroke_pair("poly_omega", 1.0, 2.0, 1.0)
    with pytest.raises(ValueError):
        CycleSpec(MED, RES, 2.0, 1.0, comp, exp_)
    with pytest.raises(ValueError, match="compression"):
        CycleSpec(MED, RES, 1.0, 2.0, exp_, exp_)
    with pytest.raises(ValueError):
        CycleSpec(MED, RES, 1.0, 2.0, comp, exp_, isochore_overhead=-1)
    with pytest.raises(ValueError):
        stroke_pair("teleport", 1.0, 2.0, 1.0)
    spec = CycleSpec(MED, RES, 1.0, 2.0, comp, exp_, 0.5)
    assert spec.x == 0.5 and spec.cycle_time == 2.5


@pytest.mark.parametrize("n,lam,beta_c", [(1, 0.0, 1.0), (50, 1.0, 0.02), (500, 2.0, 0.002)])
def test_adiabatic_mode_gives_otto(n, lam, beta_c):
    spec = make_cycle_spec(Medium(n, lam), Reservoirs.from_ratio(beta_c, 0.05), 0.3, 1.0)
    r = run_cycle(spec, "adiabatic")
    assert r.efficiency == pytest.approx(0.7, abs=1e-12)
    cd = run_cycle(spec, "cd")
    assert (cd.efficiency, cd.w_total, cd.e_b) == (r.efficiency, r.w_total, r.e_b)
    b = efficiency_bounds(r)
    assert b.eta_otto == pytest.approx(0.7) and b.eta_nad == pytest.approx(0.7)


def test_corner_energies_from_oracle():
    spec = make_cycle_spec(MED, RES, 0.3, 0.9)
    r = run_cycle(spec, "closed_form")
    e_a = thermal_ref(50, 1.0, 1.0, RES.beta_c)
    e_c = thermal_ref(50, 1.0, 1 / 0.3, RES.beta_h)
    q = q_closed_ref(0.3, 2 * 0.9 / 0.7)
    assert r.e_a == pytest.approx(e_a, rel=1e-12)
    assert r.e_c == pytest.approx(e_c, rel=1e-12)
    assert r.e_b == pytest.approx(q * e_a / 0.3, rel=1e-10)
    assert r.e_d == pytest.approx(q * 0.3 * e_c, rel=1e-10)
    assert r.w_total == pytest.approx(work_total(e_a, e_c, 0.3, q, q), rel=1e-10)


def test_shortcut_cycle_equals_adiabatic():
    tau1 = sta_times(0.3)
    spec = make_cycle_spec(MED, RES, 0.3, tau1)
    r = run_cycle(spec)
    assert r.efficiency == pytest.approx(run_cycle(spec, "adiabatic").efficiency, abs=1e-6)
    assert power(r, spec) == pytest.approx(r.w_total / (2 * 1.85978), rel=1e-5)
    assert r.power == power(r, spec)


def test_work_total_examples():
    assert work_total(1.0, 10.0, 0.3, 1.0, 1.0) == pytest.approx(4.666667, abs=1e-6)
    assert work_total(1.0, 1 / 0.3, 0.3, 1.0, 1.0) == pytest.approx(0.0, abs=1e-15)
    assert work_total(1.0, 1.0, 0.3, 1.0, 1.0) < 0


def test_sudden_mode_identity_and_bounds():
    spec = make_cycle_spec(MED, Reservoirs.from_ratio(0.02, 0.01), 0.3, 1.0)
    r = run_cycle(spec, "sudden")
    assert r.operating
    qs = q_sudden_ref(0.3)
    assert r.q_ab == pytest.approx(qs) and r.q_cd == pytest.approx(qs)
    assert abs(work_total(r.e_a, r.e_c, 0.3, qs, qs) + (r.w1 + r.w3)) < 1e-12 * r.e_c
    assert efficiency_bounds(r).eta_sq == pytest.approx(r.efficiency, rel=1e-12)


def test_pure_sudden_cycle_power_undefined():
    spec = make_cycle_spec(MED, RES, 0.3, 1.0, family="sudden")
    r = run_cycle(spec)
    assert math.isnan(r.power)
    with pytest.raises(ZeroDivisionError):
        power(r, spec)
    with_overhead = make_cycle_spec(MED, RES, 0.3, 1.0, family="sudden", isochore_overhead=2.0)
    assert power(run_cycle(with_overhead), with_overhead) == pytest.approx(r.w_total / 2)


def test_power_halves_when_cycle_time_doubles():
    a = make_cycle_spec(MED, RES, 0.3, 1.0, family="poly_omega")
    b = make_cycle_spec(MED, RES, 0.3, 1.0, family="poly_omega", isochore_overhead=2.0)
    ra, rb = run_cycle(a, "adiabatic"), run_cycle(b, "adiabatic")
    assert ra.w_total == rb.w_total
    assert power(rb, b) == pytest.approx(power(ra, a) / 2, rel=1e-15)


def test_power_vanishes_in_adiabatic_limit():
    p = [run_cycle(s, "adiabatic").power for s in (make_cycle_spec(MED, RES, 0.3, t) for t in (1e2, 1e4, 1e6))]
    assert p[0] > p[1] > p[2] > 0 and p[2] < 1e-3 * p[0]


def test_non_engine_point_reported_not_raised():
    res = Reservoirs.from_ratio(1 / 50, 0.5)
    r = run_cycle(make_cycle_spec(MED, res, 0.3, 1.0))
    assert not r.operating
    assert math.isnan(r.efficiency)
    assert r.power <= 0


def test_equal_ratio_is_dead_engine():
    r = run_cycle(make_cycle_spec(MED, Reservoirs.from_ratio(0.02, 0.3), 0.3, 1.0), "adiabatic")
    assert not r.operating and math.isnan(r.efficiency)


@pytest.mark.parametrize("mode", ["numeric", "closed_form", "sudden", "lcd", "adiabatic"])
def test_first_law(mode):
    family = "lcd" if mode == "lcd" else "accidental"
    r = run_cycle(make_cycle_spec(MED, RES, 0.4, 0.6, family=family), mode)
    assert first_law_residual(r) < 1e-9
    assert r.q_ab >= 1 - 1e-12 and r.q_cd >= 1 - 1e-12


def test_lcd_mode_uses_unit_endpoint():
    spec = make_cycle_spec(MED, RES, 0.3, 0.5, family="lcd")
    r = run_cycle(spec, "lcd")
    assert r.q_ab == 1.0 and r.q_cd == pytest.approx(1.0, abs=1e-12)
    assert r.efficiency == pytest.approx(0.7, abs=1e-12)


def test_closed_form_mode_needs_accidental():
    with pytest.raises(ValueError):
        run_cycle(make_cycle_spec(MED, RES, 0.3, 1.0, family="poly_omega"), "closed_form")
    with pytest.raises(ValueError):
        run_cycle(make_cycle_spec(MED, RES, 0.3, 1.0), "warp")


def test_numeric_and_closed_form_agree():
    spec = make_cycle_spec(MED, RES, 0.25, 0.8)
    a, b = run_cycle(spec), run_cycle(spec, "closed_form")
    assert a.q_ab == pytest.approx(b.q_ab, abs=1e-8)
    assert a.efficiency == pytest.approx(b.efficiency, abs=1e-8)


def test_symmetric_accidental_strokes_share_q():
    for x, tau in ((0.3, 0.4), (0.7, 2.2), (0.15, 5.0)):
        r = run_cycle(make_cycle_spec(MED, RES, x, tau))
        assert abs(r.q_ab - r.q_cd) < 1e-8


def test_interactions_drop_out_of_adiabatic_work():
    """E0 enters E_A and E_C as E0(w1) and E0(w1)/x, which cancels in the Otto work."""
    res = Reservoirs.from_ratio(0.01, 0.1)
    w = {}
    for lam in (0.0, 2.0):
        w[lam] = run_cycle(make_cycle_spec(Medium(50, lam), res, 0.3, 1.0), "adiabatic").w_total
    d_e0 = ground_state_energy(Medium(50, 2.0), 1.0) - ground_state_energy(Medium(50, 0.0), 1.0)
    analytic = (1 - 1 / 0.3) * d_e0 + (1 - 0.3) * d_e0 / 0.3
    assert w[2.0] - w[0.0] == pytest.approx(analytic, abs=1e-9 * abs(w[0.0]))


def test_bound_ordering_small_sweep():
    for n, lam in ((1, 0.0), (50, 1.0)):
        med = Medium(n, lam)
        res = Reservoirs.from_ratio(1.0 / n, 0.02)
        for x in (0.15, 0.5, 0.85):
            for tau in (0.1, 1.0, 4.0):
                for fam in ("accidental", "poly_omega"):
                    r = run_cycle(make_cycle_spec(med, res, x, tau, family=fam))
                    if not r.operating:
                        continue
                    b = efficiency_bounds(r)
                    assert b.admits(r.efficiency, tol=1e-10)
                    assert b.eta_otto <= 1


def test_efficiency_bounds_sudden_lower_bound_vacuous():
    res = Reservoirs.from_ratio(0.02, 0.25)
    r = run_cycle(make_cycle_spec(MED, res, 0.35, sta_times(0.35)))
    b = efficiency_bounds(r)
    assert r.operating and math.isnan(b.eta_sq) and b.admits(r.efficiency)


def test_record_fields():
    rec = run_cycle(make_cycle_spec(MED, RES, 0.3, 1.0)).to_record()
    assert tuple(rec) == RECORD_FIELDS
    assert rec["lambda"] == 1.0 and rec["n_particles"] == 50 and rec["tau"] == 1.0


def test_sudden_q_helper():
    for x in np.linspace(0.05, 0.95, 7):
        assert sudden_q(x) == pytest.approx(q_sudden_ref(x), rel=1e-15)


def test_thermal_energies_match_medium():
    r = run_cycle(make_cycle_spec(MED, RES, 0.5, 1.0, omega1=2.0), "adiabatic")
    assert r.e_a == thermal_energy(MED, 2.0, RES.beta_c)
    assert r.e_c == thermal_energy(MED, 4.0, RES.beta_h)
