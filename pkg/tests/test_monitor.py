"""Criterion accumulation, energy-law residual, and the Gronwall fit."""

import math

import numpy as np
import pytest

from nlcflow.dynamics import SolverConfig, State, run
from nlcflow.grid import Field, Grid
from nlcflow.initial import make_initial
from nlcflow.monitor import (
    CriterionAccumulator,
    CriterionMonitor,
    DiagnosticsRecord,
    accumulate,
    criterion_integrand,
    energy_functional_update,
    energy_law_residual,
    gronwall_report,
    validate_records,
)
from nlcflow.norms import bmo_norm, exhaustive_bmo_norm

TWO_PI = 2.0 * np.pi


def _record(t, **overrides):
    base = dict(
        t=t, kinetic=1.0, dirichlet=1.0, visc_dissip=1.0, tension_dissip=1.0,
        grad_d_l4=1.0, vort_bmo=0.0, criterion_value=t, h3_u=1.0, h4_d=1.0,
        H_sup=2.0, div_max=0.0, unit_max_dev=0.0,
    )
    base.update(overrides)
    return DiagnosticsRecord(**base)


class TestAccumulator:
    def test_constant_integrand(self):
        acc = CriterionAccumulator(0.0, 3.0)
        for i in range(1, 101):
            accumulate(acc, i * 0.01, 3.0)
        assert np.isclose(acc.total, 3.0, rtol=1e-12)

    def test_linear_integrand_exact(self):
        acc = CriterionAccumulator(0.0, 0.0)
        dt = 1e-3
        for i in range(1, 1001):
            accumulate(acc, i * dt, i * dt)
        assert abs(acc.total - 0.5) <= 1e-12

    def test_quadratic_integrand_trapezoid_error(self):
        acc = CriterionAccumulator(0.0, 0.0)
        dt = 1e-2
        for i in range(1, 101):
            accumulate(acc, i * dt, (i * dt) ** 2)
        assert abs(acc.total - 1.0 / 3.0) <= 2e-5

    def test_non_monotone_time_rejected(self):
        acc = CriterionAccumulator(1.0, 0.0)
        with pytest.raises(ValueError, match="increase"):
            accumulate(acc, 1.0, 0.0)
        with pytest.raises(ValueError, match="increase"):
            accumulate(acc, 0.5, 0.0)

    def test_negative_integrand_rejected(self):
        acc = CriterionAccumulator(0.0, 0.0)
        with pytest.raises(ValueError, match="non-negative"):
            accumulate(acc, 1.0, -1.0)


class TestCriterionIntegrand:
    def test_zero_state(self, grid3d):
        st = make_initial("constant", {}, grid3d)
        assert criterion_integrand(st) == 0.0

    def test_helical_3d(self):
        st = make_initial("helical", {"m": 1}, Grid(3, 16))
        assert np.isclose(criterion_integrand(st), TWO_PI**6, rtol=1e-12)

    def test_taylor_green_bmo_only(self):
        # constant director contributes nothing; value is the vorticity BMO,
        # cross-checked against the analytic curl and the brute-force family
        g = Grid(2, 16)
        st = make_initial("taylor_green", {}, g)
        x, y = g.mesh
        curl_analytic = Field(g, 2.0 * np.sin(x) * np.sin(y))
        got = criterion_integrand(st)
        assert np.isclose(got, bmo_norm(curl_analytic), rtol=1e-11)
        assert got >= 0.9 * exhaustive_bmo_norm(curl_analytic)


class TestEnergyFunctional:
    def test_zero_state(self, grid3d):
        st = make_initial("constant", {}, grid3d)
        rec = energy_functional_update(_record(0.0, H_sup=0.0), st)
        assert rec.h3_u == 0.0 and rec.h4_d == 0.0 and rec.H_sup == 0.0

    def test_helical_fourth_derivative(self):
        # d = (cos x, sin x, 0): grad^4 d = d, so ||grad^4 d||^2 = (2 pi)^3
        st = make_initial("helical", {"m": 1}, Grid(3, 16))
        rec = energy_functional_update(_record(0.0, H_sup=0.0), st)
        assert np.isclose(rec.h4_d, TWO_PI**3, rtol=1e-11)
        assert rec.h3_u == 0.0
        assert np.isclose(rec.H_sup, TWO_PI**3, rtol=1e-11)

    def test_sup_is_running_max(self, grid3d):
        st = make_initial("helical", {"m": 1}, grid3d)
        rec = energy_functional_update(_record(0.0, H_sup=1e9), st)
        assert rec.H_sup == 1e9

    def test_taylor_green_sup_stays_at_start(self):
        g = Grid(2, 32)
        st = make_initial("taylor_green", {}, g)
        res = run(st, SolverConfig(nu=1.0, dt=1e-3, t_end=0.05, diagnostics_every=10))
        sups = [r.H_sup for r in res.records]
        assert all(np.isclose(s, sups[0], rtol=1e-12) for s in sups)


class TestEnergyLawResidual:
    def test_needs_two_records(self):
        with pytest.raises(ValueError, match="two records"):
            energy_law_residual([_record(0.0)])

    def test_stationary_records(self):
        st = make_initial("helical", {"m": 1}, Grid(3, 16))
        res = run(st, SolverConfig(nu=1.0, dt=1e-3, t_end=0.01, diagnostics_every=5))
        assert energy_law_residual(res.records, nu=1.0) <= 1e-12

    def test_taylor_green_exact_decay(self):
        g = Grid(2, 64)
        st = make_initial("taylor_green", {}, g)
        res = run(st, SolverConfig(nu=1.0, dt=1e-3, t_end=0.2, diagnostics_every=10))
        # records follow the exact solution: kinetic = ||u0||^2 exp(-4 nu t)
        k0 = res.records[0].kinetic
        assert np.isclose(k0, 2.0 * np.pi**2, rtol=1e-12)
        for rec in res.records:
            assert np.isclose(rec.kinetic, k0 * np.exp(-4.0 * rec.t), rtol=1e-6)
        assert energy_law_residual(res.records, nu=1.0) <= 1e-3


class TestGronwall:
    def test_too_short_window(self):
        with pytest.raises(ValueError, match="two records"):
            gronwall_report([_record(0.0)])
        recs = [_record(0.0), _record(1.0)]
        with pytest.raises(ValueError, match="two records"):
            gronwall_report(recs, t_star=0.5)

    def test_stationary_gives_zero(self):
        st = make_initial("helical", {"m": 1}, Grid(3, 16))
        res = run(st, SolverConfig(nu=1.0, dt=1e-3, t_end=0.01, diagnostics_every=5))
        rep = gronwall_report(res.records)
        assert rep.c_hat <= 1e-12

    def test_decaying_gives_exact_zero(self):
        st = make_initial("taylor_green", {}, Grid(2, 32))
        res = run(st, SolverConfig(nu=1.0, dt=1e-3, t_end=0.05, diagnostics_every=10))
        assert gronwall_report(res.records).c_hat == 0.0

    def test_known_exponential_growth_recovered(self):
        # L(t) = L0 exp(c*A(t)) with constant integrand: fit recovers c
        c, integrand = 0.8, 2.0
        recs = []
        for i in range(11):
            t = 0.1 * i
            A = integrand * t
            L = 5.0 * math.exp(c * A)
            # tension + 2*grad_d_l4^4 + visc = L with grad_d_l4 chosen so the
            # integrand is vort_bmo + grad_d_l4^8 = constant
            g4 = (integrand / 2.0) ** 0.125
            recs.append(_record(
                t, visc_dissip=L / 2.0, tension_dissip=L / 2.0 - 2.0 * g4**4,
                grad_d_l4=g4, vort_bmo=integrand - g4**8, criterion_value=A,
            ))
        rep = gronwall_report(recs)
        assert np.isclose(rep.c_hat, c, rtol=1e-10)
        assert np.isclose(rep.A[-1], integrand, rtol=1e-12)

    def test_clamped_at_zero(self):
        recs = [
            _record(0.0, visc_dissip=10.0, vort_bmo=1.0),
            _record(1.0, visc_dissip=5.0, vort_bmo=1.0),
            _record(2.0, visc_dissip=2.0, vort_bmo=1.0),
        ]
        assert gronwall_report(recs).c_hat == 0.0

    def test_window_start(self):
        recs = [_record(float(i), visc_dissip=2.0 ** i, vort_bmo=1.0) for i in range(5)]
        rep = gronwall_report(recs, t_star=2.0)
        assert rep.times[0] == 2.0
        assert len(rep.times) == 3
        assert rep.c_hat > 0.0


class TestMonitorAndRecords:
    def test_monitor_produces_valid_sequence(self):
        g = Grid(2, 32)
        st = make_initial("random_smooth", {"seed": 2, "amplitude_u": 0.5}, g)
        res = run(st, SolverConfig(nu=1.0, dt=1e-3, t_end=0.02, diagnostics_every=4))
        assert not res.failed
        validate_records(res.records)
        assert res.records[0].t == 0.0
        assert res.records[-1].t == pytest.approx(0.02)

    def test_validate_rejects_tampering(self):
        good = [_record(0.0, criterion_value=0.0), _record(1.0, criterion_value=1.0)]
        validate_records(good)
        with pytest.raises(ValueError, match="non-decreasing"):
            validate_records([_record(0.0, criterion_value=1.0), _record(1.0, criterion_value=0.5)])
        with pytest.raises(ValueError, match="strictly increase"):
            validate_records([_record(1.0), _record(1.0)])
        with pytest.raises(ValueError, match="negative"):
            validate_records([_record(0.0, kinetic=-1.0)])

    def test_monitor_rejects_time_reversal(self, grid3d):
        mon = CriterionMonitor(grid3d)
        st = make_initial("helical", {"m": 1}, grid3d)
        mon.observe(st)
        with pytest.raises(ValueError, match="advance"):
            mon.observe(st)

    def test_record_round_trip(self):
        rec = _record(0.5, kinetic=math.pi)
        assert DiagnosticsRecord.from_row(rec.as_row()) == rec
        with pytest.raises(ValueError, match="expected"):
            DiagnosticsRecord.from_row((1.0, 2.0))
