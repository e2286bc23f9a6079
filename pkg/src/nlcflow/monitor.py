"""Regularity monitors: tracked norms, the accumulated criterion integral,
the discrete energy law, and the exponential-growth (Gronwall) report.

The criterion quantity is ``||curl u||_BMO + ||grad d||_L4^8``, accumulated
in time by the trapezoid rule on the diagnostics cadence.  The energy-law
residual checks that kinetic plus Dirichlet energy decreases exactly by twice
the viscous and director-tension dissipation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .grid import Field, Grid, _fftn, _grad_arrays, _ifftn_real, curl, divergence
from .norms import CubeFamily, bmo_norm, grad_lp, grad_order_sq_l2, lp_norm

if TYPE_CHECKING:  # only for annotations; dynamics imports this module
    from .dynamics import State

__all__ = [
    "DiagnosticsRecord",
    "CriterionAccumulator",
    "CriterionMonitor",
    "criterion_integrand",
    "accumulate",
    "energy_law_residual",
    "energy_functional_update",
    "GronwallReport",
    "gronwall_report",
    "validate_records",
]


@dataclass(frozen=True)
class DiagnosticsRecord:
    """One time sample of every monitored quantity.

    Squared norms are stored unhalved (no 1/2 factors): ``kinetic`` is
    ``||u||_L2^2``, ``dirichlet`` is ``||grad d||_L2^2``, ``visc_dissip`` is
    ``||grad u||_L2^2`` and ``tension_dissip`` is ``||lap d + |grad d|^2 d||_L2^2``.
    ``criterion_value`` and ``H_sup`` are running (non-decreasing) quantities.
    """

    t: float
    kinetic: float
    dirichlet: float
    visc_dissip: float
    tension_dissip: float
    grad_d_l4: float
    vort_bmo: float
    criterion_value: float
    h3_u: float
    h4_d: float
    H_sup: float
    div_max: float
    unit_max_dev: float

    FIELDS = (
        "t", "kinetic", "dirichlet", "visc_dissip", "tension_dissip",
        "grad_d_l4", "vort_bmo", "criterion_value", "h3_u", "h4_d",
        "H_sup", "div_max", "unit_max_dev",
    )

    def as_row(self) -> tuple[float, ...]:
        return tuple(getattr(self, name) for name in self.FIELDS)

    @classmethod
    def from_row(cls, row: Sequence[float]) -> "DiagnosticsRecord":
        if len(row) != len(cls.FIELDS):
            raise ValueError(f"expected {len(cls.FIELDS)} values, got {len(row)}")
        return cls(**dict(zip(cls.FIELDS, map(float, row))))


assert DiagnosticsRecord.FIELDS == tuple(f.name for f in fields(DiagnosticsRecord))


@dataclass
class CriterionAccumulator:
    """Running trapezoid integral of a non-negative integrand."""

    last_t: float
    last_integrand: float
    total: float = 0.0


def accumulate(acc: CriterionAccumulator, t_new: float, integrand_new: float) -> CriterionAccumulator:
    """Add the trapezoid increment over ``[last_t, t_new]``; mutates and returns ``acc``."""
    if not t_new > acc.last_t:
        raise ValueError(f"time must increase: {t_new} <= {acc.last_t}")
    if integrand_new < 0:
        raise ValueError(f"integrand must be non-negative, got {integrand_new}")
    acc.total += 0.5 * (acc.last_integrand + integrand_new) * (t_new - acc.last_t)
    acc.last_t = t_new
    acc.last_integrand = integrand_new
    return acc


def criterion_integrand(state: "State", cubes: CubeFamily | None = None) -> float:
    """``||curl u||_BMO + ||grad d||_L4^8`` at one instant."""
    return bmo_norm(curl(state.u), cubes) + grad_lp(state.d, 4.0) ** 8


def _tension_sq(state: "State") -> float:
    grid = state.grid
    d_hat = _fftn(grid, state.d.values)
    lap_d = _ifftn_real(grid, d_hat * (-grid.k_squared))
    dd = _grad_arrays(grid, d_hat)
    grad_sq = np.einsum("ci...,ci...->...", dd, dd)
    tension = lap_d + grad_sq * state.d.values
    return float(np.sum(tension * tension) * grid.cell_volume)


def energy_functional_update(record: DiagnosticsRecord, state: "State") -> DiagnosticsRecord:
    """Fill in the high-order energies and advance the running supremum.

    ``H_sup`` becomes ``max(record.H_sup, ||grad^3 u||^2 + ||grad^4 d||^2)``;
    the incoming record carries the supremum so far.
    """
    h3_u = grad_order_sq_l2(state.u, 3)
    h4_d = grad_order_sq_l2(state.d, 4)
    return replace(record, h3_u=h3_u, h4_d=h4_d, H_sup=max(record.H_sup, h3_u + h4_d))


class CriterionMonitor:
    """Owns the accumulator and running supremum across one run (single writer)."""

    def __init__(self, grid: Grid, nu: float = 1.0, cubes: CubeFamily | None = None):
        self.grid = grid
        self.nu = nu
        self.cubes = cubes if cubes is not None else CubeFamily.standard(grid)
        self._acc: CriterionAccumulator | None = None
        self._h_sup = 0.0
        self._last_t: float | None = None

    def observe(self, state: "State") -> DiagnosticsRecord:
        if self._last_t is not None and not state.t > self._last_t:
            raise ValueError(f"records must advance in time: {state.t} <= {self._last_t}")
        self._last_t = state.t

        vort_bmo = bmo_norm(curl(state.u), self.cubes)
        grad_d_l4 = grad_lp(state.d, 4.0)
        integrand = vort_bmo + grad_d_l4**8
        if self._acc is None:
            self._acc = CriterionAccumulator(state.t, integrand)
        else:
            accumulate(self._acc, state.t, integrand)

        record = DiagnosticsRecord(
            t=state.t,
            kinetic=lp_norm(state.u, 2.0) ** 2,
            dirichlet=grad_order_sq_l2(state.d, 1),
            visc_dissip=grad_order_sq_l2(state.u, 1),
            tension_dissip=_tension_sq(state),
            grad_d_l4=grad_d_l4,
            vort_bmo=vort_bmo,
            criterion_value=self._acc.total,
            h3_u=0.0,
            h4_d=0.0,
            H_sup=self._h_sup,
            div_max=state.max_div(),
            unit_max_dev=state.max_unit_deviation(),
        )
        record = energy_functional_update(record, state)
        self._h_sup = record.H_sup
        return record


def energy_law_residual(records: Sequence[DiagnosticsRecord], nu: float = 1.0) -> float:
    """Largest relative defect in the discrete energy balance.

    Checks ``E(t) + int_0^t 2*(nu*||grad u||^2 + ||tension||^2) ds = E(0)``
    with ``E = ||u||^2 + ||grad d||^2`` and trapezoid quadrature on the
    record times, normalized by ``E(0)``.
    """
    if len(records) < 2:
        raise ValueError("energy_law_residual needs at least two records")
    t = np.array([r.t for r in records])
    energy = np.array([r.kinetic + r.dirichlet for r in records])
    dissip = np.array([2.0 * (nu * r.visc_dissip + r.tension_dissip) for r in records])
    integral = np.concatenate([[0.0], np.cumsum(0.5 * (dissip[1:] + dissip[:-1]) * np.diff(t))])
    defect = np.max(np.abs(energy + integral - energy[0]))
    scale = energy[0] if energy[0] > 0 else 1.0
    return float(defect / scale)


@dataclass(frozen=True)
class GronwallReport:
    """Descriptive exponential-growth fit over a time window.

    ``L`` is the low-order energy ``||grad u||^2 + ||grad^2 d||^2 +
    ||grad d||_L4^4`` and ``A`` the criterion integral accumulated from
    ``t_star``; ``c_hat`` is the least-squares constant (clamped at zero) in
    ``L(t) <= L(t_star) * exp(c_hat * A(t))``.  Recorded, never asserted
    against any theoretical constant.
    """

    t_star: float
    times: tuple[float, ...]
    L: tuple[float, ...]
    A: tuple[float, ...]
    c_hat: float

    @property
    def L_star(self) -> float:
        return self.L[0]

    def summary(self) -> str:
        lines = [
            f"window start t* = {self.t_star:.17g}",
            f"records in window: {len(self.times)}",
            f"L(t*) = {self.L_star:.17g}",
            f"A(end) = {self.A[-1]:.17g}",
            f"fitted c = {self.c_hat:.17g}",
        ]
        return "\n".join(lines)


def gronwall_report(
    records: Sequence[DiagnosticsRecord], t_star: float | None = None
) -> GronwallReport:
    """Fit the smallest clamped exponential constant over ``[t_star, t_end]``.

    For a unit-length director ``<lap d, |grad d|^2 d> = -||grad d||_L4^4``,
    so ``||grad^2 d||^2 = tension_dissip + grad_d_l4^4`` follows from the
    stored columns (Plancherel makes ``||grad^2 d|| = ||lap d||`` on the
    torus); no extra state is needed to reconstruct ``L``.
    """
    if t_star is None:
        t_star = records[0].t if records else 0.0
    window = [r for r in records if r.t >= t_star - 1e-12]
    if len(window) < 2:
        raise ValueError("gronwall window needs at least two records")

    times = np.array([r.t for r in window])
    L = np.array([
        r.visc_dissip + r.tension_dissip + 2.0 * r.grad_d_l4**4 for r in window
    ])
    integrand = np.array([r.vort_bmo + r.grad_d_l4**8 for r in window])
    A = np.concatenate([[0.0], np.cumsum(0.5 * (integrand[1:] + integrand[:-1]) * np.diff(times))])

    if np.any(L <= 0):
        raise ValueError("gronwall fit needs strictly positive L(t)")
    y = np.log(L) - math.log(L[0])
    mask = A > 0
    if np.any(mask):
        c_hat = max(0.0, float(np.sum(A[mask] * y[mask]) / np.sum(A[mask] ** 2)))
    else:
        c_hat = 0.0
    return GronwallReport(
        t_star=float(t_star),
        times=tuple(map(float, times)),
        L=tuple(map(float, L)),
        A=tuple(map(float, A)),
        c_hat=c_hat,
    )


def validate_records(records: Sequence[DiagnosticsRecord]) -> None:
    """Assert the record-sequence invariants (monotone time and accumulators)."""
    prev: DiagnosticsRecord | None = None
    for rec in records:
        for name in DiagnosticsRecord.FIELDS:
            value = getattr(rec, name)
            if not math.isfinite(value):
                raise ValueError(f"record field {name} is not finite at t={rec.t}")
            if name != "t" and value < 0:
                raise ValueError(f"record field {name} is negative at t={rec.t}")
        if prev is not None:
            if not rec.t > prev.t:
                raise ValueError(f"record times must strictly increase at t={rec.t}")
            if rec.criterion_value < prev.criterion_value:
                raise ValueError("criterion_value must be non-decreasing")
            if rec.H_sup < prev.H_sup:
                raise ValueError("H_sup must be non-decreasing")
        prev = rec
