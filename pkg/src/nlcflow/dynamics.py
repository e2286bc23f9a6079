"""Time integration of the coupled velocity / director system.

The system is incompressible Navier-Stokes forced by the director's elastic
stress, coupled to a transported harmonic-map heat flow into the unit sphere:

    u_t + u.grad(u) - nu*lap(u) + grad(P) =  -(grad d)^T lap(d)
    d_t + u.grad(d)                        =  lap(d) + |grad d|^2 d
    div(u) = 0,  |d| = 1

Pressure is eliminated by Leray projection.  Stiff diffusion is integrated
exactly per Fourier mode (integrating factor); the transport, stress, and
reaction terms are explicit: first order ("imex1") or second order with
extrapolated explicit terms ("sbdf2").  The discrete scheme does not inherit
the maximum principle for |d|, so the director is renormalized to unit length
on a configurable cadence (default: every step).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .grid import (
    Field,
    Grid,
    _fftn,
    _grad_arrays,
    _ifftn_real,
    _leray_coefficients,
    divergence,
)
from .monitor import CriterionMonitor, DiagnosticsRecord

__all__ = [
    "State",
    "SolverConfig",
    "SingularityError",
    "StepDivergedError",
    "velocity_rhs",
    "director_rhs",
    "renormalize_director",
    "Integrator",
    "step",
    "run",
    "RunResult",
]

log = logging.getLogger(__name__)

SCHEMES = ("imex1", "sbdf2")

#: rejection thresholds for the state constraints
DIV_TOL = 1e-10
UNIT_TOL = 1e-10


class SingularityError(RuntimeError):
    """Zero-length director encountered; flagged as a singularity candidate."""

    def __init__(self, time: float, message: str):
        super().__init__(message)
        self.time = time


class StepDivergedError(RuntimeError):
    """Non-finite values appeared after a step."""

    def __init__(self, time: float, message: str):
        super().__init__(message)
        self.time = time


@dataclass
class State:
    """Simulation time plus velocity (dim components) and director (3 components)."""

    t: float
    u: Field
    d: Field

    def __post_init__(self) -> None:
        grid = self.u.grid
        if self.d.grid != grid:
            raise ValueError("velocity and director live on different grids")
        if self.u.components != grid.dim:
            raise ValueError(f"velocity needs {grid.dim} components, got {self.u.components}")
        if self.d.components != 3:
            raise ValueError(f"director needs 3 components, got {self.d.components}")

    @property
    def grid(self) -> Grid:
        return self.u.grid

    def director_magnitude(self) -> np.ndarray:
        return np.sqrt(np.einsum("c...,c...->...", self.d.values, self.d.values))

    def max_div(self) -> float:
        return float(np.max(np.abs(divergence(self.u).values)))

    def max_unit_deviation(self) -> float:
        return float(np.max(np.abs(self.director_magnitude() - 1.0)))

    def validate(self, div_tol: float = DIV_TOL, unit_tol: float = UNIT_TOL) -> None:
        dv = self.max_div()
        if dv > div_tol:
            raise ValueError(f"velocity is not divergence-free: max|div u| = {dv:.3e}")
        ud = self.max_unit_deviation()
        if ud > unit_tol:
            raise ValueError(f"director is not unit length: max||d|-1| = {ud:.3e}")


@dataclass(frozen=True)
class SolverConfig:
    """Time-stepping parameters.  ``cfl_limit`` is advisory (logged, not enforced)."""

    nu: float
    dt: float
    t_end: float
    scheme: str = "imex1"
    dealias_on: bool = True
    renormalize_every: int = 1
    diagnostics_every: int = 1
    cfl_limit: float = 0.5

    def __post_init__(self) -> None:
        if not (self.nu > 0 and math.isfinite(self.nu)):
            raise ValueError(f"nu must be positive, got {self.nu}")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not (self.t_end >= 0 and math.isfinite(self.t_end)):
            raise ValueError(f"t_end must be non-negative, got {self.t_end}")
        if self.t_end > 0 and self.dt > self.t_end * (1 + 1e-12):
            raise ValueError(f"dt={self.dt} exceeds t_end={self.t_end}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.renormalize_every < 1:
            raise ValueError("renormalize_every must be >= 1")
        if self.diagnostics_every < 1:
            raise ValueError("diagnostics_every must be >= 1")


# ---------------------------------------------------------------------------
# explicit right-hand sides

def _explicit_terms(
    grid: Grid,
    u_hat: np.ndarray,
    d_hat: np.ndarray,
    u: np.ndarray,
    d: np.ndarray,
    dealias_on: bool,
) -> tuple[np.ndarray, np.ndarray]:
    """Spectral explicit terms (N_u, N_d); diffusion is handled by the stepper.

    N_u = P[-u.grad(u) - (grad d)^T lap(d)]    (P = Leray projection)
    N_d = -u.grad(d) + |grad d|^2 d

    The cubic reaction is assembled as two successive binary products with the
    2/3-rule truncation applied to each product's spectrum when enabled.
    """
    mask = grid.dealias_mask if dealias_on else None
    du = _grad_arrays(grid, u_hat)          # du[j, i] = d(u_j)/dx_i
    dd = _grad_arrays(grid, d_hat)          # dd[c, i] = d(d_c)/dx_i
    lap_d = _ifftn_real(grid, d_hat * (-grid.k_squared))

    conv_u = np.einsum("i...,ji...->j...", u, du)
    stress = np.einsum("cj...,c...->j...", dd, lap_d)
    nu_hat = _fftn(grid, -conv_u - stress)
    if mask is not None:
        nu_hat *= mask
    nu_hat = _leray_coefficients(grid, nu_hat)

    grad_sq = np.einsum("ci...,ci...->...", dd, dd)
    if mask is not None:
        grad_sq = _ifftn_real(grid, _fftn(grid, grad_sq[np.newaxis]) * mask)[0]
    conv_d = np.einsum("i...,ci...->c...", u, dd)
    nd_hat = _fftn(grid, grad_sq * d - conv_d)
    if mask is not None:
        nd_hat *= mask
    return nu_hat, nd_hat


def _check_state(state: State) -> None:
    state.validate()


def velocity_rhs(state: State, dealias_on: bool = True, check: bool = True) -> Field:
    """Leray-projected explicit velocity terms ``-u.grad(u) - (grad d)^T lap(d)``."""
    if check:
        _check_state(state)
    grid = state.grid
    nu_hat, _ = _explicit_terms(
        grid, _fftn(grid, state.u.values), _fftn(grid, state.d.values),
        state.u.values, state.d.values, dealias_on,
    )
    return Field(grid, _ifftn_real(grid, nu_hat))


def director_rhs(state: State, dealias_on: bool = True, check: bool = True) -> Field:
    """Explicit director terms ``-u.grad(d) + |grad d|^2 d``."""
    if check:
        _check_state(state)
    grid = state.grid
    _, nd_hat = _explicit_terms(
        grid, _fftn(grid, state.u.values), _fftn(grid, state.d.values),
        state.u.values, state.d.values, dealias_on,
    )
    return Field(grid, _ifftn_real(grid, nd_hat))


def renormalize_director(d: Field, time: float = float("nan")) -> Field:
    """Pointwise projection onto the unit sphere, ``d / |d|``.

    A zero-length director anywhere is a hard failure: the flow map is no
    longer sphere-valued there and the run must stop.
    """
    mag = np.sqrt(np.einsum("c...,c...->...", d.values, d.values))
    lowest = float(mag.min())
    if lowest <= 1e-14:
        raise SingularityError(
            time, f"director magnitude fell to {lowest:.3e}; singularity candidate"
        )
    return Field(d.grid, d.values / mag)


# ---------------------------------------------------------------------------
# time stepping

def _phi_functions(z: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(e^z, phi1, phi2) with phi1=(e^z-1)/z, phi2=(e^z-1-z)/z^2, stable near 0."""
    ez = np.exp(z)
    small = np.abs(z) < 1e-4
    zs = np.where(small, 1.0, z)
    phi1 = np.where(small, 1.0 + z / 2 + z**2 / 6 + z**3 / 24, np.expm1(z) / zs)
    phi2 = np.where(small, 0.5 + z / 6 + z**2 / 24 + z**3 / 120, (np.expm1(z) - z) / zs**2)
    return ez, phi1, phi2


class Integrator:
    """Mode-diagonal IMEX stepper with exact diffusion factors.

    ``imex1`` advances the explicit terms with forward Euler through the
    variation-of-constants formula; ``sbdf2`` extrapolates them to second
    order from the previous step (the first step falls back to first order).
    Diffusion enters through exp(-nu*|k|^2*dt) exactly, so linear decay is
    reproduced to rounding and no stiffness limit applies.
    """

    def __init__(self, cfg: SolverConfig, grid: Grid):
        self.cfg = cfg
        self.grid = grid
        self._eu, self._phi1_u, self._phi2_u = _phi_functions(-cfg.nu * cfg.dt * grid.k_squared)
        self._ed, self._phi1_d, self._phi2_d = _phi_functions(-cfg.dt * grid.k_squared)
        self._prev: tuple[np.ndarray, np.ndarray] | None = None
        self.steps_done = 0

    def step(self, state: State, renormalize: bool | None = None) -> State:
        cfg, grid = self.cfg, self.grid
        t_new = state.t + cfg.dt
        u_hat = _fftn(grid, state.u.values)
        d_hat = _fftn(grid, state.d.values)
        nu_hat, nd_hat = _explicit_terms(
            grid, u_hat, d_hat, state.u.values, state.d.values, cfg.dealias_on
        )

        exp_u = nu_hat * self._phi1_u
        exp_d = nd_hat * self._phi1_d
        if cfg.scheme == "sbdf2" and self._prev is not None:
            prev_u, prev_d = self._prev
            exp_u = exp_u + (nu_hat - prev_u) * self._phi2_u
            exp_d = exp_d + (nd_hat - prev_d) * self._phi2_d

        u_new_hat = self._eu * u_hat + cfg.dt * exp_u
        u_new_hat = _leray_coefficients(grid, u_new_hat)
        d_new_hat = self._ed * d_hat + cfg.dt * exp_d

        u_new = _ifftn_real(grid, u_new_hat)
        d_new = _ifftn_real(grid, d_new_hat)
        # amplitude guard keeps downstream diagnostics (squares, 8th powers)
        # finite right up to the flagged failure
        peak = max(np.max(np.abs(u_new)), np.max(np.abs(d_new)))
        if not (np.isfinite(peak) and peak < 1e60):
            raise StepDivergedError(t_new, f"non-finite or runaway state at t = {t_new:.6g}")

        self._prev = (nu_hat, nd_hat)
        self.steps_done += 1
        if renormalize is None:
            renormalize = self.steps_done % cfg.renormalize_every == 0

        d_field = Field(grid, d_new)
        if renormalize:
            d_field = renormalize_director(d_field, time=t_new)
        return State(t_new, Field(grid, u_new), d_field)


def step(state: State, cfg: SolverConfig) -> State:
    """Advance one step from a fresh integrator (first step of the scheme)."""
    return Integrator(cfg, state.grid).step(state)


@dataclass
class RunResult:
    """Final state, diagnostics, and the failure marker if the run aborted."""

    state: State
    records: list[DiagnosticsRecord] = field(default_factory=list)
    failed: bool = False
    failure_time: float | None = None
    failure_reason: str | None = None


def run(
    state0: State,
    cfg: SolverConfig,
    sink=None,
    step_callback=None,
    monitor: CriterionMonitor | None = None,
) -> RunResult:
    """Integrate to ``t_end``, emitting diagnostics every ``diagnostics_every`` steps.

    ``sink`` (if given) receives each DiagnosticsRecord as it is produced, in
    time order.  ``step_callback(step_index, state)`` runs after every step
    (snapshot hooks).  On divergence or a director singularity the records
    collected so far are returned together with the failure marker instead of
    raising.
    """
    state0.validate()
    grid = state0.grid
    if monitor is None:
        monitor = CriterionMonitor(grid, nu=cfg.nu)
    records: list[DiagnosticsRecord] = []

    def emit(state: State) -> None:
        rec = monitor.observe(state)
        records.append(rec)
        if sink is not None:
            sink(rec)

    nsteps = int(math.floor(cfg.t_end / cfg.dt + 1e-9))
    emit(state0)
    integ = Integrator(cfg, grid)
    state = state0
    warned_cfl = False
    try:
        for m in range(1, nsteps + 1):
            state = integ.step(state)
            if step_callback is not None:
                step_callback(m, state)
            if m % cfg.diagnostics_every == 0 or m == nsteps:
                emit(state)
                cfl = cfg.dt * float(np.max(np.abs(state.u.values))) / grid.spacing
                if cfl > cfg.cfl_limit and not warned_cfl:
                    log.warning("advective CFL %.3g exceeds advisory limit %.3g", cfl, cfg.cfl_limit)
                    warned_cfl = True
    except (StepDivergedError, SingularityError) as err:
        return RunResult(state, records, failed=True, failure_time=err.time,
                         failure_reason=str(err))
    return RunResult(state, records)
