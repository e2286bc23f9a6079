"""Initial-condition library.

Every builder returns a state satisfying both compatibility constraints to
rounding: the velocity is Leray-projected and the director renormalized as a
final step regardless of how they were assembled.
"""

from __future__ import annotations

import numpy as np

from .dynamics import State, renormalize_director
from .grid import Field, Grid, project_divergence_free, random_band_limited, rms, sup_bound

__all__ = ["make_initial", "registered_initials"]


def _unit_vector(v) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (3,):
        raise ValueError(f"director must be a 3-vector, got shape {v.shape}")
    mag = float(np.linalg.norm(v))
    if mag == 0.0:
        raise ValueError("director must be nonzero")
    return v / mag


def _constant_director(grid: Grid, direction) -> Field:
    a = _unit_vector(direction)
    vals = np.empty((3, *grid.shape))
    for c in range(3):
        vals[c] = a[c]
    return Field(grid, vals)


def _taylor_green(grid: Grid, amplitude: float = 1.0, director=(0.0, 0.0, 1.0)) -> State:
    """Decaying vortex array; with a constant director the coupling is inert."""
    k0 = 2.0 * np.pi / grid.length
    mesh = grid.mesh
    x, y = k0 * mesh[0], k0 * mesh[1]
    if grid.dim == 2:
        u = np.stack([
            amplitude * np.sin(x) * np.cos(y),
            -amplitude * np.cos(x) * np.sin(y),
        ])
    else:
        z = k0 * mesh[2]
        u = np.stack([
            amplitude * np.sin(x) * np.cos(y) * np.cos(z),
            -amplitude * np.cos(x) * np.sin(y) * np.cos(z),
            np.zeros(grid.shape),
        ])
    return State(0.0, Field(grid, u), _constant_director(grid, director))


def _constant(grid: Grid, director=(0.0, 0.0, 1.0)) -> State:
    return State(0.0, Field.zeros(grid, grid.dim), _constant_director(grid, director))


def _helical(grid: Grid, m: int = 1) -> State:
    """Stationary coupled solution: d winds m times around the equator along x."""
    m = int(m)
    if m < 1 or 3 * m > grid.n:
        raise ValueError(f"helical winding m must be in [1, n/3], got {m}")
    k0 = 2.0 * np.pi / grid.length
    x = k0 * m * grid.mesh[0]
    d = np.stack([np.cos(x), np.sin(x), np.zeros(grid.shape)])
    return State(0.0, Field.zeros(grid, grid.dim), Field(grid, d))


def _random_smooth(
    grid: Grid,
    seed: int = 0,
    amplitude_u: float = 1.0,
    amplitude_d: float = 0.5,
    kmax: int = 3,
    decay: float = 0.7,
) -> State:
    """Leray-projected band-limited velocity and a perturbed-constant director.

    Coefficients are drawn on a fixed mode lattice and normalization uses
    grid-independent functionals (RMS speed for u, a spectral sup bound for
    the director bump), so the same seed produces samples of the same
    continuum data at every resolution.
    """
    if not 0.0 <= amplitude_d < 1.0:
        raise ValueError("amplitude_d must lie in [0, 1) to keep |d| away from zero")
    rng = np.random.default_rng(int(seed))
    u = project_divergence_free(random_band_limited(grid, rng, grid.dim, kmax, decay))
    u_rms = rms(u)
    if u_rms > 0:
        u = Field(grid, u.values * (amplitude_u / u_rms))
    w = random_band_limited(grid, rng, 3, kmax, decay)
    d_raw = (amplitude_d / sup_bound(w)) * w.values
    d_raw[2] += 1.0
    return State(0.0, u, Field(grid, d_raw))


def _near_singular(grid: Grid, delta: float = 0.5, center=None) -> State:
    """Degree-one director bubble with gradient concentrated at scale ``delta``.

    An inverse-stereographic profile is applied to a periodized coordinate
    window around the box center: the window equals the plane coordinates
    near the center and is mollified to zero at the cell boundary, so the
    map is smooth and periodic with |d| = 1 by construction.  Shrinking
    ``delta`` concentrates the gradient.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    L = grid.length
    if center is None:
        center = (L / 2.0,) * grid.dim
    center = np.asarray(center, dtype=np.float64)
    if center.shape != (grid.dim,):
        raise ValueError(f"center must have {grid.dim} coordinates")

    theta = [2.0 * np.pi * (grid.mesh[ax] - center[ax]) / L for ax in range(grid.dim)]
    window = np.ones(grid.shape)
    for th in theta:
        window *= 0.5 * (1.0 + np.cos(th))
    phi1 = (L / (2.0 * np.pi)) * np.sin(theta[0]) * window
    phi2 = (L / (2.0 * np.pi)) * np.sin(theta[1]) * window
    denom = delta**2 + phi1**2 + phi2**2
    d = np.stack([
        2.0 * delta * phi1 / denom,
        2.0 * delta * phi2 / denom,
        (phi1**2 + phi2**2 - delta**2) / denom,
    ])
    return State(0.0, Field.zeros(grid, grid.dim), Field(grid, d))


_REGISTRY = {
    "taylor_green": _taylor_green,
    "constant": _constant,
    "helical": _helical,
    "random_smooth": _random_smooth,
    "near_singular": _near_singular,
}


def registered_initials() -> tuple[str, ...]:
    return tuple(sorted(_REGISTRY))


def make_initial(name: str, params: dict | None, grid: Grid) -> State:
    """Build a registered initial state; both constraints hold to 1e-10.

    Unknown names and unknown/invalid parameters raise ValueError.
    """
    if name not in _REGISTRY:
        raise ValueError(
            f"unknown initial condition {name!r}; registered: {', '.join(registered_initials())}"
        )
    try:
        state = _REGISTRY[name](grid, **(params or {}))
    except TypeError as err:
        raise ValueError(f"bad parameters for initial {name!r}: {err}") from None
    # belt and braces: enforce both constraints exactly, then verify
    u = project_divergence_free(state.u) if np.any(state.u.values) else state.u
    d = renormalize_director(state.d, time=0.0)
    state = State(state.t, u, d)
    state.validate()
    return state
