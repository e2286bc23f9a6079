"""Empirical checks of the functional inequalities and pointwise identities
used by the regularity analysis, evaluated over seeded corpora of synthetic
fields.

Every check returns a dimensionless ratio (or residual); corpora report the
maximum over samples.  Constants are recorded, never asserted against theory:
the tests only require them to be finite, stable under corpus growth, and
exactly scale invariant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import (
    Field,
    Grid,
    _fftn,
    _grad_arrays,
    _ifftn_real,
    curl,
    divergence,
    project_divergence_free,
    random_band_limited,
    sup_bound,
)
from .norms import (
    CubeFamily,
    _lp_of_magnitude,
    bmo_norm,
    derivative_magnitude,
    grad_order_sq_l2,
    lp_norm,
    sobolev_norm,
)

__all__ = [
    "GNExponents",
    "UndefinedRatioError",
    "gn_ratio",
    "log_sobolev_terms",
    "log_sobolev_ratio",
    "moser_ratio",
    "unit_director_identities",
    "interpolation_2_1_check",
    "Spectrum",
    "FieldCorpus",
    "corpus_values",
    "corpus_max",
]


class UndefinedRatioError(ValueError):
    """A ratio's denominator vanished (e.g. constant field under a derivative)."""


@dataclass(frozen=True)
class GNExponents:
    """Exponent set for the interpolation inequality

        ||grad^i f||_p <= C ||f||_q^alpha ||grad^k f||_r^(1-alpha)

    valid when ``1/p - i/dim = alpha/q + (1/r - k/dim)(1-alpha)`` with
    ``i <= k`` and ``0 <= alpha <= 1``; checked on construction.
    """

    i: int
    k: int
    p: float
    q: float
    r: float
    alpha: float
    dim: int = 3

    def __post_init__(self) -> None:
        if self.dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {self.dim}")
        if not (0 <= self.i <= self.k):
            raise ValueError(f"need 0 <= i <= k, got i={self.i}, k={self.k}")
        if not (0.0 <= self.alpha <= 1.0):
            raise ValueError(f"alpha must lie in [0,1], got {self.alpha}")
        for name in ("p", "q", "r"):
            if not getattr(self, name) >= 1.0:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        lhs = 1.0 / self.p - self.i / self.dim
        rhs = self.alpha / self.q + (1.0 / self.r - self.k / self.dim) * (1.0 - self.alpha)
        if abs(lhs - rhs) > 1e-10:
            raise ValueError(
                f"exponents violate the scaling relation: {lhs:.12g} != {rhs:.12g}"
            )

    @classmethod
    def from_orders(cls, i: int, k: int, p: float, q: float, r: float, dim: int = 3) -> "GNExponents":
        """Solve the scaling relation for alpha given the orders and exponents."""
        den = 1.0 / q - 1.0 / r + k / dim
        if den == 0.0:
            raise ValueError("exponent set does not determine alpha")
        alpha = (1.0 / p - i / dim - 1.0 / r + k / dim) / den
        return cls(i=i, k=k, p=p, q=q, r=r, alpha=alpha, dim=dim)


def gn_ratio(f: Field, e: GNExponents) -> float:
    """``||grad^i f||_p / (||f||_q^alpha * ||grad^k f||_r^(1-alpha))``."""
    if f.grid.dim != e.dim:
        raise ValueError(f"exponents are for dim {e.dim}, field has dim {f.grid.dim}")
    num = _lp_of_magnitude(f.grid, derivative_magnitude(f, e.i), e.p)
    den_q = lp_norm(f, e.q) ** e.alpha if e.alpha > 0 else 1.0
    den_r = (
        _lp_of_magnitude(f.grid, derivative_magnitude(f, e.k), e.r) ** (1.0 - e.alpha)
        if e.alpha < 1.0
        else 1.0
    )
    den = den_q * den_r
    if den == 0.0:
        raise UndefinedRatioError("interpolation ratio undefined: denominator is zero")
    return num / den


def log_sobolev_terms(
    f: Field, cubes: CubeFamily | None = None, p: float = 4.0
) -> tuple[float, float, float]:
    """Ingredients of the logarithmic embedding for divergence-free fields.

    Returns ``(||grad f||_Linf, ||f||_L2, ||curl f||_BMO * ln(1 + ||f||_W2p))``.
    The bound under test is lhs <= C * (1 + second + third); ``p`` defaults
    to 4 (any p > dim works, the choice is a knob).
    """
    if f.components != f.grid.dim:
        raise ValueError(f"need a {f.grid.dim}-component vector field")
    max_div = float(np.max(np.abs(divergence(f).values)))
    if max_div > 1e-8:
        raise ValueError(f"field is not divergence-free: max|div f| = {max_div:.3e}")
    lhs = float(derivative_magnitude(f, 1).max())
    l2 = lp_norm(f, 2.0)
    bmo_log = bmo_norm(curl(f), cubes) * math.log1p(sobolev_norm(f, 2, p))
    return lhs, l2, bmo_log


def log_sobolev_ratio(f: Field, cubes: CubeFamily | None = None, p: float = 4.0) -> float:
    """Empirical constant ``lhs / (1 + l2 + bmo_log_term)`` for one sample."""
    lhs, l2, bmo_log = log_sobolev_terms(f, cubes, p)
    return lhs / (1.0 + l2 + bmo_log)


def moser_ratio(f: Field, g: Field, s: int) -> float:
    """Product-rule ratio ``||grad^s(fg)||_2 / (||g||_inf ||grad^s f||_2 + ||f||_inf ||grad^s g||_2)``."""
    if s < 1:
        raise ValueError("s must be >= 1")
    if g.components == 1:
        prod = Field(f.grid, f.values * g.values[0])
    elif f.components == 1:
        prod = Field(f.grid, g.values * f.values[0])
    else:
        raise ValueError("moser_ratio needs at least one scalar factor")
    num = math.sqrt(grad_order_sq_l2(prod, s))
    den = lp_norm(g, math.inf) * math.sqrt(grad_order_sq_l2(f, s)) + lp_norm(
        f, math.inf
    ) * math.sqrt(grad_order_sq_l2(g, s))
    if den == 0.0:
        raise UndefinedRatioError("moser ratio undefined: denominator is zero")
    return num / den


def unit_director_identities(d: Field, unit_tol: float = 1e-8) -> tuple[float, float]:
    """Residuals of the two pointwise identities valid for |d| = 1.

    res1 = max | |grad d|^2 + d . lap d |
    res2 = max | (grad d)^T lap d - div(grad d (x) grad d - 1/2 |grad d|^2 I) |

    Both are evaluated spectrally; analytic unit fields give residuals at
    rounding level, renormalized sampled fields at the level of their
    spectral interpolation error.
    """
    if d.components != 3:
        raise ValueError("director must have 3 components")
    grid = d.grid
    mag = np.sqrt(np.einsum("c...,c...->...", d.values, d.values))
    dev = float(np.max(np.abs(mag - 1.0)))
    if dev > unit_tol:
        raise ValueError(f"director is not unit length: max||d|-1| = {dev:.3e}")

    d_hat = _fftn(grid, d.values)
    dd = _grad_arrays(grid, d_hat)                      # dd[c, i] = d(d_c)/dx_i
    lap_d = _ifftn_real(grid, d_hat * (-grid.k_squared))
    grad_sq = np.einsum("ci...,ci...->...", dd, dd)
    res1 = float(np.max(np.abs(grad_sq + np.einsum("c...,c...->...", d.values, lap_d))))

    lhs = np.einsum("cj...,c...->j...", dd, lap_d)       # (grad d)^T lap d
    div_t = np.zeros_like(lhs)
    for j in range(grid.dim):
        for i in range(grid.dim):
            t_ji = np.einsum("c...,c...->...", dd[:, j], dd[:, i])
            if i == j:
                t_ji = t_ji - 0.5 * grad_sq
            t_hat = _fftn(grid, t_ji[np.newaxis])[0]
            div_t[j] += _ifftn_real(grid, (t_hat * (1j * grid.k_mesh[i]))[np.newaxis])[0]
    res2 = float(np.max(np.sqrt(np.einsum("j...,j...->...", lhs - div_t, lhs - div_t))))
    return res1, res2


def interpolation_2_1_check(f: Field, k: int) -> float:
    """Ratio ``||f||_{H^k}^2 / (||f||_2^2 + ||grad^k f||_2^2)``.

    With the Plancherel H^k convention the per-mode weight is
    ``sum_j |k|^(2j) / (1 + |k|^(2k))``, bounded by k+1 and at most 2 for
    integer modes, so corpus maxima stay near 2.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    orders = [grad_order_sq_l2(f, j) for j in range(k + 1)]
    den = orders[0] + orders[-1]
    if den == 0.0:
        raise UndefinedRatioError("interpolation check undefined for the zero field")
    return sum(orders) / den


# ---------------------------------------------------------------------------
# seeded corpora

@dataclass(frozen=True)
class Spectrum:
    """Band-limited random-field law: modes ``|m_i| <= kmax`` with
    amplitude envelope ``exp(-decay*|m|)``."""

    kmax: int = 3
    decay: float = 0.7


@dataclass(frozen=True)
class FieldCorpus:
    """Reproducible family of random fields, optionally constrained.

    ``constraint`` is one of ``None``, ``"divergence_free"`` (Leray-projected
    vector fields) or ``"unit_length"`` (3-component fields pushed to the unit
    sphere).  Sample ``i`` depends only on ``(seed, i)``, so growing ``count``
    extends the corpus without changing existing samples.
    """

    seed: int
    count: int
    spectrum: Spectrum = field(default_factory=Spectrum)
    constraint: str | None = None
    components: int = 1
    amplitude: float = 0.9

    def __post_init__(self) -> None:
        if self.count < 1:
            raise ValueError("corpus count must be >= 1")
        if self.constraint not in (None, "divergence_free", "unit_length"):
            raise ValueError(f"unknown constraint {self.constraint!r}")
        if self.constraint == "unit_length" and not (0.0 < self.amplitude < 1.0):
            raise ValueError("unit_length corpus needs amplitude in (0, 1)")

    def sample(self, grid: Grid, index: int) -> Field:
        rng = np.random.default_rng([self.seed, index])
        spec = self.spectrum
        if self.constraint == "divergence_free":
            raw = random_band_limited(grid, rng, grid.dim, spec.kmax, spec.decay)
            return project_divergence_free(raw)
        if self.constraint == "unit_length":
            raw = random_band_limited(grid, rng, 3, spec.kmax, spec.decay)
            bump = (self.amplitude / sup_bound(raw)) * raw.values
            bump[2] += 1.0
            unit = bump / np.sqrt(np.einsum("c...,c...->...", bump, bump))
            return Field(grid, unit)
        return random_band_limited(grid, rng, self.components, spec.kmax, spec.decay)

    def samples(self, grid: Grid):
        for i in range(self.count):
            yield self.sample(grid, i)


def corpus_values(corpus: FieldCorpus, grid: Grid, fn) -> np.ndarray:
    """Evaluate ``fn(field)`` over the corpus in sample order."""
    return np.array([fn(f) for f in corpus.samples(grid)])


def corpus_max(corpus: FieldCorpus, grid: Grid, fn) -> tuple[float, int]:
    """Maximum of ``fn`` over the corpus and the index attaining it."""
    values = corpus_values(corpus, grid, fn)
    idx = int(np.argmax(values))
    return float(values[idx]), idx
