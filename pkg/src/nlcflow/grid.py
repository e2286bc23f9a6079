"""Periodic grids, Fourier transforms, and exact spectral operators.

Everything here is stateless: operators take a field, return a new field.
Wavenumber tables are cached on the (frozen) grid object so repeated calls
share them.

Conventions
-----------
Physical arrays have shape ``(components, n, ..., n)`` with ``dim`` spatial
axes of length ``n``.  Spectral arrays use the unnormalized numpy/scipy FFT
convention, so the ``k=0`` coefficient of a constant field ``c`` is
``c * n**dim``.

First-order derivatives (and everything built on them: gradient, divergence,
curl, Leray projection) use wavenumbers with the Nyquist mode zeroed, the
standard choice that keeps odd-order derivatives of real fields real and
makes ``div(leray_project(v))`` vanish mode by mode.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from math import factorial

import numpy as np
import scipy.fft as _fft

__all__ = [
    "Grid",
    "Field",
    "SpectralField",
    "forward",
    "inverse",
    "hermitian_residual",
    "derivative",
    "gradient",
    "divergence",
    "curl",
    "laplacian",
    "leray_project",
    "project_divergence_free",
    "dealias",
    "dealias_field",
    "spectral_l2",
    "random_band_limited",
]


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Uniform periodic box ``[0, length)^dim`` sampled at ``n`` points per axis.

    Parameters
    ----------
    dim : int
        Spatial dimension, 2 or 3.
    n : int
        Points per axis; power of two, at least 8.
    length : float
        Box edge length (default ``2*pi``).
    """

    dim: int
    n: int
    length: float = 2.0 * np.pi

    def __post_init__(self) -> None:
        if self.dim not in (2, 3):
            raise ValueError(f"grid dim must be 2 or 3, got {self.dim}")
        if not isinstance(self.n, int) or not _is_power_of_two(self.n) or self.n < 8:
            raise ValueError(f"grid n must be a power of two >= 8, got {self.n}")
        if not (self.length > 0.0 and np.isfinite(self.length)):
            raise ValueError(f"grid length must be positive and finite, got {self.length}")

    @property
    def spacing(self) -> float:
        return self.length / self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def num_points(self) -> int:
        return self.n**self.dim

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    @property
    def spatial_axes(self) -> tuple[int, ...]:
        """Axes of the spatial dimensions in a ``(components, *shape)`` array."""
        return tuple(range(1, self.dim + 1))

    @cached_property
    def axis_coords(self) -> np.ndarray:
        """1-D coordinate array ``[0, h, ..., length - h]``."""
        return np.arange(self.n) * self.spacing

    @cached_property
    def mesh(self) -> tuple[np.ndarray, ...]:
        """Coordinate meshgrid (``indexing='ij'``), one array per axis."""
        return tuple(np.meshgrid(*(self.axis_coords,) * self.dim, indexing="ij"))

    @cached_property
    def mode_index(self) -> np.ndarray:
        """Integer mode numbers in FFT order: ``0, 1, ..., n/2-1, -n/2, ..., -1``."""
        return np.rint(np.fft.fftfreq(self.n) * self.n).astype(np.int64)

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Physical wavenumbers per axis, ``2*pi*m/length`` in FFT order."""
        return 2.0 * np.pi * self.mode_index / self.length

    @cached_property
    def deriv_wavenumbers(self) -> np.ndarray:
        """Wavenumbers used for odd-order derivatives (Nyquist mode zeroed)."""
        k = self.wavenumbers.copy()
        k[self.n // 2] = 0.0
        return k

    def _axis_mesh(self, values: np.ndarray, axis: int) -> np.ndarray:
        shape = [1] * self.dim
        shape[axis] = self.n
        return values.reshape(shape)

    @cached_property
    def k_mesh(self) -> tuple[np.ndarray, ...]:
        """Broadcastable derivative wavenumbers per axis over the spatial shape."""
        return tuple(self._axis_mesh(self.deriv_wavenumbers, ax) for ax in range(self.dim))

    @cached_property
    def k_squared(self) -> np.ndarray:
        """``|k|^2`` over the spectral shape, full wavenumbers (Nyquist kept)."""
        out = np.zeros(self.shape)
        for ax in range(self.dim):
            out = out + self._axis_mesh(self.wavenumbers, ax) ** 2
        return out

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """Boolean mask keeping modes with ``3*|m| <= n`` on every axis (2/3 rule)."""
        keep = np.ones(self.shape, dtype=bool)
        axis_keep = 3 * np.abs(self.mode_index) <= self.n
        for ax in range(self.dim):
            keep &= self._axis_mesh(axis_keep, ax)
        return keep


@dataclass
class Field:
    """Real sampled tensor field: ``values`` has shape ``(components, *grid.shape)``."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=np.float64)
        expected_ndim = self.grid.dim + 1
        if vals.ndim == self.grid.dim:
            vals = vals[np.newaxis]
        if vals.ndim != expected_ndim or vals.shape[1:] != self.grid.shape:
            raise ValueError(
                f"field values must have shape (components,{','.join(map(str, self.grid.shape))}), "
                f"got {vals.shape}"
            )
        if vals.shape[0] < 1:
            raise ValueError("field needs at least one component")
        if not np.all(np.isfinite(vals)):
            raise ValueError("field values must be finite")
        self.values = vals

    @property
    def components(self) -> int:
        return self.values.shape[0]

    def copy(self) -> "Field":
        return Field(self.grid, self.values.copy())

    @staticmethod
    def zeros(grid: Grid, components: int = 1) -> "Field":
        return Field(grid, np.zeros((components, *grid.shape)))

    @staticmethod
    def from_function(grid: Grid, fn) -> "Field":
        """Sample ``fn(*mesh)`` on the grid; fn may return one array or a sequence."""
        out = fn(*grid.mesh)
        if isinstance(out, np.ndarray) and out.ndim == grid.dim:
            out = [out]
        return Field(grid, np.stack([np.broadcast_to(c, grid.shape) for c in out]))


@dataclass
class SpectralField:
    """Fourier coefficients of a real field, shape ``(components, *grid.shape)``."""

    grid: Grid
    coefficients: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        coef = np.asarray(self.coefficients, dtype=np.complex128)
        if coef.ndim == self.grid.dim:
            coef = coef[np.newaxis]
        if coef.ndim != self.grid.dim + 1 or coef.shape[1:] != self.grid.shape:
            raise ValueError(
                f"coefficients must have shape (components,{','.join(map(str, self.grid.shape))}), "
                f"got {coef.shape}"
            )
        self.coefficients = coef

    @property
    def components(self) -> int:
        return self.coefficients.shape[0]

    def copy(self) -> "SpectralField":
        return SpectralField(self.grid, self.coefficients.copy())


# ---------------------------------------------------------------------------
# transforms

def _fftn(grid: Grid, values: np.ndarray) -> np.ndarray:
    return _fft.fftn(values, axes=grid.spatial_axes)

def _ifftn_real(grid: Grid, coef: np.ndarray) -> np.ndarray:
    return _fft.ifftn(coef, axes=grid.spatial_axes).real


def forward(f: Field) -> SpectralField:
    """Forward FFT over the spatial axes."""
    return SpectralField(f.grid, _fftn(f.grid, f.values))


def _reflect(grid: Grid, coef: np.ndarray) -> np.ndarray:
    """Coefficient array evaluated at ``-k`` (index reversal with wraparound)."""
    out = coef
    for ax in grid.spatial_axes:
        out = np.roll(np.flip(out, axis=ax), 1, axis=ax)
    return out


def hermitian_residual(F: SpectralField) -> float:
    """Max deviation from conjugate symmetry ``F(-k) == conj(F(k))``."""
    return float(np.max(np.abs(np.conj(_reflect(F.grid, F.coefficients)) - F.coefficients)))


def inverse(F: SpectralField, check_hermitian: bool = True, tol: float = 1e-8) -> Field:
    """Inverse FFT back to a real field.

    Rejects coefficient arrays that are not conjugate-symmetric (within
    ``tol`` relative to the largest coefficient); such input signals a
    programming error upstream, not a numerical issue.
    """
    if check_hermitian:
        scale = max(1.0, float(np.max(np.abs(F.coefficients))))
        res = hermitian_residual(F)
        if res > tol * scale:
            raise ValueError(
                f"spectral field is not Hermitian-symmetric (residual {res:.3e}, scale {scale:.3e})"
            )
    return Field(F.grid, _ifftn_real(F.grid, F.coefficients))


# ---------------------------------------------------------------------------
# differential operators

def _deriv_multiplier(grid: Grid, axis: int, order: int) -> np.ndarray:
    if not 0 <= axis < grid.dim:
        raise ValueError(f"axis {axis} out of range for dim {grid.dim}")
    if order < 1:
        raise ValueError("derivative order must be >= 1")
    k = grid.deriv_wavenumbers if order % 2 else grid.wavenumbers
    return grid._axis_mesh((1j * k) ** order, axis)


def derivative(F: SpectralField, axis: int, order: int = 1) -> SpectralField:
    """Spectral ``d^order/dx_axis^order``: multiply by ``(i*k_axis)^order``."""
    return SpectralField(F.grid, F.coefficients * _deriv_multiplier(F.grid, axis, order))


def _grad_arrays(grid: Grid, coef: np.ndarray) -> np.ndarray:
    """All first partials of a spectral array, shape ``(comp, dim, *shape)``, physical."""
    comp = coef.shape[0]
    out = np.empty((comp, grid.dim, *grid.shape))
    for ax in range(grid.dim):
        out[:, ax] = _ifftn_real(grid, coef * (1j * grid.k_mesh[ax]))
    return out


def gradient(f: Field) -> Field:
    """Gradient tensor; output components ordered ``(c, axis)`` row-major.

    A scalar field maps to its ``dim``-component gradient; a field with C
    components maps to the full ``C*dim``-component tensor of partials.
    """
    g = _grad_arrays(f.grid, _fftn(f.grid, f.values))
    return Field(f.grid, g.reshape(f.components * f.grid.dim, *f.grid.shape))


def divergence(v: Field) -> Field:
    """``sum_i d(v_i)/dx_i``; requires one component per spatial axis."""
    grid = v.grid
    if v.components != grid.dim:
        raise ValueError(f"divergence needs {grid.dim} components, got {v.components}")
    coef = _fftn(grid, v.values)
    acc = np.zeros(grid.shape, dtype=np.complex128)
    for ax in range(grid.dim):
        acc += coef[ax] * (1j * grid.k_mesh[ax])
    return Field(grid, _ifftn_real(grid, acc[np.newaxis]))


def curl(v: Field) -> Field:
    """Curl: 3 components in 3D; the scalar ``dv_y/dx - dv_x/dy`` in 2D."""
    grid = v.grid
    if v.components != grid.dim:
        raise ValueError(f"curl needs {grid.dim} components, got {v.components}")
    coef = _fftn(grid, v.values)
    ik = [1j * grid.k_mesh[ax] for ax in range(grid.dim)]
    if grid.dim == 2:
        out = coef[1] * ik[0] - coef[0] * ik[1]
        return Field(grid, _ifftn_real(grid, out[np.newaxis]))
    out = np.empty((3, *grid.shape), dtype=np.complex128)
    out[0] = coef[2] * ik[1] - coef[1] * ik[2]
    out[1] = coef[0] * ik[2] - coef[2] * ik[0]
    out[2] = coef[1] * ik[0] - coef[0] * ik[1]
    return Field(grid, _ifftn_real(grid, out))


def laplacian(f: Field) -> Field:
    """Componentwise Laplacian, ``-|k|^2`` in spectral space."""
    coef = _fftn(f.grid, f.values)
    return Field(f.grid, _ifftn_real(f.grid, coef * (-f.grid.k_squared)))


# ---------------------------------------------------------------------------
# projection and dealiasing

def _leray_coefficients(grid: Grid, coef: np.ndarray) -> np.ndarray:
    """Apply ``I - k k^T / |k|^2`` mode-wise; modes with ``k=0`` pass through."""
    if coef.shape[0] != grid.dim:
        raise ValueError(f"Leray projection needs {grid.dim} components, got {coef.shape[0]}")
    k = grid.k_mesh
    ksq = np.zeros(grid.shape)
    for ax in range(grid.dim):
        ksq = ksq + k[ax] ** 2
    inv = np.zeros_like(ksq)
    nonzero = ksq > 0.0
    inv[nonzero] = 1.0 / ksq[nonzero]
    kdotv = np.zeros(grid.shape, dtype=np.complex128)
    for ax in range(grid.dim):
        kdotv += k[ax] * coef[ax]
    kdotv *= inv
    out = np.empty_like(coef)
    for ax in range(grid.dim):
        out[ax] = coef[ax] - k[ax] * kdotv
    return out


def leray_project(V: SpectralField) -> SpectralField:
    """Project onto divergence-free fields; idempotent, annihilates gradients."""
    return SpectralField(V.grid, _leray_coefficients(V.grid, V.coefficients))


def project_divergence_free(v: Field) -> Field:
    """Physical-space convenience wrapper around :func:`leray_project`."""
    coef = _leray_coefficients(v.grid, _fftn(v.grid, v.values))
    return Field(v.grid, _ifftn_real(v.grid, coef))


def dealias(F: SpectralField) -> SpectralField:
    """Zero every mode with ``|m| > n/3`` on any axis (2/3 rule); idempotent."""
    return SpectralField(F.grid, F.coefficients * F.grid.dealias_mask)


def dealias_field(f: Field) -> Field:
    """Round-trip a physical field through the 2/3-rule spectral truncation."""
    coef = _fftn(f.grid, f.values) * f.grid.dealias_mask
    return Field(f.grid, _ifftn_real(f.grid, coef))


# ---------------------------------------------------------------------------
# norms helpers and field synthesis

def spectral_l2(F: SpectralField) -> float:
    """L2 norm evaluated from the coefficients (Parseval)."""
    grid = F.grid
    return float(
        np.sqrt(np.sum(np.abs(F.coefficients) ** 2) * grid.cell_volume / grid.num_points)
    )


def sup_bound(f: Field) -> float:
    """Grid-independent bound on the pointwise magnitude of a band-limited field.

    Per component, ``sup|f_c| <= sum_k |f_hat_{c,k}| / N``; components combine
    in Euclidean norm.  Exact under refinement (unlike the sampled maximum),
    which keeps normalized random data consistent across resolutions.
    """
    coef = _fftn(f.grid, f.values)
    per_comp = np.sum(np.abs(coef).reshape(f.components, -1), axis=1) / f.grid.num_points
    return float(np.sqrt(np.sum(per_comp**2)))


def rms(f: Field) -> float:
    """Root-mean-square pointwise magnitude (grid-independent for band-limited f)."""
    return float(np.sqrt(np.mean(np.sum(f.values**2, axis=0))))


def multi_indices(dim: int, order: int):
    """Distinct derivative multi-indices of given order with multinomial weights.

    Yields ``(counts, weight)`` where ``counts[i]`` is how many times axis ``i``
    is differentiated and ``weight`` the number of orderings, so summing
    ``weight * (d^counts f)**2`` reproduces the full ``dim**order`` tensor.
    """
    for combo in itertools.combinations_with_replacement(range(dim), order):
        counts = tuple(combo.count(ax) for ax in range(dim))
        weight = factorial(order)
        for c in counts:
            weight //= factorial(c)
        yield counts, weight


def random_band_limited(
    grid: Grid,
    rng: np.random.Generator,
    components: int = 1,
    kmax: int = 3,
    decay: float = 0.7,
) -> Field:
    """Random real band-limited field drawn on a grid-independent mode lattice.

    Coefficients for integer modes ``m`` with ``|m_i| <= kmax`` are drawn in a
    fixed lexicographic order with envelope ``exp(-decay*|m|)``, so the same
    ``rng`` state yields samples of the same continuum field at any resolution
    (refinement studies compare like with like).  Requires ``kmax < n/2``.
    """
    if kmax < 1 or kmax >= grid.n // 2:
        raise ValueError(f"kmax must be in [1, n/2), got {kmax} at n={grid.n}")
    coef = np.zeros((components, *grid.shape), dtype=np.complex128)
    ranges = [range(-kmax, kmax + 1)] * grid.dim
    for mode in itertools.product(*ranges):
        # one canonical representative per conjugate pair
        flipped = tuple(-m for m in mode)
        if flipped < mode:
            continue
        env = np.exp(-decay * np.sqrt(sum(m * m for m in mode)))
        idx = tuple(m % grid.n for m in mode)
        fidx = tuple(m % grid.n for m in flipped)
        for c in range(components):
            if mode == flipped:  # self-conjugate: real coefficient
                coef[(c, *idx)] = rng.standard_normal() * env
            else:
                z = complex(rng.standard_normal(), rng.standard_normal()) * env
                coef[(c, *idx)] = z
                coef[(c, *fidx)] = np.conj(z)
    # unnormalized-FFT convention: scale so physical amplitudes are O(1)
    coef *= grid.num_points
    return Field(grid, _ifftn_real(grid, coef))
