"""Spectral infrastructure: transforms, derivatives, projection, dealiasing."""

import numpy as np
import pytest

from nlcflow.grid import (
    Field,
    Grid,
    SpectralField,
    curl,
    dealias,
    derivative,
    divergence,
    forward,
    gradient,
    hermitian_residual,
    inverse,
    laplacian,
    leray_project,
    project_divergence_free,
    random_band_limited,
    spectral_l2,
)

from conftest import smooth_field


class TestGridValidation:
    def test_basic_properties(self):
        g = Grid(3, 16)
        assert g.spacing == g.length / 16
        assert g.shape == (16, 16, 16)
        assert g.num_points == 16**3
        assert np.isclose(g.cell_volume, g.spacing**3)

    @pytest.mark.parametrize("dim", [0, 1, 4])
    def test_bad_dim(self, dim):
        with pytest.raises(ValueError, match="dim"):
            Grid(dim, 16)

    @pytest.mark.parametrize("n", [7, 12, 4, 0])
    def test_bad_n(self, n):
        with pytest.raises(ValueError, match="power of two"):
            Grid(2, n)

    def test_bad_length(self):
        with pytest.raises(ValueError, match="length"):
            Grid(2, 16, -1.0)

    def test_field_shape_and_finiteness(self, grid2d):
        with pytest.raises(ValueError, match="shape"):
            Field(grid2d, np.zeros((2, 8, 8)))
        bad = np.zeros((1, 32, 32))
        bad[0, 0, 0] = np.nan
        with pytest.raises(ValueError, match="finite"):
            Field(grid2d, bad)


class TestTransforms:
    def test_constant_field_single_mode(self, grid3d):
        F = forward(Field(grid3d, np.full((1, *grid3d.shape), 2.5)))
        coef = F.coefficients[0]
        assert np.isclose(coef[0, 0, 0], 2.5 * grid3d.num_points)
        rest = coef.copy()
        rest[0, 0, 0] = 0.0
        assert np.max(np.abs(rest)) < 1e-9 * grid3d.num_points

    def test_sin_two_modes(self):
        g = Grid(2, 16, length=4.0)
        x, _ = g.mesh
        F = forward(Field(g, np.sin(2 * np.pi * x / g.length)))
        coef = F.coefficients[0]
        nonzero = np.argwhere(np.abs(coef) > 1e-9 * g.num_points)
        assert len(nonzero) == 2
        assert {tuple(idx) for idx in nonzero} == {(1, 0), (g.n - 1, 0)}
        assert np.isclose(coef[1, 0], -0.5j * g.num_points)

    def test_round_trip_random(self, grid3d):
        f = smooth_field(grid3d, seed=1, components=3)
        back = inverse(forward(f))
        scale = np.max(np.abs(f.values))
        assert np.max(np.abs(back.values - f.values)) <= 1e-12 * scale

    def test_inverse_rejects_non_hermitian(self, grid2d):
        coef = np.zeros((1, *grid2d.shape), dtype=complex)
        coef[0, 1, 0] = 1.0  # no conjugate partner at (-1, 0)
        with pytest.raises(ValueError, match="Hermitian"):
            inverse(SpectralField(grid2d, coef))

    def test_hermitian_residual_zero_for_real_fields(self, grid2d):
        f = smooth_field(grid2d, seed=2)
        assert hermitian_residual(forward(f)) <= 1e-9 * grid2d.num_points

    def test_parseval(self, grid3d):
        f = smooth_field(grid3d, seed=3, components=2)
        phys = np.sqrt(np.sum(f.values**2) * grid3d.cell_volume)
        spec = spectral_l2(forward(f))
        assert abs(phys - spec) <= 1e-10 * phys


class TestDerivatives:
    def test_derivative_of_constant(self, grid3d):
        F = forward(Field(grid3d, np.ones((1, *grid3d.shape))))
        df = inverse(derivative(F, 0, 1))
        assert np.max(np.abs(df.values)) < 1e-12

    @pytest.mark.parametrize("n", [8, 16, 64])
    def test_sin_derivative_exact(self, n):
        g = Grid(2, n)
        x, _ = g.mesh
        F = forward(Field(g, np.sin(x)))
        df = inverse(derivative(F, 0, 1))
        assert np.max(np.abs(df.values[0] - np.cos(x))) <= 1e-11
        d2f = inverse(derivative(F, 0, 2))
        assert np.max(np.abs(d2f.values[0] + np.sin(x))) <= 1e-11

    def test_derivative_order_validation(self, grid2d):
        F = forward(smooth_field(grid2d))
        with pytest.raises(ValueError, match="order"):
            derivative(F, 0, 0)
        with pytest.raises(ValueError, match="axis"):
            derivative(F, 5, 1)

    def test_gradient_component_order(self, grid2d):
        x, y = grid2d.mesh
        f = Field(grid2d, np.stack([np.sin(x), np.cos(y)]))
        grad = gradient(f)
        assert grad.components == 4  # (c0,dx), (c0,dy), (c1,dx), (c1,dy)
        assert np.allclose(grad.values[0], np.cos(x), atol=1e-11)
        assert np.allclose(grad.values[1], 0.0, atol=1e-11)
        assert np.allclose(grad.values[3], -np.sin(y), atol=1e-11)

    def test_curl_analytic(self):
        g = Grid(3, 16)
        _, y, _ = g.mesh
        v = Field(g, np.stack([np.sin(y), np.zeros(g.shape), np.zeros(g.shape)]))
        w = curl(v)
        assert np.allclose(w.values[0], 0.0, atol=1e-11)
        assert np.allclose(w.values[1], 0.0, atol=1e-11)
        assert np.allclose(w.values[2], -np.cos(y), atol=1e-11)

    def test_curl_of_gradient_vanishes(self, grid3d):
        f = smooth_field(grid3d, seed=4)
        w = curl(gradient(f))
        assert np.max(np.abs(w.values)) <= 1e-12 * max(1.0, np.max(np.abs(f.values)))

    def test_divergence_of_curl_vanishes(self, grid3d):
        v = smooth_field(grid3d, seed=5, components=3)
        dv = divergence(curl(v))
        assert np.max(np.abs(dv.values)) <= 1e-12 * max(1.0, np.max(np.abs(v.values)))

    def test_scalar_curl_2d(self, grid2d):
        x, y = grid2d.mesh
        v = Field(grid2d, np.stack([-np.sin(y), np.sin(x)]))
        w = curl(v)
        assert w.components == 1
        assert np.allclose(w.values[0], np.cos(x) + np.cos(y), atol=1e-11)

    def test_component_count_mismatch(self, grid3d):
        f = smooth_field(grid3d, seed=6, components=2)
        with pytest.raises(ValueError, match="components"):
            divergence(f)
        with pytest.raises(ValueError, match="components"):
            curl(f)

    def test_laplacian_sin(self, grid2d):
        x, _ = grid2d.mesh
        lf = laplacian(Field(grid2d, np.sin(2 * x)))
        assert np.allclose(lf.values[0], -4.0 * np.sin(2 * x), atol=1e-10)


class TestLerayProjection:
    def test_annihilates_gradients(self, grid3d):
        gphi = gradient(smooth_field(grid3d, seed=7))
        proj = leray_project(forward(gphi))
        scale = max(1.0, np.max(np.abs(gphi.values)))
        assert np.max(np.abs(inverse(proj).values)) <= 1e-12 * scale

    def test_sin_x_vector_projects_to_zero(self):
        g = Grid(3, 16)
        x, _, _ = g.mesh
        v = Field(g, np.stack([np.sin(x), np.zeros(g.shape), np.zeros(g.shape)]))
        out = inverse(leray_project(forward(v)))
        assert np.max(np.abs(out.values)) <= 1e-13

    def test_divergence_free_unchanged(self, grid3d):
        v = project_divergence_free(smooth_field(grid3d, seed=8, components=3))
        again = project_divergence_free(v)
        assert np.max(np.abs(again.values - v.values)) <= 1e-14 * max(1.0, np.max(np.abs(v.values)))

    def test_idempotent(self, grid2d):
        V = forward(smooth_field(grid2d, seed=9, components=2))
        once = leray_project(V)
        twice = leray_project(once)
        scale = max(1.0, np.max(np.abs(once.coefficients)))
        assert np.max(np.abs(twice.coefficients - once.coefficients)) <= 1e-12 * scale

    def test_result_is_divergence_free(self, grid3d):
        v = project_divergence_free(smooth_field(grid3d, seed=10, components=3))
        assert np.max(np.abs(divergence(v).values)) <= 1e-12

    def test_per_mode_against_dense_oracle(self):
        # independent oracle: project each mode with an explicitly built matrix
        g = Grid(3, 8)
        v = smooth_field(g, seed=11, components=3, kmax=3)
        coef = np.fft.fftn(v.values, axes=(1, 2, 3))
        modes = np.fft.fftfreq(g.n) * g.n
        expected = np.empty_like(coef)
        for a, ka in enumerate(modes):
            for b, kb in enumerate(modes):
                for c, kc in enumerate(modes):
                    k = 2 * np.pi * np.array([ka, kb, kc]) / g.length
                    vec = coef[:, a, b, c]
                    ksq = k @ k
                    if ksq > 0:
                        mat = np.eye(3) - np.outer(k, k) / ksq
                        vec = mat @ vec
                    expected[:, a, b, c] = vec
        got = leray_project(forward(v)).coefficients
        assert np.max(np.abs(got - expected)) <= 1e-10 * np.max(np.abs(coef))


class TestDealias:
    def test_band_limited_unchanged(self, grid2d):
        f = smooth_field(grid2d, seed=12, kmax=grid2d.n // 4)
        F = forward(f)
        # sub-cutoff modes pass through untouched; the rest is FFT round-off
        diff = np.abs(dealias(F).coefficients - F.coefficients)
        assert np.max(diff) <= 1e-11 * np.max(np.abs(F.coefficients))
        assert np.array_equal(dealias(F).coefficients[F.grid.dealias_mask[np.newaxis]],
                              F.coefficients[F.grid.dealias_mask[np.newaxis]])

    def test_high_mode_zeroed(self):
        g = Grid(2, 16)
        x, _ = g.mesh
        m = g.n // 3 + 1
        F = forward(Field(g, np.sin(m * x)))
        out = dealias(F)
        assert np.max(np.abs(out.coefficients)) <= 1e-12 * g.num_points

    def test_mixed_field_mask_oracle(self, grid2d):
        rng = np.random.default_rng(13)
        f = Field(grid2d, rng.standard_normal((1, *grid2d.shape)))
        out = dealias(forward(f)).coefficients[0]
        modes = np.rint(np.fft.fftfreq(grid2d.n) * grid2d.n)
        for a in range(grid2d.n):
            for b in range(grid2d.n):
                killed = 3 * abs(modes[a]) > grid2d.n or 3 * abs(modes[b]) > grid2d.n
                if killed:
                    assert out[a, b] == 0.0

    def test_idempotent(self, grid3d):
        F = forward(smooth_field(grid3d, seed=14))
        once = dealias(F)
        assert np.array_equal(dealias(once).coefficients, once.coefficients)


class TestRandomBandLimited:
    def test_resolution_independent_sampling(self):
        coarse = Grid(2, 16)
        fine = Grid(2, 32)
        f16 = random_band_limited(coarse, np.random.default_rng(21), 2, 3, 0.7)
        f32 = random_band_limited(fine, np.random.default_rng(21), 2, 3, 0.7)
        assert np.allclose(f16.values, f32.values[:, ::2, ::2], atol=1e-12)

    def test_kmax_validation(self, grid3d):
        with pytest.raises(ValueError, match="kmax"):
            random_band_limited(grid3d, np.random.default_rng(0), 1, grid3d.n, 0.7)
