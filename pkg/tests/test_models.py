"""System matrices, sources, wave speeds and the hyperbolicity classifier."""

from dataclasses import replace

import numpy as np
import pytest

from swmoment import models, scenarios
from swmoment.basis import shared_tensors
from swmoment.models import ModelSpec, MomentState


def make_spec(family="standard", order=1, g=1.5e-3, gamma=1e5, eps=0.015,
              re0_inv=4.444444444444444e-7):
    return ModelSpec(family=family, order=order, g=g, eps=eps, gamma=gamma,
                     re0_inv=re0_inv)


def state2d(h, u, v, alphas=(), betas=()):
    alphas = np.asarray(alphas, dtype=float)
    betas = np.asarray(betas, dtype=float)
    return MomentState(h=h, hu=h * u, hv=h * v, halpha=h * alphas, hbeta=h * betas)


def random_state(rng, order, dims, a1=None, b1=None):
    h = rng.uniform(0.5, 2.0)
    n = models.state_size(order, dims)
    st = np.zeros(n)
    st[0] = h
    st[1] = h * rng.uniform(-1, 1)
    if dims == 2:
        st[2] = h * rng.uniform(-1, 1)
        st[3::2] = h * rng.uniform(-0.5, 0.5, order)
        st[4::2] = h * rng.uniform(-0.5, 0.5, order)
        if a1 is not None:
            st[3] = h * a1
        if b1 is not None:
            st[4] = h * b1
    else:
        st[2:] = h * rng.uniform(-0.5, 0.5, order)
        if a1 is not None and order:
            st[2] = h * a1
    return st


class TestSystemMatrices:
    def test_swe_gravity_row(self):
        spec = make_spec(order=0)
        st = state2d(1.0, 0.0, 0.0)
        (a, b) = models.system_matrices(st, spec, dims=2)
        np.testing.assert_allclose(a[1], [1.5e-3, 0.0, 0.0], atol=1e-16)
        np.testing.assert_allclose(b[2], [1.5e-3, 0.0, 0.0], atol=1e-16)

    def test_alpha_coupling_entry(self):
        spec = make_spec(order=1)
        st = state2d(1.0, 0.1, -0.2, alphas=[0.3], betas=[0.1])
        (a, _) = models.system_matrices(st, spec, dims=2)
        np.testing.assert_allclose(a[1, 3], 0.2, rtol=1e-14)

    def test_swe_rest_eigenvalues(self):
        spec = make_spec(order=0)
        st = state2d(1.0, 0.0, 0.0)
        (a, _) = models.system_matrices(st, spec, dims=2)
        lam = np.sort(np.linalg.eigvals(a).real)
        c = np.sqrt(1.5e-3)
        np.testing.assert_allclose(lam, [-c, 0.0, c], atol=1e-12)
        np.testing.assert_allclose(c, 0.03873, atol=5e-6)

    def test_printed_first_order_matrices(self):
        h, u, v, a1, b1, g = 1.3, 0.37, -0.21, 0.53, -0.29, 1.5e-3
        spec = make_spec(order=1, g=g)
        st = state2d(h, u, v, alphas=[a1], betas=[b1])
        a, b = models.system_matrices(st, spec, dims=2)
        a_ref = np.array([
            [0, 1, 0, 0, 0],
            [-u * u + g * h - a1 * a1 / 3, 2 * u, 0, 2 * a1 / 3, 0],
            [-u * v - a1 * b1 / 3, v, u, b1 / 3, a1 / 3],
            [-2 * u * a1, 2 * a1, 0, u, 0],
            [-u * b1 - v * a1, b1, a1, 0, u],
        ])
        b_ref = np.array([
            [0, 0, 1, 0, 0],
            [-u * v - a1 * b1 / 3, v, u, b1 / 3, a1 / 3],
            [-v * v + g * h - b1 * b1 / 3, 0, 2 * v, 0, 2 * b1 / 3],
            [-u * b1 - v * a1, b1, a1, v, 0],
            [-2 * v * b1, 0, 2 * b1, 0, v],
        ])
        np.testing.assert_allclose(a, a_ref, atol=1e-14)
        np.testing.assert_allclose(b, b_ref, atol=1e-14)

    def test_printed_second_order_moment_rows(self):
        h, u, v, a1, b1 = 1.1, 0.42, -0.13, 0.61, 0.27
        spec = make_spec(order=2)
        st = state2d(h, u, v, alphas=[a1, 0.4], betas=[b1, -0.7])
        a, _ = models.system_matrices(st, spec, dims=2)
        # rows of the second moment pair depend on alpha_1, beta_1 only
        row_a2 = np.array([-(2 / 3) * a1 * a1, 0, 0, (1 / 3) * a1, 0, u, 0])
        row_b2 = np.array([-(2 / 3) * a1 * b1, 0, 0, -(1 / 3) * b1, (2 / 3) * a1, 0, u])
        np.testing.assert_allclose(a[5], row_a2, atol=1e-14)
        np.testing.assert_allclose(a[6], row_b2, atol=1e-14)
        # first moment pair couples into the second through 3/5, 1/5, 2/5
        np.testing.assert_allclose(a[3, 5], 0.6 * a1, atol=1e-14)
        np.testing.assert_allclose(a[4, 5], 0.2 * b1, atol=1e-14)
        np.testing.assert_allclose(a[4, 6], 0.4 * a1, atol=1e-14)

    def test_matches_flux_jacobian_plus_transport(self):
        # independent route: finite-difference the fluxes, add the moment
        # transport products, evaluate at the linearized state
        order = 3
        g = 1.5e-3
        ten = shared_tensors(order)
        spec = make_spec(order=order, g=g)
        rng = np.random.default_rng(3)
        h, u, v, a1, b1 = 1.4, 0.3, -0.6, 0.25, -0.45
        st = np.zeros(models.state_size(order, 2))
        st[0], st[1], st[2], st[3], st[4] = h, h * u, h * v, h * a1, h * b1

        def flux_x(uv):
            hh = uv[0]
            uu, vv = uv[1] / hh, uv[2] / hh
            al, be = uv[3::2] / hh, uv[4::2] / hh
            cj = 1.0 / (2.0 * np.arange(1, order + 1) + 1.0)
            out = np.empty_like(uv)
            out[0] = uv[1]
            out[1] = hh * (uu * uu + np.sum(cj * al * al)) + 0.5 * g * hh * hh
            out[2] = hh * (uu * vv + np.sum(cj * al * be))
            for i in range(order):
                out[3 + 2 * i] = hh * (2 * uu * al[i] + np.einsum("jk,j,k->", ten.a[i], al, al))
                out[4 + 2 * i] = hh * (uu * be[i] + vv * al[i] + np.einsum("jk,j,k->", ten.a[i], al, be))
            return out

        n = len(st)
        jac = np.zeros((n, n))
        for c in range(n):
            e = np.zeros(n)
            e[c] = 1e-7 * max(1.0, abs(st[c]))
            jac[:, c] = (flux_x(st + e) - flux_x(st - e)) / (2 * e[c])
        al_lin = np.zeros(order)
        al_lin[0] = a1
        be_lin = np.zeros(order)
        be_lin[0] = b1
        for i in range(order):
            for j in range(order):
                jac[3 + 2 * i, 3 + 2 * j] += -u * (i == j) + ten.b[i, j] @ al_lin
                jac[4 + 2 * i, 3 + 2 * j] += -v * (i == j) + ten.b[i, j] @ be_lin
        a, _ = models.system_matrices(st, spec, dims=2)
        np.testing.assert_allclose(a, jac, atol=5e-6)

    def test_standard_modified_identical(self):
        rng = np.random.default_rng(11)
        for order in (0, 1, 2):
            s_std = make_spec("standard", order)
            s_mod = make_spec("modified", order)
            for _ in range(50):
                st = random_state(rng, order, 2)
                a1, b1 = models.system_matrices(st, s_std, dims=2)
                a2, b2 = models.system_matrices(st, s_mod, dims=2)
                assert np.abs(a1 - a2).max() <= 1e-15
                assert np.abs(b1 - b2).max() <= 1e-15

    def test_one_dimensional_reduction(self):
        spec = make_spec(order=1)
        st = MomentState(h=1.2, hu=0.3, halpha=np.array([0.12]))
        (a,) = models.system_matrices(st, spec, dims=1)
        assert a.shape == (3, 3)
        h, u, a1 = 1.2, 0.25, 0.1
        np.testing.assert_allclose(
            a,
            [
                [0, 1, 0],
                [spec.g * h - u * u - a1 * a1 / 3, 2 * u, 2 * a1 / 3],
                [-2 * u * a1, 2 * a1, u],
            ],
            atol=1e-14,
        )

    def test_nonfinite_state_rejected(self):
        spec = make_spec(order=0)
        with pytest.raises(ValueError):
            models.system_matrices(np.array([1.0, np.nan, 0.0]), spec, dims=2)


class TestBarGamma:
    def test_zero_friction(self):
        spec = make_spec("modified", 0, gamma=0.0)
        assert models.compute_bar_gamma(spec, 1.0) == 0.0

    def test_nonslip_limit(self):
        spec = make_spec("modified", 0)
        want = 2.0 * spec.re0_inv / 1.0
        got = models.compute_bar_gamma(spec, 1.0)
        assert abs(got - want) / want < 1e-6

    def test_small_gamma_expansion(self):
        spec = make_spec("modified", 0, gamma=1e-9)
        h = 0.8
        got = models.compute_bar_gamma(spec, h)
        lead = spec.gamma / spec.eps
        assert abs(got - lead) / lead <= h * spec.gamma / (2 * spec.eps * spec.re0_inv)

    def test_monotone_in_gamma(self):
        vals = [
            models.compute_bar_gamma(make_spec("modified", 0, gamma=g), 1.0)
            for g in (0.0, 1e-3, 1.0, 1e3, 1e6, 1e9)
        ]
        assert all(b > a for a, b in zip(vals[:-1], vals[1:]))

    def test_domain_error(self):
        with pytest.raises(ValueError):
            models.compute_bar_gamma(make_spec("modified", 0), -1.0)


class TestSources:
    def test_rest_state_annihilation(self):
        ten = shared_tensors(2)
        st = state2d(1.3, 0.0, 0.0, alphas=[0.0, 0.0], betas=[0.0, 0.0])
        for fn, fam in ((models.source_standard, "standard"), (models.source_modified, "modified")):
            spec = make_spec(fam, 2)
            np.testing.assert_array_equal(fn(st, spec, ten), np.zeros(7))

    def test_swe_momentum_relaxation(self):
        spec = scenarios.model_spec("standard", 0)
        ten = shared_tensors(0)
        st = state2d(1.0, 0.1, 0.0)
        src = models.source_standard(st, spec, ten)
        ge = spec.gamma / spec.eps
        np.testing.assert_allclose(src[1], -ge * 0.1, rtol=1e-13)
        np.testing.assert_allclose(src[1], -6.667e5, rtol=1e-3)
        assert src[0] == 0.0

    def test_first_order_alpha_component(self):
        spec = scenarios.model_spec("standard", 1)
        ten = shared_tensors(1)
        h, u, a1 = 1.0, 0.1, 0.1
        st = state2d(h, u, 0.0, alphas=[a1], betas=[0.0])
        src = models.source_standard(st, spec, ten)
        ge = spec.gamma / spec.eps
        want = -3.0 * ge * (u + (1.0 + 4.0 * spec.eps * spec.re0_inv / (h * spec.gamma)) * a1)
        np.testing.assert_allclose(src[3], want, rtol=1e-12)

    def test_modified_alpha_component(self):
        spec = scenarios.model_spec("modified", 1)
        ten = shared_tensors(1)
        h, u, a1 = 1.0, 0.1, 0.05
        st = state2d(h, u, 0.0, alphas=[a1], betas=[0.0])
        src = models.source_modified(st, spec, ten)
        bg = models.compute_bar_gamma(spec, h)
        want = -3.0 * (bg * u + 4.0 * spec.re0_inv / h * a1)
        np.testing.assert_allclose(src[3], want, rtol=1e-12)
        np.testing.assert_allclose(src[3], -3.0 * (bg * 0.1 + 8.889e-8), rtol=1e-3)

    def test_nonslip_limit_momentum_bounded(self):
        spec = make_spec("modified", 0, gamma=1e12)
        ten = shared_tensors(0)
        st = state2d(1.0, 0.3, 0.0)
        src = models.source_modified(st, spec, ten)
        want = -2.0 * spec.re0_inv / 1.0 * 0.3
        np.testing.assert_allclose(src[1], want, rtol=1e-5)

    def test_boundedness_contrast(self):
        ten = shared_tensors(1)
        st = state2d(1.0, 0.2, -0.1, alphas=[0.1], betas=[0.05])
        norms_std, norms_mod = [], []
        for g in (1e2, 1e4, 1e6, 1e8):
            norms_std.append(
                np.abs(models.source_standard(st, make_spec("standard", 1, gamma=g), ten)).max()
            )
            norms_mod.append(
                np.abs(models.source_modified(st, make_spec("modified", 1, gamma=g), ten)).max()
            )
        ratios = [b / a for a, b in zip(norms_std[:-1], norms_std[1:])]
        assert all(abs(r - 100.0) < 1.0 for r in ratios)  # linear in gamma
        assert norms_mod[-1] <= norms_mod[0] * 10  # saturates

    def test_topography_term(self):
        spec = make_spec("standard", 0)
        ten = shared_tensors(0)
        st = state2d(2.0, 0.0, 0.0)
        src = models.source_standard(st, spec, ten, grad_hb=(0.25, -0.5))
        np.testing.assert_allclose(src[1], -spec.g * 2.0 * 0.25, rtol=1e-14)
        np.testing.assert_allclose(src[2], spec.g * 2.0 * 0.5, rtol=1e-14)

    def test_degenerate_height(self):
        spec = make_spec("standard", 0)
        ten = shared_tensors(0)
        with pytest.raises(models.DegenerateStateError):
            models.source_standard(np.array([1e-9, 0.0, 0.0]), spec, ten)


class TestWaveSpeed:
    def test_rest_lake(self):
        spec = make_spec(order=0)
        st = state2d(1.0, 0.0, 0.0)
        np.testing.assert_allclose(models.max_wave_speed(st, spec), np.sqrt(1.5e-3), rtol=1e-10)

    def test_block_triangular_first_order(self):
        spec = make_spec(order=1)
        st = state2d(1.0, 0.5, 0.0, alphas=[0.0], betas=[0.0])
        got = models.max_wave_speed(st, spec)
        np.testing.assert_allclose(got, 0.5 + np.sqrt(1.5e-3), rtol=1e-10)

    def test_bounded_below_by_mean_velocity(self):
        rng = np.random.default_rng(5)
        spec = make_spec(order=0)
        for _ in range(100):
            st = random_state(rng, 0, 2)
            assert models.max_wave_speed(st, spec) >= abs(st[1] / st[0]) - 1e-12

    def test_swe_closed_form_eigenvalues(self):
        rng = np.random.default_rng(17)
        spec = make_spec(order=0)
        for _ in range(200):
            st = random_state(rng, 0, 2)
            h, u = st[0], st[1] / st[0]
            (a, _) = models.system_matrices(st, spec, dims=2)
            lam = np.sort(np.linalg.eigvals(a).real)
            c = np.sqrt(spec.g * h)
            np.testing.assert_allclose(lam, np.sort([u, u - c, u + c]), atol=1e-12)

    def test_realness_on_random_states(self):
        rng = np.random.default_rng(29)
        for order in (1, 2):
            spec = make_spec(order=order)
            for _ in range(500):
                a1 = rng.uniform(0.01, 1.0) * rng.choice((-1, 1))
                st = random_state(rng, order, 2, a1=a1)
                for mat in models.system_matrices(st, spec, dims=2):
                    lam = np.linalg.eigvals(mat)
                    assert np.abs(lam.imag).max() <= 1e-9 * (1 + np.abs(lam).max())


class TestClassifier:
    def test_first_moment_nonzero(self):
        spec = make_spec(order=1)
        st = state2d(1.0, 0.1, -0.2, alphas=[0.3], betas=[0.1])
        assert models.classify_hyperbolicity(st, spec) == "hyperbolic"

    def test_both_zero(self):
        spec = make_spec(order=1)
        st = state2d(1.0, 0.1, -0.2, alphas=[0.0], betas=[0.0])
        assert models.classify_hyperbolicity(st, spec) == "hyperbolic"

    def test_transverse_only(self):
        spec = make_spec(order=1)
        st = state2d(1.0, 0.1, -0.2, alphas=[0.0], betas=[0.2])
        assert models.classify_hyperbolicity(st, spec) == "weakly_hyperbolic"

    def test_generic_direction_degrades_classification(self):
        # some intermediate direction is defective whenever the first
        # moments are not both zero, so a dense angle sweep cannot return
        # plain "hyperbolic" (the exact label at the degenerate angle is
        # numerically fragile: a perturbed Jordan block)
        spec = make_spec(order=1)
        st = state2d(1.0, 0.0, 0.0, alphas=[0.3], betas=[0.3])
        angles = np.linspace(0.0, np.pi, 65)
        assert models.classify_hyperbolicity(st, spec, angles=angles) != "hyperbolic"


class TestModelSpecValidation:
    def test_rejects_bad_family(self):
        with pytest.raises(ValueError):
            make_spec(family="other")

    def test_rejects_negative_gamma(self):
        with pytest.raises(ValueError):
            make_spec(gamma=-1.0)

    def test_closure_names(self):
        assert make_spec(order=0).closure == "swe"
        assert make_spec(order=2).closure == "hswme"
