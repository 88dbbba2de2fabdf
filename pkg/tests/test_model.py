import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sinest.errors import InvalidFrequencyError
from sinest.model import (
    LinearCoeffs,
    SinusoidState,
    build_basis,
    coeffs_from_params,
    linearisation_error,
    make_sine_window,
    make_time_grid,
    params_from_coeffs,
    synthesize_exact,
    synthesize_linearised,
)

from conftest import tone


class TestTimeGrid:
    def test_even_length_half_integers(self):
        g = make_time_grid(4)
        assert np.array_equal(g.n_values, [-1.5, -0.5, 0.5, 1.5])

    def test_odd_length_centres_on_zero(self):
        g = make_time_grid(5)
        assert np.array_equal(g.n_values, [-2.0, -1.0, 0.0, 1.0, 2.0])

    def test_l256_endpoints(self):
        g = make_time_grid(256)
        assert g.n_values[0] == -127.5 and g.n_values[-1] == 127.5

    def test_symmetry_and_spacing(self):
        for L in (2, 3, 8, 31, 256):
            n = make_time_grid(L).n_values
            assert np.array_equal(n, -n[::-1])
            assert np.allclose(np.diff(n), 1.0)

    def test_too_short_rejected(self):
        with pytest.raises(ValueError):
            make_time_grid(1)


class TestSineWindow:
    def test_first_sample_l256(self):
        h = make_sine_window(256).h
        assert h[0] == pytest.approx(math.sin(math.pi / 512), abs=1e-15)

    def test_middle_pair_equal(self):
        for L in (4, 10, 256):
            h = make_sine_window(L).h
            assert h[L // 2 - 1] == pytest.approx(h[L // 2], abs=1e-15)

    def test_l2_values(self):
        h = make_sine_window(2).h
        assert np.allclose(h, math.cos(math.pi / 4), atol=1e-15)

    def test_matches_one_based_formula(self):
        # h[m] = cos(pi (m - (L+1)/2) / L) for m = 1..L
        for L in (2, 5, 64, 256):
            h = make_sine_window(L).h
            m = np.arange(1, L + 1)
            ref = np.cos(math.pi * (m - (L + 1) / 2) / L)
            assert np.max(np.abs(h - ref)) <= 1e-15

    def test_positive_and_symmetric(self):
        h = make_sine_window(33).h
        assert np.all(h > 0) and np.all(h <= 1)
        assert np.allclose(h, h[::-1], atol=0)

    def test_too_short_rejected(self):
        with pytest.raises(ValueError):
            make_sine_window(1)


class TestBuildBasis:
    def test_cos_column_matches_direct_formula(self):
        L = 4
        g = make_time_grid(L)
        w = make_sine_window(L)
        basis = build_basis([math.pi / 2], g, w, 1)
        raw = w.h * np.cos(math.pi / 2 * g.n_values)
        j = basis.component_index("c", 0)
        assert np.allclose(basis.columns[:, j] * basis.norms[j], raw, atol=1e-15)
        assert np.allclose(raw, raw[::-1], atol=0)  # even column

    def test_unit_norms_and_parity_tags(self):
        basis = build_basis([0.2, 1.1, 2.9], make_time_grid(64), make_sine_window(64), 2)
        assert np.allclose(np.linalg.norm(basis.columns, axis=0), 1.0, atol=1e-12)
        N = basis.n_sinusoids
        expected = ["even"] * N + ["odd"] * N + ["even"] * N + ["odd"] * N + ["even"] * N + ["odd"] * N
        assert list(basis.parity) == expected

    def test_within_sinusoid_orthogonality(self):
        for L in (4, 8, 64, 256):
            basis = build_basis([0.1 * math.pi], make_time_grid(L), make_sine_window(L), 1)
            cols = basis.columns
            for a, b in (("c", "s"), ("c", "d"), ("t", "s"), ("t", "d")):
                ja = basis.component_index(a, 0)
                jb = basis.component_index(b, 0)
                assert abs(np.dot(cols[:, ja], cols[:, jb])) <= 1e-12

    def test_ct_inner_product_against_plain_summation(self):
        # independent oracle: plain Python accumulation of h^2 n cos sin
        L = 256
        theta = 0.1 * math.pi
        basis = build_basis([theta], make_time_grid(L), make_sine_window(L), 1)
        jc = basis.component_index("c", 0)
        jt = basis.component_index("t", 0)
        got = float(np.dot(basis.columns[:, jc], basis.columns[:, jt]))
        acc = 0.0
        for i in range(L):
            n = i - (L - 1) / 2
            h = math.cos(math.pi * n / L)
            acc += (h * math.cos(theta * n)) * (h * n * math.sin(theta * n))
        expected = acc / (basis.norms[jc] * basis.norms[jt])
        assert got == pytest.approx(expected, abs=1e-12)

    def test_parity_projection_is_identity(self):
        basis = build_basis([0.3, 1.7], make_time_grid(32), make_sine_window(32), 2)
        for j in range(basis.n_components):
            col = basis.columns[:, j]
            sign = 1.0 if basis.parity[j] == "even" else -1.0
            assert np.array_equal(col, sign * col[::-1])

    def test_half_columns_preserve_norm(self):
        basis = build_basis([0.4, 2.0], make_time_grid(17), make_sine_window(17), 1)
        for j, half in enumerate(basis.half_cols):
            assert np.linalg.norm(half) == pytest.approx(basis.norms[j], rel=1e-12)

    def test_invalid_seed_rejected(self):
        g, w = make_time_grid(16), make_sine_window(16)
        for bad in (0.0, -0.5, math.pi, 4.0):
            with pytest.raises(InvalidFrequencyError):
                build_basis([bad], g, w, 1)

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            build_basis([0.5], make_time_grid(16), make_sine_window(32), 1)


class TestCoeffMaps:
    def test_identity_case(self):
        cf = coeffs_from_params(SinusoidState(1.0, 0.5, 0.0), 1)
        assert (cf.c, cf.s, cf.d, cf.t) == (1.0, 0.0, 0.0, 0.0)

    def test_quarter_phase(self):
        cf = coeffs_from_params(SinusoidState(1.0, 0.5, math.pi / 2), 1)
        assert cf.c == pytest.approx(0.0, abs=1e-15)
        assert cf.s == pytest.approx(-1.0, abs=1e-15)

    def test_worked_example(self):
        cf = coeffs_from_params(SinusoidState(2.0, 0.5, math.pi / 3, amp_slope=0.1), 1)
        assert cf.c == pytest.approx(1.0, abs=1e-12)
        assert cf.s == pytest.approx(-math.sqrt(3.0), abs=1e-12)
        assert cf.d == pytest.approx(0.05, abs=1e-12)
        assert cf.t == pytest.approx(-0.05 * math.sqrt(3.0), abs=1e-12)

    def test_order2_with_frequency_slope(self):
        st_ = SinusoidState(1.5, 0.8, 0.3, amp_slope=0.0, amp_curve=0.02, theta_slope=1e-4)
        cf = coeffs_from_params(st_, 2)
        assert cf.f == pytest.approx(0.02 * math.cos(0.3) - 1.5e-4 * math.sin(0.3), abs=1e-15)
        assert cf.u == pytest.approx(-0.02 * math.sin(0.3) - 1.5e-4 * math.cos(0.3), abs=1e-15)

    def test_params_identity_case(self):
        state, dth = params_from_coeffs(LinearCoeffs(1.0, 0.0, 0.0, 0.0), 0.5, 1)
        assert (state.amp, state.phi, state.amp_slope, dth) == (1.0, 0.0, 0.0, 0.0)
        assert state.theta == 0.5

    def test_params_delta_theta(self):
        _, dth = params_from_coeffs(LinearCoeffs(1.0, 0.0, 0.0, -0.01), 0.5, 1)
        assert dth == pytest.approx(0.01, abs=1e-15)

    def test_round_trip_many_states(self):
        rng = np.random.default_rng(0)
        for _ in range(1000):
            st_ = SinusoidState(
                amp=float(rng.uniform(1e-3, 10.0)),
                theta=float(rng.uniform(0.01, math.pi - 0.01)),
                phi=float(rng.uniform(-math.pi, math.pi)),
                amp_slope=float(rng.uniform(-0.1, 0.1)),
            )
            cf = coeffs_from_params(st_, 1)
            back, dth = params_from_coeffs(cf, st_.theta, 1)
            assert back.amp == pytest.approx(st_.amp, rel=1e-12)
            assert back.phi == pytest.approx(st_.phi, abs=1e-12)
            assert back.amp_slope == pytest.approx(st_.amp_slope, abs=1e-12 * st_.amp)
            assert abs(dth) <= 1e-12

    @given(
        amp=st.floats(1e-3, 100.0),
        phi=st.floats(-math.pi + 1e-9, math.pi),
        slope=st.floats(-1.0, 1.0),
        curve=st.floats(-0.1, 0.1),
        tslope=st.floats(-1e-3, 1e-3),
    )
    @settings(max_examples=80, deadline=None)
    def test_round_trip_order2(self, amp, phi, slope, curve, tslope):
        st_ = SinusoidState(amp, 1.0, phi, slope, curve, tslope)
        back, dth = params_from_coeffs(coeffs_from_params(st_, 2), 1.0, 2)
        assert back.amp == pytest.approx(amp, rel=1e-9)
        assert back.amp_curve == pytest.approx(curve, abs=1e-9 * max(amp, 1.0))
        assert back.theta_slope == pytest.approx(tslope, abs=1e-9)
        assert abs(dth) <= 1e-9

    def test_amp_floor_returns_silent_state(self):
        state, dth = params_from_coeffs(
            LinearCoeffs(1e-16, 0.0, 0.5, 0.5), 0.7, 1, amp_floor=1e-12
        )
        assert state.amp == 0.0 and state.phi == 0.0 and dth == 0.0
        assert state.theta == 0.7

    def test_exact_zero_guarded_without_floor(self):
        state, dth = params_from_coeffs(LinearCoeffs(0.0, 0.0, 1.0, 1.0), 0.7, 1)
        assert state.amp == 0.0 and dth == 0.0


class TestSynthesis:
    def test_empty_state_list(self, grid256, window256):
        assert np.array_equal(synthesize_exact([], grid256, window256, 1), np.zeros(256))

    def test_single_state_matches_windowed_cos(self, grid256, window256):
        st_ = SinusoidState(1.0, 0.1 * math.pi, 0.0)
        out = synthesize_exact([st_], grid256, window256, 1)
        ref = window256.h * np.cos(0.1 * math.pi * grid256.n_values)
        assert np.array_equal(out, ref)

    def test_additivity(self, grid256, window256):
        a = SinusoidState(1.0, 0.3, 0.5, amp_slope=0.01)
        b = SinusoidState(0.5, 1.7, -1.0)
        both = synthesize_exact([a, b], grid256, window256, 1)
        parts = (synthesize_exact([a], grid256, window256, 1)
                 + synthesize_exact([b], grid256, window256, 1))
        assert np.max(np.abs(both - parts)) <= 1e-15

    def test_linearised_zero_coeffs(self, grid256, window256):
        basis = build_basis([0.5], grid256, window256, 1)
        out = synthesize_linearised([LinearCoeffs(0, 0, 0, 0)], basis)
        assert np.array_equal(out, np.zeros(256))

    def test_linearised_reproduces_single_column(self, grid256, window256):
        basis = build_basis([0.5], grid256, window256, 1)
        j = basis.component_index("t", 0)
        cf = LinearCoeffs(0.0, 0.0, 0.0, 1.0 / basis.norms[j])
        out = synthesize_linearised([cf], basis)
        assert np.allclose(out, basis.columns[:, j], atol=1e-15)

    def test_linearised_dimension_mismatch(self, grid256, window256):
        basis = build_basis([0.5, 0.9], grid256, window256, 1)
        with pytest.raises(ValueError):
            synthesize_linearised([LinearCoeffs(1, 0, 0, 0)], basis)


class TestLinearisationError:
    def test_zero_at_expansion_point(self, grid256, window256):
        # mathematically exact; float trig identities leave ~1e-16 dust
        st_ = SinusoidState(1.0, 0.3 * math.pi, 0.7)
        assert linearisation_error(st_, 0.0, grid256, window256, 1) <= 1e-13

    def test_quadratic_in_delta_theta(self, grid256, window256):
        st_ = SinusoidState(1.3, 0.3 * math.pi, 0.7)
        errs = [
            linearisation_error(st_, dth, grid256, window256, 1)
            for dth in (1e-3, 1e-4, 1e-5)
        ]
        slope = np.polyfit(np.log([1e-3, 1e-4, 1e-5]), np.log(errs), 1)[0]
        assert slope == pytest.approx(2.0, abs=0.05)

    def test_halving_ratio_approaches_four(self, grid256, window256):
        st_ = SinusoidState(1.0, 0.4 * math.pi, -0.2)
        e1 = linearisation_error(st_, 2e-4, grid256, window256, 1)
        e2 = linearisation_error(st_, 1e-4, grid256, window256, 1)
        assert e1 / e2 == pytest.approx(4.0, abs=0.05)

    def test_order2_quadratic_in_theta_slope(self, grid256, window256):
        # truncating cos(theta_slope n^2) at 1 leaves a second-order term,
        # so the residual falls off quadratically (halving ratio 4)
        thetas = (1e-5, 5e-6, 2.5e-6)
        errs = []
        for tslope in thetas:
            st_ = SinusoidState(1.0, 0.3 * math.pi, 0.7, theta_slope=tslope)
            errs.append(linearisation_error(st_, 0.0, grid256, window256, 2))
        slope = np.polyfit(np.log(thetas), np.log(errs), 1)[0]
        assert slope == pytest.approx(2.0, abs=0.05)

    def test_order2_models_chirp_better_than_order1(self, grid256, window256):
        chirped = SinusoidState(1.0, 0.3 * math.pi, 0.7, theta_slope=1e-5)
        exact = synthesize_exact([chirped], grid256, window256, 2)
        basis1 = build_basis([chirped.theta], grid256, window256, 1)
        lin1 = synthesize_linearised([coeffs_from_params(chirped, 1)], basis1)
        basis2 = build_basis([chirped.theta], grid256, window256, 2)
        lin2 = synthesize_linearised([coeffs_from_params(chirped, 2)], basis2)
        err1 = float(np.sqrt(np.mean((exact - lin1) ** 2)))
        err2 = float(np.sqrt(np.mean((exact - lin2) ** 2)))
        assert err2 < 0.1 * err1


class TestSinusoidState:
    def test_phi_normalised(self):
        st_ = SinusoidState(1.0, 0.5, 3.0 * math.pi)
        assert -math.pi < st_.phi <= math.pi
        assert st_.phi == pytest.approx(math.pi, abs=1e-12)

    def test_invalid_amp_and_theta(self):
        with pytest.raises(ValueError):
            SinusoidState(-1.0, 0.5, 0.0)
        with pytest.raises(InvalidFrequencyError):
            SinusoidState(1.0, -0.5, 0.0)
        with pytest.raises(InvalidFrequencyError):
            SinusoidState(1.0, math.pi, 0.0)

    def test_non_finite_coeffs_rejected(self):
        with pytest.raises(ValueError):
            LinearCoeffs(math.nan, 0.0, 0.0, 0.0)


def test_tone_helper_consistency(grid256, window256):
    x = tone(256, 0.2, 0.1)
    assert x[0] == pytest.approx(math.cos(0.2 * -127.5 + 0.1), abs=1e-15)
