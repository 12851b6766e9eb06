import numpy as np
import pytest

from plcturbo import (
    ConfigError,
    DegenerateChannelError,
    MultipathParams,
    PulseShape,
    ResolutionError,
    default_time_grid,
    discretize,
    equivalent_impulse_response,
    frequency_response,
    raised_cosine_impulse,
    synthesize_discrete_channel,
)

from conftest import PAPER_TAPS

# frozen from a one-off script summing the four path terms of the VVF set
# at f = 1 MHz: weight * exp(-a1 f d) * exp(-2j pi f d / v_p)
VVF_H_1MHZ = 0.15541567980966187 - 0.7377367127393846j

# closed form at t = T/2, beta = 0.7: sinc(1/2) cos(0.35 pi) / (1 - 0.49)
RC_HALF_T = 0.5667045658847741


class TestFrequencyResponse:
    def test_single_lossless_path_is_unity(self):
        p = MultipathParams(paths=((1.0, 0.0),), a0=0.0, a1=0.0, kappa=1.0, epsilon_r=1.0)
        for f in (0.0, 1e6, 20e6):
            assert frequency_response(p, f) == pytest.approx(1.0)

    def test_huge_attenuation_kills_response(self):
        p = MultipathParams(paths=((1.0, 100.0),), a0=1e3, a1=0.0, kappa=1.0, epsilon_r=2.0)
        assert abs(frequency_response(p, 1e6)) < 1e-300

    def test_vvf_value_at_1mhz(self, vvf_params):
        h = frequency_response(vvf_params, 1e6)
        assert h == pytest.approx(VVF_H_1MHZ, abs=1e-12)

    def test_monotone_attenuation_in_distance_and_frequency(self):
        mags = []
        for d in (50.0, 100.0, 200.0, 400.0):
            p = MultipathParams(paths=((1.0, d),), a0=1e-4, a1=7.8e-10, kappa=0.7, epsilon_r=3.0)
            mags.append(abs(frequency_response(p, 5e6)))
        assert all(a > b for a, b in zip(mags, mags[1:]))
        p = MultipathParams(paths=((1.0, 200.0),), a0=0.0, a1=7.8e-10, kappa=0.7, epsilon_r=3.0)
        freqs = np.linspace(0.5e6, 20e6, 40)
        mags = np.abs(frequency_response(p, freqs))
        assert np.all(np.diff(mags) < 0)

    def test_delay_scales_phase_slope(self):
        base = MultipathParams(paths=((1.0, 100.0),), a0=0.0, a1=0.0, kappa=1.0, epsilon_r=4.0)
        scaled = MultipathParams(paths=((1.0, 300.0),), a0=0.0, a1=0.0, kappa=1.0, epsilon_r=4.0)
        f = 2e6
        ph_base = np.angle(frequency_response(base, f))
        ph_scaled = np.angle(frequency_response(scaled, f))
        # unwrapped phase is -2 pi f d / v_p, so tripling d triples it
        expect = 3 * (-2 * np.pi * f * 100.0 / base.velocity)
        assert (ph_scaled - expect) % (2 * np.pi) == pytest.approx(0.0, abs=1e-9) or (
            expect - ph_scaled
        ) % (2 * np.pi) == pytest.approx(0.0, abs=1e-9)

    def test_invalid_params_rejected(self):
        with pytest.raises(ConfigError):
            MultipathParams(paths=(), a0=0.0, a1=0.0, kappa=1.0, epsilon_r=1.0)
        with pytest.raises(ConfigError):
            MultipathParams(paths=((1.0, 1.0),), a0=0.0, a1=0.0, kappa=1.0, epsilon_r=0.5)
        with pytest.raises(ConfigError):
            frequency_response(
                MultipathParams(paths=((1.0, 1.0),), a0=0.0, a1=0.0, kappa=1.0, epsilon_r=2.0),
                -1.0,
            )


class TestRaisedCosine:
    def test_peak_is_one(self):
        shape = PulseShape(beta=0.7, symbol_period=1e-6)
        assert raised_cosine_impulse(shape, 0.0) == pytest.approx(1.0)

    def test_nyquist_zero_crossings(self):
        shape = PulseShape(beta=0.7, symbol_period=1e-6)
        for k in (1, 2, 3, 4, 5):
            assert raised_cosine_impulse(shape, k * 1e-6) == pytest.approx(0.0, abs=1e-12)
            assert raised_cosine_impulse(shape, -k * 1e-6) == pytest.approx(0.0, abs=1e-12)

    def test_half_symbol_closed_form(self):
        shape = PulseShape(beta=0.7, symbol_period=1e-6)
        assert raised_cosine_impulse(shape, 0.5e-6) == pytest.approx(RC_HALF_T, abs=1e-12)

    def test_singularity_has_finite_limit(self):
        T = 1e-6
        shape = PulseShape(beta=0.7, symbol_period=T)
        t_sing = T / (2 * 0.7)
        v = raised_cosine_impulse(shape, t_sing)
        eps = 1e-9 * T
        near = raised_cosine_impulse(shape, t_sing + eps)
        assert np.isfinite(v)
        assert v == pytest.approx(near, rel=1e-4)

    def test_zero_outside_span(self):
        shape = PulseShape(beta=0.7, symbol_period=1e-6, span=8)
        assert raised_cosine_impulse(shape, 4.5e-6) == 0.0


class TestEquivalentImpulseResponse:
    def test_pure_delay_shifts_pulse(self):
        p = MultipathParams(paths=((1.0, 150.0),), a0=0.0, a1=0.0, kappa=1.0, epsilon_r=4.0)
        shape = PulseShape(beta=0.7, symbol_period=1e-6, span=12)
        grid = default_time_grid(p, shape, oversample=16)
        ch = equivalent_impulse_response(p, shape, grid)
        tau = 150.0 / p.velocity
        expect = raised_cosine_impulse(shape, grid - tau)
        assert np.max(np.abs(ch - expect)) < 1e-3

    def test_methods_agree(self, vvf_params, vvf_pulse):
        grid = default_time_grid(vvf_params, vvf_pulse, oversample=16)
        a = equivalent_impulse_response(vvf_params, vvf_pulse, grid, method="spectral")
        b = equivalent_impulse_response(vvf_params, vvf_pulse, grid, method="direct")
        assert np.linalg.norm(a - b) / np.linalg.norm(a) < 1e-6

    def test_zero_weights_give_zero_output(self):
        p = MultipathParams(paths=((0.0, 100.0), (0.0, 200.0)), a0=0.0, a1=0.0, kappa=1.0, epsilon_r=4.0)
        shape = PulseShape(beta=0.7, symbol_period=1e-6)
        grid = default_time_grid(p, shape)
        ch = equivalent_impulse_response(p, shape, grid)
        assert np.max(np.abs(ch)) == 0.0

    def test_coarse_grid_rejected(self, vvf_params, vvf_pulse):
        grid = np.arange(0.0, 3e-6, vvf_pulse.symbol_period / 4)
        with pytest.raises(ResolutionError):
            equivalent_impulse_response(vvf_params, vvf_pulse, grid)

    def test_vvf_matches_independent_convolution(self, vvf_params, vvf_pulse):
        """Independent oracle: per-path Lorentzian kernels convolved directly."""
        grid = default_time_grid(vvf_params, vvf_pulse, oversample=16)
        dt = grid[1] - grid[0]
        # dense lattice for the oracle, matching the grid
        t_kernel = np.arange(-grid.size, grid.size) * dt
        oracle = np.zeros(grid.size)
        vp = vvf_params.velocity
        for w, d in vvf_params.paths:
            b = vvf_params.a1 * d
            # inverse transform of exp(-b |f|): Lorentzian 2b / (b^2 + (2 pi t)^2)
            kern = 2.0 * b / (b**2 + (2.0 * np.pi * t_kernel) ** 2)
            g = raised_cosine_impulse(vvf_pulse, t_kernel)
            conv = np.convolve(g, kern) * dt
            # conv index i corresponds to time t_kernel[0]*2 + i*dt
            t_conv = 2.0 * t_kernel[0] + dt * np.arange(conv.size)
            tau = d / vp
            oracle += w * np.interp(grid - tau, t_conv, conv)
        ch = equivalent_impulse_response(vvf_params, vvf_pulse, grid)
        peak_lib = grid[np.argmax(np.abs(ch))]
        peak_orc = grid[np.argmax(np.abs(oracle))]
        assert abs(peak_lib - peak_orc) <= dt
        # symbol-spaced samples at the oracle peak agree to oracle accuracy
        idx0 = int(np.argmax(np.abs(oracle)))
        sps = int(round(0.15e-6 / dt))
        sel = idx0 + sps * np.arange(4)
        assert np.allclose(ch[sel], oracle[sel], rtol=0, atol=5e-3 * np.max(np.abs(oracle)))


class TestDiscretize:
    def test_nyquist_pulse_gives_unit_tap(self):
        shape = PulseShape(beta=0.7, symbol_period=1e-6, span=12)
        T = shape.symbol_period
        grid = np.arange(-6e-6, 6e-6 + 1e-9, T / 16)
        ch = raised_cosine_impulse(shape, grid)
        disc = discretize(ch, grid, T, num_taps=4)
        assert disc.taps == pytest.approx([1.0, 0.0, 0.0, 0.0], abs=1e-9)

    def test_vvf_paper_taps(self, vvf_params, vvf_pulse):
        disc = synthesize_discrete_channel(vvf_params, vvf_pulse, 0.15e-6, 4)
        assert np.sum(disc.taps**2) == pytest.approx(1.0, abs=1e-12)
        assert np.max(np.abs(disc.taps - PAPER_TAPS)) < 0.01

    def test_scaling_invariance(self, vvf_params, vvf_pulse):
        grid = default_time_grid(vvf_params, vvf_pulse)
        ch = equivalent_impulse_response(vvf_params, vvf_pulse, grid)
        a = discretize(ch, grid, 0.15e-6, num_taps=4)
        b = discretize(7.0 * ch, grid, 0.15e-6, num_taps=4)
        assert a.taps == pytest.approx(b.taps, abs=1e-12)

    def test_all_zero_rejected(self):
        grid = np.arange(0.0, 1e-5, 1e-8)
        with pytest.raises(DegenerateChannelError):
            discretize(np.zeros_like(grid), grid, 1e-6, num_taps=3)

    def test_energy_normalization_invariant(self, vvf_params):
        rng = np.random.default_rng(5)
        for trial in range(5):
            pulse = PulseShape(beta=float(rng.uniform(0.2, 1.0)), symbol_period=1e-6, span=12)
            grid = default_time_grid(vvf_params, pulse)
            ch = equivalent_impulse_response(vvf_params, pulse, grid)
            disc = discretize(ch, grid, 0.5e-6, num_taps=int(rng.integers(2, 7)))
            assert abs(np.sum(disc.taps**2) - 1.0) < 1e-12

    def test_explicit_phase_respected(self):
        shape = PulseShape(beta=0.7, symbol_period=1e-6, span=12)
        T = shape.symbol_period
        grid = np.arange(-6e-6, 6e-6 + 1e-9, T / 16)
        ch = raised_cosine_impulse(shape, grid)
        disc = discretize(ch, grid, T, num_taps=2, phase=T / 2)
        # sampling half a symbol off-peak: taps at g(+-T/2), equal by symmetry
        expect = np.array([1.0, 1.0]) / np.sqrt(2.0)
        assert np.abs(disc.taps) == pytest.approx(expect, abs=1e-6)
