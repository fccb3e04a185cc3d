import numpy as np
import pytest

from hpss import (
    Signal,
    Spectrogram,
    adjoint,
    forward,
    make_config,
    make_hann,
    make_tight,
    spec_inner,
    spec_norm,
)
from hpss.stft import StftConfig, read_spec_dump, write_spec_dump

from conftest import sine_signal


def naive_stft(x, config):
    """O(L*K) DFT-sum oracle, straight from the transform definition."""
    win_len, hop = config.win_len, config.hop
    n = x.size
    n_frames = config.n_frames(n)
    n_pad = hop * n_frames
    y = np.zeros(n_pad)
    y[:n] = x
    k = config.n_bins
    out = np.zeros((k, n_frames), dtype=complex)
    for tau in range(n_frames):
        for omega in range(k):
            acc = 0.0 + 0.0j
            for l in range(win_len):
                acc += (
                    y[(hop * tau - win_len // 2 + l) % n_pad]
                    * config.window[l]
                    * np.exp(-2j * np.pi * omega * l / win_len)
                )
            out[omega, tau] = acc
    return out


class TestWindows:
    def test_hann_quarter_points(self):
        np.testing.assert_allclose(make_hann(4), [0.0, 0.5, 1.0, 0.5])

    def test_hann_midpoint(self):
        assert make_hann(4096)[2048] == pytest.approx(1.0)

    def test_hann_too_short(self):
        with pytest.raises(ValueError):
            make_hann(1)

    def test_tight_cola_sum(self):
        w = make_tight(make_hann(4096), 1024)
        sums = np.zeros(1024)
        for l0 in range(1024):
            sums[l0] = np.sum(w[l0::1024] ** 2)
        assert np.max(np.abs(sums - 1.0)) <= 1e-12

    def test_tight_rectangular_identity(self):
        g = np.ones(32)
        np.testing.assert_allclose(make_tight(g, 32), g)

    def test_tight_idempotent(self):
        w = make_tight(make_hann(256), 64)
        np.testing.assert_allclose(make_tight(w, 64), w, atol=1e-15)

    def test_tight_coverage_gap(self):
        g = np.zeros(16)
        g[0] = 1.0  # hop 4 leaves three empty residues
        with pytest.raises(ValueError, match="coverage"):
            make_tight(g, 4)


class TestConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            make_config(63, 16)  # odd length
        with pytest.raises(ValueError):
            make_config(64, 24)  # hop does not divide
        cfg = make_config(64, 16)
        assert cfg.n_bins == 33
        assert cfg.fft_len == 64
        assert cfg.n_frames(1000) == 63

    def test_bin_weights(self):
        cfg = make_config(8, 4)
        np.testing.assert_allclose(cfg.bin_weights * 8, [1, 2, 2, 2, 1])


class TestForward:
    def test_impulse_flat_spectrum(self):
        # rectangular tight window, impulse at the center of frame 0
        win = make_tight(np.ones(16), 16)
        cfg = StftConfig(16, 16, win, np.zeros(16))
        x = np.zeros(16)
        x[0] = 1.0
        spec = forward(x, cfg)
        mags = np.abs(spec.data[:, 0])
        np.testing.assert_allclose(mags, mags[0])
        assert mags[0] > 0

    def test_on_bin_sinusoid_peak_row(self, bench_config):
        s = sine_signal(100.0, 16000, bench_config.win_len)
        spec = forward(s, bench_config)
        interior = np.abs(spec.data[:, 5:-5])
        assert np.all(np.argmax(interior, axis=0) == 100)

    def test_matches_naive_dft(self, rng):
        cfg = make_config(16, 4)
        x = rng.normal(size=50)
        fast = forward(x, cfg).data
        slow = naive_stft(x, cfg)
        assert np.max(np.abs(fast - slow)) <= 1e-9

    def test_linearity(self, small_config, rng):
        x = rng.normal(size=300)
        y = rng.normal(size=300)
        a, b = 1.7, -0.6
        lhs = forward(a * x + b * y, small_config).data
        rhs = a * forward(x, small_config).data + b * forward(y, small_config).data
        assert np.max(np.abs(lhs - rhs)) <= 1e-12 * max(1.0, np.max(np.abs(rhs)))

    def test_accepts_signal_and_array(self, small_config, rng):
        x = rng.normal(size=200)
        a = forward(x, small_config)
        b = forward(Signal(x, 8000), small_config)
        np.testing.assert_array_equal(a.data, b.data)
        assert b.sample_rate == 8000


class TestAdjoint:
    def test_perfect_reconstruction(self, rng):
        cfg = make_config(64, 16)
        for n in (17, 64, 777, 5000):
            x = rng.normal(size=n)
            xr = adjoint(forward(x, cfg))
            assert np.linalg.norm(xr - x) <= 1e-10 * np.linalg.norm(x)

    def test_adjoint_identity(self, rng, small_config):
        cfg = small_config
        worst = 0.0
        for _ in range(50):
            x = rng.normal(size=400)
            spec = forward(x, cfg)
            y = rng.normal(size=spec.shape) + 1j * rng.normal(size=spec.shape)
            yspec = spec.with_data(y)
            lhs = spec_inner(spec, yspec, cfg)
            rhs = float(np.dot(x, adjoint(yspec)))
            denom = np.linalg.norm(x) * spec_norm(yspec, cfg)
            worst = max(worst, abs(lhs - rhs) / denom)
        assert worst <= 1e-8

    def test_zero_spectrogram(self, small_config):
        spec = forward(np.zeros(100), small_config)
        np.testing.assert_array_equal(adjoint(spec), np.zeros(100))

    def test_parseval(self, rng, small_config):
        x = rng.normal(size=1234)
        spec = forward(x, small_config)
        energy = spec_inner(spec, spec, small_config)
        assert abs(energy - np.dot(x, x)) <= 1e-8 * np.dot(x, x)

    def test_shape_mismatch(self, small_config, rng):
        spec = forward(rng.normal(size=100), small_config)
        with pytest.raises(ValueError):
            Spectrogram(spec.data[:, :-1], small_config, 100)


class TestDump:
    def test_round_trip(self, tmp_path, small_config, rng):
        spec = forward(rng.normal(size=500), small_config)
        path = tmp_path / "spec.bin"
        write_spec_dump(path, spec)
        data, (k, t, win_len, hop) = read_spec_dump(path)
        assert (k, t) == spec.shape
        assert (win_len, hop) == (64, 16)
        np.testing.assert_array_equal(data, spec.data)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.bin"
        path.write_bytes(b"\x00" * 64)
        with pytest.raises(ValueError):
            read_spec_dump(path)
