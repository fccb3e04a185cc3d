"""Windowed forward/adjoint STFT as explicit linear operators.

The transform uses a canonical tight window, frames centered at multiples
of the hop, and circular extension of the (hop-aligned zero-padded)
signal. Under the weighted spectrogram inner product implemented by
``spec_inner`` the adjoint is an exact inverse: ``adjoint(forward(x)) == x``
to machine precision for any signal length.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, replace

import numpy as np

from .audio_io import as_samples

_DUMP_MAGIC_COMPLEX = b"HPSSSPC1"
_DUMP_MAGIC_REAL = b"HPSSIFM1"


def make_hann(win_len: int) -> np.ndarray:
    """Periodic Hann window: 0.5 - 0.5*cos(2*pi*l/L), l = 0..L-1."""
    if win_len < 2:
        raise ValueError("window length must be >= 2")
    l = np.arange(win_len)
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * l / win_len)


def tight_normalizer(window: np.ndarray, hop: int) -> np.ndarray:
    """Per-sample normalizer sqrt(sum_k g^2[l + k*hop]) of the prototype."""
    win_len = len(window)
    if hop < 1 or win_len % hop != 0:
        raise ValueError("hop must divide the window length")
    den = np.empty(win_len)
    for l0 in range(hop):
        den[l0::hop] = np.sum(window[l0::hop] ** 2)
    if np.any(den <= 0.0):
        raise ValueError("window/hop combination leaves coverage gaps")
    return np.sqrt(den)


def make_tight(window: np.ndarray, hop: int) -> np.ndarray:
    """Canonical tight version of a window: g / sqrt(sum of squared hops).

    The result w satisfies sum_k w^2[l + k*hop] == 1 at every l, which
    makes adjoint-after-forward the identity.
    """
    window = np.asarray(window, dtype=np.float64)
    return window / tight_normalizer(window, hop)


@dataclass(frozen=True)
class StftConfig:
    """Transform geometry plus the analysis and derivative windows.

    win_len:      frame length L (even)
    hop:          frame advance a, divides L
    window:       canonical tight analysis window, length L
    deriv_window: samples of (L / 2*pi) * d(window)/dl, same normalizer
                  as ``window``; used by the instantaneous-frequency
                  estimator so its correction comes out in bin units
    """

    win_len: int
    hop: int
    window: np.ndarray
    deriv_window: np.ndarray

    def __post_init__(self):
        if self.win_len < 2 or self.win_len % 2 != 0:
            raise ValueError("win_len must be an even integer >= 2")
        if not (1 <= self.hop <= self.win_len):
            raise ValueError("hop must lie in [1, win_len]")
        if self.win_len % self.hop != 0:
            raise ValueError("hop must divide win_len")
        if len(self.window) != self.win_len or len(self.deriv_window) != self.win_len:
            raise ValueError("window lengths must equal win_len")

    @property
    def fft_len(self) -> int:
        return self.win_len

    @property
    def n_bins(self) -> int:
        return self.win_len // 2 + 1

    @property
    def bin_weights(self) -> np.ndarray:
        """One-sided bin weights [1, 2, ..., 2, 1] / L of the inner product."""
        w = np.full(self.n_bins, 2.0)
        w[0] = 1.0
        w[-1] = 1.0
        return w / self.win_len

    def n_frames(self, n_samples: int) -> int:
        return -(-n_samples // self.hop)


def make_config(win_len: int = 4096, hop: int = 1024) -> StftConfig:
    """Standard configuration: canonical tight Hann analysis window."""
    proto = make_hann(win_len)
    den = tight_normalizer(proto, hop)
    window = proto / den
    l = np.arange(win_len)
    # analytic Hann derivative (pi/L) sin(2 pi l / L), scaled by L/(2 pi)
    deriv = 0.5 * np.sin(2.0 * np.pi * l / win_len) / den
    return StftConfig(win_len=win_len, hop=hop, window=window, deriv_window=deriv)


@dataclass(frozen=True)
class Spectrogram:
    """Complex K x T matrix of one-sided STFT coefficients.

    Column tau holds the frame centered at sample hop*tau. n_samples
    records the analyzed signal length so the adjoint can crop.
    """

    data: np.ndarray
    config: StftConfig
    n_samples: int
    sample_rate: int | None = None

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 2:
            raise ValueError("Spectrogram data must be 2-D")
        if data.shape[0] != self.config.n_bins:
            raise ValueError("row count must equal n_bins")
        if data.shape[1] != self.config.n_frames(self.n_samples):
            raise ValueError("column count must equal ceil(n_samples / hop)")
        if not np.all(np.isfinite(data.view(np.float64))):
            raise ValueError("Spectrogram entries must be finite")

    @property
    def shape(self) -> tuple:
        return self.data.shape

    def with_data(self, data: np.ndarray) -> "Spectrogram":
        return replace(self, data=data)


def _frame(x: np.ndarray, config: StftConfig) -> np.ndarray:
    """Frames of the hop-aligned, circularly extended signal, shape (T, L)."""
    win_len, hop = config.win_len, config.hop
    n = x.size
    n_frames = config.n_frames(n)
    n_pad = hop * n_frames
    y = np.zeros(n_pad)
    y[:n] = x
    z = np.roll(y, win_len // 2)  # frame tau starts at hop*tau, centered at hop*tau
    if n_pad >= win_len:
        tail = max(0, win_len - hop)
        z_ext = np.concatenate([z, z[:tail]]) if tail else z
        frames = np.lib.stride_tricks.sliding_window_view(z_ext, win_len)[::hop]
        return np.ascontiguousarray(frames[:n_frames])
    idx = (hop * np.arange(n_frames)[:, None] + np.arange(win_len)[None, :]) % n_pad
    return z[idx]


def forward(x, config: StftConfig, window: np.ndarray | None = None) -> Spectrogram:
    """One-sided STFT: X[w, tau] = sum_l x[l + a*tau - L/2] g[l] e^{-2pi j w l / L}."""
    samples = as_samples(x)
    rate = x.sample_rate if hasattr(x, "sample_rate") else None
    g = config.window if window is None else window
    frames = _frame(samples, config) * g[None, :]
    data = np.fft.rfft(frames, n=config.win_len, axis=1).T.copy()
    return Spectrogram(data=data, config=config, n_samples=samples.size, sample_rate=rate)


def adjoint(spec: Spectrogram, config: StftConfig | None = None) -> np.ndarray:
    """Exact adjoint of ``forward`` under ``spec_inner``; inverse for tight windows."""
    config = spec.config if config is None else config
    if spec.data.shape != (config.n_bins, config.n_frames(spec.n_samples)):
        raise ValueError("spectrogram shape does not match the configuration")
    win_len, hop = config.win_len, config.hop
    n_frames = spec.data.shape[1]
    n_pad = hop * n_frames
    u = np.fft.irfft(spec.data.T, n=win_len, axis=1) * config.window[None, :]
    if n_pad >= win_len:
        buf = np.zeros(n_pad + win_len)
        for j in range(win_len // hop):
            buf[j * hop : j * hop + n_pad].reshape(n_frames, hop)[...] += u[
                :, j * hop : (j + 1) * hop
            ]
        out = buf[:n_pad].copy()
        out[:win_len] += buf[n_pad:]
    else:
        out = np.zeros(n_pad)
        idx = (hop * np.arange(n_frames)[:, None] + np.arange(win_len)[None, :]) % n_pad
        np.add.at(out, idx, u)
    return np.roll(out, -(win_len // 2))[: spec.n_samples]


def spec_inner(a, b, config: StftConfig) -> float:
    """Real inner product on spectrograms with one-sided bin weighting."""
    da = a.data if isinstance(a, Spectrogram) else np.asarray(a)
    db = b.data if isinstance(b, Spectrogram) else np.asarray(b)
    w = config.bin_weights
    return float(np.sum(w[:, None] * np.real(da * np.conj(db))))


def spec_norm(a, config: StftConfig) -> float:
    return float(np.sqrt(max(spec_inner(a, a, config), 0.0)))


def write_spec_dump(path, spec: Spectrogram) -> None:
    """Binary spectrogram dump: magic, K, T, L, a header + row-major re/im float64."""
    _write_dump(path, _DUMP_MAGIC_COMPLEX, spec.data, spec.config)


def read_spec_dump(path):
    """Read a dump written by ``write_spec_dump``; returns (data, (K, T, L, a))."""
    return _read_dump(path, _DUMP_MAGIC_COMPLEX)


def _write_dump(path, magic: bytes, data: np.ndarray, config: StftConfig) -> None:
    k, t = data.shape
    header = magic + struct.pack("<QQQQ", k, t, config.win_len, config.hop)
    if magic == _DUMP_MAGIC_COMPLEX:
        inter = np.empty((k, t, 2))
        inter[:, :, 0] = data.real
        inter[:, :, 1] = data.imag
        payload = inter.astype("<f8").tobytes()
    else:
        payload = np.ascontiguousarray(data, dtype="<f8").tobytes()
    with open(path, "wb") as fh:
        fh.write(header + payload)


def _read_dump(path, magic: bytes):
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 40 or raw[:8] != magic:
        raise ValueError(f"{path}: not a valid dump file")
    k, t, win_len, hop = struct.unpack_from("<QQQQ", raw, 8)
    body = np.frombuffer(raw, dtype="<f8", offset=40)
    if magic == _DUMP_MAGIC_COMPLEX:
        if body.size != k * t * 2:
            raise ValueError(f"{path}: truncated dump payload")
        inter = body.reshape(k, t, 2)
        data = inter[:, :, 0] + 1j * inter[:, :, 1]
    else:
        if body.size != k * t:
            raise ValueError(f"{path}: truncated dump payload")
        data = body.reshape(k, t).copy()
    return data, (int(k), int(t), int(win_len), int(hop))
