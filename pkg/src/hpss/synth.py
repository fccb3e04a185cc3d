"""Seeded synthetic test material: tonal stems, percussion, and mixtures.

The benchmark corpus mixes short melodies of stationary partials (some
with gentle vibrato or chirp) against click/noise-burst percussion, with
most bursts landing on note onsets. Everything is driven by a single
seeded generator so corpora are bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio_io import Signal


@dataclass(frozen=True)
class SynthTrack:
    """A mixture plus its ground-truth stems (mixture = harmonic + percussive)."""

    mixture: Signal
    harmonic: Signal
    percussive: Signal
    name: str


def sine_tone(freq_hz: float, n: int, sample_rate: int, phase: float = 0.0) -> np.ndarray:
    return np.cos(2.0 * np.pi * freq_hz * np.arange(n) / sample_rate + phase)


def melody_stem(rng, n: int, sample_rate: int, *, f0_range=(220.0, 750.0),
                note_len=(0.12, 0.3), n_partials=(2, 4), vibrato=0.008,
                chirp_prob=0.25, chirp_depth=0.01):
    """Sequence of multi-partial notes; returns (samples, onset indices)."""
    harm = np.zeros(n)
    onsets = []
    pos = 0
    min_note = int(note_len[0] * sample_rate)
    while pos < n - 2 * min_note:
        dlen = min(int(rng.uniform(*note_len) * sample_rate), n - pos)
        f0 = rng.uniform(*f0_range)
        nh = int(rng.integers(n_partials[0], n_partials[1]))
        ts = np.arange(dlen)
        base = f0 * (
            1.0 + vibrato * np.sin(2.0 * np.pi * rng.uniform(4.5, 6.5) * ts / sample_rate
                                   + rng.uniform(0, 2 * np.pi))
        )
        if rng.uniform() < chirp_prob:
            base = base * (1.0 + chirp_depth * ts / max(dlen, 1))
        seg = np.zeros(dlen)
        for k in range(1, nh + 1):
            if k * f0 < sample_rate / 2 - 300:
                seg += np.cos(
                    2.0 * np.pi * np.cumsum(k * base) / sample_rate
                    + rng.uniform(0, 2 * np.pi)
                ) / np.sqrt(k)
        attack = int(0.012 * sample_rate)
        release = int(0.025 * sample_rate)
        env = np.minimum(1.0, ts / max(attack, 1)) * np.minimum(
            1.0, (dlen - ts) / max(release, 1)
        )
        harm[pos : pos + dlen] += seg * env
        onsets.append(pos)
        pos += dlen
    return harm, onsets


def percussion_stem(rng, n: int, sample_rate: int, *, onsets=(), onset_gain=3.0,
                    onset_prob=0.7, ioi=(0.05, 0.13), burst_len=(0.008, 0.025),
                    decay=0.004, click_prob=0.5):
    """Noise bursts and clicks; extra hits are placed on the given onsets."""
    perc = np.zeros(n)

    def hit(pos: int, gain: float) -> None:
        if rng.uniform() < click_prob:
            k = int(rng.uniform(0.001, 0.004) * sample_rate)
        else:
            k = int(rng.uniform(*burst_len) * sample_rate)
        k = min(k, n - pos)
        if k <= 0:
            return
        tail = np.exp(-np.arange(k) / (decay * sample_rate))
        perc[pos : pos + k] += gain * tail * rng.standard_normal(k)

    for onset in onsets:
        if rng.uniform() < onset_prob:
            hit(int(onset), onset_gain)
    pos = int(rng.uniform(0.01, 0.05) * sample_rate)
    while pos < n - 30:
        hit(pos, 1.0)
        pos += int(rng.uniform(*ioi) * sample_rate)
    return perc


def impulse_train(rng, n: int, sample_rate: int, ioi=(0.12, 0.35)) -> np.ndarray:
    """Sparse clicky impulse train with randomized inter-onset intervals."""
    return percussion_stem(
        rng, n, sample_rate, onsets=(), ioi=ioi, click_prob=1.0, decay=0.0015
    )


def mix_at_zero_db(harm: np.ndarray, perc: np.ndarray):
    """Scale the tonal stem so both stems carry equal energy, peak-normalize.

    The common gain uses the largest peak across mixture and stems so the
    stems themselves stay inside [-1, 1] and survive WAV round trips.
    """
    he = float(np.sum(harm**2))
    pe = float(np.sum(perc**2))
    if he > 0.0 and pe > 0.0:
        harm = harm * np.sqrt(pe / he)
    x = harm + perc
    peak = max(np.max(np.abs(x)), np.max(np.abs(harm)), np.max(np.abs(perc)))
    if peak > 0.0:
        harm, perc, x = harm / peak, perc / peak, x / peak
    return x, harm, perc


def bench_track(rng, sample_rate: int = 16000, duration: float = 2.5,
                name: str = "track") -> SynthTrack:
    """One benchmark mixture: melody stem vs onset-synced percussion at 0 dB."""
    n = int(sample_rate * duration)
    harm, onsets = melody_stem(rng, n, sample_rate)
    perc = percussion_stem(rng, n, sample_rate, onsets=onsets)
    x, harm, perc = mix_at_zero_db(harm, perc)
    return SynthTrack(
        mixture=Signal(x, sample_rate),
        harmonic=Signal(harm, sample_rate),
        percussive=Signal(perc, sample_rate),
        name=name,
    )


def bench_corpus(seed: int = 0, n_tracks: int = 10, sample_rate: int = 16000,
                 duration: float = 2.5):
    """The seeded benchmark corpus: a list of SynthTrack."""
    rng = np.random.default_rng(seed)
    return [
        bench_track(rng, sample_rate, duration, name=f"track{i:02d}")
        for i in range(n_tracks)
    ]


def criterion_mixture(seed: int = 0, sample_rate: int = 44100, duration: float = 5.0,
                      tone_bin: float = 41.0, win_len: int = 4096) -> SynthTrack:
    """Single on-bin sinusoid plus an aperiodic burst train at 0 dB mix ratio."""
    rng = np.random.default_rng(seed)
    n = int(sample_rate * duration)
    harm = sine_tone(tone_bin * sample_rate / win_len, n, sample_rate, phase=0.4)
    perc = np.zeros(n)
    pos = 2000
    while pos < n - 50:
        k = min(400, n - pos)
        perc[pos : pos + k] += np.exp(-np.arange(k) / 80.0) * rng.standard_normal(k)
        pos += int(rng.uniform(6000, 14000))
    x, harm, perc = mix_at_zero_db(harm, perc)
    return SynthTrack(
        mixture=Signal(x, sample_rate),
        harmonic=Signal(harm, sample_rate),
        percussive=Signal(perc, sample_rate),
        name="sine-plus-bursts",
    )
