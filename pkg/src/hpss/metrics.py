"""BSS-Eval style SDR/SIR/SAR for scoring separations against references.

Each estimate is decomposed into target, interference and artifact parts
by least-squares projection onto delayed copies of the references
(projection filters of a configurable length, computed over the full
signals). Follows the classic sources-style evaluation.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import toeplitz

from .audio_io import as_samples

_DB_FLOOR_RATIO = 1e-30


@dataclass(frozen=True)
class EvalResult:
    """Per-channel scores in dB plus the harmonic/percussive averages."""

    sdr_h: float
    sir_h: float
    sar_h: float
    sdr_p: float
    sir_p: float
    sar_p: float

    @property
    def sdr_avg(self) -> float:
        return 0.5 * (self.sdr_h + self.sdr_p)

    @property
    def sir_avg(self) -> float:
        return 0.5 * (self.sir_h + self.sir_p)

    @property
    def sar_avg(self) -> float:
        return 0.5 * (self.sar_h + self.sar_p)


def _safe_db(num: float, den: float) -> float:
    den = max(den, num * _DB_FLOOR_RATIO, 1e-300)
    return 10.0 * np.log10(num / den)


def _correlate_fft(a_fft: np.ndarray, b_fft: np.ndarray, n_fft: int) -> np.ndarray:
    return np.real(np.fft.irfft(a_fft * np.conj(b_fft), n=n_fft))


def _project(refs: list, est: np.ndarray, flen: int) -> np.ndarray:
    """Least-squares projection of est onto delayed copies of the references."""
    n_src = len(refs)
    n = est.size
    n_out = n + flen - 1
    n_fft = int(2 ** np.ceil(np.log2(n_out)))
    ref_f = [np.fft.rfft(r, n=n_fft) for r in refs]
    est_f = np.fft.rfft(est, n=n_fft)

    gram = np.zeros((n_src * flen, n_src * flen))
    for i in range(n_src):
        for j in range(i + 1):
            cc = _correlate_fft(ref_f[i], ref_f[j], n_fft)
            block = toeplitz(
                np.concatenate(([cc[0]], cc[-1 : -flen : -1])), r=cc[:flen]
            )
            gram[i * flen : (i + 1) * flen, j * flen : (j + 1) * flen] = block
            gram[j * flen : (j + 1) * flen, i * flen : (i + 1) * flen] = block.T

    rhs = np.zeros(n_src * flen)
    for i in range(n_src):
        cc = _correlate_fft(ref_f[i], est_f, n_fft)
        rhs[i * flen : (i + 1) * flen] = np.concatenate(
            ([cc[0]], cc[-1 : -flen : -1])
        )

    try:
        coeffs = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError:
        ridge = 1e-10 * max(np.trace(gram) / gram.shape[0], 1.0)
        warnings.warn(
            "singular projection system; regularizing with a tiny ridge",
            stacklevel=2,
        )
        coeffs = np.linalg.solve(gram + ridge * np.eye(gram.shape[0]), rhs)

    proj = np.zeros(n_out)
    for i in range(n_src):
        filt_f = np.fft.rfft(coeffs[i * flen : (i + 1) * flen], n=n_fft)
        proj += np.real(np.fft.irfft(filt_f * ref_f[i], n=n_fft))[:n_out]
    return proj


def _decompose(refs: list, est: np.ndarray, j: int, flen: int):
    n = est.size
    s_target = _project([refs[j]], est, flen)
    p_all = _project(refs, est, flen) if len(refs) > 1 else s_target
    e_interf = p_all - s_target
    e_artif = -p_all
    e_artif[:n] += est
    return s_target, e_interf, e_artif


def _scores(s_target, e_interf, e_artif):
    sdr = _safe_db(s_target @ s_target, (e_interf + e_artif) @ (e_interf + e_artif))
    sir = _safe_db(s_target @ s_target, e_interf @ e_interf)
    st_i = s_target + e_interf
    sar = _safe_db(st_i @ st_i, e_artif @ e_artif)
    return sdr, sir, sar


def bss_eval_sources(refs, ests, filter_len: int = 512):
    """Score each estimate against its matching reference.

    Returns a list of (SDR, SIR, SAR) triples, one per source, using
    filter_len-tap projection filters.
    """
    refs = [as_samples(r) for r in refs]
    ests = [as_samples(e) for e in ests]
    if len(refs) != len(ests) or not refs:
        raise ValueError("need equally many references and estimates")
    n = refs[0].size
    if any(r.size != n for r in refs) or any(e.size != n for e in ests):
        raise ValueError("all signals must have equal length")
    if filter_len < 1:
        raise ValueError("filter_len must be >= 1")
    return [
        _scores(*_decompose(refs, est, j, filter_len)) for j, est in enumerate(ests)
    ]


def bss_eval(ref_h, ref_p, est_h, est_p, filter_len: int = 512) -> EvalResult:
    """Evaluate a harmonic/percussive pair against reference stems."""
    (sdr_h, sir_h, sar_h), (sdr_p, sir_p, sar_p) = bss_eval_sources(
        [ref_h, ref_p], [est_h, est_p], filter_len
    )
    return EvalResult(sdr_h, sir_h, sar_h, sdr_p, sir_p, sar_p)
