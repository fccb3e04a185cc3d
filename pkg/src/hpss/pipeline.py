"""End-to-end separation pipeline and its configuration.

Ties together instantaneous-frequency estimation, the median-filter
pre-estimate (initializer and smoothness weight), and the primal-dual
solver. The mixture is gain-normalized internally (reference level: a
full-scale sine, RMS 1/sqrt(2)) so the sparsity weight has a consistent
meaning regardless of input loudness, and outputs are scaled back; the
whole pipeline is therefore exactly equivariant to input gain.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .audio_io import Signal, as_samples
from .baseline import MedianConfig, compute_weight, median_filter_hpss
from .phase import build_correction, estimate_if
from .prox import SignalPair
from .solver import HpssProblem, SolverParams, run
from .stft import StftConfig, adjoint, forward, make_config

REFERENCE_RMS = 2.0**-0.5

IF_SOURCE_MIXTURE = "mixture"
IF_SOURCE_ORACLE = "oracle-file"


@dataclass(frozen=True)
class HpssConfig:
    """Pipeline configuration with the evaluated defaults."""

    win_len: int = 4096
    hop: int = 1024
    kappa: float = 0.001
    solver: SolverParams = field(default_factory=SolverParams)
    median: MedianConfig = field(default_factory=MedianConfig)
    if_source: str = IF_SOURCE_MIXTURE
    if_eps: float = 1e-6

    def __post_init__(self):
        if self.if_source not in (IF_SOURCE_MIXTURE, IF_SOURCE_ORACLE):
            raise ValueError(f"unknown if_source: {self.if_source!r}")
        if self.kappa <= 0 or self.if_eps <= 0:
            raise ValueError("kappa and if_eps must be positive")

    def stft(self) -> StftConfig:
        return make_config(self.win_len, self.hop)


def separate(x, cfg: HpssConfig = HpssConfig(), oracle_h=None):
    """Separate a mixture into harmonic and percussive components.

    Pipeline: STFT of the mixture, instantaneous-frequency estimation
    (from the mixture or, when configured, from a supplied clean
    harmonic reference), phase-correction matrix, median-filter
    initialization and pre-estimate, smoothness weight, then the
    primal-dual solver. The returned pair sums to the input bit-exactly.
    """
    samples = as_samples(x)
    rate = x.sample_rate if isinstance(x, Signal) else 1

    if cfg.if_source == IF_SOURCE_ORACLE:
        if oracle_h is None:
            raise ValueError("if_source is oracle-file but no oracle signal given")
        oracle = as_samples(oracle_h)
        if oracle.size != samples.size:
            raise ValueError("oracle signal length does not match the mixture")
    else:
        oracle = None

    rms = float(np.sqrt(np.mean(samples**2)))
    gain = REFERENCE_RMS / rms if rms > 0.0 else 1.0
    xs = samples * gain

    config = cfg.stft()
    spec = forward(xs, config)

    if_src = xs if oracle is None else oracle * gain
    if_map = estimate_if(if_src, config, eps=cfg.if_eps)
    correction = build_correction(if_map, config)

    _, _, mask = median_filter_hpss(spec, cfg.median)
    x_h0 = adjoint(spec.with_data(mask * spec.data))
    weight = compute_weight(mask * np.abs(spec.data), cfg.kappa)

    problem = HpssProblem(
        mixture=xs,
        config=config,
        correction=correction,
        weight=weight,
        params=cfg.solver,
        sample_rate=rate,
    )
    pair, trace = run(problem, (x_h0, xs - x_h0))

    x_h = pair.harmonic.samples / gain
    x_p = samples - x_h
    return SignalPair(Signal(x_h, rate), Signal(x_p, rate)), trace


_CONFIG_KEYS = {
    "win_len": int,
    "hop": int,
    "lambda": float,
    "kappa": float,
    "mu1": float,
    "mu2": float,
    "alpha": float,
    "iters": int,
    "record_trace": lambda s: s.lower() in ("1", "true", "yes"),
    "harm_kernel": int,
    "perc_kernel": int,
    "mask_power": float,
    "if_source": str,
    "if_eps": float,
}


def parse_config_text(text: str, base: HpssConfig = HpssConfig()) -> HpssConfig:
    """Parse the flat key-value configuration format.

    One ``key = value`` pair per line; '#' starts a comment; every key is
    optional and missing keys keep the defaults of ``base``.
    """
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected 'key = value'")
        key, val = (part.strip() for part in line.split("=", 1))
        if key not in _CONFIG_KEYS:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
        try:
            values[key] = _CONFIG_KEYS[key](val)
        except ValueError as exc:
            raise ValueError(f"config line {lineno}: bad value for {key!r}") from exc

    solver = replace(
        base.solver,
        **{
            field_name: values[key]
            for key, field_name in (
                ("lambda", "lam"),
                ("mu1", "mu1"),
                ("mu2", "mu2"),
                ("alpha", "alpha"),
                ("iters", "n_iters"),
                ("record_trace", "record_trace"),
            )
            if key in values
        },
    )
    median = replace(
        base.median,
        **{
            k: values[k]
            for k in ("harm_kernel", "perc_kernel", "mask_power")
            if k in values
        },
    )
    return replace(
        base,
        solver=solver,
        median=median,
        **{
            k: values[k]
            for k in ("win_len", "hop", "kappa", "if_source", "if_eps")
            if k in values
        },
    )


def load_config(path, base: HpssConfig = HpssConfig()) -> HpssConfig:
    with open(path) as fh:
        return parse_config_text(fh.read(), base)
