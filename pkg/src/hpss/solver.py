"""Primal-dual splitting iteration for the phase-aware separation problem.

Minimizes  (1/2) || W o D_t(F_ipc(x_h)) ||_Fro^2  +  lambda || F(x_p) ||_{2,1}
subject to x_h + x_p = x, by alternating a projection of the primal pair
onto the exact-sum constraint with proximal updates of two dual
spectrogram variables. Only applications of the linear operators and
their adjoints are required, never inverses.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np

from .audio_io import Signal, as_samples
from .phase import PhaseCorrection, ipc_adjoint, ipc_forward, time_diff, time_diff_adj
from .prox import SignalPair, l21_norm, prox_l21, prox_sq_fro, split_sum_arrays
from .stft import Spectrogram, StftConfig, adjoint, forward


class SolverDivergenceError(RuntimeError):
    """Raised when an iterate stops being finite (wrong step sizes fail loudly)."""

    def __init__(self, iteration: int):
        super().__init__(f"solver diverged: non-finite value at iteration {iteration}")
        self.iteration = iteration


@dataclass(frozen=True)
class SolverParams:
    """Iteration hyperparameters; defaults follow the evaluated setup."""

    lam: float = 0.5
    mu1: float = 1.0
    mu2: float = 0.25
    alpha: float = 0.5
    n_iters: int = 100
    record_trace: bool = True

    def __post_init__(self):
        if self.lam <= 0 or self.mu1 <= 0 or self.mu2 <= 0:
            raise ValueError("lam, mu1 and mu2 must be positive")
        if not (0.0 < self.alpha < 2.0):
            raise ValueError("alpha must lie in (0, 2)")
        if self.n_iters < 0:
            raise ValueError("n_iters must be non-negative")


@dataclass
class SolverTrace:
    """Per-iteration diagnostics: objective split and primal increment norm."""

    total: np.ndarray = field(default_factory=lambda: np.empty(0))
    smooth: np.ndarray = field(default_factory=lambda: np.empty(0))
    sparse: np.ndarray = field(default_factory=lambda: np.empty(0))
    primal_increment: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __len__(self) -> int:
        return self.total.size

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["iteration", "total", "smooth_term", "sparse_term", "primal_increment"]
            )
            for i in range(len(self)):
                writer.writerow(
                    [
                        i + 1,
                        repr(float(self.total[i])),
                        repr(float(self.smooth[i])),
                        repr(float(self.sparse[i])),
                        repr(float(self.primal_increment[i])),
                    ]
                )


@dataclass(frozen=True)
class HpssProblem:
    """Mixture, transform geometry, phase correction, smoothness weight, params."""

    mixture: np.ndarray
    config: StftConfig
    correction: PhaseCorrection
    weight: np.ndarray
    params: SolverParams = field(default_factory=SolverParams)
    sample_rate: int | None = None

    def __post_init__(self):
        x = as_samples(self.mixture)
        object.__setattr__(self, "mixture", x)
        shape = (self.config.n_bins, self.config.n_frames(x.size))
        if self.correction.shape != shape:
            raise ValueError("phase correction shape does not match the mixture")
        w = np.asarray(self.weight, dtype=np.float64)
        object.__setattr__(self, "weight", w)
        if w.shape != shape:
            raise ValueError("weight shape does not match the mixture")
        if w.min() <= 0.0 or w.max() > 1.0:
            raise ValueError("weight entries must lie in (0, 1]")


def apply_Lh(x_h, problem: HpssProblem) -> Spectrogram:
    """Smoothness operator: W o D_t(F_ipc(x_h))."""
    spec = ipc_forward(as_samples(x_h), problem.correction, problem.config)
    return spec.with_data(problem.weight * time_diff(spec.data))


def apply_Lh_adj(spec: Spectrogram, problem: HpssProblem) -> np.ndarray:
    """Adjoint of ``apply_Lh``: F_ipc^* ( D_t^* (W o Y) )."""
    data = time_diff_adj(problem.weight * spec.data)
    return ipc_adjoint(spec.with_data(data), problem.correction, problem.config)


def _zero_spec(problem: HpssProblem, n: int) -> Spectrogram:
    shape = (problem.config.n_bins, problem.config.n_frames(n))
    return Spectrogram(
        data=np.zeros(shape, dtype=np.complex128),
        config=problem.config,
        n_samples=n,
        sample_rate=problem.sample_rate,
    )


def estimate_opnorm(
    problem: HpssProblem,
    n_power_iters: int = 20,
    seed: int = 0,
    branches: tuple = ("smooth", "stft"),
) -> float:
    """Power-iteration estimate of the stacked operator norm.

    The stacked operator maps (x_h, x_p) to (L_h x_h, F x_p); its squared
    norm is the largest eigenvalue of the block-diagonal normal operator.
    Deterministic for a fixed seed.
    """
    if n_power_iters < 1:
        raise ValueError("n_power_iters must be >= 1")
    rng = np.random.default_rng(seed)
    n = problem.mixture.size
    use_h = "smooth" in branches
    use_p = "stft" in branches
    z_h = rng.standard_normal(n) if use_h else np.zeros(n)
    z_p = rng.standard_normal(n) if use_p else np.zeros(n)
    norm = np.sqrt(z_h @ z_h + z_p @ z_p)
    if norm == 0.0:
        return 0.0
    z_h, z_p = z_h / norm, z_p / norm
    lam_sq = 0.0
    for _ in range(n_power_iters):
        u_h = apply_Lh_adj(apply_Lh(z_h, problem), problem) if use_h else np.zeros(n)
        u_p = adjoint(forward(z_p, problem.config)) if use_p else np.zeros(n)
        lam_sq = np.sqrt(u_h @ u_h + u_p @ u_p)
        if lam_sq <= 0.0:
            return 0.0
        z_h, z_p = u_h / lam_sq, u_p / lam_sq
    return float(np.sqrt(lam_sq))


def _check_step_sizes(problem: HpssProblem) -> None:
    p = problem.params
    # cheap provable bound ||L||^2 <= max(1, 4 max(W)^2); power-iterate only
    # when the bound cannot certify the product condition
    bound = max(1.0, 4.0 * float(problem.weight.max()) ** 2)
    if p.mu1 * p.mu2 * bound <= 1.0:
        return
    est = estimate_opnorm(problem, n_power_iters=12)
    if p.mu1 * p.mu2 * est**2 > 1.0:
        warnings.warn(
            f"step-size product mu1*mu2*|L|^2 = {p.mu1 * p.mu2 * est**2:.3f} exceeds 1; "
            "the iteration may not converge",
            stacklevel=2,
        )


def objective(pair, problem: HpssProblem):
    """Evaluate (total, smooth_term, sparse_term) of the separation objective."""
    if isinstance(pair, SignalPair):
        x_h, x_p = pair.harmonic.samples, pair.percussive.samples
    else:
        x_h, x_p = (as_samples(p) for p in pair)
    x = problem.mixture
    gap = np.linalg.norm(x - x_h - x_p)
    if gap > 1e-9 * max(np.linalg.norm(x), 1.0):
        raise ValueError("pair violates the exact-sum constraint")
    smooth = 0.5 * float(np.sum(np.abs(apply_Lh(x_h, problem).data) ** 2))
    sparse = problem.params.lam * l21_norm(forward(x_p, problem.config).data)
    return smooth + sparse, smooth, sparse


def run(problem: HpssProblem, init):
    """Run the primal-dual iteration from an initial pair.

    The initial pair is projected onto the exact-sum constraint; both
    dual spectrograms start at zero. Each iteration performs the primal
    constraint-projection step, the two dual ascent steps with their
    Moreau-form proximal updates, and a joint alpha-relaxation. Returns
    the final pair (summing to the mixture bit-exactly) and the trace.
    """
    params = problem.params
    x = problem.mixture
    n = x.size
    rate = problem.sample_rate

    if isinstance(init, SignalPair):
        x_h0, x_p0 = init.harmonic.samples, init.percussive.samples
        rate = rate or init.harmonic.sample_rate
    else:
        x_h0, x_p0 = (as_samples(p) for p in init)
    x_h, x_p = split_sum_arrays(x, x_h0.copy(), x_p0.copy())

    _check_step_sizes(problem)

    y_h = _zero_spec(problem, n)
    y_p = _zero_spec(problem, n)
    mu1, mu2, lam, alpha = params.mu1, params.mu2, params.lam, params.alpha
    lam_mu2 = lam * mu2

    record = params.record_trace
    tr_total = np.empty(params.n_iters)
    tr_smooth = np.empty(params.n_iters)
    tr_sparse = np.empty(params.n_iters)
    tr_inc = np.empty(params.n_iters)

    for it in range(params.n_iters):
        # primal: projection of the gradient-like step onto the sum constraint
        g_h = x_h - mu1 * apply_Lh_adj(y_h, problem)
        g_p = x_p - mu1 * adjoint(y_p)
        t_h, t_p = split_sum_arrays(x, g_h, g_p)
        if not (np.all(np.isfinite(t_h)) and np.all(np.isfinite(t_p))):
            raise SolverDivergenceError(it + 1)

        # dual ascent on both branches
        z_h = y_h.data + apply_Lh(2.0 * t_h - x_h, problem).data
        z_p = y_p.data + forward(2.0 * t_p - x_p, problem.config).data

        # Moreau-form proximal updates
        yt_h = z_h - mu2 * prox_sq_fro(z_h / mu2, 1.0 / mu2)
        yt_p = z_p - lam_mu2 * prox_l21(z_p / lam_mu2, 1.0 / mu2)

        # joint relaxation of primal and dual
        new_h = alpha * t_h + (1.0 - alpha) * x_h
        new_p = alpha * t_p + (1.0 - alpha) * x_p
        inc = np.sqrt(
            np.linalg.norm(new_h - x_h) ** 2 + np.linalg.norm(new_p - x_p) ** 2
        )
        x_h, x_p = new_h, new_p
        y_h = y_h.with_data(alpha * yt_h + (1.0 - alpha) * y_h.data)
        y_p = y_p.with_data(alpha * yt_p + (1.0 - alpha) * y_p.data)

        if not (np.all(np.isfinite(x_h)) and np.all(np.isfinite(x_p))):
            raise SolverDivergenceError(it + 1)

        if record:
            smooth = 0.5 * float(np.sum(np.abs(apply_Lh(x_h, problem).data) ** 2))
            sparse = lam * l21_norm(forward(x_p, problem.config).data)
            tr_total[it] = smooth + sparse
            tr_smooth[it] = smooth
            tr_sparse[it] = sparse
            tr_inc[it] = inc

    x_p = x - x_h  # make the reconstruction constraint bit-exact
    if rate is None:
        rate = 1
    pair = SignalPair(Signal(x_h, rate), Signal(x_p, rate))
    trace = (
        SolverTrace(tr_total, tr_smooth, tr_sparse, tr_inc) if record else SolverTrace()
    )
    return pair, trace
