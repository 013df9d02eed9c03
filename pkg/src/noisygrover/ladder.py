"""Breaking-noise search: per-run sigma ladder, averaging, extrapolation.

A single run walks sigma = d_sigma, 2*d_sigma, ... and returns the first rung
whose noisy m_max-step trajectory lands below p_cut. Runs are averaged over
independent streams, and the mean sigma_max(d_sigma) across a ladder of step
sizes is extrapolated to d_sigma -> 0 with a shifted power law.

The rung loop is evaluated in vectorized blocks. Uniforms are drawn rung-major
(rung k consumes stream positions [(k-1)*2*m, k*2*m)), so the block size is
invisible in the results: any partition of rungs into blocks consumes the
stream identically, and numpy ufuncs are elementwise, making the block path
bit-identical to stepping one rung at a time with sample_noise.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DegenerateStateError, SigmaCeilingError
from .fitting import ExtrapolationFit, WeightedPoint, fit_shifted_power
from .kernel import ProblemSize, initial_state, m_max, success_probability
from .noise import (
    DEFAULT_CONVENTION,
    DEGENERATE_NORM_SQ,
    NoiseConvention,
    NoiseSpec,
    RandomStream,
    noisy_step,
)

log = logging.getLogger(__name__)

# Rung blocks grow geometrically: small sigma_max costs a few small blocks,
# tiny d_sigma (many rungs) amortizes into big ones.
_BLOCK_START = 128
_BLOCK_CAP = 8192

# Give up on a run after this many degenerate-state reseeds.
_MAX_RESEEDS = 100


@dataclass(frozen=True)
class LadderConfig:
    """Parameters of one sigma_max measurement cell."""

    d_sigma: float
    p_cut: float
    runs: int = 200
    master_seed: int = 0
    sigma_ceiling: float = 1.0
    convention: NoiseConvention = DEFAULT_CONVENTION

    def __post_init__(self) -> None:
        if not 0.0 < self.d_sigma <= 0.01:
            raise ConfigError(f"d_sigma must be in (0, 0.01], got {self.d_sigma!r}")
        if not 0.0 < self.p_cut < 1.0:
            raise ConfigError(f"p_cut must be in (0, 1), got {self.p_cut!r}")
        if self.runs < 1:
            raise ConfigError(f"runs must be >= 1, got {self.runs!r}")
        if not 0 <= int(self.master_seed) < 2**64:
            raise ConfigError(f"master_seed must fit in 64 bits, got {self.master_seed!r}")
        if not self.sigma_ceiling > 0.0:
            raise ConfigError(f"sigma_ceiling must be > 0, got {self.sigma_ceiling!r}")


@dataclass(frozen=True)
class SigmaMaxStat:
    """Mean breaking sigma over runs at one ladder step size."""

    mean: float
    stderr: float
    runs: int
    d_sigma: float


@dataclass(frozen=True)
class LadderRun:
    """One run's outcome, with the stream seed for replay."""

    run_index: int
    seed: int
    sigma_max: float
    p_at_break: float


def trajectory_success_probability(
    size: ProblemSize,
    sigma: float,
    rng: RandomStream,
    convention: NoiseConvention = DEFAULT_CONVENTION,
) -> float:
    """P(m_max) for one noisy trajectory from the uniform start state."""
    if sigma < 0.0:
        raise ConfigError(f"sigma must be >= 0, got {sigma!r}")
    spec = NoiseSpec(sigma=sigma, convention=convention)
    state = initial_state(size)
    for _ in range(m_max(size)):
        state = noisy_step(state, size, spec, rng)
    return state.A * state.A


def trajectory_curve(
    size: ProblemSize,
    sigma: float,
    rng: RandomStream,
    steps: int | None = None,
    convention: NoiseConvention = DEFAULT_CONVENTION,
) -> np.ndarray:
    """P(m) for m = 0..steps along one noisy trajectory (default 2*m_max)."""
    if sigma < 0.0:
        raise ConfigError(f"sigma must be >= 0, got {sigma!r}")
    if steps is None:
        steps = 2 * m_max(size)
    if steps < 0:
        raise ConfigError(f"steps must be >= 0, got {steps}")
    spec = NoiseSpec(sigma=sigma, convention=convention)
    state = initial_state(size)
    out = np.empty(steps + 1)
    out[0] = state.A * state.A
    for m in range(1, steps + 1):
        state = noisy_step(state, size, spec, rng)
        out[m] = state.A * state.A
    return out


def _check_sanity_rung(size: ProblemSize, ladder: LadderConfig) -> int:
    """The sigma=0 rung must pass p_cut; it is noiseless, so check closed form."""
    m = m_max(size)
    p0 = success_probability(size, m)
    if p0 < ladder.p_cut:
        raise ConfigError(
            f"p_cut={ladder.p_cut} exceeds the noiseless success probability {p0:.6f} at N={size.N}; "
            "no noise level can pass, lower p_cut"
        )
    return m


def _ladder_climb(size: ProblemSize, ladder: LadderConfig, rng: RandomStream) -> tuple[float, float]:
    """First (sigma, P) with P < p_cut, walking rungs k*d_sigma in blocks."""
    m = _check_sanity_rung(size, ladder)
    N = size.N
    c11 = 1.0 - 2.0 / N
    c12 = 2.0 - 2.0 / N
    c21 = -2.0 / N
    nm1 = float(N - 1)
    amp0 = float(1.0 / np.sqrt(float(N)))
    paper_exact = ladder.convention is NoiseConvention.PAPER_EXACT
    max_rung = int(np.floor(ladder.sigma_ceiling / ladder.d_sigma * (1.0 + 1e-12)))

    start = 1
    block = _BLOCK_START
    while start <= max_rung:
        count = min(block, max_rung - start + 1)
        ks = np.arange(start, start + count, dtype=np.float64)
        sig = ladder.d_sigma * ks
        u = rng.uniform_block((count, m, 2))
        if paper_exact:
            r = np.sqrt(-2.0 * sig[:, None] * np.log(u[:, :, 0]))
        else:
            r = sig[:, None] * np.sqrt(-2.0 * np.log(u[:, :, 0]))
        a = r * np.sin(2.0 * np.pi * u[:, :, 1])
        b = r * np.cos(2.0 * np.pi * u[:, :, 1])
        A = np.full(count, amp0)
        B = np.full(count, amp0)
        for s in range(m):
            A1 = c11 * A + c12 * B + a[:, s]
            B1 = c21 * A + c11 * B + b[:, s]
            norm2 = A1 * A1 + nm1 * B1 * B1
            if np.any(norm2 < DEGENERATE_NORM_SQ):
                k_bad = int(ks[int(np.argmin(norm2))])
                raise DegenerateStateError(f"state norm collapsed at rung {k_bad} (N={size.N})")
            inv = 1.0 / np.sqrt(norm2)
            A = A1 * inv
            B = B1 * inv
        P = A * A
        hits = np.flatnonzero(P < ladder.p_cut)
        if hits.size:
            i = int(hits[0])
            return float(ladder.d_sigma * ks[i]), float(P[i])
        start += count
        block = min(block * 2, _BLOCK_CAP)
    raise SigmaCeilingError(
        f"no rung below sigma_ceiling={ladder.sigma_ceiling} broke p_cut={ladder.p_cut} at N={size.N}"
    )


def sigma_max_single_run(size: ProblemSize, ladder: LadderConfig, rng: RandomStream) -> float:
    """First sigma on the ladder whose trajectory falls below p_cut."""
    return _ladder_climb(size, ladder, rng)[0]


def run_seed(master_seed: int, run_index: int, attempt: int = 0) -> int:
    """Stream seed for one run, derived so any run can be replayed alone."""
    if attempt == 0:
        return RandomStream.derive_seed(master_seed, run_index)
    return RandomStream.derive_seed(master_seed, run_index, attempt)


def cell_master_seed(master_seed: int, n: int, p_cut: float, d_sigma: float) -> int:
    """Master seed for one (n, p_cut, d_sigma) cell of a sweep grid.

    Floats enter the hash as fixed-point integers so that equal parameters
    hash equally however they were produced. Cells are independent of grid
    shape and execution order by construction.
    """
    return RandomStream.derive_seed(
        master_seed, n, int(round(p_cut * 1e9)), int(round(d_sigma * 1e12))
    )


def sigma_max_runs(size: ProblemSize, ladder: LadderConfig) -> list[LadderRun]:
    """All per-run ladder outcomes, in run-index order.

    Degenerate-state failures are logged and the run is reseeded; runs are
    otherwise fully independent, each on its own derived stream.
    """
    _check_sanity_rung(size, ladder)
    out: list[LadderRun] = []
    for i in range(ladder.runs):
        for attempt in range(_MAX_RESEEDS):
            seed = run_seed(ladder.master_seed, i, attempt)
            try:
                sigma, p = _ladder_climb(size, ladder, RandomStream(seed))
            except DegenerateStateError as exc:
                log.warning("run %d seed %d discarded (%s); reseeding", i, seed, exc)
                continue
            out.append(LadderRun(run_index=i, seed=seed, sigma_max=sigma, p_at_break=p))
            break
        else:
            raise DegenerateStateError(f"run {i} degenerate after {_MAX_RESEEDS} reseeds (N={size.N})")
    return out


def stat_from_runs(runs: list[LadderRun], d_sigma: float) -> SigmaMaxStat:
    """Aggregate per-run outcomes in run-index order; stderr is NaN for one run."""
    values = np.array([r.sigma_max for r in runs], dtype=np.float64)
    mean = float(np.mean(values))
    if len(values) >= 2:
        stderr = float(np.std(values, ddof=1) / np.sqrt(len(values)))
    else:
        stderr = float("nan")
    return SigmaMaxStat(mean=mean, stderr=stderr, runs=len(values), d_sigma=d_sigma)


def sigma_max_averaged(size: ProblemSize, ladder: LadderConfig) -> SigmaMaxStat:
    """Mean and standard error of sigma_max over independent runs."""
    return stat_from_runs(sigma_max_runs(size, ladder), ladder.d_sigma)


def extrapolate_to_zero_step(stats: list[SigmaMaxStat]) -> ExtrapolationFit:
    """Extrapolate mean sigma_max(d_sigma) to d_sigma -> 0.

    Fits sigma_max = zeta + xi * d_sigma**alpha; zeta is the reported
    zero-step-size sigma_max. Needs at least 4 distinct step sizes spanning
    at least two decades for the exponent to be identifiable.
    """
    d_sigmas = sorted({s.d_sigma for s in stats})
    if len(d_sigmas) < 4:
        raise ConfigError(f"extrapolation needs >= 4 distinct d_sigma values, got {len(d_sigmas)}")
    if d_sigmas[-1] / d_sigmas[0] < 100.0 * (1.0 - 1e-9):
        raise ConfigError(
            f"extrapolation ladder must span >= 2 decades, got [{d_sigmas[0]:g}, {d_sigmas[-1]:g}]"
        )
    points = [
        WeightedPoint(x=s.d_sigma, y=s.mean, y_err=s.stderr if np.isfinite(s.stderr) else 0.0)
        for s in stats
    ]
    return fit_shifted_power(points)
