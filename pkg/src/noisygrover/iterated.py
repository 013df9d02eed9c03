"""Iterated-search break-even analysis.

Repeating the m_max-step search I times costs I*m_max steps; it beats the
classical N/2 expected cost as long as I*m_max <= N/2 and the compound
success probability 1 - (1 - P_cut)^I reaches 1/2. Inverting that identity
at the largest affordable I gives the minimum useful P_cut per database
size, and the noise pipeline evaluated at that cutoff gives the absolute
noise tolerance of the algorithm as a function of N.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

from .errors import ConfigError, NoisyGroverError
from .fitting import PowerLawFit, WeightedPoint, fit_power_law
from .kernel import ProblemSize, m_max
from .ladder import (
    LadderConfig,
    SigmaMaxStat,
    cell_master_seed,
    extrapolate_to_zero_step,
    sigma_max_averaged,
)

log = logging.getLogger(__name__)

# Step-size ladder for the zero-step extrapolation behind each table row.
DEFAULT_D_SIGMA_LADDER = (1e-4, 1e-5, 1e-6, 1e-7, 1e-8)


@dataclass(frozen=True)
class IteratedParams:
    """Repetition budget for one database size."""

    repetitions: int
    p_cut_min: float
    total_steps: int

    def __post_init__(self) -> None:
        if self.repetitions < 1:
            raise ConfigError(f"repetitions must be >= 1, got {self.repetitions}")
        if not 0.0 < self.p_cut_min < 1.0:
            raise ConfigError(f"p_cut_min must be in (0, 1), got {self.p_cut_min!r}")


@dataclass(frozen=True)
class BreakevenRow:
    """One break-even table entry: noise tolerance at the minimum useful cutoff."""

    n: int
    N: int
    p_cut: float
    sigma_max: float
    sigma_err: float


def repetition_count(size: ProblemSize) -> int:
    """Largest I with I*m_max(N) <= N/2; asymptotically (2/pi)*sqrt(N)."""
    if size.N < 16:
        raise ConfigError(f"repetition count needs N >= 16, got N={size.N}")
    return (size.N // 2) // m_max(size)


def min_p_cut(size: ProblemSize) -> float:
    """Smallest single-search success cutoff that still beats classical search.

    1 - 0.5**(pi/(2*sqrt(N))): with (2/pi)*sqrt(N) repetitions the compound
    success probability reaches 1/2 exactly at this cutoff.
    """
    if size.N < 4:
        raise ConfigError(f"min_p_cut needs N >= 4, got N={size.N}")
    return 1.0 - 0.5 ** (math.pi / (2.0 * math.sqrt(size.N)))


def iterated_params(size: ProblemSize) -> IteratedParams:
    reps = repetition_count(size)
    return IteratedParams(
        repetitions=reps,
        p_cut_min=min_p_cut(size),
        total_steps=reps * m_max(size),
    )


def build_breakeven_table(
    sizes: list[ProblemSize],
    ladder: LadderConfig,
    d_sigmas: tuple[float, ...] = DEFAULT_D_SIGMA_LADDER,
) -> tuple[list[BreakevenRow], PowerLawFit | None]:
    """Noise-tolerance table at p_cut = min_p_cut(N), plus its power-law fit.

    For each size the full pipeline runs: one averaged ladder per d_sigma,
    then extrapolation to d_sigma -> 0; the row records the extrapolated
    value. ladder.d_sigma and ladder.p_cut are templates only and are
    replaced per cell. Failed rows are logged and skipped; the fit is over
    the surviving rows (None when fewer than 3 survive).
    """
    rows: list[BreakevenRow] = []
    for size in sorted(sizes, key=lambda s: s.n):
        p_cut = min_p_cut(size)
        try:
            stats: list[SigmaMaxStat] = []
            for ds in d_sigmas:
                cfg = LadderConfig(
                    d_sigma=ds,
                    p_cut=p_cut,
                    runs=ladder.runs,
                    master_seed=cell_master_seed(ladder.master_seed, size.n, p_cut, ds),
                    sigma_ceiling=ladder.sigma_ceiling,
                    convention=ladder.convention,
                )
                stats.append(sigma_max_averaged(size, cfg))
            fit = extrapolate_to_zero_step(stats)
            rows.append(
                BreakevenRow(
                    n=size.n,
                    N=size.N,
                    p_cut=p_cut,
                    sigma_max=fit.zeta,
                    sigma_err=fit.zeta_err,
                )
            )
            log.info("break-even row N=%d done: sigma_max=%g", size.N, fit.zeta)
        except NoisyGroverError as exc:
            log.error("break-even row N=%d failed: %s", size.N, exc)
    power: PowerLawFit | None = None
    if len(rows) >= 3:
        points = [WeightedPoint(x=float(r.N), y=r.sigma_max, y_err=r.sigma_err) for r in rows]
        try:
            power = fit_power_law(points)
        except NoisyGroverError as exc:
            log.error("break-even power-law fit failed: %s", exc)
    else:
        log.warning("too few break-even rows (%d) for a power-law fit", len(rows))
    return rows, power
