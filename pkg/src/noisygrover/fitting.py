"""Least-squares machinery for the three model families of the analysis.

Power law y = c*x^e (log-linear), straight line y = gamma - delta*x, and the
shifted power law y = zeta + xi*x^alpha used for step-size extrapolation.
A fit is weighted when every input point carries y_err > 0; otherwise it is
ordinary least squares. Weighted parameter covariance is inv(J^T W J) with
the reported errors taken at face value; unweighted covariance is scaled by
the residual variance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, FitBoundaryError, FitDomainError, FitError, FitRankError

# Exponent scan for the shifted power law: interior of (0.02, 1.2].
ALPHA_GRID_START = 0.025
ALPHA_GRID_STOP = 1.2
ALPHA_GRID_STEP = 0.005
ALPHA_REL_TOL = 1e-12

_INV_GOLD = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class WeightedPoint:
    """One observation; y_err = 0 marks the point as carrying no weight."""

    x: float
    y: float
    y_err: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ConfigError(f"non-finite point ({self.x!r}, {self.y!r})")
        if not (math.isfinite(self.y_err) and self.y_err >= 0.0):
            raise ConfigError(f"y_err must be finite and >= 0, got {self.y_err!r}")


@dataclass(frozen=True)
class PowerLawFit:
    """y = coeff * x**exponent."""

    coeff: float
    exponent: float
    coeff_err: float
    exponent_err: float


@dataclass(frozen=True)
class LinearFit:
    """y = gamma - delta * x; delta is the negated slope."""

    gamma: float
    delta: float
    gamma_err: float
    delta_err: float


@dataclass(frozen=True)
class ExtrapolationFit:
    """y = zeta + xi * x**alpha_exp; zeta is the x -> 0 limit."""

    zeta: float
    xi: float
    alpha_exp: float
    zeta_err: float
    xi_err: float = 0.0
    alpha_err: float = 0.0


def _split(points: list[WeightedPoint]) -> tuple[np.ndarray, np.ndarray, np.ndarray | None]:
    """Arrays (x, y, w); w is None unless every point has y_err > 0."""
    x = np.array([p.x for p in points], dtype=np.float64)
    y = np.array([p.y for p in points], dtype=np.float64)
    err = np.array([p.y_err for p in points], dtype=np.float64)
    if np.all(err > 0.0):
        return x, y, 1.0 / (err * err)
    return x, y, None


def _solve_ls(X: np.ndarray, y: np.ndarray, w: np.ndarray | None) -> tuple[np.ndarray, np.ndarray, float]:
    """Weighted normal equations; returns (beta, covariance, weighted RSS)."""
    n, p = X.shape
    weights = np.ones(n) if w is None else w
    Xw = X * weights[:, None]
    G = X.T @ Xw
    if np.linalg.matrix_rank(G) < p:
        raise FitRankError("design matrix is rank deficient")
    Ginv = np.linalg.inv(G)
    beta = Ginv @ (Xw.T @ y)
    resid = y - X @ beta
    rss = float(np.sum(weights * resid * resid))
    if w is None:
        dof = n - p
        cov = Ginv * (rss / dof if dof > 0 else 0.0)
    else:
        cov = Ginv
    return beta, cov, rss


def fit_power_law(points: list[WeightedPoint]) -> PowerLawFit:
    """Fit y = coeff * x**exponent by least squares on (ln x, ln y)."""
    if len(points) < 3:
        raise ConfigError(f"power-law fit needs >= 3 points, got {len(points)}")
    x, y, w = _split(points)
    if np.any(x <= 0.0) or np.any(y <= 0.0):
        raise FitDomainError("power-law fit needs x > 0 and y > 0")
    lx = np.log(x)
    ly = np.log(y)
    # 1-sigma on ln y is y_err/y; weights transform accordingly.
    lw = None if w is None else w * y * y
    X = np.column_stack([np.ones_like(lx), lx])
    beta, cov, _ = _solve_ls(X, ly, lw)
    coeff = float(np.exp(beta[0]))
    return PowerLawFit(
        coeff=coeff,
        exponent=float(beta[1]),
        coeff_err=coeff * math.sqrt(max(cov[0, 0], 0.0)),
        exponent_err=math.sqrt(max(cov[1, 1], 0.0)),
    )


def fit_linear(points: list[WeightedPoint]) -> LinearFit:
    """Fit y = gamma - delta * x by weighted ordinary least squares."""
    if len(points) < 2:
        raise ConfigError(f"linear fit needs >= 2 points, got {len(points)}")
    x, y, w = _split(points)
    X = np.column_stack([np.ones_like(x), x])
    beta, cov, _ = _solve_ls(X, y, w)
    return LinearFit(
        gamma=float(beta[0]),
        delta=float(-beta[1]),
        gamma_err=math.sqrt(max(cov[0, 0], 0.0)),
        delta_err=math.sqrt(max(cov[1, 1], 0.0)),
    )


def _shifted_rss(alpha: float, x: np.ndarray, y: np.ndarray, w: np.ndarray | None) -> tuple[float, np.ndarray]:
    """Closed-form (zeta, xi) at fixed alpha; returns (weighted RSS, beta)."""
    X = np.column_stack([np.ones_like(x), x**alpha])
    beta, _, rss = _solve_ls(X, y, w)
    return rss, beta


def fit_shifted_power(points: list[WeightedPoint]) -> ExtrapolationFit:
    """Fit y = zeta + xi * x**alpha: scan alpha, then golden-section refine.

    The subproblem at fixed alpha is linear, so the scan is exact per grid
    point; the refinement narrows the bracket far below the grid pitch so
    noiseless synthetic parameters are recovered to ~1e-9 relative.
    """
    if len(points) < 4:
        raise ConfigError(f"shifted power fit needs >= 4 points, got {len(points)}")
    x, y, w = _split(points)
    if np.any(x <= 0.0):
        raise FitDomainError("shifted power fit needs x > 0")
    if np.unique(x).size < 3:
        raise FitRankError("shifted power fit needs >= 3 distinct x values")

    grid = np.arange(ALPHA_GRID_START, ALPHA_GRID_STOP + ALPHA_GRID_STEP / 2, ALPHA_GRID_STEP)
    rss_grid = np.array([_shifted_rss(a, x, y, w)[0] for a in grid])
    best = int(np.argmin(rss_grid))
    if best == 0 or best == len(grid) - 1:
        raise FitBoundaryError(
            f"optimal exponent pinned at scan edge alpha={grid[best]:.3f}; model untrustworthy here"
        )

    lo = grid[best - 1]
    hi = grid[best + 1]
    c = hi - _INV_GOLD * (hi - lo)
    d = lo + _INV_GOLD * (hi - lo)
    fc = _shifted_rss(c, x, y, w)[0]
    fd = _shifted_rss(d, x, y, w)[0]
    while (hi - lo) > ALPHA_REL_TOL * (lo + hi) / 2.0:
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - _INV_GOLD * (hi - lo)
            fc = _shifted_rss(c, x, y, w)[0]
        else:
            lo, c, fc = c, d, fd
            d = lo + _INV_GOLD * (hi - lo)
            fd = _shifted_rss(d, x, y, w)[0]
    alpha = (lo + hi) / 2.0
    rss, beta = _shifted_rss(alpha, x, y, w)
    zeta, xi = float(beta[0]), float(beta[1])

    # Covariance from the full 3-parameter Jacobian at the optimum.
    xa = x**alpha
    J = np.column_stack([np.ones_like(x), xa, xi * xa * np.log(x)])
    weights = np.ones_like(x) if w is None else w
    G = J.T @ (J * weights[:, None])
    if np.linalg.matrix_rank(G) < 3:
        raise FitRankError("singular covariance at shifted-power optimum")
    cov = np.linalg.inv(G)
    if w is None:
        dof = len(x) - 3
        cov = cov * (rss / dof if dof > 0 else 0.0)
    if not (np.all(np.isfinite(cov)) and math.isfinite(rss)):
        raise FitError("non-finite residuals in shifted-power fit")
    return ExtrapolationFit(
        zeta=zeta,
        xi=xi,
        alpha_exp=float(alpha),
        zeta_err=math.sqrt(max(cov[0, 0], 0.0)),
        xi_err=math.sqrt(max(cov[1, 1], 0.0)),
        alpha_err=math.sqrt(max(cov[2, 2], 0.0)),
    )


def average_exponent(fits: list[PowerLawFit]) -> tuple[float, float]:
    """Inverse-variance-weighted mean exponent and its propagated error."""
    if len(fits) < 2:
        raise ConfigError(f"exponent average needs >= 2 fits, got {len(fits)}")
    e = np.array([f.exponent for f in fits], dtype=np.float64)
    err = np.array([f.exponent_err for f in fits], dtype=np.float64)
    if np.all(err > 0.0):
        wts = 1.0 / (err * err)
        return float(np.sum(wts * e) / np.sum(wts)), float(1.0 / math.sqrt(np.sum(wts)))
    mean = float(np.mean(e))
    sd = float(np.std(e, ddof=1))
    return mean, sd / math.sqrt(len(fits))
