"""Experiment orchestration: the sweep grid, CSV persistence, fits, reports.

Commands here own all file output. Every CSV starts with a fixed header row;
reals are written with repr() so the printed digits round-trip to the same
double. Run records are flushed incrementally in grid order, so an
interrupted sweep leaves a valid CSV prefix. A worker pool may compute cells
out of order, but writes are sequenced by cell index, which is what makes
output byte-identical for any thread count.
"""

from __future__ import annotations

import concurrent.futures
import csv
import logging
import math
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, TextIO

from .errors import ConfigError, NoisyGroverError
from .fitting import (
    LinearFit,
    PowerLawFit,
    WeightedPoint,
    average_exponent,
    fit_linear,
    fit_power_law,
    fit_shifted_power,
)
from .kernel import ProblemSize, amplitude_closed_form, m_max, success_probability
from .ladder import (
    LadderConfig,
    LadderRun,
    SigmaMaxStat,
    cell_master_seed,
    extrapolate_to_zero_step,
    sigma_max_runs,
    stat_from_runs,
    trajectory_curve,
)
from .noise import DEFAULT_CONVENTION, NoiseConvention, RandomStream

log = logging.getLogger(__name__)

PAPER_N_LIST = (10, 11, 12, 13, 14, 15, 16)
PAPER_P_CUT_LIST = (0.5, 0.6, 0.7, 0.8, 0.9)
PAPER_D_SIGMA_LIST = (1e-4, 1e-5, 1e-6, 1e-7, 1e-8)
PAPER_RUNS = 200

DESK_N_LIST = (10, 11, 12, 13, 14)
DESK_P_CUT_LIST = (0.5, 0.7, 0.9)
# Truncating at 1e-6 keeps desk runtime small; the half-decade rungs keep
# enough distinct step sizes for the zero-step extrapolation to be well posed.
DESK_D_SIGMA_LIST = (1e-4, 3e-5, 1e-5, 3e-6, 1e-6)
DESK_RUNS = 50

DEFAULT_MASTER_SEED = 12345

RUNS_HEADER = ["n", "p_cut", "d_sigma", "run_index", "seed", "sigma_max_single", "p_at_break"]
SUMMARY_HEADER = ["n", "p_cut", "d_sigma", "mean_sigma_max", "stderr", "runs"]
EXTRAPOLATION_HEADER = ["n", "p_cut", "zeta", "zeta_err", "xi", "xi_err", "alpha", "alpha_err"]
FITS_HEADER = ["model", "slice_key", "param1", "param1_err", "param2", "param2_err", "param3", "param3_err"]
TABLE1_HEADER = ["n", "N", "p_cut", "sigma_max", "sigma_err"]
FIG1_HEADER = ["log10_N", "log10_sigma_max"]


@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved parameters for one command invocation."""

    n_list: tuple[int, ...] = PAPER_N_LIST
    p_cut_list: tuple[float, ...] = PAPER_P_CUT_LIST
    d_sigma_list: tuple[float, ...] = PAPER_D_SIGMA_LIST
    runs: int = PAPER_RUNS
    master_seed: int = DEFAULT_MASTER_SEED
    convention: NoiseConvention = DEFAULT_CONVENTION
    threads: int = 1
    output_dir: str = "out"
    figures: bool = True

    def __post_init__(self) -> None:
        if not self.n_list or not self.p_cut_list or not self.d_sigma_list:
            raise ConfigError("n_list, p_cut_list and d_sigma_list must be non-empty")
        for n in self.n_list:
            ProblemSize(n)
            if n < 2:
                raise ConfigError(f"sweep sizes need n >= 2 (N >= 4), got n={n}")
        for p in self.p_cut_list:
            if not 0.0 < p < 1.0:
                raise ConfigError(f"p_cut must be in (0, 1), got {p!r}")
        for ds in self.d_sigma_list:
            if not 0.0 < ds <= 0.01:
                raise ConfigError(f"d_sigma must be in (0, 0.01], got {ds!r}")
        if self.runs < 1:
            raise ConfigError(f"runs must be >= 1, got {self.runs}")
        if not 0 <= int(self.master_seed) < 2**64:
            raise ConfigError(f"master_seed must fit in 64 bits, got {self.master_seed!r}")
        if self.threads < 1:
            raise ConfigError(f"threads must be >= 1, got {self.threads}")


@dataclass(frozen=True)
class RunRecord:
    """One ladder run of one grid cell, replayable from its seed."""

    n: int
    p_cut: float
    d_sigma: float
    run_index: int
    seed: int
    sigma_max_single: float
    p_at_break: float


@dataclass(frozen=True)
class CellResult:
    index: int
    n: int
    p_cut: float
    d_sigma: float
    records: tuple[RunRecord, ...]
    stat: SigmaMaxStat | None
    error: str | None
    seconds: float


def _fmt(value) -> str:
    """CSV field: shortest round-trip for reals, empty for missing/undefined."""
    if value is None:
        return ""
    if isinstance(value, float):
        if not math.isfinite(value):
            return ""
        return repr(value)
    return str(value)


def _write_row(writer, values) -> None:
    writer.writerow([_fmt(v) for v in values])


def _cell_worker(task: tuple) -> CellResult:
    """Compute one grid cell; must stay module-level for process pools."""
    index, n, p_cut, d_sigma, runs, master_seed, convention_value = task
    t0 = time.perf_counter()
    try:
        size = ProblemSize(n)
        cfg = LadderConfig(
            d_sigma=d_sigma,
            p_cut=p_cut,
            runs=runs,
            master_seed=cell_master_seed(master_seed, n, p_cut, d_sigma),
            convention=NoiseConvention(convention_value),
        )
        ladder_runs = sigma_max_runs(size, cfg)
        records = tuple(
            RunRecord(
                n=n,
                p_cut=p_cut,
                d_sigma=d_sigma,
                run_index=r.run_index,
                seed=r.seed,
                sigma_max_single=r.sigma_max,
                p_at_break=r.p_at_break,
            )
            for r in ladder_runs
        )
        stat = stat_from_runs(ladder_runs, d_sigma)
        return CellResult(index, n, p_cut, d_sigma, records, stat, None, time.perf_counter() - t0)
    except NoisyGroverError as exc:
        msg = f"{type(exc).__name__}: {exc}"
        return CellResult(index, n, p_cut, d_sigma, (), None, msg, time.perf_counter() - t0)


def _iter_cells(config: ExperimentConfig, cells: list[tuple[int, float, float]]) -> Iterator[CellResult]:
    """Yield cell results in grid order, computing in parallel when asked."""
    tasks = [
        (i, n, p, ds, config.runs, config.master_seed, config.convention.value)
        for i, (n, p, ds) in enumerate(cells)
    ]
    if config.threads == 1 or len(tasks) == 1:
        for task in tasks:
            yield _cell_worker(task)
        return
    with concurrent.futures.ProcessPoolExecutor(max_workers=config.threads) as pool:
        futures = {pool.submit(_cell_worker, task): task[0] for task in tasks}
        pending: dict[int, CellResult] = {}
        next_index = 0
        for fut in concurrent.futures.as_completed(futures):
            result = fut.result()
            pending[result.index] = result
            while next_index in pending:
                yield pending.pop(next_index)
                next_index += 1


def _open_csv(path: Path, header: list[str]) -> tuple[TextIO, object]:
    fh = open(path, "w", newline="")
    writer = csv.writer(fh)
    writer.writerow(header)
    fh.flush()
    return fh, writer


def _run_grid(
    config: ExperimentConfig,
    cells: list[tuple[int, float, float]],
    out_dir: Path,
) -> list[CellResult]:
    """Execute cells, streaming runs.csv and summary.csv in grid order."""
    results: list[CellResult] = []
    runs_fh, runs_writer = _open_csv(out_dir / "runs.csv", RUNS_HEADER)
    summary_fh, summary_writer = _open_csv(out_dir / "summary.csv", SUMMARY_HEADER)
    try:
        for res in _iter_cells(config, cells):
            results.append(res)
            if res.error is not None:
                log.error(
                    "cell n=%d p_cut=%g d_sigma=%g failed: %s", res.n, res.p_cut, res.d_sigma, res.error
                )
                continue
            for rec in res.records:
                _write_row(
                    runs_writer,
                    [rec.n, rec.p_cut, rec.d_sigma, rec.run_index, rec.seed, rec.sigma_max_single, rec.p_at_break],
                )
            stat = res.stat
            stderr = stat.stderr if stat.runs >= 2 else None
            _write_row(
                summary_writer,
                [res.n, res.p_cut, res.d_sigma, stat.mean, stderr, stat.runs],
            )
            runs_fh.flush()
            summary_fh.flush()
            log.info(
                "cell n=%d p_cut=%g d_sigma=%g: mean sigma_max=%.6g (%d runs, %.2fs)",
                res.n, res.p_cut, res.d_sigma, stat.mean, stat.runs, res.seconds,
            )
    finally:
        runs_fh.close()
        summary_fh.close()
    return results


def cmd_sigma_max(config: ExperimentConfig, n: int, p_cut: float, d_sigma: float) -> SigmaMaxStat:
    """One cell: write runs.csv and summary.csv, return (and print) the stat."""
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    results = _run_grid(config, [(n, p_cut, d_sigma)], out_dir)
    res = results[0]
    if res.error is not None:
        kind, _, message = res.error.partition(": ")
        if kind == "ConfigError":
            raise ConfigError(message or res.error)
        raise NoisyGroverError(message or res.error)
    stat = res.stat
    stderr_txt = _fmt(stat.stderr if stat.runs >= 2 else None) or "undefined"
    print(
        f"sigma_max(n={n}, p_cut={p_cut:g}, d_sigma={d_sigma:g}): "
        f"mean={stat.mean!r} stderr={stderr_txt} runs={stat.runs}"
    )
    return stat


def _group_stats(results: list[CellResult]) -> dict[tuple[int, float], list[SigmaMaxStat]]:
    """Per-(n, p_cut) stats ordered as the d_sigma grid ordered them."""
    grouped: dict[tuple[int, float], list[SigmaMaxStat]] = {}
    for res in results:
        if res.error is None:
            grouped.setdefault((res.n, res.p_cut), []).append(res.stat)
    return grouped


def cmd_sweep(config: ExperimentConfig) -> None:
    """Full grid, extrapolations, fits, report, figures."""
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cells = [
        (n, p, ds)
        for n in config.n_list
        for p in config.p_cut_list
        for ds in config.d_sigma_list
    ]
    log.info("sweep: %d cells, %d runs each, threads=%d", len(cells), config.runs, config.threads)
    results = _run_grid(config, cells, out_dir)
    failures = [f"cell n={r.n} p_cut={r.p_cut:g} d_sigma={r.d_sigma:g}: {r.error}" for r in results if r.error]

    # Zero-step extrapolation per (n, p_cut).
    extrap: dict[tuple[int, float], object] = {}
    fh, writer = _open_csv(out_dir / "extrapolation.csv", EXTRAPOLATION_HEADER)
    try:
        grouped = _group_stats(results)
        for n in config.n_list:
            for p in config.p_cut_list:
                stats = grouped.get((n, p), [])
                try:
                    fit = extrapolate_to_zero_step(stats)
                except NoisyGroverError as exc:
                    failures.append(f"extrapolation n={n} p_cut={p:g}: {type(exc).__name__}: {exc}")
                    continue
                extrap[(n, p)] = fit
                _write_row(
                    writer,
                    [n, p, fit.zeta, fit.zeta_err, fit.xi, fit.xi_err, fit.alpha_exp, fit.alpha_err],
                )
                fh.flush()
    finally:
        fh.close()

    # Scaling fits over the extrapolated values.
    power_fits: dict[float, PowerLawFit] = {}
    linear_fits: dict[int, LinearFit] = {}
    avg: tuple[float, float] | None = None
    for p in config.p_cut_list:
        points = [
            WeightedPoint(x=float(2**n), y=extrap[(n, p)].zeta, y_err=extrap[(n, p)].zeta_err)
            for n in config.n_list
            if (n, p) in extrap
        ]
        try:
            power_fits[p] = fit_power_law(points)
        except NoisyGroverError as exc:
            failures.append(f"power-law fit p_cut={p:g}: {type(exc).__name__}: {exc}")
    for n in config.n_list:
        points = [
            WeightedPoint(x=p, y=extrap[(n, p)].zeta, y_err=extrap[(n, p)].zeta_err)
            for p in config.p_cut_list
            if (n, p) in extrap
        ]
        try:
            linear_fits[n] = fit_linear(points)
        except NoisyGroverError as exc:
            failures.append(f"linear fit n={n}: {type(exc).__name__}: {exc}")
    if len(power_fits) >= 2:
        avg = average_exponent(list(power_fits.values()))
    elif power_fits:
        failures.append("exponent average: needs >= 2 power-law fits")

    fh, writer = _open_csv(out_dir / "fits.csv", FITS_HEADER)
    try:
        for p, f in power_fits.items():
            _write_row(writer, ["power", f"p_cut={p:g}", f.coeff, f.coeff_err, f.exponent, f.exponent_err, None, None])
        for n, f in linear_fits.items():
            _write_row(writer, ["linear", f"n={n}", f.gamma, f.gamma_err, f.delta, f.delta_err, None, None])
        if avg is not None:
            _write_row(writer, ["exponent-average", "all-p_cut", avg[0], avg[1], None, None, None, None])
    finally:
        fh.close()

    report = _sweep_report(config, extrap, power_fits, linear_fits, avg, failures)
    (out_dir / "report.txt").write_text(report)
    print(report, end="")

    if config.figures:
        from . import plots

        grouped = _group_stats(results)
        plots.save_extrapolation(out_dir / "extrapolation.png", grouped, extrap)
        plots.save_power_law(out_dir / "powerlaw.png", config, extrap, power_fits)
        plots.save_linear(out_dir / "linear.png", config, extrap, linear_fits)


def _sweep_report(
    config: ExperimentConfig,
    extrap: dict,
    power_fits: dict[float, PowerLawFit],
    linear_fits: dict[int, LinearFit],
    avg: tuple[float, float] | None,
    failures: list[str],
) -> str:
    lines: list[str] = []
    lines.append("noise-threshold sweep report")
    lines.append(
        f"grid: n={list(config.n_list)} p_cut={[f'{p:g}' for p in config.p_cut_list]} "
        f"d_sigma={[f'{d:g}' for d in config.d_sigma_list]} runs={config.runs} "
        f"seed={config.master_seed} convention={config.convention.value}"
    )
    lines.append("")
    lines.append("extrapolated sigma_max at d_sigma -> 0 (zeta +- zeta_err):")
    for n in config.n_list:
        for p in config.p_cut_list:
            fit = extrap.get((n, p))
            if fit is None:
                lines.append(f"  n={n} p_cut={p:g}: (failed)")
            else:
                lines.append(
                    f"  n={n} p_cut={p:g}: {fit.zeta:.6g} +- {fit.zeta_err:.2g} "
                    f"(xi={fit.xi:.4g}, alpha={fit.alpha_exp:.4g})"
                )
    lines.append("")
    lines.append("power-law fits sigma_max = coeff * N^exponent per p_cut:")
    for p, f in power_fits.items():
        lines.append(
            f"  p_cut={p:g}: coeff={f.coeff:.4g} +- {f.coeff_err:.2g}, "
            f"exponent={f.exponent:.4g} +- {f.exponent_err:.2g}"
        )
    lines.append("")
    lines.append("linear fits sigma_max = gamma - delta * p_cut per n:")
    for n, f in linear_fits.items():
        lines.append(
            f"  n={n}: gamma={f.gamma:.4g} +- {f.gamma_err:.2g}, "
            f"delta={f.delta:.4g} +- {f.delta_err:.2g}"
        )
    lines.append("")
    if avg is not None:
        lines.append(f"average scaling exponent: {avg[0]:.4g} +- {avg[1]:.2g}")
    if failures:
        lines.append("")
        lines.append("failures:")
        for f in failures:
            lines.append(f"  {f}")
    lines.append("")
    lines.append("(parameter uncertainties are fit-covariance based)")
    lines.append("")
    return "\n".join(lines)


def cmd_table1(config: ExperimentConfig) -> None:
    """Break-even table at p_cut = min_p_cut(N), its power-law fit, figure data."""
    from .iterated import build_breakeven_table, iterated_params

    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    sizes = [ProblemSize(n) for n in config.n_list]
    template = LadderConfig(
        d_sigma=config.d_sigma_list[0],
        p_cut=0.5,
        runs=config.runs,
        master_seed=config.master_seed,
        convention=config.convention,
    )
    rows, fit = build_breakeven_table(sizes, template, d_sigmas=config.d_sigma_list)

    fh, writer = _open_csv(out_dir / "table1.csv", TABLE1_HEADER)
    try:
        for r in rows:
            _write_row(writer, [r.n, r.N, r.p_cut, r.sigma_max, r.sigma_err])
    finally:
        fh.close()
    fh, writer = _open_csv(out_dir / "fig1.csv", FIG1_HEADER)
    try:
        for r in rows:
            if r.sigma_max > 0:
                _write_row(writer, [math.log10(r.N), math.log10(r.sigma_max)])
    finally:
        fh.close()

    print("break-even noise tolerance at the minimum useful p_cut:")
    for r in rows:
        params = iterated_params(ProblemSize(r.n)) if r.N >= 16 else None
        budget = f" repetitions={params.repetitions} total_steps={params.total_steps} (<= N/2={r.N // 2})" if params else ""
        print(f"  n={r.n} N={r.N}: p_cut={r.p_cut:.4g} sigma_max={r.sigma_max:.4g} +- {r.sigma_err:.2g}{budget}")
    if fit is not None:
        print(
            f"power-law fit: sigma_max = ({fit.coeff:.4g} +- {fit.coeff_err:.2g}) "
            f"* N^({fit.exponent:.4g} +- {fit.exponent_err:.2g})"
        )
    else:
        print("power-law fit: unavailable (too few rows)")

    if config.figures and rows:
        from . import plots

        plots.save_breakeven(out_dir / "fig1.png", rows, fit)


def cmd_exact(config: ExperimentConfig, n: int, steps: int | None) -> None:
    """Closed-form noiseless trajectory table, with the peak step marked."""
    size = ProblemSize(n)
    if steps is None:
        steps = m_max(size) if size.N >= 4 else 1
    if steps < 0:
        raise ConfigError(f"steps must be >= 0, got {steps}")
    peak = m_max(size) if size.N >= 4 else None
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    fh, writer = _open_csv(out_dir / "exact.csv", ["m", "A", "B", "P"])
    rows = []
    try:
        for m in range(steps + 1):
            amp = amplitude_closed_form(size, m)
            p = success_probability(size, m)
            rows.append(p)
            _write_row(writer, [m, amp.A, amp.B, p])
            mark = "  <- m_max" if peak == m else ""
            print(f"m={m} A={amp.A!r} B={amp.B!r} P={p!r}{mark}")
    finally:
        fh.close()
    if config.figures:
        from . import plots

        plots.save_curve(out_dir / "exact.png", rows, peak, f"noiseless P(m), n={n}")


def cmd_trajectory(config: ExperimentConfig, n: int, sigma: float, seed: int) -> None:
    """One noisy trajectory to 2*m_max steps, reproducible from its seed."""
    size = ProblemSize(n)
    curve = trajectory_curve(size, sigma, RandomStream(seed), convention=config.convention)
    peak = m_max(size)
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    fh, writer = _open_csv(out_dir / "trajectory.csv", ["m", "P"])
    try:
        for m, p in enumerate(curve):
            _write_row(writer, [m, float(p)])
            mark = "  <- m_max" if m == peak else ""
            print(f"m={m} P={float(p)!r}{mark}")
    finally:
        fh.close()
    if config.figures:
        from . import plots

        plots.save_curve(
            out_dir / "trajectory.png", list(curve), peak, f"noisy P(m), n={n}, sigma={sigma:g}, seed={seed}"
        )


def read_points_csv(path: str) -> list[WeightedPoint]:
    """Read fit input: columns x, y and optional y_err (0/empty = unweighted)."""
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise ConfigError(f"cannot open {path}: {exc}") from exc
    with fh:
        reader = csv.DictReader(fh)
        cols = reader.fieldnames or []
        if "x" not in cols or "y" not in cols:
            raise ConfigError(f"{path}: fit input needs columns x,y[,y_err], got {cols}")
        points = []
        for row in reader:
            try:
                err = row.get("y_err") or ""
                points.append(
                    WeightedPoint(
                        x=float(row["x"]),
                        y=float(row["y"]),
                        y_err=float(err) if err.strip() else 0.0,
                    )
                )
            except ValueError as exc:
                raise ConfigError(f"{path}: bad row {row!r}: {exc}") from exc
    return points


def cmd_fit(path: str, model: str) -> None:
    """Re-fit persisted points; prints parameters with uncertainties."""
    points = read_points_csv(path)
    if model == "power":
        f = fit_power_law(points)
        print(f"power fit: coeff={f.coeff!r} +- {f.coeff_err!r}, exponent={f.exponent!r} +- {f.exponent_err!r}")
    elif model == "linear":
        f = fit_linear(points)
        print(f"linear fit: gamma={f.gamma!r} +- {f.gamma_err!r}, delta={f.delta!r} +- {f.delta_err!r}")
    elif model == "shifted-power":
        f = fit_shifted_power(points)
        print(
            f"shifted power fit: zeta={f.zeta!r} +- {f.zeta_err!r}, xi={f.xi!r} +- {f.xi_err!r}, "
            f"alpha={f.alpha_exp!r} +- {f.alpha_err!r}"
        )
    else:
        raise ConfigError(f"unknown model {model!r}; choose power, linear or shifted-power")
