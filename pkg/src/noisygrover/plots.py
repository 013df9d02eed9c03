"""Figure rendering next to the CSV outputs.

Figures are a convenience layer over data that is already persisted; a
rendering failure is logged and never aborts a sweep. The Agg backend is
forced so rendering works headless.
"""

from __future__ import annotations

import logging
import math

import numpy as np

log = logging.getLogger(__name__)


def _pyplot():
    import matplotlib

    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt

    return plt


def save_curve(path, p_values, peak_step, title) -> None:
    """P(m) against step count, with the nominal peak marked."""
    try:
        plt = _pyplot()
        fig, ax = plt.subplots(figsize=(7, 4.5))
        ax.plot(range(len(p_values)), p_values, marker="o", markersize=3, lw=1)
        if peak_step is not None and peak_step < len(p_values):
            ax.axvline(peak_step, color="gray", ls="--", lw=1, label=f"m_max = {peak_step}")
            ax.legend()
        ax.set_xlabel("step m")
        ax.set_ylabel("P(m)")
        ax.set_title(title)
        fig.tight_layout()
        fig.savefig(path, dpi=120)
        plt.close(fig)
    except Exception as exc:
        log.warning("figure %s failed: %s", path, exc)


def save_extrapolation(path, grouped, extrap) -> None:
    """Mean sigma_max vs d_sigma per cell group, with fitted curves."""
    try:
        plt = _pyplot()
        fig, ax = plt.subplots(figsize=(7.5, 5))
        for (n, p), stats in sorted(grouped.items()):
            xs = np.array([s.d_sigma for s in stats])
            ys = np.array([s.mean for s in stats])
            es = np.array([s.stderr if math.isfinite(s.stderr) else 0.0 for s in stats])
            line = ax.errorbar(xs, ys, yerr=es, fmt="o", ms=4, capsize=2, label=f"n={n}, p_cut={p:g}")
            fit = extrap.get((n, p))
            if fit is not None:
                gx = np.geomspace(xs.min(), xs.max(), 200)
                ax.plot(gx, fit.zeta + fit.xi * gx**fit.alpha_exp, lw=1, color=line[0].get_color())
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("d_sigma")
        ax.set_ylabel("mean sigma_max")
        ax.set_title("ladder means and zero-step extrapolation")
        ax.legend(fontsize=7, ncols=2)
        fig.tight_layout()
        fig.savefig(path, dpi=120)
        plt.close(fig)
    except Exception as exc:
        log.warning("figure %s failed: %s", path, exc)


def save_power_law(path, config, extrap, power_fits) -> None:
    """Extrapolated sigma_max vs N per p_cut, log-log, with fit lines."""
    try:
        plt = _pyplot()
        fig, ax = plt.subplots(figsize=(7, 5))
        for p in config.p_cut_list:
            ns = [n for n in config.n_list if (n, p) in extrap]
            if not ns:
                continue
            Ns = np.array([2.0**n for n in ns])
            ys = np.array([extrap[(n, p)].zeta for n in ns])
            es = np.array([extrap[(n, p)].zeta_err for n in ns])
            line = ax.errorbar(Ns, ys, yerr=es, fmt="o", ms=4, capsize=2, label=f"p_cut={p:g}")
            fit = power_fits.get(p)
            if fit is not None:
                gx = np.geomspace(Ns.min(), Ns.max(), 100)
                ax.plot(gx, fit.coeff * gx**fit.exponent, lw=1, color=line[0].get_color())
        ax.set_xscale("log", base=2)
        ax.set_yscale("log")
        ax.set_xlabel("N")
        ax.set_ylabel("sigma_max (d_sigma -> 0)")
        ax.set_title("noise tolerance vs database size")
        ax.legend(fontsize=8)
        fig.tight_layout()
        fig.savefig(path, dpi=120)
        plt.close(fig)
    except Exception as exc:
        log.warning("figure %s failed: %s", path, exc)


def save_linear(path, config, extrap, linear_fits) -> None:
    """Extrapolated sigma_max vs p_cut per n, with fitted lines."""
    try:
        plt = _pyplot()
        fig, ax = plt.subplots(figsize=(7, 5))
        for n in config.n_list:
            ps = [p for p in config.p_cut_list if (n, p) in extrap]
            if not ps:
                continue
            xs = np.array(ps)
            ys = np.array([extrap[(n, p)].zeta for p in ps])
            es = np.array([extrap[(n, p)].zeta_err for p in ps])
            line = ax.errorbar(xs, ys, yerr=es, fmt="o", ms=4, capsize=2, label=f"n={n}")
            fit = linear_fits.get(n)
            if fit is not None:
                gx = np.linspace(xs.min(), xs.max(), 50)
                ax.plot(gx, fit.gamma - fit.delta * gx, lw=1, color=line[0].get_color())
        ax.set_xlabel("p_cut")
        ax.set_ylabel("sigma_max (d_sigma -> 0)")
        ax.set_title("noise tolerance vs success threshold")
        ax.legend(fontsize=8)
        fig.tight_layout()
        fig.savefig(path, dpi=120)
        plt.close(fig)
    except Exception as exc:
        log.warning("figure %s failed: %s", path, exc)


def save_breakeven(path, rows, fit) -> None:
    """log10 sigma_max vs log10 N for the break-even table, with fit line."""
    try:
        plt = _pyplot()
        fig, ax = plt.subplots(figsize=(7, 5))
        lx = np.array([math.log10(r.N) for r in rows])
        ly = np.array([math.log10(r.sigma_max) for r in rows if r.sigma_max > 0])
        ax.plot(lx, ly, "o", ms=5)
        if fit is not None:
            gx = np.linspace(lx.min(), lx.max(), 50)
            ax.plot(gx, math.log10(fit.coeff) + fit.exponent * gx, lw=1,
                    label=f"slope = {fit.exponent:.3f}")
            ax.legend()
        ax.set_xlabel("log10 N")
        ax.set_ylabel("log10 sigma_max")
        ax.set_title("break-even noise tolerance scaling")
        fig.tight_layout()
        fig.savefig(path, dpi=120)
        plt.close(fig)
    except Exception as exc:
        log.warning("figure %s failed: %s", path, exc)
