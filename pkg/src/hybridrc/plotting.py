"""Render sweep and run summaries to figure files next to the CSV output."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["render_run", "render_sweep"]


def _m_label(m) -> str:
    if m == "inf":
        return "inf"
    m = float(m)
    return "inf" if math.isinf(m) else f"1e{int(round(math.log10(m)))}"


def render_run(rows, out_path):
    """Per-realization metric scatter with the mean for a single config."""
    values = np.array([float(r["value"]) for r in rows])
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(np.arange(len(values)), values, "o", ms=4, alpha=0.7)
    finite = values[np.isfinite(values)]
    if len(finite):
        ax.axhline(finite.mean(), color="C1",
                   label=f"mean = {finite.mean():.4g}")
        ax.legend()
    first = rows[0]
    ax.set_xlabel("realization")
    ax.set_ylabel(first["metric"])
    ax.set_title(f"{first['task']} tau={first['tau']} ({first['baseline']})")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def _group(rows, keys):
    out = {}
    for row in rows:
        out.setdefault(tuple(row[k] for k in keys), []).append(row)
    return out


def _curves(ax, rows, x_key, curve_key, curve_fmt=str, logy=False):
    for key, group in sorted(_group(rows, [curve_key]).items(),
                             key=lambda kv: str(kv[0])):
        group = sorted(group, key=lambda r: float(r[x_key]))
        xs = [float(r[x_key]) for r in group]
        ys = [float(r["mean"]) for r in group]
        es = [float(r["stderr"]) for r in group]
        ax.errorbar(xs, ys, yerr=es, marker="o", ms=4, capsize=2,
                    label=curve_fmt(key[0]))
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(x_key)
    ax.legend(fontsize=8)


def _heatmap(ax, rows, x_key, y_key, x_grid, y_grid, log=True):
    grid = np.full((len(y_grid), len(x_grid)), np.nan)
    for row in rows:
        xi = min(range(len(x_grid)),
                 key=lambda i: abs(x_grid[i] - float(row[x_key])))
        yi = min(range(len(y_grid)),
                 key=lambda i: abs(y_grid[i] - float(row[y_key])))
        grid[yi, xi] = float(row["mean"])
    data = np.log10(grid) if log else grid
    im = ax.imshow(data, origin="lower", aspect="auto", cmap="viridis")
    ax.set_xticks(range(len(x_grid)), [f"{v:.3g}" for v in x_grid], fontsize=8)
    ax.set_yticks(range(len(y_grid)), [f"{v:.3g}" for v in y_grid], fontsize=8)
    ax.set_xlabel(x_key)
    ax.set_ylabel(y_key)
    return im


def render_sweep(preset: str, summary_rows, out_path):
    """Dispatch a preset (or generic) sweep rendering to a PNG file."""
    if preset == "fig2-top":
        fig, ax = plt.subplots(figsize=(6, 4))
        _curves(ax, summary_rows, "tau", "M", curve_fmt=_m_label)
        ax.set_ylabel("mean fidelity")
        ax.set_title("state estimation vs delay, by ensemble size")
    elif preset == "fig2-bottom":
        fig, ax = plt.subplots(figsize=(6, 4))
        for key, group in sorted(_group(summary_rows, ["N_esn"]).items()):
            group = sorted(group, key=lambda r: float(r["M"]))
            xs = [float(r["M"]) for r in group]
            ys = [float(r["mean"]) for r in group]
            es = [float(r["stderr"]) for r in group]
            ax.errorbar(xs, ys, yerr=es, marker="o", capsize=2,
                        label=f"N_esn={key[0]}")
        ax.set_xscale("log")
        ax.set_xlabel("ensemble size M")
        ax.set_ylabel("mean fidelity")
        ax.set_title("delay 5: default vs enlarged network layer")
        ax.legend()
    elif preset == "fig3":
        tasks = sorted({r["task"] for r in summary_rows})
        fig, axes = plt.subplots(1, len(tasks), figsize=(4 * len(tasks), 3.5))
        axes = np.atleast_1d(axes)
        for ax, task in zip(axes, tasks):
            rows = [r for r in summary_rows if r["task"] == task]
            ns = sorted({int(r["N"]) for r in rows})
            nesns = sorted({int(r["N_esn"]) for r in rows})
            im = _heatmap(ax, rows, "N", "N_esn", ns, nesns)
            ax.set_title(task, fontsize=10)
            fig.colorbar(im, ax=ax, fraction=0.046)
    elif preset == "fig4":
        tasks = sorted({r["task"] for r in summary_rows})
        fig, axes = plt.subplots(1, len(tasks), figsize=(4 * len(tasks), 3.5))
        axes = np.atleast_1d(axes)
        for ax, task in zip(axes, tasks):
            rows = [r for r in summary_rows if r["task"] == task]
            if rows and rows[0]["metric"] == "fidelity":
                rows = [dict(r, mean=1.0 - float(r["mean"])) for r in rows]
                ax.set_ylabel("infidelity")
            else:
                ax.set_ylabel("NMSE")
            _curves(ax, rows, "tau", "baseline", logy=True)
            ax.set_title(task, fontsize=10)
    elif preset == "fig5":
        fig, ax = plt.subplots(figsize=(5, 4))
        rs = sorted({float(r["R"]) for r in summary_rows})
        ps = sorted({float(r["p"]) for r in summary_rows})
        im = _heatmap(ax, summary_rows, "p", "R", ps, rs)
        ax.set_title("off-diagonal recall: log10 NMSE")
        fig.colorbar(im, ax=ax, fraction=0.046)
    elif preset == "fig6":
        tasks = sorted({r["task"] for r in summary_rows})
        fig, axes = plt.subplots(1, len(tasks), figsize=(4.5 * len(tasks), 3.5))
        axes = np.atleast_1d(axes)
        for ax, task in zip(axes, tasks):
            rows = [r for r in summary_rows if r["task"] == task]
            _curves(ax, rows, "tau", "tau_prime",
                    curve_fmt=lambda v: f"tau'={v}", logy=True)
            ax.set_ylabel("NMSE")
            ax.set_title(task, fontsize=10)
    else:
        # generic fallback: one curve per baseline over whichever numeric
        # column actually varies
        fig, ax = plt.subplots(figsize=(6, 4))
        x_key = _varying_axis(summary_rows)
        _curves(ax, summary_rows, x_key, "baseline")
        ax.set_ylabel("mean metric")
        ax.set_title(preset)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def _varying_axis(rows) -> str:
    for key in ("tau", "M", "N", "N_esn", "R", "p", "rho", "iota"):
        values = {str(r[key]) for r in rows}
        if len(values) > 1:
            return key
    return "tau"
