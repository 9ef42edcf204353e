"""Static figures (SVG or PNG) for the report commands.

Every plotted series carries a ``gid`` of the form ``series-<name>`` so that
the SVG output holds one identifiable group per series.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from ._io import atomic_path  # noqa: E402


def _save(fig, path):
    with atomic_path(path) as tmp:
        fig.savefig(tmp, format=str(path).rsplit(".", 1)[-1])
    plt.close(fig)
    return path


def rate_plot(summary, fit, path, title: str = ""):
    """Log-log scatter of mean value vs n with error bars and the fitted line."""
    n = np.array([row[0] for row in summary], dtype=float)
    mean = np.array([row[1] for row in summary], dtype=float)
    err = np.array([row[2] for row in summary], dtype=float)
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.errorbar(n, mean, yerr=err, fmt="none", ecolor="C0", gid="errorbars-mean")
    ax.plot(n, mean, "o", color="C0", label="mean over reps", gid="series-mean")
    grid = np.geomspace(n.min(), n.max(), 50)
    ax.plot(grid, np.exp(fit.intercept) * grid ** (-fit.p_hat), "-",
            label=f"fit: p = {fit.p_hat:.3f}", gid="series-fit")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel("mean IPM")
    if title:
        ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    return _save(fig, path)


def exponent_plot(measured, d: int, path):
    """Measured exponents (alpha, p_hat, stderr) against ``min(alpha/d, 1/2)``."""
    fig, ax = plt.subplots(figsize=(5, 4))
    alphas = np.linspace(0.01, max(1.0, d), 200)
    ax.plot(alphas, np.minimum(alphas / d, 0.5), "-", label="min(alpha/d, 1/2)", gid="series-theory")
    if measured:
        a = np.array([m[0] for m in measured], dtype=float)
        p = np.array([m[1] for m in measured], dtype=float)
        e = np.array([m[2] for m in measured], dtype=float)
        ax.errorbar(a, p, yerr=e, fmt="none", ecolor="C1", gid="errorbars-measured")
        ax.plot(a, p, "s", color="C1", label="fitted", gid="series-measured")
    ax.set_xlabel("alpha")
    ax.set_ylabel("exponent p")
    ax.set_title(f"d = {d}")
    ax.legend()
    fig.tight_layout()
    return _save(fig, path)


def entropy_plot(profile, path):
    eps = profile.epsilons
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(1.0 / eps, profile.log_sizes, "o", label="log N (net)", gid="series-measured")
    grid = np.geomspace((1.0 / eps).min(), (1.0 / eps).max(), 50)
    ax.plot(grid, profile.fitted_constant * grid**profile.fitted_exponent, "-",
            label=f"fit: exponent {profile.fitted_exponent:.3f}", gid="series-fit")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("1/epsilon")
    ax.set_ylabel("log N")
    ax.legend()
    fig.tight_layout()
    return _save(fig, path)


def bounds_plot(rows, path):
    """``rows`` are ``(n, value, mode)``; one series per mode."""
    fig, ax = plt.subplots(figsize=(5, 4))
    for mode in sorted({r[2] for r in rows}):
        pts = sorted((r[0], r[1]) for r in rows if r[2] == mode and r[1] > 0)
        if pts:
            ax.plot([p[0] for p in pts], [p[1] for p in pts], "o-", label=mode, gid=f"series-{mode}")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel("bound")
    ax.legend()
    fig.tight_layout()
    return _save(fig, path)
