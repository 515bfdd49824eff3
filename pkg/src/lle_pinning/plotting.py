"""Static SVG figures for the command-line reports."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# fixed ids and no timestamp keep the SVG output byte-identical across runs
matplotlib.rcParams["svg.hashsalt"] = "lle-pinning"
_META = {"Date": None, "Creator": None}


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata=_META)
    plt.close(fig)
    return Path(path)


def profile(path: Path, x: np.ndarray, intensity: np.ndarray, title: str = "") -> Path:
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.plot(x, intensity, lw=1.2)
    ax.set_xlabel("x")
    ax.set_ylabel("|u|^2")
    ax.set_title(title)
    return _save(fig, path)


def spectrum(path: Path, eigs: np.ndarray, critical: complex, title: str = "") -> Path:
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(eigs.real, eigs.imag, ".", ms=3)
    ax.plot([critical.real], [critical.imag], "o", mfc="none", color="C3", label="critical")
    ax.axvline(0.0, color="0.6", lw=0.8)
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    ax.legend(loc="best")
    ax.set_title(title)
    return _save(fig, path)


def veff(path: Path, sigma: np.ndarray, values: np.ndarray, zeros, V=None) -> Path:
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.plot(sigma, values, lw=1.2, label="V_eff")
    if V is not None:
        ax.plot(sigma, V(sigma), "--", lw=0.8, label="V")
    for z in zeros:
        ax.plot([z.sigma0], [0.0], "o", color="C2" if z.slope > 0 else "C3")
    ax.axhline(0.0, color="0.6", lw=0.8)
    ax.set_xlabel("sigma")
    ax.legend(loc="best")
    return _save(fig, path)


def branches(path: Path, curves: dict, xlabel: str = "eps") -> Path:
    """``curves`` maps a label to ``(param, l2norm, stable)`` arrays."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for i, (label, (par, norm, stable)) in enumerate(curves.items()):
        par, norm, stable = map(np.asarray, (par, norm, stable))
        color = f"C{i}"
        ax.plot(par, np.where(stable, norm, np.nan), "-", color=color, label=label)
        ax.plot(par, np.where(stable, np.nan, norm), "--", color=color)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("||u||_L2")
    ax.legend(loc="best")
    return _save(fig, path)


def trajectory(path: Path, t: np.ndarray, dev: np.ndarray, rate: float | None = None) -> Path:
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.semilogy(t, dev, lw=1.2, label="H1 deviation")
    if rate is not None and np.isfinite(rate):
        ax.semilogy(t, dev[0] * np.exp(rate * (t - t[0])), "--", lw=0.8, label=f"rate {rate:.4g}")
    ax.set_xlabel("t")
    ax.legend(loc="best")
    return _save(fig, path)
