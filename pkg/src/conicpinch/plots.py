"""Self-contained SVG figures with deterministic output."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_RC = {"svg.hashsalt": "conicpinch", "svg.fonttype": "path", "font.size": 9}
_META = {"Date": None, "Creator": None}


def _save(fig, path):
    fig.savefig(path, format="svg", metadata=_META)
    plt.close(fig)
    return str(path)


def profile_svg(p, path, title: str = "level-set profile"):
    """A(t), B(t) and the isoperimetric defect against t."""
    with plt.rc_context(_RC):
        fig, axes = plt.subplots(3, 1, figsize=(5, 6), sharex=True)
        for ax, y, name in zip(axes, (p.A, p.B, p.defect), ("A(t)", "B(t)", "L^2 - 4 pi B")):
            ax.plot(p.t, y, lw=1.2)
            ax.set_ylabel(name)
            ax.grid(alpha=0.3)
        axes[0].set_title(title)
        axes[-1].set_xlabel("t")
        fig.tight_layout()
        return _save(fig, path)


def curvature_rays_svg(f, path, angles=(0.0, math.pi / 4, math.pi / 2), r_min=1e-2, r_max=4.0,
                       n=800, bands=None, title: str = "curvature along rays"):
    """K(r e^{i theta}) for a few rays; optional vertical band markers."""
    r = np.geomspace(r_min, r_max, n)
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5.5, 3.5))
        for th in angles:
            z = r * np.exp(1j * th)
            keep = ~f.too_close(z)
            K = np.full(r.shape, np.nan)
            K[keep] = f.curvature(z[keep], check=False)
            ax.plot(r, K, lw=1.0, label=f"theta = {th:.3f}")
        for b in bands or ():
            ax.axvline(b, color="0.6", lw=0.6, ls="--")
        ax.set_xscale("log")
        ax.set_xlabel("|z|")
        ax.set_ylabel("K")
        ax.set_title(title)
        ax.grid(alpha=0.3)
        ax.legend(fontsize=7)
        fig.tight_layout()
        return _save(fig, path)


def overlay_svg(profiles, labels, limit, path, title: str = "A_i(t) against the limit"):
    """Overlay sequence profiles A_i(t) on the limit A*(t)."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5.5, 3.5))
        t = np.sort(np.concatenate([p.t for p in profiles])) if profiles else np.linspace(-2, 1, 50)
        t = np.unique(t)
        ax.plot(t, limit.A(t), color="k", lw=1.6, label="limit")
        for p, lab in zip(profiles, labels):
            ax.plot(p.t, p.A, lw=1.0, ls="--", label=lab)
        ax.set_xlabel("t")
        ax.set_ylabel("A(t)")
        ax.set_title(title)
        ax.grid(alpha=0.3)
        ax.legend(fontsize=7)
        fig.tight_layout()
        return _save(fig, path)


def series_svg(x, ys: dict, path, xlabel: str, title: str, logy: bool = False):
    """Several named series against one parameter."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5.5, 3.5))
        for name, y in ys.items():
            ax.plot(x, y, marker="o", lw=1.0, label=name)
        if logy:
            ax.set_yscale("log")
        ax.set_xlabel(xlabel)
        ax.set_title(title)
        ax.grid(alpha=0.3)
        ax.legend(fontsize=7)
        fig.tight_layout()
        return _save(fig, path)
