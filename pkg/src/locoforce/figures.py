"""Report figures rendered from a scenario run's trajectory rows."""
from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402


def _column(rows: list, key: str) -> np.ndarray:
    return np.array([row[key] for row in rows])


def render_figures(rows: list, out_dir: str, prefix: str = "scenario") -> list:
    """Write the standard figure set as PNGs; returns the file paths."""
    if not rows:
        return []
    t = _column(rows, "t")
    paths = []

    fig, ax = plt.subplots(figsize=(7, 4))
    for key, label in (("fx", "f_x"), ("fy", "f_y"), ("fz", "f_z")):
        ax.plot(t, _column(rows, key), label=f"${label}$")
    ax.set_xlabel("time [s]")
    ax.set_ylabel("planned end-effector force [N]")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    path = os.path.join(out_dir, f"{prefix}_forces.png")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    paths.append(path)

    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(t, _column(rows, "margin"), color="tab:purple")
    ax.axhline(0.0, color="tab:red", linestyle="--", linewidth=1)
    ax.set_xlabel("time [s]")
    ax.set_ylabel("stability margin [m]")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    path = os.path.join(out_dir, f"{prefix}_margin.png")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    paths.append(path)

    fig, ax = plt.subplots(figsize=(5, 5))
    ax.plot(_column(rows, "rx"), _column(rows, "ry"), label="CoM")
    ax.plot(_column(rows, "zmp_x"), _column(rows, "zmp_y"),
            linestyle=":", label="pressure point")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.axis("equal")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    path = os.path.join(out_dir, f"{prefix}_path.png")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    paths.append(path)

    return paths
