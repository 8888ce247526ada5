"""Matplotlib renderings written next to the delimited outputs."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .fields import SampledField
from .fif import PointCloud

__all__ = ["cloud_png", "heatmap_png", "residual_png", "surface_png"]

_DPI = 150


def surface_png(field: SampledField, path, title: str | None = None) -> None:
    gx, gy = np.meshgrid(field.xs, field.ys, indexing="ij")
    fig = plt.figure(figsize=(6, 4.5))
    ax = fig.add_subplot(projection="3d")
    ax.plot_surface(gx, gy, field.values, cmap="viridis", linewidth=0, antialiased=True)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    if title:
        ax.set_title(title)
    fig.savefig(path, dpi=_DPI, bbox_inches="tight")
    plt.close(fig)


def heatmap_png(field: SampledField, path, title: str | None = None) -> None:
    a, b, c, d = field.rect
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    im = ax.imshow(
        field.values.T,
        origin="lower",
        extent=(a, b, c, d),
        aspect="auto",
        cmap="viridis",
    )
    fig.colorbar(im, ax=ax, label="z")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    if title:
        ax.set_title(title)
    fig.savefig(path, dpi=_DPI, bbox_inches="tight")
    plt.close(fig)


def cloud_png(cloud: PointCloud, path, title: str | None = None) -> None:
    p = cloud.points
    fig = plt.figure(figsize=(6, 4.5))
    ax = fig.add_subplot(projection="3d")
    ax.scatter(p[:, 0], p[:, 1], p[:, 2], s=0.3, c=p[:, 2], cmap="viridis")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    if title:
        ax.set_title(title)
    fig.savefig(path, dpi=_DPI, bbox_inches="tight")
    plt.close(fig)


def residual_png(labels, values, threshold: float | None, path, title=None) -> None:
    fig, ax = plt.subplots(figsize=(max(4.0, 0.8 * len(labels) + 2), 3.5))
    pos = np.arange(len(labels))
    floor = 1e-17
    ax.bar(pos, np.maximum(np.asarray(values, dtype=float), floor), color="#943b3b")
    if threshold is not None:
        ax.axhline(threshold, color="k", linestyle="--", linewidth=1, label="threshold")
        ax.legend()
    ax.set_yscale("log")
    ax.set_xticks(pos, labels, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("residual")
    if title:
        ax.set_title(title)
    fig.savefig(path, dpi=_DPI, bbox_inches="tight")
    plt.close(fig)
