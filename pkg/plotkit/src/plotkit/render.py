"""Render fidelity-decay overlays from a sweep manifest.

Reads the manifest JSON produced by a sweep (per-point CSVs with the
``t,fidelity,trace_error,min_eig`` header), draws one labeled curve per
point, optionally overlays the closed-form single-qubit baseline
(1 + exp(-2 Gamma t))/2 recomputed from the manifest's flip rate, and
writes the figure to PNG or SVG.  The script never recomputes any
dynamics: everything plotted except the baseline comes from the CSVs.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["PlotSpec", "RenderError", "load_manifest", "render", "main"]


class RenderError(RuntimeError):
    """Raised when the manifest or one of its CSVs cannot be used."""


@dataclass(frozen=True)
class PlotSpec:
    manifest_path: Path
    output_path: Path
    title: str | None = None
    overlay_baseline: bool = False


def load_manifest(path: Path) -> dict:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise RenderError(f"manifest not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise RenderError(f"manifest is not valid JSON: {path}: {exc}") from exc
    points = data.get("points")
    if not points:
        raise RenderError(f"manifest lists no sweep points: {path}")
    return data


def _load_csv(path: Path) -> tuple[np.ndarray, np.ndarray]:
    if not path.exists():
        raise RenderError(f"missing CSV: {path}")
    try:
        data = np.genfromtxt(path, delimiter=",", names=True)
    except (ValueError, OSError) as exc:
        raise RenderError(f"unparseable CSV: {path}: {exc}") from exc
    if data.dtype.names is None or not {"t", "fidelity"} <= set(data.dtype.names):
        raise RenderError(f"unparseable CSV (expected t,fidelity columns): {path}")
    t = np.atleast_1d(data["t"]).astype(float)
    fid = np.atleast_1d(data["fidelity"]).astype(float)
    if t.size == 0:
        raise RenderError(f"CSV has no rows: {path}")
    return t, fid


def render(spec: PlotSpec) -> plt.Figure:
    """Draw the overlay figure and return it (the caller saves it)."""
    manifest = load_manifest(spec.manifest_path)
    base_dir = Path(spec.manifest_path).parent

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    t_longest = None
    for point in manifest["points"]:
        csv_path = base_dir / point["csv"]
        t, fid = _load_csv(csv_path)
        label = f"$\\Omega = {point['omega']:g}$"
        if point.get("status") not in (None, "ok"):
            label += " (partial)"
        ax.plot(t, fid, label=label)
        if t_longest is None or t[-1] > t_longest[-1]:
            t_longest = t

    if spec.overlay_baseline:
        gamma = manifest.get("gamma_flip")
        if gamma is None:
            raise RenderError("manifest has no gamma_flip; cannot draw the baseline")
        t = np.linspace(0.0, float(t_longest[-1]), 400)
        ax.plot(t, 0.5 * (1.0 + np.exp(-2.0 * gamma * t)),
                linestyle="--", color="black", label="bare qubit")

    ax.set_xlabel("t")
    ax.set_ylabel("fidelity")
    ax.set_ylim(0.0, 1.02)
    if spec.title:
        ax.set_title(spec.title)
    ax.legend()
    fig.tight_layout()
    return fig


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plotkit",
        description="Render a sweep manifest into a fidelity-decay overlay figure",
    )
    parser.add_argument("manifest", type=Path, help="sweep manifest JSON")
    parser.add_argument("--out", type=Path, required=True,
                        help="output image (.png or .svg)")
    parser.add_argument("--baseline", action="store_true",
                        help="overlay the closed-form bare-qubit decay")
    parser.add_argument("--title", default=None)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    spec = PlotSpec(
        manifest_path=args.manifest,
        output_path=args.out,
        title=args.title,
        overlay_baseline=args.baseline,
    )
    try:
        fig = render(spec)
    except RenderError as exc:
        print(f"plotkit: {exc}", file=sys.stderr)
        return 1
    fig.savefig(spec.output_path)
    plt.close(fig)
    return 0


if __name__ == "__main__":
    sys.exit(main())
