"""Figure rendering for fidelity-decay sweep output."""

from .render import PlotSpec, RenderError, load_manifest, main, render

__all__ = ["PlotSpec", "RenderError", "load_manifest", "main", "render"]
