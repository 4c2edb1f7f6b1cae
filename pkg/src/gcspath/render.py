"""SVG rendering of planar instances and solutions.

Sets are drawn as filled outlines (support-point polygons), edges as thin
gray segments between set centers, and the solution as a dotted red
polyline with white circles at the chosen positions. Instances of higher
dimension are projected onto a chosen coordinate pair.
"""

from __future__ import annotations

import numpy as np

from .geometry import ConvexSet, Singleton
from .graph import Gcs

WIDTH, HEIGHT, PAD = 800.0, 600.0, 40.0
OUTLINE_DIRECTIONS = 64


class RenderError(ValueError):
    pass


def _outline(s: ConvexSet, proj: tuple[int, int]) -> np.ndarray:
    """Projected convex outline as an (k, 2) vertex array."""
    i, j = proj
    pts = []
    for ang in np.linspace(0.0, 2.0 * np.pi, OUTLINE_DIRECTIONS, endpoint=False):
        c = np.zeros(s.dim)
        c[i], c[j] = np.cos(ang), np.sin(ang)
        x = s.support(c)
        pts.append((x[i], x[j]))
    out = []
    for p in pts:
        if not out or np.hypot(p[0] - out[-1][0], p[1] - out[-1][1]) > 1e-12:
            out.append(p)
    return np.array(out)


def render_svg(g: Gcs, positions: dict[str, np.ndarray] | None = None,
               path: list[str] | None = None,
               proj: tuple[int, int] | None = None) -> str:
    """SVG document for the instance, optionally with a solved path."""
    dims = {g.dim(v) for v in g.vertices}
    if proj is None:
        if dims != {2}:
            raise RenderError("instance is not planar; pass a projection pair")
        proj = (0, 1)
    i, j = proj
    for v in g.vertices:
        if max(i, j) >= g.dim(v):
            raise RenderError(f"projection ({i}, {j}) exceeds the dimension of {v!r}")

    outlines = {v: _outline(s, proj) for v, s in g.vertices.items()}
    all_pts = np.vstack(list(outlines.values()))
    lo, hi = all_pts.min(axis=0), all_pts.max(axis=0)
    span = np.maximum(hi - lo, 1e-9)
    scale = min((WIDTH - 2 * PAD) / span[0], (HEIGHT - 2 * PAD) / span[1])

    def to_px(p):
        x = PAD + (p[0] - lo[0]) * scale
        y = HEIGHT - PAD - (p[1] - lo[1]) * scale
        return x, y

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:g}" '
             f'height="{HEIGHT:g}" viewBox="0 0 {WIDTH:g} {HEIGHT:g}">',
             f'<rect width="{WIDTH:g}" height="{HEIGHT:g}" fill="white"/>']

    centers = {v: g.vertices[v].chebyshev_center() for v in g.vertices}
    for e in g.edges:
        x1, y1 = to_px((centers[e.u][i], centers[e.u][j]))
        x2, y2 = to_px((centers[e.v][i], centers[e.v][j]))
        parts.append(f'<line x1="{x1:.1f}" y1="{y1:.1f}" x2="{x2:.1f}" '
                     f'y2="{y2:.1f}" stroke="#bbbbbb" stroke-width="1"/>')

    for v, s in g.vertices.items():
        if isinstance(s, Singleton):
            x, y = to_px((s.theta[i], s.theta[j]))
            parts.append(f'<circle cx="{x:.1f}" cy="{y:.1f}" r="5" '
                         f'fill="#4477aa"/>')
        else:
            pts = " ".join(f"{x:.1f},{y:.1f}" for x, y in
                           (to_px(p) for p in outlines[v]))
            parts.append(f'<polygon points="{pts}" fill="#88bbdd" '
                         f'fill-opacity="0.45" stroke="#4477aa" stroke-width="1.5"/>')
        cx, cy = to_px((centers[v][i], centers[v][j]))
        parts.append(f'<text x="{cx + 7:.1f}" y="{cy - 7:.1f}" '
                     f'font-size="13" fill="#333333">{v}</text>')

    if path and positions:
        px = [to_px((positions[v][i], positions[v][j])) for v in path]
        pts = " ".join(f"{x:.1f},{y:.1f}" for x, y in px)
        parts.append(f'<polyline points="{pts}" fill="none" stroke="#cc2222" '
                     f'stroke-width="2.5" stroke-dasharray="2 6" '
                     f'stroke-linecap="round"/>')
        for x, y in px:
            parts.append(f'<circle cx="{x:.1f}" cy="{y:.1f}" r="4.5" '
                         f'fill="white" stroke="#cc2222" stroke-width="2"/>')

    parts.append("</svg>")
    return "\n".join(parts) + "\n"
