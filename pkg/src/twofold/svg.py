"""Static SVG emission for trajectories and surface maps.

Plots are deterministic: fixed viewport, fixed formatting, no timestamps, so
identical inputs produce byte-identical files.  3D data is drawn through a
fixed orthographic projection; the default view looks along u3 = x2 - x3 with
u2 = x2 + x3 horizontal, which untangles curves organized around the two-fold.
"""

from __future__ import annotations

WIDTH = 800
HEIGHT = 600
MARGIN = 50

VIEWS = ("u3", "u2", "x1", "x2", "x3")

_EVENT_COLORS = {
    "crossing": "#d62728",
    "slide-entry": "#2ca02c",
    "slide-exit": "#ff7f0e",
    "two-fold-hit": "#9467bd",
    "determinacy-break": "#9467bd",
    "step-floor": "#7f7f7f",
    "boundary-exit": "#8c564b",
}

_REGION_COLORS = {
    "crossing": "#f2f2f2",
    "attracting-sliding": "#9ecae1",
    "repelling-sliding": "#fcae91",
    "tangency": "#756bb1",
}


def project(point, view: str = "u3") -> tuple[float, float]:
    """Orthographic screen coordinates (horizontal, vertical) of a 3D point."""
    a, b, c = point
    if view == "u3":        # look along x2 - x3
        return (b + c, a)
    if view == "u2":        # look along x2 + x3
        return (b - c, a)
    if view == "x1":
        return (b, c)
    if view == "x2":
        return (c, a)
    if view == "x3":
        return (b, a)
    raise ValueError(f"unknown view {view!r}; choose from {VIEWS}")


def _fmt(v: float) -> str:
    return format(v, ".6g")


class _Canvas:
    def __init__(self, xs, ys):
        if not xs:
            raise ValueError("nothing to plot")
        x_lo, x_hi = min(xs), max(xs)
        y_lo, y_hi = min(ys), max(ys)
        dx = (x_hi - x_lo) or 1.0
        dy = (y_hi - y_lo) or 1.0
        x_lo -= 0.05 * dx
        x_hi += 0.05 * dx
        y_lo -= 0.05 * dy
        y_hi += 0.05 * dy
        self.x_lo, self.x_hi, self.y_lo, self.y_hi = x_lo, x_hi, y_lo, y_hi
        self.sx = (WIDTH - 2 * MARGIN) / (x_hi - x_lo)
        self.sy = (HEIGHT - 2 * MARGIN) / (y_hi - y_lo)

    def to_screen(self, x, y):
        return (MARGIN + (x - self.x_lo) * self.sx,
                HEIGHT - MARGIN - (y - self.y_lo) * self.sy)

    def contains(self, x, y):
        return self.x_lo <= x <= self.x_hi and self.y_lo <= y <= self.y_hi


def _downsample(points, cap=6000):
    if len(points) <= cap:
        return points
    stride = (len(points) + cap - 1) // cap
    out = points[::stride]
    if out[-1] != points[-1]:
        out.append(points[-1])
    return out


def _header(parts):
    parts.append(f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
                 f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">')
    parts.append(f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>')


def _axes(parts, canvas):
    if canvas.x_lo <= 0.0 <= canvas.x_hi:
        x0, _ = canvas.to_screen(0.0, canvas.y_lo)
        parts.append(f'<line x1="{_fmt(x0)}" y1="{MARGIN}" x2="{_fmt(x0)}" '
                     f'y2="{HEIGHT - MARGIN}" stroke="#cccccc" stroke-width="1"/>')
    if canvas.y_lo <= 0.0 <= canvas.y_hi:
        _, y0 = canvas.to_screen(canvas.x_lo, 0.0)
        parts.append(f'<line x1="{MARGIN}" y1="{_fmt(y0)}" x2="{WIDTH - MARGIN}" '
                     f'y2="{_fmt(y0)}" stroke="#cccccc" stroke-width="1"/>')


def render_curves(curves, path, view: str = "u3", events=(), labels=()) -> None:
    """Write curves (lists of 3D points) as one SVG.

    `events` are (kind, point) markers; `labels` annotate the plot corner.
    Raises ValueError when there is nothing to draw.
    """
    pts2 = []
    proj_curves = []
    for points, color in curves:
        pc = [project(p, view) for p in points]
        proj_curves.append((pc, color))
        pts2.extend(pc)
    proj_events = [(kind, project(p, view)) for kind, p in events]
    pts2.extend(p for _, p in proj_events)
    canvas = _Canvas([p[0] for p in pts2], [p[1] for p in pts2])

    parts: list[str] = []
    _header(parts)
    _axes(parts, canvas)
    for pc, color in proj_curves:
        pc = _downsample(pc)
        if len(pc) == 1:
            sx, sy = canvas.to_screen(*pc[0])
            parts.append(f'<circle cx="{_fmt(sx)}" cy="{_fmt(sy)}" r="3" fill="{color}"/>')
            continue
        coords = " ".join(f"{_fmt(canvas.to_screen(x, y)[0])},{_fmt(canvas.to_screen(x, y)[1])}"
                          for x, y in pc)
        parts.append(f'<polyline points="{coords}" fill="none" stroke="{color}" '
                     'stroke-width="1"/>')
    for kind, (x, y) in proj_events:
        sx, sy = canvas.to_screen(x, y)
        color = _EVENT_COLORS.get(kind, "#000000")
        parts.append(f'<circle cx="{_fmt(sx)}" cy="{_fmt(sy)}" r="2.5" fill="{color}">'
                     f'<title>{kind}</title></circle>')
    for i, text in enumerate(labels):
        parts.append(f'<text x="{MARGIN}" y="{20 + 14 * i}" font-family="monospace" '
                     f'font-size="12" fill="#333333">{text}</text>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts))
        fh.write("\n")


def render_trajectory(traj, path, view: str = "u3") -> None:
    """Phase portrait of one run with its events marked."""
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    points = [traj.state(i) for i in range(len(traj))]
    if traj.meta.get("space") == "layer":
        # layer runs live in (lam, x2, x3); draw lam on the vertical axis
        points = [(lam, p[1], p[2]) for lam, p in
                  ((traj.lam(i), traj.state(i)) for i in range(len(traj)))]
    events = [(e.kind, e.state) for e in traj.events]
    labels = [f"view={view} samples={len(traj)} kind={traj.meta.get('kind', '?')}"]
    render_curves([(points, "#1f77b4")], path, view=view, events=events, labels=labels)


def render_region_map(cells, curve, path) -> None:
    """Surface map: colored (x2, x3) region cells plus the fold curve
    projected into the surface (its x2, x3 components)."""
    if not cells:
        raise ValueError("empty region map")
    xs = [c[0] for c in cells]
    ys = [c[1] for c in cells]
    canvas = _Canvas(xs, ys)
    step_x = min(abs(b - a) for a, b in zip(sorted(set(xs))[:-1], sorted(set(xs))[1:])) \
        if len(set(xs)) > 1 else 1.0
    step_y = min(abs(b - a) for a, b in zip(sorted(set(ys))[:-1], sorted(set(ys))[1:])) \
        if len(set(ys)) > 1 else 1.0
    parts: list[str] = []
    _header(parts)
    w = step_x * canvas.sx
    h = step_y * canvas.sy
    for x2, x3, region in cells:
        sx, sy = canvas.to_screen(x2, x3)
        color = _REGION_COLORS.get(region, "#ffffff")
        parts.append(f'<rect x="{_fmt(sx - w / 2)}" y="{_fmt(sy - h / 2)}" '
                     f'width="{_fmt(w)}" height="{_fmt(h)}" fill="{color}"/>')
    _axes(parts, canvas)
    if curve is not None:
        pts = [(x2, x3) for _, x2, x3 in curve.points if canvas.contains(x2, x3)]
        if len(pts) > 1:
            coords = " ".join(
                f"{_fmt(canvas.to_screen(x, y)[0])},{_fmt(canvas.to_screen(x, y)[1])}"
                for x, y in pts)
            parts.append(f'<polyline points="{coords}" fill="none" stroke="#000000" '
                         'stroke-width="1.5"/>')
    parts.append('<text x="50" y="20" font-family="monospace" font-size="12" '
                 'fill="#333333">switching-surface region map (x2 horizontal, '
                 'x3 vertical)</text>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts))
        fh.write("\n")
