"""Aharonov-Bohm analogue on a finite 2-d square lattice.

Vertices are ``(x, y)`` with ``0 <= x < width`` and ``0 <= y < height``.
Link values are phases stored on rightward edges (``h[y, x]``: ``(x, y) ->
(x+1, y)``) and upward edges (``v[y, x]``: ``(x, y) -> (x, y+1)``); walking
an edge backwards negates its value.  Plaquette ``(px, py)`` is the unit
square with lower-left corner ``(px, py)``; its flux is the
counterclockwise loop phase.
"""

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from . import serial
from .errors import GaugeFixError, ParseError

GAUGE_FIX_TOL = 1e-12


class LatticeField:
    __slots__ = ("width", "height", "h", "v", "coupling")

    def __init__(self, width, height, h=None, v=None, coupling=1.0):
        if width < 2 or height < 2:
            raise ValueError("lattice needs at least 2x2 vertices")
        h = np.zeros((height, width - 1)) if h is None else np.array(h, dtype=float)
        v = np.zeros((height - 1, width)) if v is None else np.array(v, dtype=float)
        if h.shape != (height, width - 1) or v.shape != (height - 1, width):
            raise ValueError(f"link arrays have shapes {h.shape}, {v.shape} for {width}x{height}")
        if not (np.all(np.isfinite(h)) and np.all(np.isfinite(v))):
            raise ValueError("link values must be finite")
        h.flags.writeable = False
        v.flags.writeable = False
        self.width, self.height = int(width), int(height)
        self.h, self.v = h, v
        self.coupling = float(coupling)

    def __repr__(self):
        return f"LatticeField({self.width}x{self.height}, coupling={self.coupling})"

    @property
    def plaquette_shape(self):
        return (self.height - 1, self.width - 1)

    def plaquettes(self):
        return [(px, py) for py in range(self.height - 1) for px in range(self.width - 1)]

    def in_bounds(self, vertex):
        x, y = vertex
        return 0 <= x < self.width and 0 <= y < self.height

    def link(self, a, b):
        """Signed value of the directed edge ``a -> b``."""
        (x0, y0), (x1, y1) = a, b
        if not (self.in_bounds(a) and self.in_bounds(b)):
            raise ValueError(f"edge {a}->{b} leaves the lattice")
        if y0 == y1 and x1 == x0 + 1:
            return self.h[y0, x0]
        if y0 == y1 and x1 == x0 - 1:
            return -self.h[y0, x1]
        if x0 == x1 and y1 == y0 + 1:
            return self.v[y0, x0]
        if x0 == x1 and y1 == y0 - 1:
            return -self.v[y1, x0]
        raise ValueError(f"vertices {a} and {b} are not lattice neighbours")

    def with_links(self, h, v):
        return LatticeField(self.width, self.height, h, v, self.coupling)

    def __sub__(self, other):
        return self.with_links(self.h - other.h, self.v - other.v)


@dataclass(frozen=True)
class ScalarGauge:
    f: np.ndarray

    def __post_init__(self):
        f = np.array(self.f, dtype=float)
        if f.ndim != 2 or not np.all(np.isfinite(f)):
            raise ValueError("scalar gauge must be a finite 2-d array indexed [y, x]")
        f.flags.writeable = False
        object.__setattr__(self, "f", f)


@dataclass(frozen=True)
class Loop:
    """Closed walk given by its vertices; first and last coincide."""

    vertices: tuple

    def __post_init__(self):
        verts = tuple((int(x), int(y)) for x, y in self.vertices)
        object.__setattr__(self, "vertices", verts)
        if not verts or verts[0] != verts[-1]:
            raise ValueError("loop is not closed")
        for a, b in self.edges:
            if abs(a[0] - b[0]) + abs(a[1] - b[1]) != 1:
                raise ValueError(f"loop step {a}->{b} is not a lattice edge")

    @property
    def edges(self):
        return list(zip(self.vertices[:-1], self.vertices[1:]))

    def reversed(self):
        return Loop(self.vertices[::-1])

    @classmethod
    def rectangle(cls, x0, y0, x1, y1):
        """Counterclockwise boundary of the box ``[x0, x1] x [y0, y1]``."""
        if x1 <= x0 or y1 <= y0:
            raise ValueError("rectangle needs x1 > x0 and y1 > y0")
        verts = [(x, y0) for x in range(x0, x1)]
        verts += [(x1, y) for y in range(y0, y1)]
        verts += [(x, y1) for x in range(x1, x0, -1)]
        verts += [(x0, y) for y in range(y1, y0 - 1, -1)]
        return cls(verts)


def _path_phase(field, vertices):
    # fsum makes reversal an exact negation
    return math.fsum(float(field.link(a, b)) for a, b in zip(vertices[:-1], vertices[1:]))


def loop_phase(field, loop):
    """Signed sum of link values around ``loop``."""
    if not isinstance(loop, Loop):
        loop = Loop(loop)
    return _path_phase(field, loop.vertices)


def plaquette_flux(field, plaq):
    px, py = plaq
    if not (0 <= px < field.width - 1 and 0 <= py < field.height - 1):
        raise IndexError(f"plaquette {plaq} out of bounds")
    return float(field.h[py, px] + field.v[py, px + 1] - field.h[py + 1, px] - field.v[py, px])


def flux_map(field):
    """All plaquette fluxes as an array indexed ``[py, px]``."""
    return field.h[:-1, :] + field.v[:, 1:] - field.h[1:, :] - field.v[:, :-1]


def apply_scalar_gauge(field, g):
    """``A_e -> A_e + f(head) - f(tail)`` on every edge."""
    f = g.f if isinstance(g, ScalarGauge) else ScalarGauge(g).f
    if f.shape != (field.height, field.width):
        raise ValueError(f"gauge has shape {f.shape}, lattice needs {(field.height, field.width)}")
    return field.with_links(field.h + (f[:, 1:] - f[:, :-1]), field.v + (f[1:, :] - f[:-1, :]))


def solenoid_field(width, height, plaq, phi, string="right", coupling=1.0):
    """Field whose only non-zero plaquette flux is ``phi`` at ``plaq``.

    ``string="right"`` puts ``phi`` on the upward links of row ``py`` from
    ``px+1`` to the right boundary; ``string="up"`` puts ``-phi`` on the
    rightward links of column ``px`` from ``py+1`` to the top boundary.
    """
    px, py = plaq
    if not (0 <= px < width - 1 and 0 <= py < height - 1):
        raise IndexError(f"plaquette {plaq} out of bounds")
    h = np.zeros((height, width - 1))
    v = np.zeros((height - 1, width))
    if string == "right":
        v[py, px + 1:] = phi
    elif string == "up":
        h[py + 1:, px] = -phi
    else:
        raise ValueError(f"unknown string direction {string!r}")
    return LatticeField(width, height, h, v, coupling)


def winding_numbers(loop, width, height):
    """Winding number of ``loop`` around every plaquette centre.

    Signed crossing count of the rightward ray from each centre: an upward
    edge to the right of the centre counts +1, a downward one -1.
    """
    if not isinstance(loop, Loop):
        loop = Loop(loop)
    w = np.zeros((height - 1, width - 1), dtype=int)
    for (x0, y0), (x1, y1) in loop.edges:
        if x0 != x1:
            continue
        ym = min(y0, y1)
        if 0 <= ym < height - 1:
            w[ym, : min(x0, width - 1)] += 1 if y1 > y0 else -1
    return w


def enclosed_flux(field, loop):
    """Winding-weighted sum of plaquette fluxes (discrete Stokes side)."""
    return float(np.sum(winding_numbers(loop, field.width, field.height) * flux_map(field)))


def _check_region(field, region):
    region = {(int(px), int(py)) for px, py in region}
    if not region:
        raise GaugeFixError("not-simply-connected", "region is empty")
    for px, py in region:
        if not (0 <= px < field.width - 1 and 0 <= py < field.height - 1):
            raise GaugeFixError("not-simply-connected", f"plaquette {(px, py)} out of bounds")
    start = min(region)
    seen, todo = {start}, deque([start])
    while todo:
        px, py = todo.popleft()
        for nb in ((px + 1, py), (px - 1, py), (px, py + 1), (px, py - 1)):
            if nb in region and nb not in seen:
                seen.add(nb)
                todo.append(nb)
    if seen != region:
        raise GaugeFixError("not-simply-connected", "region is not edge-connected")
    # holes: complement cells (in a one-cell padded frame) cut off from the outside
    pw, ph = field.width - 1, field.height - 1
    outside = {(x, y) for x in range(-1, pw + 1) for y in range(-1, ph + 1)} - region
    start = (-1, -1)
    seen, todo = {start}, deque([start])
    while todo:
        px, py = todo.popleft()
        for nb in ((px + 1, py), (px - 1, py), (px, py + 1), (px, py - 1)):
            if nb in outside and nb not in seen:
                seen.add(nb)
                todo.append(nb)
    if seen != outside:
        raise GaugeFixError("not-simply-connected", "region has a hole")
    return region


def region_edges(region):
    """Edges (lower vertex first) of every plaquette in ``region``."""
    edges = set()
    for px, py in region:
        edges |= {
            ((px, py), (px + 1, py)),
            ((px + 1, py), (px + 1, py + 1)),
            ((px, py + 1), (px + 1, py + 1)),
            ((px, py), (px, py + 1)),
        }
    return sorted(edges)


def gauge_fix_region(field, region, tol=GAUGE_FIX_TOL):
    """Scalar gauge zeroing every link of ``region`` (a set of plaquettes).

    Integrates the field along a breadth-first spanning tree of the region's
    vertices; ``f`` is zero off the region.  Raises :class:`GaugeFixError`
    with ``"not-simply-connected"`` or ``"flux-obstructed"``.
    """
    region = _check_region(field, region)
    for p in sorted(region):
        if abs(plaquette_flux(field, p)) > tol:
            raise GaugeFixError("flux-obstructed", f"plaquette {p} carries flux")
    adj = {}
    for a, b in region_edges(region):
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    f = np.zeros((field.height, field.width))
    root = min(adj)
    seen, todo = {root}, deque([root])
    while todo:
        a = todo.popleft()
        for b in sorted(adj[a]):
            if b not in seen:
                # A'(a->b) = A(a->b) + f(b) - f(a) = 0
                f[b[1], b[0]] = f[a[1], a[0]] - field.link(a, b)
                seen.add(b)
                todo.append(b)
    return ScalarGauge(f)


def relating_gauge(a, b):
    """Scalar gauge ``f`` with ``apply_scalar_gauge(a, f) == b`` (same fluxes)."""
    if (a.width, a.height) != (b.width, b.height):
        raise ValueError("lattices differ in size")
    return gauge_fix_region(a - b, a.plaquettes())


def homology_obstruction_demo(field, loop, tol=GAUGE_FIX_TOL):
    """Compare a loop's phase with the plaquette phases it encloses.

    Every loop is, as a chain, the winding-weighted sum of elementary
    plaquette loops; if its phase is non-zero it cannot be written as a sum
    of loops whose phases all vanish.
    """
    if not isinstance(loop, Loop):
        loop = Loop(loop)
    phase = loop_phase(field, loop)
    fluxes = flux_map(field)
    winding = winding_numbers(loop, field.width, field.height)
    enclosed = float(np.sum(winding * fluxes))
    carrying = [
        [int(px), int(py)] for py, px in zip(*np.nonzero(np.abs(fluxes) > tol))
    ]
    return {
        "loop_phase": phase,
        "plaquette_phases": fluxes.tolist(),
        "winding": winding.tolist(),
        "enclosed_flux": enclosed,
        "stokes_residual": abs(phase - enclosed),
        "flux_plaquettes": carrying,
        "verdict": "obstructed" if abs(phase) > tol else "decomposable",
    }


def fringe_shift(field, path1, path2):
    """Interference phase ``e * (phase(path1) - phase(path2))``.

    Positive when ``path1`` followed by ``path2`` reversed winds
    counterclockwise around the enclosed flux.
    """
    path1 = [tuple(p) for p in path1]
    path2 = [tuple(p) for p in path2]
    if len(path1) < 1 or len(path2) < 1 or path1[0] != path2[0] or path1[-1] != path2[-1]:
        raise ValueError("paths must share start and end vertices")
    loop = Loop(path1 + path2[::-1][1:])
    return field.coupling * loop_phase(field, loop)


# -- JSON and demos -------------------------------------------------------

def lattice_from_json(doc):
    if not isinstance(doc, dict):
        raise ParseError("lattice must be a JSON object")
    try:
        links = doc.get("links", {})
        return LatticeField(
            int(doc["width"]),
            int(doc["height"]),
            links.get("h"),
            links.get("v"),
            float(doc.get("coupling", 1.0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"invalid lattice: {exc}") from exc


def lattice_to_json(field):
    return {
        "version": serial.FORMAT_VERSION,
        "width": field.width,
        "height": field.height,
        "coupling": field.coupling,
        "links": {"h": field.h.tolist(), "v": field.v.tolist()},
    }


def _demo(phi):
    field = solenoid_field(4, 4, (1, 1), phi)
    return {
        "field": field,
        "loops": {
            "elementary": Loop.rectangle(1, 1, 2, 2),
            "enclosing": Loop.rectangle(0, 0, 3, 3),
            "beside": Loop.rectangle(0, 0, 1, 3),
        },
        "regions": {
            "l-shape": [(0, 0), (1, 0), (2, 0), (2, 1), (2, 2)],
            "with-solenoid": [(1, 0), (1, 1)],
            "ring": [p for p in field.plaquettes() if p != (1, 1)],
        },
        "paths": (
            [(0, 0), (1, 0), (2, 0), (3, 0), (3, 1), (3, 2), (3, 3)],
            [(0, 0), (0, 1), (0, 2), (0, 3), (1, 3), (2, 3), (3, 3)],
        ),
    }


BUILTIN_DEMOS = {
    "solenoid-pi3": lambda: _demo(math.pi / 3),
    "solenoid-zero": lambda: _demo(0.0),
}


def scenario_from_json(doc):
    """Lattice document plus optional ``loops``, ``regions``, ``paths``.

    Defaults: the boundary loop, the whole lattice as one region, and the
    two boundary paths from the lower-left to the upper-right corner.
    """
    field = lattice_from_json(doc)
    w, h = field.width - 1, field.height - 1
    try:
        raw_loops = doc.get("loops", {"boundary": Loop.rectangle(0, 0, w, h).vertices})
        if isinstance(raw_loops, list):
            raw_loops = {f"loop{i}": lp for i, lp in enumerate(raw_loops)}
        loops = {k: Loop(lp) for k, lp in raw_loops.items()}
        raw_regions = doc.get("regions", {"all": field.plaquettes()})
        if isinstance(raw_regions, list):
            raw_regions = {f"region{i}": r for i, r in enumerate(raw_regions)}
        regions = {k: [tuple(p) for p in r] for k, r in raw_regions.items()}
        paths = doc.get("paths")
        if paths is None:
            lower = Loop.rectangle(0, 0, w, h).vertices
            paths = (lower[: w + h + 1], lower[::-1][: w + h + 1])
        if len(paths) != 2:
            raise ValueError("'paths' must hold exactly two vertex lists")
        paths = tuple([tuple(p) for p in path] for path in paths)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"invalid lattice scenario: {exc}") from exc
    return {"field": field, "loops": loops, "regions": regions, "paths": paths}


def ab_report(scenario, tol=GAUGE_FIX_TOL):
    field = scenario["field"]
    loops = {name: homology_obstruction_demo(field, lp, tol) for name, lp in scenario["loops"].items()}
    fixes = {}
    for name, region in scenario["regions"].items():
        try:
            g = gauge_fix_region(field, region, tol)
            fixed = apply_scalar_gauge(field, g)
            residual = max(abs(fixed.link(a, b)) for a, b in region_edges(region))
            fixes[name] = {"status": "ok", "max_interior_link": residual}
        except GaugeFixError as exc:
            fixes[name] = {"status": "failure", "reason": exc.reason}
    main = "enclosing" if "enclosing" in loops else next(iter(loops))
    return {
        "flux_map": flux_map(field).tolist(),
        "loops": {k: {"phase": r["loop_phase"], "verdict": r["verdict"],
                      "stokes_residual": r["stokes_residual"]} for k, r in loops.items()},
        "homology": {"loop": main, **loops[main]},
        "gauge_fix": fixes,
        "fringe_shift": fringe_shift(field, *scenario["paths"]),
        "coupling": field.coupling,
    }
