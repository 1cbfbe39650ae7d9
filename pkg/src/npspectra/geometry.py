"""Closed planar curves and the quadrature meshes built on them.

Two families are supported:

* smooth curves given by a 2π-periodic parametrization (ellipses, or a
  closed curve sampled uniformly in its parameter), discretized with the
  periodic trapezoid rule;
* straight-edged polygons, discretized with Gauss-Legendre panels whose
  breakpoints are algebraically graded toward the corners.

Normals always point out of the enclosed region, and smooth curves are
traversed counterclockwise.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

DEFAULT_GRADING = 3.0
DEFAULT_PANEL_ORDER = 8
MIN_MESH_NODES = 32


class GeometryError(ValueError):
    """Invalid geometry input (bad parameters, self-intersection, ...)."""


def _frozen(*arrays):
    out = []
    for a in arrays:
        a = np.array(a, dtype=float)
        a.setflags(write=False)
        out.append(a)
    return out


@dataclass(frozen=True, eq=False)
class Curve:
    """A sampled closed curve.

    ``params`` are the parameter values of the samples. For smooth curves the
    parameter runs over [0, 2π); for polygons it is ``edge index + fraction``
    so that corners sit at the integers listed in ``corner_params``.
    """

    nodes: np.ndarray
    normals: np.ndarray
    speeds: np.ndarray
    curvatures: np.ndarray
    params: np.ndarray
    is_smooth: bool
    corner_params: np.ndarray
    shape: object = field(repr=False, default=None)

    def __post_init__(self):
        nodes, normals, speeds, curv, params, corners = _frozen(
            self.nodes, self.normals, self.speeds, self.curvatures,
            self.params, self.corner_params)
        for name, val in [("nodes", nodes), ("normals", normals),
                          ("speeds", speeds), ("curvatures", curv),
                          ("params", params), ("corner_params", corners)]:
            object.__setattr__(self, name, val)

    def __len__(self):
        return len(self.nodes)

    @property
    def tangents(self):
        # outward normal is the tangent turned clockwise
        return np.column_stack([-self.normals[:, 1], self.normals[:, 0]])


@dataclass(frozen=True)
class CornerSpec:
    """Interior angles (radians) of a polygon, one per vertex."""

    angles: tuple

    def __post_init__(self):
        angles = tuple(float(w) for w in self.angles)
        for w in angles:
            if not (0.0 < w < 2 * np.pi) or np.isclose(w, np.pi, rtol=0, atol=1e-12):
                raise GeometryError(f"interior angle {w!r} outside (0, 2π) \\ {{π}}")
        object.__setattr__(self, "angles", angles)


def sharpest_corner(spec):
    """Return the sharpest corner of ``spec`` normalized into (0, π).

    The sharpest corner maximizes ``|π - ω_k|``; a reentrant angle ω > π is
    reported as its reflection 2π - ω, which has the same distance to π.
    """
    angles = spec.angles if isinstance(spec, CornerSpec) else tuple(spec)
    if len(angles) == 0:
        raise GeometryError("empty corner list")
    angles = np.asarray(angles, dtype=float)
    dev = np.abs(np.pi - angles)
    # among ties prefer the reentrant value
    best = max(range(len(angles)), key=lambda k: (round(dev[k], 13), angles[k] > np.pi))
    w = angles[best]
    return float(2 * np.pi - w) if w > np.pi else float(w)


# ---------------------------------------------------------------------------
# smooth curves


class _SmoothShape:
    """2π-periodic parametrization ``t -> (γ, γ', γ'')``."""

    def evaluate(self, t):
        raise NotImplementedError

    def sample(self, n):
        t = 2 * np.pi * np.arange(n) / n
        g, d1, d2 = self.evaluate(t)
        speed = np.hypot(d1[:, 0], d1[:, 1])
        normals = np.column_stack([d1[:, 1], -d1[:, 0]]) / speed[:, None]
        cross = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
        curvature = cross / speed**3
        return Curve(nodes=g, normals=normals, speeds=speed, curvatures=curvature,
                     params=t, is_smooth=True, corner_params=np.empty(0), shape=self)


class _Ellipse(_SmoothShape):
    def __init__(self, a, b, center=(0.0, 0.0)):
        self.a, self.b = float(a), float(b)
        self.center = np.asarray(center, dtype=float)

    def evaluate(self, t):
        c, s = np.cos(t), np.sin(t)
        a, b = self.a, self.b
        g = np.column_stack([a * c, b * s]) + self.center
        d1 = np.column_stack([-a * s, b * c])
        d2 = np.column_stack([-a * c, -b * s])
        return g, d1, d2


class _TrigInterpolant(_SmoothShape):
    """Trigonometric interpolant of points sampled uniformly in parameter."""

    def __init__(self, points):
        z = points[:, 0] + 1j * points[:, 1]
        n = len(z)
        coef = np.fft.fft(z) / n
        k = np.fft.fftfreq(n, d=1.0 / n)
        if n % 2 == 0:
            # split the Nyquist mode symmetrically so the interpolant is real-consistent
            nyq = n // 2
            coef = np.concatenate([coef, [coef[nyq] / 2]])
            coef[nyq] /= 2
            k = np.concatenate([k, [-k[nyq]]])
        self.coef = coef
        self.freq = k

    def evaluate(self, t):
        e = np.exp(1j * np.outer(t, self.freq))
        z = e @ self.coef
        z1 = e @ (1j * self.freq * self.coef)
        z2 = e @ (-(self.freq**2) * self.coef)
        as_xy = lambda w: np.column_stack([w.real, w.imag])  # noqa: E731
        return as_xy(z), as_xy(z1), as_xy(z2)


def _check_smooth_count(n, minimum):
    if int(n) != n or n < minimum or n % 2:
        raise GeometryError(f"node count must be an even integer >= {minimum}, got {n}")
    return int(n)


def make_ellipse(a, b, N, center=(0.0, 0.0)):
    """Ellipse ``(a cos t, b sin t)`` sampled at N equispaced parameters."""
    if not (a > 0 and b > 0):
        raise GeometryError(f"semi-axes must be positive, got a={a}, b={b}")
    if a < b:
        raise GeometryError(f"expected a >= b, got a={a}, b={b}")
    N = _check_smooth_count(N, 16)
    return _Ellipse(a, b, center).sample(N)


def make_circle(radius, N, center=(0.0, 0.0)):
    return make_ellipse(radius, radius, N, center)


def curve_from_samples(points, N=None):
    """Smooth closed curve through ``points`` (uniform in parameter, no repeat).

    The trigonometric interpolant of the samples is used as parametrization;
    clockwise input is reversed so that normals point outward.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 16:
        raise GeometryError("samples must be an (n, 2) array with n >= 16")
    if np.allclose(pts[0], pts[-1]):
        pts = pts[:-1]
    if _signed_area(pts) < 0:
        pts = pts[::-1]
    N = len(pts) if N is None else N
    N = _check_smooth_count(N, 16)
    return _TrigInterpolant(pts).sample(N)


def _signed_area(pts):
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)


# ---------------------------------------------------------------------------
# polygons


def grading_map(u, p):
    """Symmetric algebraic grading of [0, 1]; behaves like u**p at both ends."""
    u = np.asarray(u, dtype=float)
    if p == 1:
        return u
    return u**p / (u**p + (1 - u) ** p)


@lru_cache(maxsize=None)
def gauss_legendre(q):
    x, w = np.polynomial.legendre.leggauss(q)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _segments_cross(p1, p2, q1, q2):
    def orient(a, b, c):
        return np.sign((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))

    def on_seg(a, b, c):
        return (min(a[0], b[0]) - 1e-15 <= c[0] <= max(a[0], b[0]) + 1e-15
                and min(a[1], b[1]) - 1e-15 <= c[1] <= max(a[1], b[1]) + 1e-15)

    o1, o2 = orient(p1, p2, q1), orient(p1, p2, q2)
    o3, o4 = orient(q1, q2, p1), orient(q1, q2, p2)
    if o1 != o2 and o3 != o4:
        return True
    return ((o1 == 0 and on_seg(p1, p2, q1)) or (o2 == 0 and on_seg(p1, p2, q2))
            or (o3 == 0 and on_seg(q1, q2, p1)) or (o4 == 0 and on_seg(q1, q2, p2)))


def interior_angles(vertices):
    v = np.asarray(vertices, dtype=float)
    e_in = v - np.roll(v, 1, axis=0)
    e_out = np.roll(v, -1, axis=0) - v
    cross = e_in[:, 0] * e_out[:, 1] - e_in[:, 1] * e_out[:, 0]
    dot = np.einsum("ij,ij->i", e_in, e_out)
    turn = np.arctan2(cross, dot)
    return np.pi - turn


class _PolygonShape:
    def __init__(self, vertices, grading=DEFAULT_GRADING, panel_order=DEFAULT_PANEL_ORDER):
        v = np.asarray(vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2:
            raise GeometryError("vertices must be a list of 2D points")
        if len(v) > 3 and np.allclose(v[0], v[-1]):
            v = v[:-1]
        if len(v) < 3:
            raise GeometryError("a polygon needs at least 3 vertices")
        if grading < 1:
            raise GeometryError(f"grading exponent must be >= 1, got {grading}")
        m = len(v)
        edges = np.roll(v, -1, axis=0) - v
        lengths = np.hypot(edges[:, 0], edges[:, 1])
        if np.any(lengths <= 1e-14 * lengths.max()):
            raise GeometryError("polygon has a degenerate (zero-length) edge")
        for i in range(m):
            for j in range(i + 1, m):
                if j == i + 1 or (i == 0 and j == m - 1):
                    continue
                if _segments_cross(v[i], v[(i + 1) % m], v[j], v[(j + 1) % m]):
                    raise GeometryError(f"polygon edges {i} and {j} intersect")
        if _signed_area(v) <= 0:
            raise GeometryError("polygon vertices must be listed counterclockwise")
        angles = interior_angles(v)
        flat = np.abs(angles - np.pi) < 1e-9
        if np.any(flat):
            raise GeometryError(f"collinear edges at vertex {int(np.argmax(flat))} (angle π)")
        self.vertices = v
        self.edges = edges
        self.lengths = lengths
        self.angles = angles
        self.grading = float(grading)
        self.panel_order = int(panel_order)

    @property
    def perimeter(self):
        return float(self.lengths.sum())

    def allocate(self, N):
        """Split N nodes over the edges proportionally to edge length."""
        share = N * self.lengths / self.lengths.sum()
        n = np.floor(share).astype(int)
        rest = N - n.sum()
        order = np.argsort(-(share - n), kind="stable")
        n[order[:rest]] += 1
        if np.any(n < 4):
            raise GeometryError(f"N={N} leaves fewer than 4 nodes on some edge")
        return n

    def edge_panels(self, n_nodes, grading):
        """Panel breakpoints (fractions of the edge) and per-panel node counts."""
        q = self.panel_order
        m = max(2, int(round(n_nodes / q)))
        m = min(m, n_nodes // 2)
        counts = np.full(m, n_nodes // m)
        extra = n_nodes - counts.sum()
        # extra nodes go to the central panels, away from the corners
        mid = np.argsort(np.abs(np.arange(m) - (m - 1) / 2), kind="stable")
        counts[mid[:extra]] += 1
        breaks = grading_map(np.linspace(0.0, 1.0, m + 1), grading)
        return breaks, counts

    def discretize(self, counts_per_edge, grading):
        panels_a, panels_b, panel_edge, orders = [], [], [], []
        params, ref, weights, panel_of_node = [], [], [], []
        for k, n_k in enumerate(counts_per_edge):
            breaks, counts = self.edge_panels(int(n_k), grading)
            for lo, hi, q in zip(breaks[:-1], breaks[1:], counts):
                x, w = gauss_legendre(int(q))
                pid = len(orders)
                sigma = lo + (hi - lo) * (x + 1) / 2
                params.append(k + sigma)
                ref.append(x)
                weights.append(self.lengths[k] * (hi - lo) / 2 * w)
                panel_of_node.append(np.full(q, pid))
                panels_a.append(self.vertices[k] + lo * self.edges[k])
                panels_b.append(self.vertices[k] + hi * self.edges[k])
                panel_edge.append(k)
                orders.append(int(q))
        params = np.concatenate(params)
        edge = np.floor(params).astype(int)
        frac = params - edge
        nodes = self.vertices[edge] + frac[:, None] * self.edges[edge]
        tang = self.edges[edge] / self.lengths[edge][:, None]
        normals = np.column_stack([tang[:, 1], -tang[:, 0]])
        curve = Curve(nodes=nodes, normals=normals, speeds=self.lengths[edge],
                      curvatures=np.zeros(len(nodes)), params=params, is_smooth=False,
                      corner_params=np.arange(len(self.vertices), dtype=float), shape=self)
        panels = PanelSet(start=np.array(panels_a), end=np.array(panels_b),
                          edge=np.array(panel_edge), order=np.array(orders))
        return curve, np.concatenate(weights), np.concatenate(panel_of_node), np.concatenate(ref), panels


def make_polygon(vertices, nodes_per_edge=32, grading_exponent=DEFAULT_GRADING,
                 panel_order=DEFAULT_PANEL_ORDER):
    """Straight-edged polygon sampled with graded panels on each edge.

    Returns the sampled curve and the interior angles at the vertices.
    Vertices must be listed counterclockwise; the polygon must be simple and
    no two consecutive edges may be collinear.
    """
    shape = _PolygonShape(vertices, grading_exponent, panel_order)
    if nodes_per_edge < 4:
        raise GeometryError("need at least 4 nodes per edge")
    counts = np.full(len(shape.vertices), int(nodes_per_edge))
    curve = shape.discretize(counts, shape.grading)[0]
    return curve, CornerSpec(tuple(shape.angles))


# ---------------------------------------------------------------------------
# meshes


@dataclass(frozen=True, eq=False)
class PanelSet:
    """Straight Gauss-Legendre panels of a polygon mesh."""

    start: np.ndarray
    end: np.ndarray
    edge: np.ndarray
    order: np.ndarray

    def __len__(self):
        return len(self.order)

    @property
    def offsets(self):
        return np.concatenate([[0], np.cumsum(self.order)])

    @property
    def lengths(self):
        d = self.end - self.start
        return np.hypot(d[:, 0], d[:, 1])


@dataclass(frozen=True, eq=False)
class QuadratureMesh:
    """Quadrature rule on a curve: ``∫ f ds ≈ Σ weights[j] f(curve.nodes[j])``.

    ``nodes`` holds the parameter values. Smooth meshes use the periodic
    trapezoid rule (each node is its own panel); polygon meshes use
    Gauss-Legendre panels, described by ``panels`` and ``ref_nodes`` (the
    position of each node in its panel's reference interval [-1, 1]).
    """

    curve: Curve
    nodes: np.ndarray
    weights: np.ndarray
    panel_of_node: np.ndarray
    grading_exponent: float = 1.0
    panels: PanelSet | None = None
    ref_nodes: np.ndarray | None = None

    def __post_init__(self):
        if np.any(self.weights <= 0):
            raise GeometryError("quadrature weights must be strictly positive")

    def __len__(self):
        return len(self.weights)

    @property
    def is_smooth(self):
        return self.curve.is_smooth

    @property
    def points(self):
        return self.curve.nodes

    @property
    def normals(self):
        return self.curve.normals

    @property
    def perimeter(self):
        return float(self.weights.sum())

    def integrate(self, values):
        return float(np.dot(self.weights, values))

    def edge_of_node(self):
        if self.panels is None:
            return None
        return self.panels.edge[self.panel_of_node]

    def refined(self):
        """Mesh with twice the resolution (smooth: 2N nodes; polygon: panels halved)."""
        if self.is_smooth:
            return build_mesh(self.curve, 2 * len(self))
        shape = self.curve.shape
        p = self.panels
        starts, ends, edges, orders = [], [], [], []
        for a, b, e, q in zip(p.start, p.end, p.edge, p.order):
            mid = (a + b) / 2
            starts += [a, mid]
            ends += [mid, b]
            edges += [e, e]
            orders += [q, q]
        return _mesh_from_panels(shape, PanelSet(np.array(starts), np.array(ends),
                                                 np.array(edges), np.array(orders)),
                                 self.grading_exponent)

    def interpolate_to(self, other, values):
        """Interpolate nodal ``values`` onto the nodes of a refinement ``other``."""
        values = np.asarray(values)
        if self.is_smooth:
            return _fourier_resample(values, len(other))
        out = np.empty(len(other), dtype=values.dtype)
        off = self.panels.offsets
        # each coarse panel maps onto two consecutive fine panels
        for pid in range(len(self.panels)):
            x, _ = gauss_legendre(int(self.panels.order[pid]))
            fine = np.concatenate([(x - 1) / 2, (x + 1) / 2])
            lo = off[pid]
            fine_lo = other.panels.offsets[2 * pid]
            out[fine_lo:fine_lo + len(fine)] = _lagrange_eval(x, values[lo:lo + len(x)], fine)
        return out


def _lagrange_eval(xn, fn, x):
    from scipy.interpolate import BarycentricInterpolator

    return BarycentricInterpolator(xn, fn)(x)


def _fourier_resample(values, m):
    n = len(values)
    if m == n:
        return np.array(values)
    c = np.fft.fft(values)
    out = np.zeros(m, dtype=complex)
    h = n // 2
    out[:h] = c[:h]
    out[-h:] = c[-h:]
    if n % 2 == 0:
        out[h] = c[h] / 2
        out[-h] = c[h] / 2
    res = np.fft.ifft(out) * (m / n)
    return res.real if np.isrealobj(values) else res


def _mesh_from_panels(shape, panels, grading):
    nodes, weights, ref, params, owner = [], [], [], [], []
    for pid in range(len(panels)):
        q = int(panels.order[pid])
        x, w = gauss_legendre(q)
        a, b = panels.start[pid], panels.end[pid]
        k = int(panels.edge[pid])
        pts = a + np.outer((x + 1) / 2, b - a)
        nodes.append(pts)
        weights.append(np.hypot(*(b - a)) / 2 * w)
        ref.append(x)
        frac = np.hypot(*(pts - shape.vertices[k]).T) / shape.lengths[k]
        params.append(k + frac)
        owner.append(np.full(q, pid))
    nodes = np.concatenate(nodes)
    edge = panels.edge[np.concatenate(owner)]
    tang = shape.edges[edge] / shape.lengths[edge][:, None]
    curve = Curve(nodes=nodes, normals=np.column_stack([tang[:, 1], -tang[:, 0]]),
                  speeds=shape.lengths[edge], curvatures=np.zeros(len(nodes)),
                  params=np.concatenate(params), is_smooth=False,
                  corner_params=np.arange(len(shape.vertices), dtype=float), shape=shape)
    return QuadratureMesh(curve=curve, nodes=curve.params, weights=np.concatenate(weights),
                          panel_of_node=np.concatenate(owner), grading_exponent=grading,
                          panels=panels, ref_nodes=np.concatenate(ref))


def build_mesh(curve, N, grading_exponent=None):
    """Quadrature mesh with N nodes on the curve's underlying shape.

    Smooth curves get the N-point periodic trapezoid rule. Polygons get
    Gauss-Legendre panels on every edge, nodes split over edges in proportion
    to their length, panel breakpoints graded toward the corners with the
    given exponent (defaults to the polygon's own).
    """
    if int(N) != N or N < MIN_MESH_NODES:
        raise GeometryError(f"mesh needs at least {MIN_MESH_NODES} nodes, got {N}")
    N = int(N)
    shape = curve.shape
    if isinstance(shape, _SmoothShape):
        N = _check_smooth_count(N, MIN_MESH_NODES)
        c = shape.sample(N)
        w = c.speeds * (2 * np.pi / N)
        return QuadratureMesh(curve=c, nodes=c.params, weights=w, panel_of_node=np.arange(N))
    if isinstance(shape, _PolygonShape):
        grading = shape.grading if grading_exponent is None else float(grading_exponent)
        if grading < 1:
            raise GeometryError(f"grading exponent must be >= 1, got {grading}")
        c, w, owner, ref, panels = shape.discretize(shape.allocate(N), grading)
        return QuadratureMesh(curve=c, nodes=c.params, weights=w, panel_of_node=owner,
                              grading_exponent=grading, panels=panels, ref_nodes=ref)
    raise GeometryError("curve has no underlying shape to resample")


def geometry_from_dict(spec, N=256, grading=None):
    """Build a curve from a JSON-style dict (see README for the schema).

    Returns ``(curve, corner_spec_or_None)``.
    """
    if not isinstance(spec, dict) or "kind" not in spec:
        raise GeometryError("geometry must be an object with a 'kind' field")
    kind = spec["kind"]
    try:
        if kind == "ellipse":
            return make_ellipse(float(spec["a"]), float(spec["b"]), N,
                                spec.get("center", (0.0, 0.0))), None
        if kind == "circle":
            return make_circle(float(spec["radius"]), N, spec.get("center", (0.0, 0.0))), None
        if kind == "polygon":
            g = spec.get("grading", DEFAULT_GRADING) if grading is None else grading
            curve, corners = make_polygon(spec["vertices"], grading_exponent=float(g))
            return curve, corners
        if kind == "samples":
            return curve_from_samples(spec["points"]), None
    except KeyError as exc:
        raise GeometryError(f"geometry of kind {kind!r} is missing field {exc}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, GeometryError):
            raise
        raise GeometryError(f"malformed {kind!r} geometry: {exc}") from None
    raise GeometryError(f"unknown geometry kind {kind!r}")
