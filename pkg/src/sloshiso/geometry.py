"""Free-surface shapes, symmetry checks, and nested triangle meshes.

Shapes are planar convex domains given either exactly (polygons) or as
inscribed polygons of a smooth boundary curve (ellipse, stadium,
superellipse).  Curved boundaries keep a normalized arc parameter per
boundary vertex so that midpoint refinement can project new boundary
nodes back onto the true curve.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, IO, Optional

import numpy as np
from scipy import integrate
from scipy.spatial import cKDTree

POLYGONAL_KINDS = ("rectangle", "regular_polygon", "convex_polygon")
CURVED_KINDS = ("ellipse", "stadium", "superellipse")
KINDS = POLYGONAL_KINDS + CURVED_KINDS

#: parameter names accepted per shape kind
_PARAM_NAMES = {
    "rectangle": ("width", "height"),
    "regular_polygon": ("n", "side"),
    "convex_polygon": (),
    "ellipse": ("a", "b"),
    "stadium": ("radius", "length"),
    "superellipse": ("a", "b", "p"),
}

DEFAULT_BOUNDARY_POINTS = 256
MIN_BOUNDARY_POINTS = 16

#: quadrature target for "exact" perimeter/area of curved kinds
_QUAD_RTOL = 1e-12


class InvalidParameterError(ValueError):
    """A shape parameter is out of its admissible range."""


@dataclass(frozen=True)
class ShapeSpec:
    """Parametric description of a free surface.

    ``params`` holds the named real parameters of the kind (all lengths
    strictly positive).  ``boundary_points`` sets the inscribed-polygon
    resolution for curved kinds and is ignored for polygonal ones.
    ``vertices`` is used only by ``convex_polygon`` (counterclockwise,
    strictly convex).
    """

    kind: str
    params: dict = field(default_factory=dict)
    boundary_points: int = DEFAULT_BOUNDARY_POINTS
    vertices: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidParameterError(f"unknown shape kind {self.kind!r}")
        allowed = set(_PARAM_NAMES[self.kind])
        unknown = set(self.params) - allowed
        if unknown:
            raise InvalidParameterError(
                f"{self.kind}: unknown parameters {sorted(unknown)}")
        missing = allowed - set(self.params)
        if missing:
            raise InvalidParameterError(
                f"{self.kind}: missing parameters {sorted(missing)}")
        for name in allowed:
            value = self.params[name]
            if name == "n":
                if int(value) != value or value < 3:
                    raise InvalidParameterError(
                        f"regular_polygon: n must be an integer >= 3, got {value}")
            elif name == "p":
                if not value >= 1.0:
                    raise InvalidParameterError(
                        f"superellipse: exponent p must be >= 1 for convexity, got {value}")
            elif not value > 0.0:
                raise InvalidParameterError(
                    f"{self.kind}: parameter {name} must be positive, got {value}")
        if self.kind == "convex_polygon":
            if self.vertices is None or len(self.vertices) < 3:
                raise InvalidParameterError(
                    "convex_polygon: needs a vertex list of length >= 3")
            _require_strictly_convex_ccw(np.asarray(self.vertices, dtype=float))
        if self.kind in CURVED_KINDS and self.boundary_points < MIN_BOUNDARY_POINTS:
            raise InvalidParameterError(
                f"{self.kind}: boundary_points must be >= {MIN_BOUNDARY_POINTS}")

    @property
    def is_curved(self) -> bool:
        return self.kind in CURVED_KINDS


@dataclass
class Shape:
    """A free surface with its boundary polygon and exact measures.

    ``perimeter_exact`` / ``area_exact`` are closed forms for polygonal
    kinds and adaptive-quadrature values for curved kinds; ``vertices``
    is the (inscribed) boundary polygon, counterclockwise.
    """

    spec: ShapeSpec
    vertices: np.ndarray
    perimeter_exact: float
    area_exact: float
    centroid: np.ndarray
    # curved kinds only: normalized boundary parameter of each vertex and
    # the curve map used to project refined boundary nodes
    boundary_params: Optional[np.ndarray] = None
    curve: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        self.vertices = np.ascontiguousarray(self.vertices, dtype=float)
        self.vertices.setflags(write=False)

    @property
    def polygon_perimeter(self) -> float:
        return poly_perimeter(self.vertices)

    @property
    def polygon_area(self) -> float:
        return poly_area(self.vertices)


@dataclass
class SymmetryReport:
    """Convexity and reflection axes of a shape's boundary polygon."""

    is_convex: bool
    axes: list  # (point, unit direction) pairs, sorted by angle in [0, pi)
    has_two_axes: bool
    is_simply_connected: bool = True


@dataclass
class TriMesh:
    """Conforming triangle mesh with uniform-refinement lineage.

    Refinement never renumbers existing nodes, so for polygonal shapes
    the level-(k+1) node set contains the level-k node set.
    """

    nodes: np.ndarray
    triangles: np.ndarray
    boundary_nodes: np.ndarray
    refinement_level: int = 0
    parent: Optional["TriMesh"] = None
    # projection data for curved boundaries: node index -> curve parameter
    boundary_params: Optional[dict] = None
    curve: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        self.nodes = np.ascontiguousarray(self.nodes, dtype=float)
        self.triangles = np.ascontiguousarray(self.triangles, dtype=np.int64)
        self.boundary_nodes = np.ascontiguousarray(self.boundary_nodes, dtype=np.int64)
        self.nodes.setflags(write=False)
        self.triangles.setflags(write=False)
        self.boundary_nodes.setflags(write=False)

    @property
    def num_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def num_triangles(self) -> int:
        return self.triangles.shape[0]

    def triangle_areas(self) -> np.ndarray:
        p = self.nodes[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def area(self) -> float:
        return float(self.triangle_areas().sum())


# ---------------------------------------------------------------------------
# polygon helpers

def poly_perimeter(vertices: np.ndarray) -> float:
    rolled = np.roll(vertices, -1, axis=0)
    return float(np.linalg.norm(rolled - vertices, axis=1).sum())


def poly_area(vertices: np.ndarray) -> float:
    x, y = vertices[:, 0], vertices[:, 1]
    xr, yr = np.roll(x, -1), np.roll(y, -1)
    return float(0.5 * np.sum(x * yr - xr * y))


def poly_centroid(vertices: np.ndarray) -> np.ndarray:
    x, y = vertices[:, 0], vertices[:, 1]
    xr, yr = np.roll(x, -1), np.roll(y, -1)
    cross = x * yr - xr * y
    area = 0.5 * cross.sum()
    cx = np.sum((x + xr) * cross) / (6.0 * area)
    cy = np.sum((y + yr) * cross) / (6.0 * area)
    return np.array([cx, cy])


def _require_strictly_convex_ccw(vertices: np.ndarray) -> None:
    n = len(vertices)
    prev = vertices[np.arange(n) - 1]
    nxt = vertices[(np.arange(n) + 1) % n]
    e0 = vertices - prev
    e1 = nxt - vertices
    cross = e0[:, 0] * e1[:, 1] - e0[:, 1] * e1[:, 0]
    scale = np.abs(e0).max() * np.abs(e1).max()
    if np.any(cross <= 1e-12 * scale):
        raise InvalidParameterError(
            "convex_polygon: vertices must be strictly convex and counterclockwise")


# ---------------------------------------------------------------------------
# boundary curves for the curved kinds (normalized parameter t in [0, 1))

def _quadrant_trig(t) -> tuple:
    """cos/sin of 2 pi t with exact four-fold symmetry.

    The angle is folded into the first quadrant before evaluation, so
    parameter sets that are symmetric under t -> -t or t -> 1/2 - t map
    to exactly symmetric point sets (plain cos/sin leave ~1e-16 residue
    at the axis crossings, which power-law boundary maps amplify).
    """
    t = np.asarray(t, dtype=float) % 1.0
    q = np.floor(4.0 * t).astype(int) % 4
    w = t - 0.25 * q
    ang = 2.0 * np.pi * w
    ca, sa = np.cos(ang), np.sin(ang)
    c = np.choose(q, [ca, -sa, -ca, sa])
    s = np.choose(q, [sa, ca, -sa, -ca])
    return c, s


def _ellipse_curve(a: float, b: float) -> Callable[[np.ndarray], np.ndarray]:
    def curve(t):
        c, s = _quadrant_trig(t)
        return np.stack([a * c, b * s], axis=-1)
    return curve


def _superellipse_curve(a: float, b: float, p: float) -> Callable[[np.ndarray], np.ndarray]:
    def curve(t):
        c, s = _quadrant_trig(t)
        x = a * np.sign(c) * np.abs(c) ** (2.0 / p)
        y = b * np.sign(s) * np.abs(s) ** (2.0 / p)
        return np.stack([x, y], axis=-1)
    return curve


def _stadium_curve(r: float, l: float) -> Callable[[np.ndarray], np.ndarray]:
    # arc length from the rightmost point (l/2 + r, 0), counterclockwise
    perim = 2.0 * l + 2.0 * np.pi * r

    def curve(t):
        s = (np.asarray(t, dtype=float) % 1.0) * perim
        s = np.atleast_1d(s)
        pts = np.empty(s.shape + (2,))
        quarter = 0.5 * np.pi * r
        # right cap, upper quarter
        seg = s < quarter
        ang = s[seg] / r
        pts[seg] = np.stack([0.5 * l + r * np.cos(ang), r * np.sin(ang)], axis=-1)
        # top edge
        seg = (s >= quarter) & (s < quarter + l)
        u = s[seg] - quarter
        pts[seg] = np.stack([0.5 * l - u, np.full_like(u, r)], axis=-1)
        # left cap (half circle)
        seg = (s >= quarter + l) & (s < 3 * quarter + l)
        ang = 0.5 * np.pi + (s[seg] - quarter - l) / r
        pts[seg] = np.stack([-0.5 * l + r * np.cos(ang), r * np.sin(ang)], axis=-1)
        # bottom edge
        seg = (s >= 3 * quarter + l) & (s < 3 * quarter + 2 * l)
        u = s[seg] - 3 * quarter - l
        pts[seg] = np.stack([-0.5 * l + u, np.full_like(u, -r)], axis=-1)
        # right cap, lower quarter
        seg = s >= 3 * quarter + 2 * l
        ang = -0.5 * np.pi + (s[seg] - 3 * quarter - 2 * l) / r
        pts[seg] = np.stack([0.5 * l + r * np.cos(ang), r * np.sin(ang)], axis=-1)
        if np.isscalar(t) or np.ndim(t) == 0:
            return pts[0]
        return pts
    return curve


def _ellipse_perimeter(a: float, b: float) -> float:
    def speed(theta):
        return math.hypot(a * math.sin(theta), b * math.cos(theta))
    # quarter arc suffices by symmetry
    val, _ = integrate.quad(speed, 0.0, 0.5 * np.pi, epsabs=0.0, epsrel=_QUAD_RTOL)
    return 4.0 * val


def _superellipse_quadrature(a: float, b: float, p: float) -> tuple:
    # One quadrant, split where |x/a|^p = 1/2 so each graph piece has a
    # bounded slope (the full graph has a derivative singularity at the
    # axis crossing for p > 2).
    def y_of(x):
        return b * (1.0 - (x / a) ** p) ** (1.0 / p)

    def x_of(y):
        return a * (1.0 - (y / b) ** p) ** (1.0 / p)

    def speed_x(x):
        u = (x / a) ** p
        dy = -(b / a) * (x / a) ** (p - 1.0) * (1.0 - u) ** (1.0 / p - 1.0)
        return math.hypot(1.0, dy)

    def speed_y(y):
        u = (y / b) ** p
        dx = -(a / b) * (y / b) ** (p - 1.0) * (1.0 - u) ** (1.0 / p - 1.0)
        return math.hypot(1.0, dx)

    x_split = a * 2.0 ** (-1.0 / p)
    y_split = b * 2.0 ** (-1.0 / p)
    arc1, _ = integrate.quad(speed_x, 0.0, x_split, epsabs=0.0, epsrel=_QUAD_RTOL)
    arc2, _ = integrate.quad(speed_y, 0.0, y_split, epsabs=0.0, epsrel=_QUAD_RTOL)
    area1, _ = integrate.quad(y_of, 0.0, x_split, epsabs=0.0, epsrel=_QUAD_RTOL)
    area2, _ = integrate.quad(x_of, 0.0, y_split, epsabs=0.0, epsrel=_QUAD_RTOL)
    area = area1 + area2 - x_split * y_split
    return 4.0 * (arc1 + arc2), 4.0 * area


# ---------------------------------------------------------------------------
# shape construction

def build_shape(spec: ShapeSpec) -> Shape:
    """Construct a Shape from its spec, with exact perimeter and area.

    Polygonal kinds get closed-form values; for curved kinds the values
    come from adaptive quadrature (relative target 1e-10 or better) and
    the vertex list is the inscribed polygon at ``spec.boundary_points``
    symmetric samples of the boundary curve.
    """
    kind = spec.kind
    pr = spec.params
    if kind == "rectangle":
        w, h = pr["width"], pr["height"]
        vertices = np.array([
            [0.5 * w, -0.5 * h], [0.5 * w, 0.5 * h],
            [-0.5 * w, 0.5 * h], [-0.5 * w, -0.5 * h]])
        return Shape(spec, vertices, 2.0 * (w + h), w * h, np.zeros(2))
    if kind == "regular_polygon":
        n, side = int(pr["n"]), pr["side"]
        circumradius = side / (2.0 * math.sin(math.pi / n))
        ang = 2.0 * np.pi * np.arange(n) / n
        vertices = circumradius * np.stack([np.cos(ang), np.sin(ang)], axis=-1)
        area = 0.25 * n * side * side / math.tan(math.pi / n)
        return Shape(spec, vertices, n * side, area, np.zeros(2))
    if kind == "convex_polygon":
        vertices = np.asarray(spec.vertices, dtype=float)
        return Shape(spec, vertices, poly_perimeter(vertices),
                     poly_area(vertices), poly_centroid(vertices))

    # curved kinds: inscribed polygon plus projection data
    if kind == "ellipse":
        a, b = pr["a"], pr["b"]
        curve = _ellipse_curve(a, b)
        perimeter = _ellipse_perimeter(a, b)
        area = math.pi * a * b
    elif kind == "superellipse":
        a, b, p = pr["a"], pr["b"], pr["p"]
        curve = _superellipse_curve(a, b, p)
        perimeter, area = _superellipse_quadrature(a, b, p)
    else:  # stadium
        r, l = pr["radius"], pr["length"]
        curve = _stadium_curve(r, l)
        perimeter = 2.0 * l + 2.0 * np.pi * r
        area = 2.0 * r * l + np.pi * r * r
    t = np.arange(spec.boundary_points) / spec.boundary_points
    vertices = curve(t)
    return Shape(spec, vertices, perimeter, area, np.zeros(2),
                 boundary_params=t, curve=curve)


# ---------------------------------------------------------------------------
# symmetry detection

def _boundary_second_moment(vertices: np.ndarray, centroid: np.ndarray) -> np.ndarray:
    # line integral of (x-c)(x-c)^T over the boundary polyline
    a = vertices - centroid
    b = np.roll(vertices, -1, axis=0) - vertices
    lengths = np.linalg.norm(b, axis=1)
    moment = np.zeros((2, 2))
    outer_aa = np.einsum("ni,nj->nij", a, a)
    outer_ab = np.einsum("ni,nj->nij", a, b)
    outer_bb = np.einsum("ni,nj->nij", b, b)
    sym_ab = outer_ab + np.transpose(outer_ab, (0, 2, 1))
    contrib = outer_aa + 0.5 * sym_ab + outer_bb / 3.0
    moment = np.einsum("n,nij->ij", lengths, contrib)
    return moment


def check_symmetry(shape: Shape, rtol: float = 1e-9) -> SymmetryReport:
    """Find the reflection axes of the boundary vertex set.

    Candidate directions are the principal axes of the boundary's
    second-moment tensor together with every centroid-to-vertex and
    centroid-to-edge-midpoint direction.  An axis is accepted when the
    reflection maps the vertex set onto itself within ``rtol`` times the
    diameter (taken as twice the maximum centroid distance).
    """
    vertices = shape.vertices
    centroid = poly_centroid(vertices)
    rel = vertices - centroid
    radii = np.linalg.norm(rel, axis=1)
    diameter = 2.0 * radii.max()
    tol = rtol * diameter

    # convexity: no clockwise turns along the boundary
    nxt = np.roll(rel, -1, axis=0)
    prv = np.roll(rel, 1, axis=0)
    e0 = rel - prv
    e1 = nxt - rel
    cross = e0[:, 0] * e1[:, 1] - e0[:, 1] * e1[:, 0]
    is_convex = bool(np.all(cross > -tol * diameter))

    mids = 0.5 * (rel + nxt)
    moment = _boundary_second_moment(vertices, centroid)
    _, eigvecs = np.linalg.eigh(moment)
    candidates = np.vstack([eigvecs.T, rel, mids])
    norms = np.linalg.norm(candidates, axis=1)
    candidates = candidates[norms > tol] / norms[norms > tol, None]

    # dedupe directions modulo pi
    angles = np.mod(np.arctan2(candidates[:, 1], candidates[:, 0]), np.pi)
    # folding can leave near-0 and near-pi duplicates; canonicalize
    angles = np.where(np.pi - angles < 1e-12, 0.0, angles)
    order = np.argsort(angles)
    unique_angles = []
    for ang in angles[order]:
        if not unique_angles or ang - unique_angles[-1] > 1e-9:
            unique_angles.append(float(ang))

    tree = cKDTree(rel)
    axes = []
    for ang in unique_angles:
        d = np.array([math.cos(ang), math.sin(ang)])
        house = 2.0 * np.outer(d, d) - np.eye(2)
        reflected = rel @ house.T
        dist, _ = tree.query(reflected, k=1)
        if dist.max() <= tol:
            axes.append((centroid.copy(), d))
    return SymmetryReport(is_convex=is_convex, axes=axes,
                          has_two_axes=len(axes) >= 2)


# ---------------------------------------------------------------------------
# triangulation

def triangulate(shape: Shape, level: int = 0) -> TriMesh:
    """Fan-triangulate from the centroid, then refine ``level`` times.

    Valid for convex shapes only.  Boundary vertices keep indices
    0..n_boundary-1 at level 0; the centroid is the last node.
    """
    if level < 0:
        raise ValueError("level must be >= 0")
    vertices = shape.vertices
    n = len(vertices)
    centroid = poly_centroid(vertices)
    nodes = np.vstack([vertices, centroid])
    triangles = np.array([[i, (i + 1) % n, n] for i in range(n)], dtype=np.int64)
    boundary_params = None
    if shape.boundary_params is not None:
        boundary_params = {i: float(t) for i, t in enumerate(shape.boundary_params)}
    mesh = TriMesh(nodes, triangles, np.arange(n, dtype=np.int64),
                   refinement_level=0, parent=None,
                   boundary_params=boundary_params, curve=shape.curve)
    for _ in range(level):
        mesh = refine(mesh)
    return mesh


def _circular_midpoint(t0: float, t1: float) -> float:
    delta = (t1 - t0 + 0.5) % 1.0 - 0.5
    return (t0 + 0.5 * delta) % 1.0


def refine(mesh: TriMesh) -> TriMesh:
    """One uniform quadrisection (each triangle into four).

    New boundary-edge midpoints are projected onto the true boundary
    curve when the mesh carries one; node indices of the parent mesh are
    preserved.
    """
    tris = mesh.triangles
    # edges of each triangle in deterministic local order
    edge_count: dict = {}
    for tri in tris:
        for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            key = (int(a), int(b)) if a < b else (int(b), int(a))
            edge_count[key] = edge_count.get(key, 0) + 1

    n_old = mesh.num_nodes
    midpoint_index: dict = {}
    new_points = []
    new_boundary = []
    params = dict(mesh.boundary_params) if mesh.boundary_params is not None else None
    for tri in tris:
        for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            key = (int(a), int(b)) if a < b else (int(b), int(a))
            if key in midpoint_index:
                continue
            idx = n_old + len(new_points)
            midpoint_index[key] = idx
            if edge_count[key] == 1:  # boundary edge
                new_boundary.append(idx)
                if params is not None and key[0] in params and key[1] in params:
                    t_mid = _circular_midpoint(params[key[0]], params[key[1]])
                    params[idx] = t_mid
                    new_points.append(mesh.curve(t_mid))
                    continue
            new_points.append(0.5 * (mesh.nodes[key[0]] + mesh.nodes[key[1]]))

    nodes = np.vstack([mesh.nodes, np.array(new_points)])
    children = np.empty((4 * len(tris), 3), dtype=np.int64)
    for i, tri in enumerate(tris):
        v0, v1, v2 = (int(v) for v in tri)
        m01 = midpoint_index[(v0, v1) if v0 < v1 else (v1, v0)]
        m12 = midpoint_index[(v1, v2) if v1 < v2 else (v2, v1)]
        m20 = midpoint_index[(v2, v0) if v2 < v0 else (v0, v2)]
        children[4 * i:4 * i + 4] = [
            [v0, m01, m20], [v1, m12, m01], [v2, m20, m12], [m01, m12, m20]]

    boundary_nodes = np.sort(np.concatenate([mesh.boundary_nodes,
                                             np.array(new_boundary, dtype=np.int64)]))
    return TriMesh(nodes, children, boundary_nodes,
                   refinement_level=mesh.refinement_level + 1, parent=mesh,
                   boundary_params=params, curve=mesh.curve)


# ---------------------------------------------------------------------------
# external formats

def spec_from_dict(obj: dict) -> ShapeSpec:
    """Build a ShapeSpec from the flat JSON object format.

    Example objects: {"kind": "rectangle", "width": 2.0, "height": 1.0},
    {"kind": "regular_polygon", "n": 3, "side": 1.0},
    {"kind": "ellipse", "a": 1.0, "b": 0.5, "boundary_points": 256}.
    """
    if "kind" not in obj:
        raise InvalidParameterError("shape object needs a 'kind' field")
    kind = obj["kind"]
    if kind not in KINDS:
        raise InvalidParameterError(f"unknown shape kind {kind!r}")
    extras = {"kind", "boundary_points", "vertices", "id"}
    params = {k: v for k, v in obj.items() if k not in extras}
    vertices = None
    if kind == "convex_polygon":
        if "vertices" not in obj:
            raise InvalidParameterError("convex_polygon: needs 'vertices'")
        vertices = tuple(tuple(float(c) for c in v) for v in obj["vertices"])
    return ShapeSpec(kind=kind, params=params,
                     boundary_points=int(obj.get("boundary_points",
                                                 DEFAULT_BOUNDARY_POINTS)),
                     vertices=vertices)


def load_shape_spec(path) -> ShapeSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return spec_from_dict(json.load(fh))


def shape_id_for(spec: ShapeSpec, explicit: Optional[str] = None) -> str:
    """Stable identifier used in reports (CSV-safe: no commas)."""
    if explicit:
        return explicit
    if spec.kind == "convex_polygon":
        return f"convex_polygon_{len(spec.vertices)}v"
    parts = [f"{name}={spec.params[name]:g}" for name in _PARAM_NAMES[spec.kind]]
    return spec.kind + "(" + ";".join(parts) + ")"


def save_mesh(mesh: TriMesh, target) -> None:
    """Write a mesh in the plain-text node/element format.

    Header line ``nodes N triangles M``, then N coordinate lines, then M
    zero-based index triples.
    """
    own = isinstance(target, (str, bytes)) or hasattr(target, "__fspath__")
    fh: IO = open(target, "w", encoding="utf-8", newline="\n") if own else target
    try:
        fh.write(f"nodes {mesh.num_nodes} triangles {mesh.num_triangles}\n")
        for x, y in mesh.nodes:
            fh.write(f"{float(x)!r} {float(y)!r}\n")
        for a, b, c in mesh.triangles:
            fh.write(f"{a} {b} {c}\n")
    finally:
        if own:
            fh.close()


def load_mesh(source) -> TriMesh:
    """Read a mesh written by ``save_mesh`` (lineage is not preserved)."""
    own = isinstance(source, (str, bytes)) or hasattr(source, "__fspath__")
    fh: IO = open(source, "r", encoding="utf-8") if own else source
    try:
        header = fh.readline().split()
        if len(header) != 4 or header[0] != "nodes" or header[2] != "triangles":
            raise ValueError("bad mesh header")
        n, m = int(header[1]), int(header[3])
        nodes = np.array([[float(v) for v in fh.readline().split()] for _ in range(n)])
        tris = np.array([[int(v) for v in fh.readline().split()] for _ in range(m)],
                        dtype=np.int64)
    finally:
        if own:
            fh.close()
    edge_count: dict = {}
    for tri in tris:
        for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            key = (int(a), int(b)) if a < b else (int(b), int(a))
            edge_count[key] = edge_count.get(key, 0) + 1
    boundary = sorted({i for edge, cnt in edge_count.items() if cnt == 1 for i in edge})
    return TriMesh(nodes, tris, np.array(boundary, dtype=np.int64))
