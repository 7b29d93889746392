"""Parametrized closed curves, periodic-trapezoid meshes, and domain topology.

A domain is described by a list of closed curves: outer curves bound the
connected components of the open set, hole curves bound the bounded
components of its exterior.  Meshes use uniform parameter nodes, so all
quadrature is the periodic trapezoid rule (spectrally accurate on analytic
curves).  Normals always point out of the open set: outer curves end up
traversed counterclockwise and holes clockwise, whatever the input says.
"""

from collections import namedtuple
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidGeometry, LengthMismatch, OutOfRange


@dataclass(frozen=True)
class CurveSpec:
    """One closed boundary curve.

    kind is 'circle' (center, radius), 'ellipse' (center, axes) or
    'fourier' (trigonometric polynomial coordinates).  For a fourier curve
    the coordinates are

        x(t) = center[0] + sum_m cos_x[m] cos(m t) + sin_x[m] sin(m t)
        y(t) = center[1] + sum_m cos_y[m] cos(m t) + sin_y[m] sin(m t)

    with coefficient arrays indexed by mode m starting at 0.  orientation
    'positive' means counterclockwise traversal of the parametrization as
    given; build_mesh may still flip a curve to meet the outward-normal
    convention.
    """

    kind: str
    center: tuple = (0.0, 0.0)
    radius: float | None = None
    axes: tuple | None = None
    cos_x: tuple = ()
    sin_x: tuple = ()
    cos_y: tuple = ()
    sin_y: tuple = ()
    orientation: str = "positive"

    def __post_init__(self):
        if self.kind not in ("circle", "ellipse", "fourier"):
            raise InvalidGeometry(f"unknown curve kind {self.kind!r}")
        if self.orientation not in ("positive", "negative"):
            raise InvalidGeometry(f"unknown orientation {self.orientation!r}")
        if self.kind == "circle" and (self.radius is None or self.radius <= 0):
            raise InvalidGeometry("circle needs a positive radius")
        if self.kind == "ellipse":
            if self.axes is None or len(self.axes) != 2 or min(self.axes) <= 0:
                raise InvalidGeometry("ellipse needs two positive semi-axes")

    def _sign(self):
        return 1.0 if self.orientation == "positive" else -1.0

    def evaluate(self, t, orientation_sign=None):
        """Positions, velocities and accelerations at parameters t.

        Returns (x, dx, ddx), each of shape (len(t), 2).  Derivatives are
        with respect to the traversal parameter, orientation folded in.
        """
        t = np.asarray(t, dtype=float)
        sg = self._sign() if orientation_sign is None else orientation_sign
        s = sg * t
        if self.kind == "circle":
            r = float(self.radius)
            c, sn = np.cos(s), np.sin(s)
            x = np.stack([r * c, r * sn], axis=-1)
            dx = np.stack([-r * sn, r * c], axis=-1)
            ddx = -x
        elif self.kind == "ellipse":
            a, b = map(float, self.axes)
            c, sn = np.cos(s), np.sin(s)
            x = np.stack([a * c, b * sn], axis=-1)
            dx = np.stack([-a * sn, b * c], axis=-1)
            ddx = -x
        else:
            x = np.zeros(t.shape + (2,))
            dx = np.zeros_like(x)
            ddx = np.zeros_like(x)
            for axis, (cc, ss) in enumerate(((self.cos_x, self.sin_x),
                                             (self.cos_y, self.sin_y))):
                nm = max(len(cc), len(ss))
                for m in range(nm):
                    a = cc[m] if m < len(cc) else 0.0
                    b = ss[m] if m < len(ss) else 0.0
                    cm, sm = np.cos(m * s), np.sin(m * s)
                    x[..., axis] += a * cm + b * sm
                    dx[..., axis] += m * (-a * sm + b * cm)
                    ddx[..., axis] += m * m * (-a * cm - b * sm)
        x = x + np.asarray(self.center, dtype=float)
        dx = dx * sg
        # ddx picks up sg**2 == 1
        return x, dx, ddx


@dataclass(eq=False)
class BoundaryMesh:
    """Nystrom mesh of a multiply connected boundary.

    Arrays are node-aligned over all components: positions x (n, 2), unit
    outward normals, unit tangents, signed curvature, parametrization speed
    |x'|, trapezoid weights w_i = |x'(t_i)| 2 pi / N_c and the component
    label of every node.  offsets[c] is the first node of component c.
    """

    specs: list
    n_per_comp: list
    t: np.ndarray
    x: np.ndarray
    normal: np.ndarray
    tangent: np.ndarray
    curvature: np.ndarray
    speed: np.ndarray
    weights: np.ndarray
    comp: np.ndarray
    offsets: np.ndarray
    orientation_signs: list = field(default_factory=list)

    @property
    def n(self):
        return self.x.shape[0]

    @property
    def n_components(self):
        return len(self.n_per_comp)

    def component_slice(self, c):
        return slice(int(self.offsets[c]), int(self.offsets[c + 1]))

    def band_width(self):
        """Near-boundary band: twice the largest node spacing."""
        return 2.0 * float(np.max(self.weights))


Location = namedtuple("Location", ["kind", "index"])


def _component_arrays(spec, nc, sign):
    t = 2.0 * np.pi * np.arange(nc) / nc
    x, dx, ddx = spec.evaluate(t, orientation_sign=sign)
    speed = np.hypot(dx[:, 0], dx[:, 1])
    if np.min(speed) <= 1e-12 * max(1.0, np.max(speed)):
        raise InvalidGeometry("degenerate parametrization: |x'(t)| vanishes at a node")
    tangent = dx / speed[:, None]
    normal = np.stack([tangent[:, 1], -tangent[:, 0]], axis=-1)
    curvature = (dx[:, 0] * ddx[:, 1] - dx[:, 1] * ddx[:, 0]) / speed**3
    weights = speed * (2.0 * np.pi / nc)
    return t, x, normal, tangent, curvature, speed, weights


def _signed_area(x, dx, nc):
    # 0.5 * integral (x y' - y x') dt by the trapezoid rule
    return 0.5 * np.sum(x[:, 0] * dx[:, 1] - x[:, 1] * dx[:, 0]) * 2.0 * np.pi / nc


def _winding_of_points(curve_nodes, points):
    """Winding numbers of closed polygonal curves around points (vectorized)."""
    pts = np.atleast_2d(points)
    z = (curve_nodes[:, 0] + 1j * curve_nodes[:, 1])[None, :] - (
        pts[:, 0] + 1j * pts[:, 1]
    )[:, None]
    ratio = np.roll(z, -1, axis=1) / z
    return np.sum(np.angle(ratio), axis=1) / (2.0 * np.pi)


def build_mesh(specs, nodes_per_component):
    """Assemble a BoundaryMesh from curve specs and per-component node counts.

    Node counts must be even and at least 16.  Curves must be pairwise
    disjoint and free of self-intersections (checked through node
    distances).  Normals are oriented outward for the open set: curves
    that contain no other curve are traversed counterclockwise, hole
    curves clockwise; the input orientation is flipped when needed.
    """
    specs = list(specs)
    counts = [int(m) for m in nodes_per_component]
    if len(specs) != len(counts):
        raise InvalidGeometry("one node count per curve is required")
    for m in counts:
        if m < 16 or m % 2:
            raise InvalidGeometry(f"node count {m} must be even and >= 16")

    parts = []
    for spec, nc in zip(specs, counts):
        sign = 1.0 if spec.orientation == "positive" else -1.0
        parts.append([spec, nc, sign, *_component_arrays(spec, nc, sign)])

    # containment depth from winding numbers of node samples
    ncomp = len(parts)
    contains = np.zeros((ncomp, ncomp), dtype=bool)
    for i in range(ncomp):
        for j in range(ncomp):
            if i == j:
                continue
            xj = parts[j][4]
            probe = xj[:: max(1, xj.shape[0] // 16)]  # spread samples of curve j
            wind = _winding_of_points(parts[i][4], probe)
            inside = np.abs(wind) > 0.5
            if inside.any() and not inside.all():
                raise InvalidGeometry("curves intersect: ambiguous containment")
            contains[i, j] = bool(inside.all())
    depth = contains.sum(axis=0)
    if np.any(depth > 1):
        raise InvalidGeometry("nesting deeper than one level of holes")

    # orientation fix: outer curves CCW (positive area), holes CW
    for k, part in enumerate(parts):
        spec, nc, sign = part[0], part[1], part[2]
        _, x, _, _, _, _, _ = part[3:]
        dx = spec.evaluate(part[3], orientation_sign=sign)[1]
        area = _signed_area(x, dx, nc)
        want_ccw = depth[k] == 0
        if (area > 0) != want_ccw:
            sign = -sign
            part[2] = sign
            part[3:] = _component_arrays(spec, nc, sign)

    t = np.concatenate([p[3] for p in parts])
    x = np.concatenate([p[4] for p in parts])
    normal = np.concatenate([p[5] for p in parts])
    tangent = np.concatenate([p[6] for p in parts])
    curvature = np.concatenate([p[7] for p in parts])
    speed = np.concatenate([p[8] for p in parts])
    weights = np.concatenate([p[9] for p in parts])
    comp = np.concatenate([np.full(p[1], k, dtype=int) for k, p in enumerate(parts)])
    offsets = np.concatenate([[0], np.cumsum(counts)])

    mesh = BoundaryMesh(
        specs=specs,
        n_per_comp=counts,
        t=t,
        x=x,
        normal=normal,
        tangent=tangent,
        curvature=curvature,
        speed=speed,
        weights=weights,
        comp=comp,
        offsets=offsets,
        orientation_signs=[p[2] for p in parts],
    )
    _check_node_separation(mesh)
    return mesh


def _check_node_separation(mesh):
    # cross-component disjointness and a cheap self-intersection screen:
    # a simple closed C^1 curve has turning number +-1, and nodes that are
    # several steps apart along the curve cannot nearly coincide
    scale = max(1.0, float(np.max(np.abs(mesh.x))))
    for c in range(mesh.n_components):
        sl = mesh.component_slice(c)
        turning = float(np.dot(mesh.curvature[sl], mesh.weights[sl])) / (2.0 * np.pi)
        if abs(abs(turning) - 1.0) > 0.1:
            raise InvalidGeometry(
                f"curve {c} is not simple (turning number {turning:.3f})"
            )
        xc = mesh.x[sl]
        wc = mesh.weights[sl]
        nc = xc.shape[0]
        d = np.linalg.norm(xc[:, None, :] - xc[None, :, :], axis=-1)
        idx = np.arange(nc)
        ring = np.minimum(np.abs(idx[:, None] - idx[None, :]),
                          nc - np.abs(idx[:, None] - idx[None, :]))
        far = ring >= 4
        if far.any():
            local = 0.5 * (wc[:, None] + wc[None, :])
            bad = far & (d < 0.25 * local)
            if bad.any():
                raise InvalidGeometry(
                    f"curve {c} self-intersects (distant nodes nearly coincide)"
                )
        for c2 in range(c + 1, mesh.n_components):
            sl2 = mesh.component_slice(c2)
            x2 = mesh.x[sl2]
            dmin = float(
                np.min(np.linalg.norm(xc[:, None, :] - x2[None, :, :], axis=-1))
            )
            if dmin <= 1e-9 * scale:
                raise InvalidGeometry(f"curves {c} and {c2} are not disjoint")


@dataclass(eq=False)
class DomainTopology:
    """Component bookkeeping of the open set and of its exterior.

    kappa_plus counts the connected components of the open set, kappa_minus
    the bounded components of the exterior.  outer_comps / hole_comps list
    curve indices, hole_parent maps every hole to the outer curve
    containing it, and omega_of_comp / omega_minus_of_comp give, for every
    curve, the component of the open set (1..kappa_plus) and of the
    exterior (0 = unbounded) it touches.
    """

    mesh: BoundaryMesh
    kappa_plus: int
    kappa_minus: int
    outer_comps: list
    hole_comps: list
    hole_parent: dict
    omega_of_comp: dict
    omega_minus_of_comp: dict


_TOPOLOGY_CACHE = {}


def topology_of(mesh):
    """Compute (and cache per mesh) the domain topology from containment tests."""
    cached = _TOPOLOGY_CACHE.get(id(mesh))
    if cached is not None and cached.mesh is mesh:
        return cached

    ncomp = mesh.n_components
    contains = np.zeros((ncomp, ncomp), dtype=bool)
    for i in range(ncomp):
        sli = mesh.component_slice(i)
        for j in range(ncomp):
            if i == j:
                continue
            slj = mesh.component_slice(j)
            xj = mesh.x[slj]
            probe = xj[:: max(1, xj.shape[0] // 16)]
            wind = _winding_of_points(mesh.x[sli], probe)
            contains[i, j] = bool(np.all(np.abs(wind) > 0.5))
    depth = contains.sum(axis=0)
    if np.any(depth > 1):
        raise InvalidGeometry("nesting deeper than one level of holes")

    outer = [c for c in range(ncomp) if depth[c] == 0]
    holes = [c for c in range(ncomp) if depth[c] == 1]
    hole_parent = {}
    for h in holes:
        parents = [o for o in outer if contains[o, h]]
        hole_parent[h] = parents[0]

    omega_of_comp = {}
    for j, o in enumerate(outer, start=1):
        omega_of_comp[o] = j
        for h in holes:
            if hole_parent[h] == o:
                omega_of_comp[h] = j
    omega_minus_of_comp = {o: 0 for o in outer}
    for k, h in enumerate(holes, start=1):
        omega_minus_of_comp[h] = k

    topo = DomainTopology(
        mesh=mesh,
        kappa_plus=len(outer),
        kappa_minus=len(holes),
        outer_comps=outer,
        hole_comps=holes,
        hole_parent=hole_parent,
        omega_of_comp=omega_of_comp,
        omega_minus_of_comp=omega_minus_of_comp,
    )
    _TOPOLOGY_CACHE[id(mesh)] = topo
    return topo


def indicator(topology, region, index):
    """Indicator grid function of a boundary component group.

    region 'omega' with index j in 1..kappa_plus marks the nodes on the
    boundary of the j-th component of the open set; region 'omega_minus'
    with index k in 0..kappa_minus marks the boundary of the k-th exterior
    component (k = 0 is the unbounded one).
    """
    mesh = topology.mesh
    out = np.zeros(mesh.n)
    if region == "omega":
        if not 1 <= index <= topology.kappa_plus:
            raise OutOfRange(f"omega index {index} not in 1..{topology.kappa_plus}")
        for c, j in topology.omega_of_comp.items():
            if j == index:
                out[mesh.component_slice(c)] = 1.0
    elif region == "omega_minus":
        if not 0 <= index <= topology.kappa_minus:
            raise OutOfRange(
                f"omega_minus index {index} not in 0..{topology.kappa_minus}"
            )
        for c, k in topology.omega_minus_of_comp.items():
            if k == index:
                out[mesh.component_slice(c)] = 1.0
    else:
        raise OutOfRange(f"unknown region {region!r}")
    return out


def _check_aligned(mesh, f):
    f = np.asarray(f, dtype=float)
    if f.shape != (mesh.n,):
        raise LengthMismatch(f"grid function of length {f.shape} on mesh with {mesh.n} nodes")
    return f


def integrate(mesh, f):
    """Trapezoid-rule boundary integral of a grid function."""
    return float(np.dot(mesh.weights, _check_aligned(mesh, f)))


def pairing(mesh, f, g):
    """Weighted duality pairing sum_i w_i f_i g_i."""
    return float(np.dot(mesh.weights * _check_aligned(mesh, f), _check_aligned(mesh, g)))


def locate_point(mesh, topology, p):
    """Classify a point: interior(j), exterior(k), or near_boundary."""
    return locate_points(mesh, topology, np.asarray(p, dtype=float)[None, :])[0]


def locate_points(mesh, topology, points):
    """Vectorized locate_point over an array of points, shape (m, 2)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    band = mesh.band_width()
    d = np.linalg.norm(pts[:, None, :] - mesh.x[None, :, :], axis=-1)
    near = np.min(d, axis=1) < band

    # winding numbers are only needed (and well defined) off the band
    clear = pts[~near]
    inside = {}
    for c in range(mesh.n_components):
        sl = mesh.component_slice(c)
        flags = np.zeros(pts.shape[0], dtype=bool)
        if clear.shape[0]:
            flags[~near] = np.abs(_winding_of_points(mesh.x[sl], clear)) > 0.5
        inside[c] = flags

    out = []
    for i in range(pts.shape[0]):
        if near[i]:
            out.append(Location("near_boundary", None))
            continue
        loc = None
        for h in topology.hole_comps:
            if inside[h][i]:
                loc = Location("exterior", topology.omega_minus_of_comp[h])
                break
        if loc is None:
            for o in topology.outer_comps:
                if inside[o][i]:
                    loc = Location("interior", topology.omega_of_comp[o])
                    break
        out.append(loc if loc is not None else Location("exterior", 0))
    return out


# ---------------------------------------------------------------------------
# stock geometries used by the test harness and the CLI


def stock_specs(name):
    """Curve specs for the named stock geometry."""
    if name == "disk":
        return [CurveSpec("circle", radius=1.0)]
    if name == "disk2":
        return [CurveSpec("circle", radius=2.0)]
    if name == "ellipse":
        return [CurveSpec("ellipse", axes=(2.0, 1.0))]
    if name == "annulus":
        return [
            CurveSpec("circle", radius=2.0),
            CurveSpec("circle", radius=1.0, orientation="negative"),
        ]
    if name == "kite":
        return [
            CurveSpec(
                "fourier",
                cos_x=(-0.65, 1.0, 0.65),
                cos_y=(0.0,),
                sin_y=(0.0, 1.5),
            )
        ]
    if name == "two-disks":
        return [
            CurveSpec("circle", center=(-2.0, 0.0), radius=1.0),
            CurveSpec("circle", center=(2.0, 0.0), radius=1.0),
        ]
    raise OutOfRange(f"unknown stock geometry {name!r}")


def stock_mesh(name, n):
    """Stock geometry meshed with n nodes per component."""
    specs = stock_specs(name)
    return build_mesh(specs, [n] * len(specs))
