"""Dirichlet and Neumann solvers, null spaces, and Green representations.

Dirichlet problems use the single-layer-plus-constant representation whose
bordered system stays well posed at logarithmic capacity one.  The
nonvariational Neumann problems solve (-1/2 I + Wt) phi = g (interior) and
(1/2 I + Wt) phi = g (exterior) by minimum-norm least squares; the known
rank deficiencies equal the number of components of the open set and of
the bounded exterior components.  A second pair of Dirichlet solvers goes
through the image/kernel splitting of +-1/2 I + W and a single layer with
density in the transpose kernel, cross-checking the direct route.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import subspace_angles

from .errors import (
    ConditioningWarning,
    IncompatibleData,
    NearBoundary,
    OutOfRange,
    SingularSystem,
)
from .geometry import (
    _check_aligned,
    indicator,
    integrate,
    topology_of,
)
from .operators import operator_set
from .potentials import HarmonicField
from .distributions import (
    J_inverse,
    PairDistribution,
    as_pair,
    dist_pairing,
    to_grid_representer,
)


@dataclass
class SolveReport:
    """Solution field plus the diagnostics of the solve that produced it."""

    field: HarmonicField
    densities: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)
    compat: list = field(default_factory=list)
    rank_info: dict = field(default_factory=dict)
    u_infinity: float | None = None

    def to_dict(self):
        return {
            "residuals": {k: float(v) for k, v in self.residuals.items()},
            "compat": [float(v) for v in self.compat],
            "rank_info": {k: int(v) for k, v in self.rank_info.items()},
            "u_infinity": None if self.u_infinity is None else float(self.u_infinity),
            "constant": float(self.field.constant),
            "region": self.field.region,
        }


def dirichlet_interior(mesh, g):
    """Interior Dirichlet solve through the bordered single-layer system."""
    g = _check_aligned(mesh, g)
    ops = operator_set(mesh)
    eta, c = ops.harmonic_density(g)
    resid = float(np.max(np.abs(ops.V @ eta + c - g)))
    if resid > 1e-7 * max(1.0, float(np.max(np.abs(g)))):
        raise SingularSystem(f"boundary residual {resid:.3e} of the Dirichlet solve")
    fld = HarmonicField(mesh, [("single", eta)], constant=c, region="interior")
    return SolveReport(
        field=fld,
        densities={"eta": eta, "constant": c},
        residuals={"boundary": resid},
    )


def dirichlet_exterior(mesh, g):
    """Exterior Dirichlet solve; the representation constant is the value at infinity."""
    g = _check_aligned(mesh, g)
    ops = operator_set(mesh)
    eta, c = ops.harmonic_density(g)
    resid = float(np.max(np.abs(ops.V @ eta + c - g)))
    if resid > 1e-7 * max(1.0, float(np.max(np.abs(g)))):
        raise SingularSystem(f"boundary residual {resid:.3e} of the Dirichlet solve")
    fld = HarmonicField(mesh, [("single", eta)], constant=c, region="exterior")
    return SolveReport(
        field=fld,
        densities={"eta": eta, "constant": c},
        residuals={"boundary": resid},
        u_infinity=c,
    )


def check_compat_interior(mesh, g):
    """Pairings of the datum with the indicators of the open-set components."""
    topo = topology_of(mesh)
    tau = as_pair(mesh, g.representer if hasattr(g, "representer") else g)
    return np.array(
        [
            dist_pairing(tau, indicator(topo, "omega", j))
            for j in range(1, topo.kappa_plus + 1)
        ]
    )


def check_compat_exterior(mesh, g):
    """Pairings with the exterior-component indicators, unbounded one included.

    Row k corresponds to the k-th exterior component; row 0 (the unbounded
    component) belongs to the two-dimensional compatibility conditions.
    """
    topo = topology_of(mesh)
    tau = as_pair(mesh, g.representer if hasattr(g, "representer") else g)
    return np.array(
        [
            dist_pairing(tau, indicator(topo, "omega_minus", k))
            for k in range(0, topo.kappa_minus + 1)
        ]
    )


def _as_neumann_rep(mesh, g):
    if isinstance(g, PairDistribution):
        return to_grid_representer(g).representer, g
    if hasattr(g, "representer"):
        rep = _check_aligned(mesh, g.representer)
        return rep, as_pair(mesh, rep)
    rep = _check_aligned(mesh, g)
    return rep, as_pair(mesh, rep)


def _lstsq_minnorm(A, b):
    z, _, rank, sv = np.linalg.lstsq(A, b, rcond=1e-10)
    return z, rank, sv


def neumann_interior(mesh, g, compat_tol=1e-7, kernel_shift=None):
    """Interior Neumann problem with distributional datum g.

    g may be a grid function, a DistRep, or a PairDistribution.  The
    minimum-norm density solves (-1/2 I + Wt) phi = g; kernel_shift (a
    seed) adds a combination of transpose-kernel vectors, producing a
    different representative of the same solution family.
    """
    rep, tau = _as_neumann_rep(mesh, g)
    ops = operator_set(mesh)
    topo = ops.topology
    scale = max(1e-30, float(np.max(np.abs(rep))) * integrate(mesh, np.ones(mesh.n)))
    compat = check_compat_interior(mesh, tau)
    if np.max(np.abs(compat)) > compat_tol * scale:
        raise IncompatibleData(
            "datum has nonzero flux through a component boundary", pairings=compat
        )
    A = -0.5 * np.eye(mesh.n) + ops.Wt
    phi, rank, _ = _lstsq_minnorm(A, rep)
    resid = float(np.linalg.norm(A @ phi - rep))
    if resid > compat_tol * max(1.0, float(np.linalg.norm(rep))):
        raise IncompatibleData(
            f"least-squares residual {resid:.3e} exceeds tolerance", pairings=compat
        )
    if kernel_shift is not None:
        basis = nullspace(mesh, "minus_half_plus_Wt").vectors
        rng = np.random.default_rng(kernel_shift)
        phi = phi + basis @ rng.uniform(-1.0, 1.0, size=basis.shape[1])
    fld = HarmonicField(mesh, [("single", phi)], region="interior")
    trace = ops.V @ phi
    check = np.max(
        np.abs(
            (ops.rep_matrix("plus") @ trace) - (A @ phi)
        )
    )
    return SolveReport(
        field=fld,
        densities={"phi": phi},
        residuals={"equation": resid, "neumann_identity": float(check)},
        compat=list(compat),
        rank_info={"rank": rank, "deficiency": mesh.n - rank,
                   "expected_deficiency": topo.kappa_plus},
    )


def neumann_exterior(mesh, g, compat_tol=1e-7, kernel_shift=None):
    """Exterior Neumann problem (datum is minus the exterior normal derivative)."""
    rep, tau = _as_neumann_rep(mesh, g)
    ops = operator_set(mesh)
    topo = ops.topology
    scale = max(1e-30, float(np.max(np.abs(rep))) * integrate(mesh, np.ones(mesh.n)))
    compat = check_compat_exterior(mesh, tau)
    if np.max(np.abs(compat)) > compat_tol * scale:
        raise IncompatibleData(
            "datum has nonzero flux through an exterior component boundary",
            pairings=compat,
        )
    A = 0.5 * np.eye(mesh.n) + ops.Wt
    phi, rank, _ = _lstsq_minnorm(A, rep)
    resid = float(np.linalg.norm(A @ phi - rep))
    if resid > compat_tol * max(1.0, float(np.linalg.norm(rep))):
        raise IncompatibleData(
            f"least-squares residual {resid:.3e} exceeds tolerance", pairings=compat
        )
    if kernel_shift is not None:
        basis = nullspace(mesh, "half_plus_Wt").vectors
        rng = np.random.default_rng(kernel_shift)
        phi = phi + basis @ rng.uniform(-1.0, 1.0, size=basis.shape[1])
    phi_mass = integrate(mesh, phi)
    if abs(phi_mass) > 1e-8 * scale:
        raise SingularSystem(
            f"exterior Neumann density carries mass {phi_mass:.3e}"
        )
    fld = HarmonicField(mesh, [("single", phi)], region="exterior")
    trace = ops.V @ phi
    check = np.max(np.abs((ops.rep_matrix("minus") @ trace) + (A @ phi)))
    return SolveReport(
        field=fld,
        densities={"phi": phi},
        residuals={"equation": resid, "neumann_identity": float(check),
                   "density_mass": abs(phi_mass)},
        compat=list(compat),
        rank_info={"rank": rank, "deficiency": mesh.n - rank,
                   "expected_deficiency": topo.kappa_minus},
        u_infinity=0.0,
    )


@dataclass
class NullspaceBasis:
    """Orthonormal kernel basis with the singular values that selected it."""

    vectors: np.ndarray
    singular_values: np.ndarray
    gap: float
    warning: str | None = None

    @property
    def dimension(self):
        return self.vectors.shape[1]


_NULLSPACE_OPS = {
    "half_plus_W": ("W", 0.5),
    "minus_half_plus_W": ("W", -0.5),
    "half_plus_Wt": ("Wt", 0.5),
    "minus_half_plus_Wt": ("Wt", -0.5),
}


def nullspace(mesh, op_kind, tol=1e-10):
    """SVD null space of one of the four second-kind operators."""
    if op_kind not in _NULLSPACE_OPS:
        raise OutOfRange(f"unknown operator kind {op_kind!r}")
    name, shift = _NULLSPACE_OPS[op_kind]
    ops = operator_set(mesh)
    A = shift * np.eye(mesh.n) + getattr(ops, name)
    _, sv, vt = np.linalg.svd(A)
    cut = tol * sv[0]
    below = sv < cut
    dim = int(np.sum(below))
    if 0 < dim < mesh.n:
        gap = float(sv[mesh.n - dim - 1] / sv[mesh.n - dim])
    else:
        gap = float("inf")
    warning = None
    if gap < 1e4:
        warning = f"singular-value gap {gap:.2e} below 1e4"
        warnings.warn(warning, ConditioningWarning)
    vectors = vt[mesh.n - dim:].T if dim else np.zeros((mesh.n, 0))
    return NullspaceBasis(vectors, sv, gap, warning)


def decompose(mesh, g, sign):
    """Split g into an image part and a kernel part of sign/2 I + W.

    The image is the weighted-pairing orthogonal complement of the kernel
    of the transpose operator, so the projection is generally oblique.
    """
    g = _check_aligned(mesh, g)
    ops = operator_set(mesh)
    op_w = "half_plus_W" if sign == "plus" else "minus_half_plus_W"
    op_wt = "half_plus_Wt" if sign == "plus" else "minus_half_plus_Wt"
    K = nullspace(mesh, op_w).vectors
    P = nullspace(mesh, op_wt).vectors
    if K.shape[1] == 0:
        g_ker = np.zeros(mesh.n)
    else:
        M = (P * mesh.weights[:, None]).T @ K
        rhs = (P * mesh.weights[:, None]).T @ g
        try:
            a = np.linalg.solve(M, rhs)
        except np.linalg.LinAlgError as exc:
            raise SingularSystem("oblique projection system is singular") from exc
        g_ker = K @ a
    g_im = g - g_ker
    shift = 0.5 if sign == "plus" else -0.5
    A = shift * np.eye(mesh.n) + ops.W
    x, _, _ = _lstsq_minnorm(A, g_im)
    resid = float(np.linalg.norm(A @ x - g_im))
    if resid > 1e-7 * max(1.0, float(np.linalg.norm(g))):
        raise SingularSystem(f"image part not reachable: residual {resid:.3e}")
    return g_im, g_ker


def dirichlet_interior_via_decomposition(mesh, g):
    """Interior Dirichlet solve as double layer plus a transpose-kernel single layer."""
    g = _check_aligned(mesh, g)
    ops = operator_set(mesh)
    g_im, g_ker = decompose(mesh, g, "plus")
    A = 0.5 * np.eye(mesh.n) + ops.W
    psi, _, _ = _lstsq_minnorm(A, g_im)
    terms = [("double", psi)]
    densities = {"psi": psi}
    resid_ker = 0.0
    if np.max(np.abs(g_ker)) > 0:
        P = nullspace(mesh, "half_plus_Wt").vectors
        b, _, _ = _lstsq_minnorm(ops.V @ P, g_ker)
        mu = P @ b
        resid_ker = float(np.linalg.norm(ops.V @ mu - g_ker))
        if resid_ker > 1e-6 * max(1.0, float(np.linalg.norm(g))):
            raise SingularSystem(
                f"kernel part not a single-layer trace: residual {resid_ker:.3e}"
            )
        terms.append(("single", mu))
        densities["mu"] = mu
    fld = HarmonicField(mesh, terms, region="interior")
    boundary = trace_of_field_terms(mesh, terms, "plus")
    resid = float(np.max(np.abs(boundary - g)))
    if resid > 1e-6 * max(1.0, float(np.max(np.abs(g)))):
        raise SingularSystem(f"boundary residual {resid:.3e}")
    return SolveReport(
        field=fld,
        densities=densities,
        residuals={"boundary": resid, "kernel_part": resid_ker},
    )


def dirichlet_exterior_via_decomposition(mesh, g):
    """Exterior Dirichlet solve as double layer + kernel single layer + constant."""
    g = _check_aligned(mesh, g)
    ops = operator_set(mesh)
    g_im, g_ker = decompose(mesh, g, "minus")
    A = -0.5 * np.eye(mesh.n) + ops.W
    psi, _, _ = _lstsq_minnorm(A, g_im)
    terms = [("double", psi)]
    densities = {"psi": psi}
    Q = nullspace(mesh, "minus_half_plus_Wt").vectors
    # zero-mean subspace of the transpose kernel plus the constant direction
    wq = mesh.weights @ Q
    if Q.shape[1]:
        _, _, vt = np.linalg.svd(wq[None, :])
        Q0 = Q @ vt[1:].T if Q.shape[1] > 1 else np.zeros((mesh.n, 0))
        if abs(np.linalg.norm(wq)) < 1e-12:
            Q0 = Q
    else:
        Q0 = Q
    cols = [ops.V @ Q0, np.ones((mesh.n, 1))]
    Amat = np.concatenate(cols, axis=1)
    coeff, _, _ = _lstsq_minnorm(Amat, g_ker)
    rho = float(coeff[-1])
    resid_ker = float(np.linalg.norm(Amat @ coeff - g_ker))
    if resid_ker > 1e-6 * max(1.0, float(np.linalg.norm(g))):
        raise SingularSystem(
            f"kernel part not representable: residual {resid_ker:.3e}"
        )
    if Q0.shape[1]:
        mu = Q0 @ coeff[:-1]
        terms.append(("single", mu))
        densities["mu"] = mu
    fld = HarmonicField(mesh, terms, constant=rho, region="exterior")
    boundary = trace_of_field_terms(mesh, terms, "minus") + rho
    resid = float(np.max(np.abs(boundary - g)))
    if resid > 1e-6 * max(1.0, float(np.max(np.abs(g)))):
        raise SingularSystem(f"boundary residual {resid:.3e}")
    return SolveReport(
        field=fld,
        densities=densities,
        residuals={"boundary": resid, "kernel_part": resid_ker},
        u_infinity=rho,
    )


def trace_of_field_terms(mesh, terms, side):
    """Boundary limit of a sum of layer terms from the given side."""
    ops = operator_set(mesh)
    half = 0.5 if side == "plus" else -0.5
    out = np.zeros(mesh.n)
    for kind, density in terms:
        if kind == "single":
            out += ops.V @ density
        else:
            out += half * density + ops.W @ density
    return out


def green_h(mesh, x, side):
    """Harmonic function matching the fundamental solution centered at x.

    side 'interior' solves in the open set, 'exterior' outside (harmonic
    at infinity); returns the SolveReport of the bordered solve.
    """
    x = np.asarray(x, dtype=float)
    d = np.linalg.norm(mesh.x - x[None, :], axis=1)
    if np.min(d) < mesh.band_width():
        raise NearBoundary("source point inside the near-boundary band")
    data = np.log(d) / (2.0 * np.pi)
    if side == "interior":
        return dirichlet_interior(mesh, data)
    if side == "exterior":
        return dirichlet_exterior(mesh, data)
    raise OutOfRange(f"unknown side {side!r}")


def _poisson_kernel_column(mesh, x):
    """d/dnu_y S2(x - y) at the nodes, for a fixed off-boundary x."""
    d = mesh.x - np.asarray(x, dtype=float)[None, :]
    r2 = np.einsum("ij,ij->i", d, d)
    return np.einsum("ij,ij->i", mesh.normal, d) / (2.0 * np.pi * r2)


def poisson_interior(mesh, g, x):
    """Green-function representation of the interior harmonic extension at x.

    For x in the open set this reproduces the Dirichlet solution; for x in
    the exterior the same integral vanishes.
    """
    g = _check_aligned(mesh, g)
    ops = operator_set(mesh)
    rep = green_h(mesh, x, "interior")
    eta = rep.densities["eta"]
    dh = -0.5 * eta + ops.Wt @ eta
    kernel = _poisson_kernel_column(mesh, x)
    return float(np.dot(mesh.weights * g, kernel - dh))


def poisson_exterior(mesh, g, x):
    """Exterior Green representation; returns (value, constant at infinity)."""
    g = _check_aligned(mesh, g)
    ops = operator_set(mesh)
    rep = green_h(mesh, x, "exterior")
    eta = rep.densities["eta"]
    dh = 0.5 * eta + ops.Wt @ eta
    kernel = _poisson_kernel_column(mesh, x)
    c_g = float(ops.q @ g)
    val = -float(np.dot(mesh.weights * g, kernel - dh)) + c_g
    return val, c_g


def transpose_kernel_pair_basis(mesh, op_kind):
    """Kernel of +-1/2 I + Wt computed through the pair-distribution route.

    The operator is realized in J coordinates (image g plus the mass
    functional), its kernel vectors are mapped back to representers, and
    the span must coincide with the grid-operator kernel; the subspace
    angle quantifies the agreement.
    """
    ops = operator_set(mesh)
    shift = {"half_plus_Wt": 0.5, "minus_half_plus_Wt": -0.5}[op_kind]
    v1 = ops.V @ np.ones(mesh.n)
    correction = ops.W @ v1 - 0.5 * v1
    # J-coordinate matrix of shift I + Wt
    M = shift * np.eye(mesh.n) + ops.W + np.outer(correction, ops.q)
    _, sv, vt = np.linalg.svd(M)
    dim = int(np.sum(sv < 1e-10 * sv[0]))
    reps = []
    for row in vt[mesh.n - dim:] if dim else []:
        tau = J_inverse(mesh, row, side="plus")
        reps.append(to_grid_representer(tau).representer)
    basis = np.array(reps).T if reps else np.zeros((mesh.n, 0))
    return basis


def kernel_coincidence_angle(mesh, op_kind):
    """Largest principal angle between grid and distributional kernels."""
    grid = nullspace(mesh, op_kind).vectors
    dist = transpose_kernel_pair_basis(mesh, op_kind)
    if grid.shape[1] != dist.shape[1]:
        return float("inf")
    if grid.shape[1] == 0:
        return 0.0
    return float(np.max(subspace_angles(grid, dist)))
