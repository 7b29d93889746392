"""First-order boundary distributions encoded as density pairs.

A distribution tau on the boundary is stored as a side tag together with
two grid densities (mu0, mu1) and stands for mu0 plus the weighted
transpose of the interior ('plus') or exterior ('minus')
Dirichlet-to-Neumann map applied to mu1.  Everything a test needs exists
in two interchangeable encodings: the exact pair, and a grid representer
phi whose weighted pairing reproduces the distribution's action on grid
functions.  Conversions are explicit.

The single-layer trace of a pair is computed through closed identities:
the trace of the single layer of (plus, 0, mu) is (-1/2 I + W) mu, and for
the minus side (-1/2 I - W) mu plus the constant carried by the exterior
harmonic extension of mu.  The J map sends tau to
V[tau - mean] + mean (mean = <tau,1>/<1,1>) and identifies distributions
with grid functions; its inverse is a dense least-squares solve.
"""

from dataclasses import dataclass

import numpy as np

from .errors import LengthMismatch, SingularSystem
from .geometry import _check_aligned, integrate, pairing
from .operators import operator_set
from .potentials import eval_double_layer, eval_single_layer, _as_points, _band_check


@dataclass
class PairDistribution:
    """side tag plus densities (mu0, mu1) on a mesh."""

    side: str
    mu0: np.ndarray
    mu1: np.ndarray
    mesh: object

    def __post_init__(self):
        if self.side not in ("plus", "minus"):
            raise LengthMismatch(f"unknown side {self.side!r}")
        self.mu0 = _check_aligned(self.mesh, self.mu0)
        self.mu1 = _check_aligned(self.mesh, self.mu1)


@dataclass
class DistRep:
    """Grid representer of a distribution together with its mass <tau, 1>."""

    representer: np.ndarray
    mass: float


def as_pair(mesh, tau):
    """Coerce a grid function into a plus-side pair; pass pairs through."""
    if isinstance(tau, PairDistribution):
        return tau
    g = _check_aligned(mesh, np.asarray(tau, dtype=float))
    return PairDistribution("plus", g, np.zeros(mesh.n), mesh)


def mass_of(tau):
    """<tau, 1>; the transpose part carries no mass in two dimensions."""
    return integrate(tau.mesh, tau.mu0)


def to_grid_representer(tau):
    """Grid function phi with pairing(phi, v) = <tau, v> for all grid v."""
    ops = operator_set(tau.mesh)
    phi = tau.mu0 + ops.rep_matrix(tau.side) @ tau.mu1
    return DistRep(phi, mass_of(tau))


def dist_pairing(tau, v):
    """<tau, v> = pairing(mu0, v) + pairing(mu1, S_side v)."""
    v = _check_aligned(tau.mesh, v)
    ops = operator_set(tau.mesh)
    S = ops.steklov(tau.side)
    return pairing(tau.mesh, tau.mu0, v) + pairing(tau.mesh, tau.mu1, S @ v)


def V_of_distribution(tau):
    """Boundary trace of the single layer of a pair distribution."""
    ops = operator_set(tau.mesh)
    out = ops.V @ tau.mu0
    if tau.side == "plus":
        out += -0.5 * tau.mu1 + ops.W @ tau.mu1
    else:
        c_mu = float(ops.q @ tau.mu1)
        out += -0.5 * tau.mu1 - ops.W @ tau.mu1 + c_mu
    return out


def J_isometry(tau):
    """Grid image of tau under the mean-corrected single-layer trace."""
    mesh = tau.mesh
    m = mass_of(tau)
    length = integrate(mesh, np.ones(mesh.n))
    mbar = m / length
    shifted = PairDistribution(tau.side, tau.mu0 - mbar, tau.mu1, mesh)
    return V_of_distribution(shifted) + mbar


def _j_forward_matrix(mesh, side):
    """Dense matrix of (mu0, mu1) -> J[pair] used by the inverse solve."""
    ops = operator_set(mesh)
    n = mesh.n
    length = integrate(mesh, np.ones(n))
    ones = np.ones(n)
    # J on the mu0 block: V mu0 - mbar (V 1 - 1) with mbar = w.mu0 / length
    A0 = ops.V - np.outer(ops.V @ ones - ones, mesh.weights / length)
    if side == "plus":
        A1 = -0.5 * np.eye(n) + ops.W
    else:
        A1 = -0.5 * np.eye(n) - ops.W + np.outer(ones, ops.q)
    return np.concatenate([A0, A1], axis=1)


def J_inverse(mesh, g, side="plus", rtol=1e-7):
    """A pair distribution of the requested side with J image g.

    Minimum-norm least squares on the underdetermined map
    (mu0, mu1) -> J[mu0 + transpose-part(mu1)]; raises SingularSystem when
    the residual exceeds rtol times the data norm.
    """
    g = _check_aligned(mesh, g)
    A = _j_forward_matrix(mesh, side)
    z, _, _, _ = np.linalg.lstsq(A, g, rcond=1e-12)
    resid = float(np.linalg.norm(A @ z - g))
    if resid > rtol * max(1.0, float(np.linalg.norm(g))):
        raise SingularSystem(f"J inverse residual {resid:.3e} too large")
    n = mesh.n
    return PairDistribution(side, z[:n], z[n:], mesh)


def mass_from_j_image(mesh, g):
    """<tau, 1> of the distribution whose J image is g."""
    ops = operator_set(mesh)
    length = integrate(mesh, np.ones(mesh.n))
    return length * float(ops.q @ g)


def Wt_on_distribution(tau):
    """Adjoint double-layer operator applied to a pair distribution.

    Computed in J coordinates: the image of W^t tau is
    W g + (W V 1 - V 1 / 2) <tau,1>/<1,1> with g the image of tau, and the
    mass halves exactly.
    """
    mesh = tau.mesh
    ops = operator_set(mesh)
    g = J_isometry(tau)
    m = mass_of(tau)
    length = integrate(mesh, np.ones(mesh.n))
    v1 = ops.V @ np.ones(mesh.n)
    g_out = ops.W @ g + (ops.W @ v1 - 0.5 * v1) * (m / length)
    out = J_inverse(mesh, g_out, side=tau.side)
    # pin the mass law <Wt tau, 1> = <tau, 1> / 2 in the stored densities
    target = 0.5 * m
    correction = (target - mass_of(out)) / length
    out.mu0 = out.mu0 + correction
    return out


def dist_single_layer_field(tau, points, region):
    """Single layer potential of a pair distribution at off-boundary points.

    The transpose part is evaluated through the double-layer and
    harmonic-extension representation of its potential, never through the
    grid representer.
    """
    mesh = tau.mesh
    ops = operator_set(mesh)
    pts, single = _as_points(points)
    _band_check(mesh, pts)
    vals = eval_single_layer(mesh, tau.mu0, pts, check_band=False)
    mu1 = tau.mu1
    if np.any(mu1):
        if tau.side == "plus":
            if region == "interior":
                eta, c = ops.harmonic_density(mu1)
                vals += eval_double_layer(mesh, mu1, pts, check_band=False)
                vals -= eval_single_layer(mesh, eta, pts, check_band=False) + c
            else:
                vals += eval_double_layer(mesh, mu1, pts, check_band=False)
        else:
            c_mu = float(ops.q @ mu1)
            if region == "interior":
                vals += -eval_double_layer(mesh, mu1, pts, check_band=False) + c_mu
            else:
                eta, _ = ops.harmonic_density(mu1)
                vals -= eval_double_layer(mesh, mu1, pts, check_band=False)
                vals -= eval_single_layer(mesh, eta, pts, check_band=False)
    return float(vals[0]) if single else vals


def dist_normal_derivative(mesh, trace, side):
    """Distributional normal derivative of the harmonic extension of a trace."""
    trace = _check_aligned(mesh, trace)
    return PairDistribution(side, np.zeros(mesh.n), trace, mesh)


def _test_basis(mesh, count=16):
    basis = [np.ones(mesh.n)]
    k = 1
    while len(basis) < count:
        basis.append(np.cos(k * mesh.t))
        if len(basis) < count:
            basis.append(np.sin(k * mesh.t))
        k += 1
    return basis


@dataclass
class JumpCheckResult:
    interior: float
    exterior: float | None
    note: str | None = None


def dist_jump_check(tau, n_test=16):
    """Residuals of the jump formulas for the single layer of a pair.

    Interior: the normal derivative of v+[tau], read as the transpose
    Dirichlet-to-Neumann derivative of its boundary trace, must pair like
    -tau/2 + Wt tau.  Exterior: same with -tau/2 - Wt tau, meaningful only
    for mass-free tau in two dimensions (otherwise skipped with a note).
    """
    mesh = tau.mesh
    ops = operator_set(mesh)
    trace = V_of_distribution(tau)
    rep = to_grid_representer(tau).representer
    basis = _test_basis(mesh, n_test)
    scale = max(1.0, float(np.max(np.abs(rep))))

    lhs_int = ops.rep_matrix("plus") @ trace
    rhs_int = -0.5 * rep + ops.Wt @ rep
    r_int = max(
        abs(pairing(mesh, lhs_int - rhs_int, v)) for v in basis
    ) / scale

    m = mass_of(tau)
    if abs(m) > 1e-8 * scale:
        return JumpCheckResult(r_int, None, note="no-limit: <tau,1> != 0")
    lhs_ext = ops.rep_matrix("minus") @ trace
    rhs_ext = -0.5 * rep - ops.Wt @ rep
    r_ext = max(
        abs(pairing(mesh, lhs_ext - rhs_ext, v)) for v in basis
    ) / scale
    return JumpCheckResult(r_int, r_ext)


def pair_to_dict(tau):
    """JSON-friendly encoding: side tag plus the two density arrays."""
    return {
        "side": tau.side,
        "mu0": [float(v) for v in tau.mu0],
        "mu1": [float(v) for v in tau.mu1],
    }


def pair_from_dict(mesh, data):
    return PairDistribution(
        data["side"],
        np.asarray(data["mu0"], dtype=float),
        np.asarray(data["mu1"], dtype=float),
        mesh,
    )
