"""Kernels and dense Nystrom assembly of the boundary operators.

The single-layer trace V uses the Kussmaul-Martensen splitting on the
diagonal blocks: the kernel is written as

    k(t, s) = k1(t, s) log(4 sin^2((t - s)/2)) + k2(t, s)

and the logarithmic factor gets the spectral product-quadrature weights,
the smooth remainder the plain trapezoid rule.  The double-layer kernel is
smooth on a C^2 curve, so W is plain trapezoid with the curvature limit on
the diagonal.  Wt is built as D^-1 W^T D (D = diag of quadrature weights),
which is simultaneously the Nystrom matrix of the transposed kernel and an
exact discrete adjoint in the weighted pairing.

The Dirichlet-to-Neumann maps are produced from one bordered solve: the
density map R takes boundary values v to the density eta of the
single-layer-plus-constant representation of the harmonic extension
(V eta + c = v with zero-mean eta, a system that stays well posed at
logarithmic capacity one); then the interior and exterior maps are
(-1/2 I + Wt) R and (-1/2 I - Wt) R.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .errors import InvalidGeometry, OutOfRange, SingularPoint, SingularSystem
from .geometry import topology_of, _check_aligned


def fundamental_solution(n, xi):
    """Fundamental solution of the Laplacian in dimension n (2 or 3)."""
    xi = np.asarray(xi, dtype=float)
    r = np.linalg.norm(xi, axis=-1)
    if np.any(r == 0.0):
        raise SingularPoint("fundamental solution evaluated at zero offset")
    if n == 2:
        return np.log(r) / (2.0 * np.pi)
    if n == 3:
        return -1.0 / (4.0 * np.pi * r)
    raise SingularPoint(f"dimension {n} not supported")


def grad_fundamental_solution(n, xi):
    """Gradient of the fundamental solution with respect to its argument."""
    xi = np.asarray(xi, dtype=float)
    r = np.linalg.norm(xi, axis=-1)
    if np.any(r == 0.0):
        raise SingularPoint("gradient evaluated at zero offset")
    if n == 2:
        return xi / (2.0 * np.pi * r[..., None] ** 2)
    if n == 3:
        return xi / (4.0 * np.pi * r[..., None] ** 3)
    raise SingularPoint(f"dimension {n} not supported")


@dataclass(eq=False)
class OperatorMatrix:
    """Dense operator with its mesh and a kind tag (V, W, Wt, Splus, Sminus)."""

    matrix: np.ndarray
    kind: str
    mesh: object

    def apply(self, f):
        return self.matrix @ _check_aligned(self.mesh, f)


def apply(op, f):
    """Matrix-vector product of an OperatorMatrix with a grid function."""
    return op.apply(f)


def log_weight_row(nc):
    """Product-quadrature weights for the 2pi-periodic log kernel.

    Returns the circulant generator R with R[(i - j) % nc] approximating
    int_0^{2pi} log(4 sin^2((t_i - s)/2)) f(s) ds at the uniform nodes.
    """
    m = np.arange(nc)
    k = np.arange(1, nc // 2)
    cosines = np.cos(2.0 * np.pi * np.outer(m, k) / nc)
    row = -(4.0 * np.pi / nc) * (cosines @ (1.0 / k))
    row -= (4.0 * np.pi / nc**2) * np.cos(np.pi * m)
    return row


def assemble_V(mesh):
    """Nystrom matrix of the single-layer boundary trace."""
    n = mesh.n
    A = np.empty((n, n))
    # smooth cross-component fill first, then overwrite diagonal blocks
    d = mesh.x[:, None, :] - mesh.x[None, :, :]
    dist2 = np.einsum("ijk,ijk->ij", d, d)
    np.fill_diagonal(dist2, 1.0)
    A[:] = (0.25 / np.pi) * np.log(dist2) * mesh.weights[None, :]

    for c in range(mesh.n_components):
        sl = mesh.component_slice(c)
        tc = mesh.t[sl]
        nc = tc.shape[0]
        speed = mesh.speed[sl]
        dt = tc[:, None] - tc[None, :]
        s2 = 4.0 * np.sin(dt / 2.0) ** 2
        np.fill_diagonal(s2, 1.0)
        block_dist2 = dist2[sl, sl]
        ratio = block_dist2 / s2
        np.fill_diagonal(ratio, speed**2)
        k2 = (0.25 / np.pi) * speed[None, :] * np.log(ratio)
        row = log_weight_row(nc)
        idx = np.arange(nc)
        R = row[(idx[:, None] - idx[None, :]) % nc]
        A[sl, sl] = R * ((0.25 / np.pi) * speed[None, :]) + (2.0 * np.pi / nc) * k2
    return OperatorMatrix(A, "V", mesh)


def _double_layer_kernel(mesh, points):
    """Double-layer kernel -nu(y) . grad S2(x - y) at points x, nodes y."""
    d = points[:, None, :] - mesh.x[None, :, :]
    dist2 = np.einsum("ijk,ijk->ij", d, d)
    num = d[:, :, 0] * mesh.normal[None, :, 0] + d[:, :, 1] * mesh.normal[None, :, 1]
    return -num / (2.0 * np.pi * dist2)


def assemble_W(mesh):
    """Nystrom matrix of the double-layer boundary operator.

    The diagonal holds the continuous limit kappa_i / (4 pi); the sign
    convention is pinned by asserting W 1 = 1/2 at build time.
    """
    d = mesh.x[:, None, :] - mesh.x[None, :, :]
    dist2 = np.einsum("ijk,ijk->ij", d, d)
    np.fill_diagonal(dist2, 1.0)
    num = d[:, :, 0] * mesh.normal[None, :, 0] + d[:, :, 1] * mesh.normal[None, :, 1]
    kw = -num / (2.0 * np.pi * dist2)
    np.fill_diagonal(kw, mesh.curvature / (4.0 * np.pi))
    W = kw * mesh.weights[None, :]
    resid = float(np.max(np.abs(W @ np.ones(mesh.n) - 0.5)))
    if resid > 1e-8:
        raise InvalidGeometry(
            f"double-layer sign/orientation check failed: |W 1 - 1/2| = {resid:.3e}"
        )
    return OperatorMatrix(W, "W", mesh)


def assemble_Wt(mesh):
    """Adjoint double-layer operator, exact in the weighted pairing."""
    return OperatorMatrix(operator_set(mesh).Wt, "Wt", mesh)


class OperatorSet:
    """All dense operators for one mesh, assembled once and shared.

    Cheap pieces (V, W, Wt, the bordered factorization, the density map R
    and the value-at-infinity functional q) are built eagerly; the
    Dirichlet-to-Neumann matrices and their weighted transposes are built
    on first use.
    """

    def __init__(self, mesh):
        self.mesh = mesh
        self.topology = topology_of(mesh)
        n = mesh.n
        self.V = assemble_V(mesh).matrix
        self.W = assemble_W(mesh).matrix
        w = mesh.weights
        self.Wt = (self.W.T * w[None, :]) / w[:, None]

        B = np.zeros((n + 1, n + 1))
        B[:n, :n] = self.V
        B[:n, n] = 1.0
        B[n, :n] = w
        try:
            self._bordered_lu = lu_factor(B)
        except np.linalg.LinAlgError as exc:  # pragma: no cover
            raise SingularSystem("bordered single-layer system is singular") from exc
        rhs = np.zeros((n + 1, n))
        rhs[:n, :] = np.eye(n)
        sol = lu_solve(self._bordered_lu, rhs)
        self.R = sol[:n, :]
        self.q = sol[n, :]
        self._lazy = {}

    def harmonic_density(self, g):
        """Density and constant with V eta + c = g and zero-mean eta."""
        g = _check_aligned(self.mesh, g)
        rhs = np.concatenate([g, [0.0]])
        sol = lu_solve(self._bordered_lu, rhs)
        return sol[:-1], float(sol[-1])

    def _get(self, name, builder):
        if name not in self._lazy:
            self._lazy[name] = builder()
        return self._lazy[name]

    @property
    def S_plus(self):
        return self._get(
            "S_plus", lambda: (-0.5 * np.eye(self.mesh.n) + self.Wt) @ self.R
        )

    @property
    def S_minus(self):
        return self._get(
            "S_minus", lambda: (-0.5 * np.eye(self.mesh.n) - self.Wt) @ self.R
        )

    def steklov(self, side):
        if side == "plus":
            return self.S_plus
        if side == "minus":
            return self.S_minus
        raise OutOfRange(f"unknown side {side!r}")

    def rep_matrix(self, side):
        """Weighted transpose of the Dirichlet-to-Neumann map of one side."""

        def build():
            S = self.steklov(side)
            w = self.mesh.weights
            return (S.T * w[None, :]) / w[:, None]

        return self._get(f"rep_{side}", build)


def operator_set(mesh):
    """Operator bundle for a mesh, cached on the mesh object itself."""
    ops = getattr(mesh, "_operator_set", None)
    if ops is None:
        ops = OperatorSet(mesh)
        mesh._operator_set = ops
    return ops


def steklov(mesh, side):
    """Dirichlet-to-Neumann operator of the interior (plus) or exterior (minus)."""
    ops = operator_set(mesh)
    kind = "Splus" if side == "plus" else "Sminus"
    return OperatorMatrix(ops.steklov(side), kind, mesh)


def save_matrix(op, path, fmt="csv"):
    """Dump a dense operator row-major with a small header for debugging."""
    if fmt == "csv":
        header = f"kind={op.kind} n={op.matrix.shape[0]}"
        np.savetxt(path, op.matrix, delimiter=",", header=header)
    elif fmt == "npy":
        np.save(path, op.matrix)
    else:
        raise ValueError(f"unknown dump format {fmt!r}")
