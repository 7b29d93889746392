import json

import numpy as np
import pytest

from bie2d.errors import IncompatibleData, NearBoundary
from bie2d.geometry import (
    CurveSpec,
    build_mesh,
    indicator,
    integrate,
    stock_mesh,
    topology_of,
)
from bie2d.operators import operator_set
from bie2d.potentials import value_at_infinity
from bie2d.verify import probe_points, seeded_density
from bie2d.distributions import J_inverse, dist_single_layer_field, mass_of
from bie2d.solvers import (
    check_compat_exterior,
    check_compat_interior,
    decompose,
    dirichlet_exterior,
    dirichlet_exterior_via_decomposition,
    dirichlet_interior,
    dirichlet_interior_via_decomposition,
    green_h,
    kernel_coincidence_angle,
    neumann_exterior,
    neumann_interior,
    nullspace,
    poisson_exterior,
    poisson_interior,
)


def test_dirichlet_interior_examples(disk128, annulus):
    disk2 = build_mesh([CurveSpec("circle", radius=2.0)], [128])
    rep = dirichlet_interior(disk2, np.cos(disk2.t))
    assert abs(rep.field.eval(np.array([1.0, 0.0])) - 0.5) < 1e-8
    # constants are harmonic; the capacity-one contour stays well posed
    rep = dirichlet_interior(disk128, np.ones(disk128.n))
    assert abs(rep.field.eval(np.array([0.3, 0.2])) - 1.0) < 1e-12
    assert np.max(np.abs(rep.densities["eta"])) < 1e-10
    assert abs(rep.densities["constant"] - 1.0) < 1e-12
    g = np.log(np.linalg.norm(annulus.x, axis=1))
    rep = dirichlet_interior(annulus, g)
    assert abs(rep.field.eval(np.array([1.5, 0.0])) - np.log(1.5)) < 1e-7


def test_dirichlet_exterior_examples(disk128):
    rep = dirichlet_exterior(disk128, np.cos(disk128.t))
    assert abs(rep.field.eval(np.array([2.0, 0.0])) - 0.5) < 1e-8
    assert abs(rep.u_infinity) < 1e-10
    rep = dirichlet_exterior(disk128, np.ones(disk128.n))
    assert abs(rep.field.eval(np.array([3.0, 0.0])) - 1.0) < 1e-12
    assert abs(rep.u_infinity - 1.0) < 1e-12
    # mean over a probe circle agrees with the representation value
    out = value_at_infinity(rep.field, 8.0)
    assert abs(out.mean - rep.u_infinity) < 1e-6


def test_compat_interior_examples(disk128, two_disks):
    vals = check_compat_interior(disk128, np.cos(disk128.t))
    assert np.max(np.abs(vals)) < 1e-10
    vals = check_compat_interior(disk128, np.ones(disk128.n))
    assert abs(vals[0] - 2 * np.pi) < 1e-10
    g = np.where(two_disks.comp == 0, 1.0, -1.0)
    vals = check_compat_interior(two_disks, g)
    assert abs(vals[0] - 2 * np.pi) < 1e-9
    assert abs(vals[1] + 2 * np.pi) < 1e-9
    assert abs(vals.sum()) < 1e-9  # total flux cancels, component fluxes do not


def test_compat_exterior_examples(disk128, annulus):
    vals = check_compat_exterior(disk128, np.cos(disk128.t))
    assert vals.shape == (1,) and abs(vals[0]) < 1e-10
    vals = check_compat_exterior(disk128, np.ones(disk128.n))
    assert abs(vals[0] - 2 * np.pi) < 1e-10
    topo = topology_of(annulus)
    g = indicator(topo, "omega_minus", 1) * np.cos(annulus.t)
    vals = check_compat_exterior(annulus, g)
    assert np.max(np.abs(vals)) < 1e-9


def test_neumann_interior_disk(disk128):
    rep = neumann_interior(disk128, np.cos(disk128.t))
    diff = rep.field.eval(np.array([0.5, 0.0])) - rep.field.eval(np.array([0.0, 0.0]))
    assert abs(diff - 0.5) < 1e-7
    assert rep.rank_info["deficiency"] == 1
    assert rep.residuals["neumann_identity"] < 1e-8


def test_neumann_interior_rejects_constant(disk128):
    with pytest.raises(IncompatibleData) as err:
        neumann_interior(disk128, np.ones(disk128.n))
    assert abs(err.value.pairings[0] - 2 * np.pi) < 1e-10


def test_neumann_interior_zero_datum(disk128):
    rep = neumann_interior(disk128, np.zeros(disk128.n))
    h = 1e-3
    u = rep.field.eval_unchecked(
        np.array([[0.2, 0.1], [0.2 + h, 0.1], [0.2, 0.1 + h]])
    )
    grad = np.hypot(u[1] - u[0], u[2] - u[0]) / h
    assert grad < 1e-7


def test_neumann_interior_uniqueness(annulus):
    g = seeded_density(annulus, np.random.default_rng(7), zero_mean=True)
    rep1 = neumann_interior(annulus, g)
    rep2 = neumann_interior(annulus, g, kernel_shift=11)
    pts = probe_points(annulus, "interior", count=8)
    d = rep2.field.eval_unchecked(pts) - rep1.field.eval_unchecked(pts)
    # difference is constant on the (single) component of the open set
    assert np.max(np.abs(d - np.mean(d))) < 1e-6
    h = 1e-3
    p = pts[0]
    stencil = np.array([p, p + [h, 0.0], p + [0.0, h]])
    du = rep2.field.eval_unchecked(stencil) - rep1.field.eval_unchecked(stencil)
    assert np.hypot(du[1] - du[0], du[2] - du[0]) / h < 1e-6


def test_neumann_exterior_disk(disk128):
    rep = neumann_exterior(disk128, np.cos(disk128.t))
    assert abs(rep.field.eval(np.array([2.0, 0.0])) + 0.5) < 1e-7
    theta = np.linspace(0, 2 * np.pi, 32, endpoint=False)
    ring = 2.0 * np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    u = rep.field.eval_unchecked(ring)
    assert np.max(np.abs(u + np.cos(theta) / 2.0)) < 1e-7
    assert rep.residuals["density_mass"] < 1e-8
    out = value_at_infinity(rep.field, 8.0)
    assert abs(out.mean - rep.u_infinity) < 1e-6


def test_neumann_exterior_rejects_constant(disk128):
    with pytest.raises(IncompatibleData) as err:
        neumann_exterior(disk128, np.ones(disk128.n))
    assert abs(err.value.pairings[0] - 2 * np.pi) < 1e-10


def test_neumann_exterior_zero_datum_and_uniqueness(annulus):
    rep = neumann_exterior(annulus, np.zeros(annulus.n))
    far = rep.field.eval(np.array([5.0, 0.0]))
    assert abs(far) < 1e-9
    # shifting by a transpose-kernel density moves the hole constant only
    g = indicator(topology_of(annulus), "omega_minus", 1) * np.cos(annulus.t)
    rep1 = neumann_exterior(annulus, g)
    rep2 = neumann_exterior(annulus, g, kernel_shift=3)
    theta = np.linspace(0, 2 * np.pi, 12, endpoint=False)
    hole_pts = 0.5 * np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    d = rep2.field.eval_unchecked(hole_pts) - rep1.field.eval_unchecked(hole_pts)
    assert np.max(np.abs(d - np.mean(d))) < 1e-6
    far_d = rep2.field.eval(np.array([6.0, 0.0])) - rep1.field.eval(np.array([6.0, 0.0]))
    assert abs(far_d) < 1e-6


def test_nullspace_dimensions():
    expected = {"disk": (0, 1), "annulus": (1, 1), "two-disks": (0, 2)}
    for name, (dim_plus, dim_minus) in expected.items():
        mesh = stock_mesh(name, 128)
        a = nullspace(mesh, "half_plus_W")
        b = nullspace(mesh, "minus_half_plus_W")
        assert (a.dimension, b.dimension) == (dim_plus, dim_minus)
        assert a.gap > 1e6 and b.gap > 1e6
        assert nullspace(mesh, "half_plus_Wt").dimension == dim_plus
        assert nullspace(mesh, "minus_half_plus_Wt").dimension == dim_minus


def test_nullspace_basis_structure():
    mesh = stock_mesh("annulus", 128)
    topo = topology_of(mesh)
    basis = nullspace(mesh, "half_plus_W").vectors
    chi = indicator(topo, "omega_minus", 1)
    chi = chi / np.linalg.norm(chi)
    overlap = abs(float(basis[:, 0] @ chi))
    assert overlap > 1.0 - 1e-10
    basis = nullspace(mesh, "minus_half_plus_W").vectors
    const = np.ones(mesh.n) / np.sqrt(mesh.n)
    assert abs(float(basis[:, 0] @ const)) > 1.0 - 1e-10


def test_transpose_kernel_coincidence(annulus):
    assert kernel_coincidence_angle(annulus, "half_plus_Wt") < 1e-5
    assert kernel_coincidence_angle(annulus, "minus_half_plus_Wt") < 1e-5


def test_decompose_examples(disk128, annulus, rng):
    g = seeded_density(disk128, rng)
    g_im, g_ker = decompose(disk128, g, "plus")
    assert np.max(np.abs(g_ker)) == 0.0
    topo = topology_of(annulus)
    chi = indicator(topo, "omega_minus", 1)
    g_im, g_ker = decompose(annulus, chi, "plus")
    assert np.max(np.abs(g_ker - chi)) < 1e-9
    assert np.max(np.abs(g_im)) < 1e-9
    # oblique mean: kernel part of any disk datum under -1/2+W is a constant
    g = seeded_density(disk128, rng)
    g_im, g_ker = decompose(disk128, g, "minus")
    assert np.max(np.abs(g_ker - g_ker[0])) < 1e-10
    P = nullspace(disk128, "minus_half_plus_Wt").vectors
    psi = P[:, 0]
    oblique_mean = integrate(disk128, psi * g) / integrate(disk128, psi)
    assert abs(g_ker[0] - oblique_mean) < 1e-10


def test_cross_solver_interior(disk128, annulus, rng):
    r1 = dirichlet_interior(disk128, np.cos(disk128.t))
    r2 = dirichlet_interior_via_decomposition(disk128, np.cos(disk128.t))
    p = np.array([0.3, 0.4])
    assert abs(r1.field.eval(p) - r2.field.eval(p)) < 1e-7
    chi = indicator(topology_of(annulus), "omega_minus", 1)
    r1 = dirichlet_interior(annulus, chi)
    r2 = dirichlet_interior_via_decomposition(annulus, chi)
    p = np.array([1.5, 0.0])
    assert abs(r1.field.eval(p) - r2.field.eval(p)) < 1e-6
    rep = dirichlet_interior_via_decomposition(disk128, np.zeros(disk128.n))
    assert abs(rep.field.eval(np.array([0.2, 0.0]))) < 1e-12


def test_cross_solver_exterior(disk128, annulus, rng):
    for g in (np.cos(disk128.t), np.ones(disk128.n)):
        r1 = dirichlet_exterior(disk128, g)
        r2 = dirichlet_exterior_via_decomposition(disk128, g)
        p = np.array([2.0, 0.0])
        assert abs(r1.field.eval(p) - r2.field.eval(p)) < 1e-7
        assert abs(r1.u_infinity - r2.u_infinity) < 1e-8
    g = seeded_density(annulus, rng)
    r1 = dirichlet_exterior(annulus, g)
    r2 = dirichlet_exterior_via_decomposition(annulus, g)
    for p in (np.array([0.2, 0.1]), np.array([3.0, 1.0])):
        assert abs(r1.field.eval(p) - r2.field.eval(p)) < 1e-6


def test_green_h_examples(disk128):
    rep = green_h(disk128, np.array([0.0, 0.0]), "interior")
    assert abs(rep.field.eval(np.array([0.4, 0.1]))) < 1e-10
    rep = green_h(disk128, np.array([0.0, 0.0]), "exterior")
    assert abs(rep.field.eval(np.array([3.0, 0.0]))) < 1e-10
    disk2 = build_mesh([CurveSpec("circle", radius=2.0)], [128])
    rep = green_h(disk2, np.array([0.0, 0.0]), "interior")
    expected = np.log(2.0) / (2.0 * np.pi)
    assert abs(rep.field.eval(np.array([0.4, 0.1])) - expected) < 1e-8
    with pytest.raises(NearBoundary):
        green_h(disk128, np.array([1.0, 0.0]), "interior")


def test_poisson_interior(disk128, rng):
    g = seeded_density(disk128, rng)
    mean = integrate(disk128, g) / (2 * np.pi)
    assert abs(poisson_interior(disk128, g, np.array([0.0, 0.0])) - mean) < 1e-8
    rd = dirichlet_interior(disk128, g)
    for p in probe_points(disk128, "interior", count=5):
        assert abs(poisson_interior(disk128, g, p) - rd.field.eval_unchecked(p[None])[0]) < 1e-6
    for p in probe_points(disk128, "exterior", count=5):
        assert abs(poisson_interior(disk128, g, p)) < 1e-6


def test_poisson_exterior(disk128, rng):
    g = seeded_density(disk128, rng)
    re_ = dirichlet_exterior(disk128, g)
    for p in probe_points(disk128, "exterior", count=5):
        val, c_g = poisson_exterior(disk128, g, p)
        assert abs(val - re_.field.eval_unchecked(p[None])[0]) < 1e-6
        assert abs(c_g - re_.u_infinity) < 1e-8
    for p in probe_points(disk128, "interior", count=5):
        val, _ = poisson_exterior(disk128, g, p)
        assert abs(val) < 1e-6


def test_third_green_identities(ellipse, rng):
    from bie2d.verify import check_third_green_exterior, check_third_green_interior

    assert check_third_green_interior(ellipse, rng) < 1e-6
    assert check_third_green_exterior(ellipse, rng) < 1e-6


def test_interior_solution_reexpressed_as_single_layer(ellipse, rng):
    # re-express an interior Dirichlet solution as an exterior-side single
    # layer plus a constant and compare at probes
    ops = operator_set(ellipse)
    g = seeded_density(ellipse, rng)
    c_star = float(ops.q @ g)
    tau = J_inverse(ellipse, g - c_star, side="minus")
    assert abs(mass_of(tau)) < 1e-8
    direct = dirichlet_interior(ellipse, g)
    pts = probe_points(ellipse, "interior", count=10)
    recon = dist_single_layer_field(tau, pts, "interior") + c_star
    assert np.max(np.abs(recon - direct.field.eval_unchecked(pts))) < 1e-5


def test_report_serializable(disk128):
    rep = neumann_interior(disk128, np.cos(disk128.t))
    text = json.dumps(rep.to_dict(), sort_keys=True)
    assert "rank_info" in text or "rank" in text


def test_off_center_domain():
    mesh = build_mesh([CurveSpec("circle", center=(3.0, -1.0), radius=1.0)], [128])
    g = np.cos(mesh.t)
    rep = dirichlet_exterior(mesh, g)
    out = value_at_infinity(rep.field, 12.0)
    assert abs(out.mean - out.representation) < 1e-8
    rd = dirichlet_interior(mesh, g)
    p = np.array([3.2, -0.9])
    assert abs(poisson_interior(mesh, g, p) - rd.field.eval(p)) < 1e-8
    assert neumann_interior(mesh, g).residuals["equation"] < 1e-10


def test_identity_suite_on_kite_with_hole():
    from bie2d.geometry import stock_specs
    from bie2d.verify import run_verify

    specs = stock_specs("kite") + [
        CurveSpec("circle", center=(0.15, 0.2), radius=0.35, orientation="negative")
    ]
    mesh = build_mesh(specs, [256, 128])
    assert topology_of(mesh).kappa_minus == 1
    report = run_verify(meshes={"kite-hole": mesh}, n=256)
    assert report.passed, [r.name for r in report.rows if not r.passed]
