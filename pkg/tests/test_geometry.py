import numpy as np
import pytest

from bie2d.errors import InvalidGeometry, LengthMismatch, OutOfRange
from bie2d.geometry import (
    CurveSpec,
    build_mesh,
    indicator,
    integrate,
    locate_point,
    pairing,
    stock_mesh,
    topology_of,
)


def test_circle_circumference():
    mesh = stock_mesh("disk", 64)
    assert abs(integrate(mesh, np.ones(mesh.n)) - 2 * np.pi) < 1e-12


def test_ellipse_arclength_against_refined_mesh():
    # oracle: the same quadrature on a much finer mesh
    coarse = stock_mesh("ellipse", 128)
    fine = stock_mesh("ellipse", 4096)
    len_c = integrate(coarse, np.ones(coarse.n))
    len_f = integrate(fine, np.ones(fine.n))
    assert abs(len_c - len_f) / len_f < 1e-10


def test_annulus_hole_normal_points_into_hole():
    mesh = stock_mesh("annulus", 64)
    topo = topology_of(mesh)
    assert mesh.n_components == 2
    (hole,) = topo.hole_comps
    sl = mesh.component_slice(hole)
    # normal at a node of the unit circle must point toward the origin
    x = mesh.x[sl][0]
    nu = mesh.normal[sl][0]
    assert np.dot(nu, -x / np.linalg.norm(x)) > 0.99


def test_orientation_autofix():
    # hole declared counterclockwise still ends up with inward normal
    specs = [
        CurveSpec("circle", radius=2.0),
        CurveSpec("circle", radius=1.0, orientation="positive"),
    ]
    mesh = build_mesh(specs, [64, 64])
    topo = topology_of(mesh)
    sl = mesh.component_slice(topo.hole_comps[0])
    x, nu = mesh.x[sl][0], mesh.normal[sl][0]
    assert np.dot(nu, -x) > 0


def test_signed_area_orientation_invariant():
    mesh = stock_mesh("annulus", 64)
    topo = topology_of(mesh)
    for c in range(mesh.n_components):
        sl = mesh.component_slice(c)
        area2 = 0.5 * np.sum(
            mesh.weights[sl] * np.einsum("ij,ij->i", mesh.x[sl], mesh.normal[sl])
        )
        if c in topo.outer_comps:
            assert area2 > 0
        else:
            assert area2 < 0


def test_topology_counts():
    assert topology_of(stock_mesh("disk", 32)).kappa_plus == 1
    assert topology_of(stock_mesh("disk", 32)).kappa_minus == 0
    topo = topology_of(stock_mesh("annulus", 32))
    assert (topo.kappa_plus, topo.kappa_minus) == (1, 1)
    topo = topology_of(stock_mesh("two-disks", 32))
    assert (topo.kappa_plus, topo.kappa_minus) == (2, 0)


def test_deep_nesting_rejected():
    specs = [
        CurveSpec("circle", radius=3.0),
        CurveSpec("circle", radius=2.0, orientation="negative"),
        CurveSpec("circle", radius=1.0),
    ]
    with pytest.raises(InvalidGeometry):
        build_mesh(specs, [64, 64, 64])


def test_self_intersecting_curve_rejected():
    # limacon with an inner loop
    spec = CurveSpec("fourier", cos_x=(1.0, 1.0, 1.0), sin_y=(0.0, 1.0, 1.0))
    with pytest.raises(InvalidGeometry):
        build_mesh([spec], [64])


def test_node_count_validation():
    spec = CurveSpec("circle", radius=1.0)
    with pytest.raises(InvalidGeometry):
        build_mesh([spec], [15])
    with pytest.raises(InvalidGeometry):
        build_mesh([spec], [34 + 1])


def test_indicator_examples():
    disk = stock_mesh("disk", 32)
    topo = topology_of(disk)
    assert np.all(indicator(topo, "omega", 1) == 1.0)
    ann = stock_mesh("annulus", 32)
    topo = topology_of(ann)
    inner = indicator(topo, "omega_minus", 1)
    outer = indicator(topo, "omega_minus", 0)
    hole_sl = ann.component_slice(topo.hole_comps[0])
    assert np.all(inner[hole_sl] == 1.0) and inner.sum() == 32
    assert np.all(outer[ann.component_slice(topo.outer_comps[0])] == 1.0)
    assert outer.sum() == 32
    with pytest.raises(OutOfRange):
        indicator(topo, "omega", 5)


def test_indicator_partitions():
    for name in ("annulus", "two-disks"):
        mesh = stock_mesh(name, 32)
        topo = topology_of(mesh)
        total = sum(
            indicator(topo, "omega", j) for j in range(1, topo.kappa_plus + 1)
        )
        assert np.all(total == 1.0)
        total = sum(
            indicator(topo, "omega_minus", k) for k in range(topo.kappa_minus + 1)
        )
        assert np.all(total == 1.0)


def test_integrate_examples():
    mesh = stock_mesh("disk", 64)
    th = mesh.t
    assert abs(integrate(mesh, np.ones(mesh.n)) - 2 * np.pi) < 1e-12
    assert abs(integrate(mesh, np.cos(th))) < 1e-12
    assert abs(integrate(mesh, np.cos(th) ** 2) - np.pi) < 1e-10
    assert abs(pairing(mesh, np.cos(th), np.cos(th)) - np.pi) < 1e-10
    with pytest.raises(LengthMismatch):
        integrate(mesh, np.ones(mesh.n + 1))


def test_locate_point_examples():
    disk = stock_mesh("disk", 64)
    topo = topology_of(disk)
    assert locate_point(disk, topo, (0.0, 0.0)) == ("interior", 1)
    assert locate_point(disk, topo, (3.0, 0.0)) == ("exterior", 0)
    assert locate_point(disk, topo, (1.0, 0.0)).kind == "near_boundary"
    ann = stock_mesh("annulus", 64)
    topo = topology_of(ann)
    assert locate_point(ann, topo, (1.5, 0.0)) == ("interior", 1)
    assert locate_point(ann, topo, (0.5, 0.0)) == ("exterior", 1)
    assert locate_point(ann, topo, (2.5, 0.0)) == ("exterior", 0)


def test_refinement_consistency():
    for name in ("ellipse", "kite"):
        coarse = stock_mesh(name, 128)
        fine = stock_mesh(name, 256)
        f = lambda m: np.cos(m.t) + 0.3 * np.sin(2 * m.t) + 1.0
        ic = integrate(coarse, f(coarse))
        jf = integrate(fine, f(fine))
        assert abs(ic - jf) <= 1e-10 * abs(jf)
        lc = integrate(coarse, np.ones(coarse.n))
        lf = integrate(fine, np.ones(fine.n))
        assert abs(lc - lf) <= 1e-10 * lf
        # shared nodes: every other fine node coincides with a coarse node
        assert np.allclose(fine.x[::2], coarse.x, atol=1e-13)
        assert np.allclose(fine.curvature[::2], coarse.curvature, atol=1e-10)


def test_disjointness_enforced():
    specs = [
        CurveSpec("circle", radius=1.0),
        CurveSpec("circle", center=(1.5, 0.0), radius=1.0),
    ]
    with pytest.raises(InvalidGeometry):
        build_mesh(specs, [64, 64])


def test_outer_curve_declared_clockwise_is_flipped():
    mesh = build_mesh(
        [CurveSpec("circle", radius=1.0, orientation="negative")], [64]
    )
    # outward normal of the open set points away from the center
    assert np.all(np.einsum("ij,ij->i", mesh.normal, mesh.x) > 0.99)


def test_fourier_curve_with_sine_coefficients():
    # unit circle written as a generic trigonometric polynomial
    spec = CurveSpec("fourier", cos_x=(0.0, 1.0), sin_y=(0.0, 1.0))
    mesh = build_mesh([spec], [64])
    assert abs(integrate(mesh, np.ones(64)) - 2 * np.pi) < 1e-12
    assert np.max(np.abs(mesh.curvature - 1.0)) < 1e-12
