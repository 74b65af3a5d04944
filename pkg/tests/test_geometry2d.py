import numpy as np
import pytest

from conftest import random_hball_gauge
from gaugeloc import (
    Certificate,
    CertificateError,
    PreconditionError,
    dseg_contains,
    dseg_polygon,
    euclidean_gauge,
    find_certificate,
    ft_locus_polygon,
    l1_gauge,
    norm_characterization_report,
    objective_eval,
    point_instance,
    polygon_contains,
    polygon_hausdorff,
    solve,
    sublevel_polygon,
    triangle_equality_face,
    verify_extreme_point_form,
)
from gaugeloc.geometry2d import Polygon, polygon_boundary_samples


def test_dseg_contains_examples(ex311_gauge):
    l1 = l1_gauge(2)
    assert dseg_contains(l1, [0, 0], [1, 1], [1, 0], 1e-9)
    assert dseg_contains(l1, [0, 0], [1, 1], [0, 0], 1e-9)  # endpoint
    assert dseg_contains(ex311_gauge, [-2, 2], [-2, -2], [-2, -2], 1e-9)
    assert not dseg_contains(ex311_gauge, [-2, 2], [-2, -2], [0, 0], 1e-9)
    # dimension-generic: l1 in R3
    assert dseg_contains(l1_gauge(3), [0, 0, 0], [1, 1, 1], [1, 0, 1], 1e-9)


def test_dseg_polygon_examples(ex311_gauge):
    seg = dseg_polygon(ex311_gauge, [-2, 2], [-2, -2])
    assert seg.kind == "segment"
    expected = Polygon("segment", np.array([[-2.0, 2.0], [-2.0, -2.0]]))
    assert polygon_hausdorff(seg, expected) <= 1e-9

    box = dseg_polygon(l1_gauge(2), [0, 0], [1, 1])
    assert box.kind == "polygon"
    expected = Polygon("polygon", np.array([[0, 0], [1, 0], [1, 1], [0, 1]], float))
    assert polygon_hausdorff(box, expected) <= 1e-9

    # a many-facet ball: the d-segment must contain the straight segment
    angles = np.linspace(0, 2 * np.pi, 17)[:-1]
    ionic = np.column_stack([np.cos(angles), np.sin(angles)])
    from gaugeloc import HPolytope

    g16 = HPolytope(ionic)
    lens = dseg_polygon(g16, [0, 0], [2, 0])
    assert polygon_contains(lens, [1, 0], 1e-7)
    with pytest.raises(PreconditionError):
        dseg_polygon(euclidean_gauge(2), [0, 0], [1, 1])


def test_dseg_polygon_membership_agreement(ex311_gauge):
    rng = np.random.default_rng(4)
    for g in (ex311_gauge, l1_gauge(2), random_hball_gauge(rng)):
        x = rng.uniform(-2, 2, size=2)
        y = rng.uniform(-2, 2, size=2)
        if np.linalg.norm(x - y) < 0.5:
            y = x + np.array([1.0, 0.3])
        poly = dseg_polygon(g, x, y)
        # the straight segment always sits inside
        for t in np.linspace(0, 1, 11):
            z = x + t * (y - x)
            assert dseg_contains(g, x, y, z, 1e-9)
            assert polygon_contains(poly, z, 1e-7)
        # boundary probes: inside passes, outside fails
        if poly.kind == "polygon":
            v = poly.vertices
            centroid = v.mean(axis=0)
            for i in range(len(v)):
                mid = 0.5 * (v[i] + v[(i + 1) % len(v)])
                out_dir = mid - centroid
                out_dir /= np.linalg.norm(out_dir)
                assert dseg_contains(g, x, y, mid - 1e-4 * out_dir, 1e-6)
                assert not dseg_contains(g, x, y, mid + 1e-4 * out_dir, 1e-9)


def test_ft_locus_singleton(ex311_instance):
    sol = solve(ex311_instance)
    poly = ft_locus_polygon(ex311_instance, sol.point, sol.certificate)
    assert poly.kind == "point"
    assert np.allclose(poly.vertices[0], [0, 0], atol=1e-9)


def test_ft_locus_euclidean_symmetric():
    # strictly convex ball: the cones are rays with a unique crossing
    ge = euclidean_gauge(2)
    inst = point_instance(
        [[1, 0], [-0.5, np.sqrt(3) / 2], [-0.5, -np.sqrt(3) / 2]], ge
    )
    sol = solve(inst)
    poly = ft_locus_polygon(inst, sol.point, sol.certificate)
    assert poly.kind == "point"
    assert np.allclose(poly.vertices[0], [0, 0], atol=1e-6)


def test_ft_locus_l1_box():
    l1 = l1_gauge(2)
    inst = point_instance([[-1, -1], [1, 1]], l1)
    xbar = np.zeros(2)
    cert = find_certificate(inst, xbar)
    poly = ft_locus_polygon(inst, xbar, cert)
    expected = Polygon(
        "polygon", np.array([[-1, -1], [1, -1], [1, 1], [-1, 1]], float)
    )
    assert polygon_hausdorff(poly, expected) <= 1e-9
    # cross-check the polygon pointwise against the objective
    opt = objective_eval(inst, xbar)
    for p in polygon_boundary_samples(poly):
        assert objective_eval(inst, p) == pytest.approx(opt, abs=1e-9)


def test_ft_locus_rejects_bad_certificate(ex311_instance):
    bad = Certificate((np.array([1.0, 0.0]), np.array([-1.0, 0.0])))
    with pytest.raises(CertificateError):
        ft_locus_polygon(ex311_instance, np.zeros(2), bad)


def test_locus_optimality_probes(ex311_instance):
    sol = solve(ex311_instance)
    poly = ft_locus_polygon(ex311_instance, sol.point, sol.certificate)
    for v in poly.vertices:
        assert objective_eval(ex311_instance, v) == pytest.approx(sol.value, abs=1e-7)
    rng = np.random.default_rng(6)
    for _ in range(12):
        d = rng.normal(size=2)
        d /= np.linalg.norm(d)
        outside = poly.vertices[0] + 1e-2 * d
        assert objective_eval(ex311_instance, outside) > sol.value + 1e-9


def test_sublevel_examples(ex311_instance):
    p2 = sublevel_polygon(ex311_instance, 2.0)
    assert p2.kind == "point" and np.allclose(p2.vertices[0], [0, 0], atol=1e-9)
    p25 = sublevel_polygon(ex311_instance, 2.5)
    assert p25.kind == "polygon"
    assert polygon_contains(p25, [0, 0], 1e-9)
    p30 = sublevel_polygon(ex311_instance, 3.0)
    for v in p25.vertices:
        assert polygon_contains(p30, v, 1e-7)  # nesting
    ball = sublevel_polygon(point_instance([[0, 0]], l1_gauge(2)), 1.0)
    expected = Polygon("polygon", np.array([[1, 0], [0, 1], [-1, 0], [0, -1]], float))
    assert polygon_hausdorff(ball, expected) <= 1e-9
    assert sublevel_polygon(ex311_instance, 1.0).kind == "empty"


def test_sublevel_boundary_values(ex311_instance):
    alpha = 2.7
    poly = sublevel_polygon(ex311_instance, alpha)
    for p in polygon_boundary_samples(poly):
        assert objective_eval(ex311_instance, p) == pytest.approx(alpha, abs=1e-7)


def test_locus_matches_sublevel_at_optimum(ex311_instance):
    sol = solve(ex311_instance)
    locus = ft_locus_polygon(ex311_instance, sol.point, sol.certificate)
    level = sublevel_polygon(ex311_instance, sol.value)
    assert polygon_hausdorff(locus, level) <= 1e-6


def test_extreme_point_form(ex311_instance):
    poly = sublevel_polygon(ex311_instance, 3.0)
    for v in poly.vertices:
        w = verify_extreme_point_form(ex311_instance, 3.0, v)
        assert w is not None
        i, lam, direction = w
        site = ex311_instance.sites[i].set.p
        assert np.allclose(site + lam * direction, v, atol=1e-6)
    # a site point itself has the lambda = 0 witness
    w = verify_extreme_point_form(ex311_instance, 3.0, [-2, 2])
    assert w is not None and w[1] == 0.0


def test_extreme_point_form_rejects_set_sites(remark47_instance):
    with pytest.raises(PreconditionError):
        verify_extreme_point_form(remark47_instance, 4.0, [1, 1])


def test_triangle_equality_examples(ex311_gauge):
    assert triangle_equality_face(l1_gauge(2), [1, 0], [0, 1])
    assert not triangle_equality_face(euclidean_gauge(2), [1, 0], [0, 1])
    assert triangle_equality_face(ex311_gauge, [-2, 2], [-2, -2])
    with pytest.raises(PreconditionError):
        triangle_equality_face(l1_gauge(2), [0, 0], [1, 0])


def test_norm_characterization_reports(ex311_gauge):
    rep = norm_characterization_report(l1_gauge(2), 15)
    assert rep.is_norm and not rep.strictly_convex
    assert rep.segment_trials_passed >= 14
    assert rep.flat_edge_counterexample_ok

    rep = norm_characterization_report(ex311_gauge, 5)
    assert not rep.is_norm
    assert rep.witness_ratio == pytest.approx(4.0, abs=1e-9)
    assert rep.witness_locus_is_origin

    rep = norm_characterization_report(euclidean_gauge(2), 10)
    assert rep.is_norm and rep.strictly_convex
    assert rep.straight_dsegments_confirmed
    assert rep.segment_trials_passed >= 9


def test_locus_bounded_for_point_sites():
    # polytopal 2-D gauges always give a bounded (possibly degenerate) locus
    rng = np.random.default_rng(14)
    for _ in range(6):
        g = random_hball_gauge(rng)
        pts = [rng.uniform(-2, 2, size=2) for _ in range(3)]
        inst = point_instance(pts, g)
        sol = solve(inst)
        if sol.certificate is None or any(
            np.linalg.norm(sol.point - p) < 1e-9 for p in pts
        ):
            continue
        poly = ft_locus_polygon(inst, sol.point, sol.certificate)
        assert poly.kind in ("point", "segment", "polygon")
        assert not poly.rays
        assert np.all(np.isfinite(poly.vertices))
        assert np.max(np.abs(poly.vertices)) < 100.0
