import numpy as np
import pytest

from gaugeloc import (
    AffineFlat,
    EuclideanBall,
    HPolytope,
    Instance,
    ShiftedEllipsoid,
    Singleton,
    SiteSpec,
    VPolytope,
    VPolytopeSet,
    euclidean_gauge,
    l1_gauge,
    linf_gauge,
    point_instance,
    segment,
)

EX311_FUNCTIONALS = np.array(
    [[-0.5, 0.0], [1.0, 1.0], [1.0, -1.0], [0.5, 1.0], [0.5, -1.0]]
)


@pytest.fixture(scope="session")
def ex311_gauge():
    return HPolytope(EX311_FUNCTIONALS)


@pytest.fixture(scope="session")
def ex311_instance(ex311_gauge):
    return point_instance([[-2.0, 2.0], [-2.0, -2.0]], ex311_gauge)


@pytest.fixture(scope="session")
def remark317_instance():
    return point_instance([[1, 0, -1], [0, -1, 1], [-1, 1, 0]], l1_gauge(3))


@pytest.fixture(scope="session")
def remark47_instance():
    linf = linf_gauge(2)
    segs = [
        segment([-4, -1], [4, -1]),
        segment([-4, 1], [4, 1]),
        segment([-1, -4], [-1, 4]),
        segment([1, -4], [1, 4]),
    ]
    return Instance(2, tuple(SiteSpec(s, linf, 1.0) for s in segs))


@pytest.fixture(scope="session")
def heron_instance():
    ge = euclidean_gauge(2)
    return Instance(
        2,
        (SiteSpec(Singleton([0, 1]), ge), SiteSpec(Singleton([2, 1]), ge)),
        AffineFlat([0, 0], [[1, 0]]),
    )


def random_vball_gauge(rng, dim=2):
    """Random vertex-form unit ball with the origin well inside."""
    if dim == 2:
        k = int(rng.integers(4, 8))
        angles = 2 * np.pi * (np.arange(k) + rng.uniform(0.2, 0.8, size=k)) / k
        radii = rng.uniform(0.6, 2.0, size=k)
        return VPolytope(np.column_stack([radii * np.cos(angles), radii * np.sin(angles)]))
    eye = np.eye(dim)
    base = np.vstack([eye, -eye]) * rng.uniform(0.6, 2.0, size=(2 * dim, 1))
    extra = rng.normal(size=(dim, dim))
    extra = extra / np.linalg.norm(extra, axis=1)[:, None] * rng.uniform(0.8, 1.8, size=(dim, 1))
    return VPolytope(np.vstack([base, extra]))


def random_hball_gauge(rng, dim=2):
    return HPolytope(random_vball_gauge(rng, dim).vertices)


def random_ellipsoid_gauge(rng, dim=2, shifted=True):
    q, _ = np.linalg.qr(rng.normal(size=(dim, dim)))
    lam = rng.uniform(0.7, 1.6, size=dim)
    a = q @ np.diag(lam) @ q.T
    a = 0.5 * (a + a.T)
    if shifted:
        c = rng.normal(size=dim)
        c = c / np.linalg.norm(c) * rng.uniform(0.0, 0.45)
        c = np.linalg.solve(a, c)  # ensures ||A c|| <= 0.45
    else:
        c = np.zeros(dim)
    return ShiftedEllipsoid(a, c)


def random_gauge(rng, dim=2, kinds=("h", "v", "e")):
    kind = kinds[int(rng.integers(len(kinds)))]
    if kind == "h":
        return random_hball_gauge(rng, dim)
    if kind == "v":
        return random_vball_gauge(rng, dim)
    return random_ellipsoid_gauge(rng, dim)


def random_polyhedral_site(rng, dim=2, allow_flat=False):
    roll = rng.uniform()
    base = rng.uniform(-2.5, 2.5, size=dim)
    if roll < 0.4 or dim > 3:
        return Singleton(base)
    if roll < 0.65:
        return segment(base, base + rng.uniform(-1.5, 1.5, size=dim))
    if roll < 0.9 or not allow_flat:
        k = int(rng.integers(3, 5))
        return VPolytopeSet(base + rng.uniform(-1.2, 1.2, size=(k, dim)))
    d = rng.normal(size=dim)
    return AffineFlat(base, [d / np.linalg.norm(d)])


def random_site(rng, dim=2, allow_flat=False):
    if rng.uniform() < 0.25:
        return EuclideanBall(rng.uniform(-2.5, 2.5, size=dim), rng.uniform(0.3, 1.0))
    return random_polyhedral_site(rng, dim, allow_flat)


def random_polyhedral_instance(rng, dim=2, n_sites=None, allow_flat=False):
    n = n_sites if n_sites is not None else int(rng.integers(2, 5))
    sites = tuple(
        SiteSpec(
            random_polyhedral_site(rng, dim, allow_flat),
            random_gauge(rng, dim, kinds=("h", "v")),
            float(rng.uniform(0.5, 2.0)),
        )
        for _ in range(n)
    )
    return Instance(dim, sites)


def random_mixed_instance(rng, dim=2, n_sites=None):
    n = n_sites if n_sites is not None else int(rng.integers(2, 4))
    sites = tuple(
        SiteSpec(
            random_site(rng, dim),
            random_gauge(rng, dim),
            float(rng.uniform(0.5, 2.0)),
        )
        for _ in range(n)
    )
    return Instance(dim, sites)
