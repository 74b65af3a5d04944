import numpy as np

from gaugeloc.linprog import lp_feasible, solve_lp


def test_basic_ub():
    res = solve_lp([-1, -1], a_ub=[[1, 1], [1, 0], [0, 1]], b_ub=[4, 3, 2])
    assert res.ok and res.objective == -4.0


def test_equality_with_nonneg():
    res = solve_lp([1, 1], a_eq=[[1, -1]], b_eq=[3])
    assert res.ok and np.allclose(res.x, [3, 0])


def test_free_variables_and_unbounded_ray():
    res = solve_lp([1, 1], a_eq=[[1, -1]], b_eq=[3], free=[True, True])
    assert res.status == "unbounded"
    ray = res.ray
    assert ray @ np.array([1, 1]) < 0 and abs(ray @ np.array([1, -1])) < 1e-9


def test_infeasible():
    assert solve_lp([1, 1], a_ub=[[1, 1]], b_ub=[-1]).status == "infeasible"
    assert lp_feasible(a_ub=[[1, 1]], b_ub=[-1], n=2) is None


def test_degenerate_cycling_guard():
    # classic degenerate LP; Bland's rule must terminate
    c = [-0.75, 150, -0.02, 6]
    a_ub = [
        [0.25, -60, -0.04, 9],
        [0.5, -90, -0.02, 3],
        [0, 0, 1, 0],
    ]
    b_ub = [0, 0, 1]
    res = solve_lp(c, a_ub=a_ub, b_ub=b_ub)
    assert res.ok
    # optimum -0.05 at (0.04, 0, 1, 0), confirmed by vertex enumeration
    assert abs(res.objective - (-0.05)) < 1e-12
    assert np.allclose(res.x, [0.04, 0, 1, 0], atol=1e-12)


def test_random_lp_soundness():
    rng = np.random.default_rng(2)
    for _ in range(150):
        n, mu, me = rng.integers(2, 6), rng.integers(1, 5), rng.integers(0, 3)
        a = rng.normal(size=(mu, n))
        xf = rng.uniform(0, 1, size=n)
        b = a @ xf + rng.uniform(0.05, 1.0, size=mu)
        ae = rng.normal(size=(me, n))
        be = ae @ xf
        c = rng.normal(size=n)
        res = solve_lp(c, a_ub=a, b_ub=b, a_eq=ae if me else None, b_eq=be if me else None)
        if res.status == "optimal":
            assert np.all(a @ res.x <= b + 1e-7)
            assert np.all(res.x >= -1e-9)
            if me:
                assert np.allclose(ae @ res.x, be, atol=1e-7)
            assert res.objective <= c @ xf + 1e-7
        else:
            assert res.status == "unbounded"
            ray = res.ray
            assert c @ ray < 1e-9
            assert np.all(a @ ray <= 1e-8) and np.all(ray >= -1e-9)
            if me:
                assert np.all(np.abs(ae @ ray) <= 1e-8)
