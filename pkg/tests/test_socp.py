"""Solver-level tests: scaling/Jordan algebra internals on random cone
points, then small problems with closed-form answers."""

import numpy as np
import pytest

from jmbeam.socp import (
    SocpResult,
    _block_slices,
    _cone_margin,
    _jordan_mul,
    _jordan_solve,
    _max_step,
    _nt_scaling,
    _push_interior,
    solve_socp,
)


def _interior_point(rng, dims):
    slices, total = _block_slices(dims)
    v = rng.standard_normal(total)
    for sl in slices:
        tail = v[sl.start + 1 : sl.stop]
        v[sl.start] = np.linalg.norm(tail) + float(rng.uniform(0.1, 2.0))
    return v, slices


# ---------------------------------------------------------------------------
# Nesterov-Todd scaling


def test_nt_scaling_defining_property():
    # W z and W^{-1} s must coincide (the scaled point), per block
    rng = np.random.default_rng(0)
    for _ in range(50):
        dims = list(rng.integers(1, 6, size=rng.integers(1, 4)))
        s, slices = _interior_point(rng, dims)
        z, _ = _interior_point(rng, dims)
        Ws, Winvs, lam = _nt_scaling(s, z, slices)
        for W, Winv, sl in zip(Ws, Winvs, slices):
            wz = W @ z[sl]
            winvs = Winv @ s[sl]
            assert np.allclose(wz, winvs, rtol=1e-10, atol=1e-12)
            assert np.allclose(wz, lam[sl], rtol=1e-12, atol=1e-14)
            assert np.allclose(W @ Winv, np.eye(sl.stop - sl.start), atol=1e-10)
            assert np.allclose(W, W.T, atol=1e-12)
        # the scaled point stays strictly inside the cone
        assert _cone_margin(lam, slices) > 0


def test_nt_scaling_symmetric_point_is_identityish():
    # s == z makes the scaling the identity map
    rng = np.random.default_rng(1)
    s, slices = _interior_point(rng, [3])
    Ws, Winvs, lam = _nt_scaling(s, s.copy(), slices)
    assert np.allclose(Ws[0], np.eye(3), atol=1e-10)
    assert np.allclose(lam, s, atol=1e-10)


def test_nt_scaling_rejects_boundary():
    from jmbeam.errors import NumericalBreakdown

    slices, _ = _block_slices([2])
    s = np.array([1.0, 1.0])  # on the boundary
    z = np.array([2.0, 0.5])
    with pytest.raises(NumericalBreakdown):
        _nt_scaling(s, z, slices)


# ---------------------------------------------------------------------------
# Jordan algebra helpers


def test_jordan_mul_identity_element():
    rng = np.random.default_rng(2)
    v, slices = _interior_point(rng, [4, 2])
    e = np.zeros_like(v)
    for sl in slices:
        e[sl.start] = 1.0
    assert np.allclose(_jordan_mul(e, v, slices), v)
    assert np.allclose(_jordan_mul(v, e, slices), v)


def test_jordan_solve_inverts_mul():
    rng = np.random.default_rng(3)
    for _ in range(50):
        dims = list(rng.integers(1, 6, size=rng.integers(1, 4)))
        lam, slices = _interior_point(rng, dims)
        d = rng.standard_normal(lam.shape[0])
        u = _jordan_solve(lam, d, slices)
        assert np.allclose(_jordan_mul(lam, u, slices), d, atol=1e-10)


def test_jordan_solve_boundary_rejected():
    from jmbeam.errors import NumericalBreakdown

    slices, _ = _block_slices([2])
    lam = np.array([1.0, 1.0])
    with pytest.raises(NumericalBreakdown):
        _jordan_solve(lam, np.array([1.0, 0.0]), slices)


# ---------------------------------------------------------------------------
# step length


def test_max_step_lands_on_boundary():
    rng = np.random.default_rng(4)
    hit = 0
    for _ in range(200):
        dims = list(rng.integers(1, 5, size=rng.integers(1, 3)))
        v, slices = _interior_point(rng, dims)
        dv = rng.standard_normal(v.shape[0])
        t = _max_step(v, dv, slices)
        if not np.isfinite(t):
            # recession direction: still inside far along the ray
            assert _cone_margin(v + 1e3 * dv, slices) >= -1e-9
            continue
        hit += 1
        assert t >= 0
        assert _cone_margin(v + t * dv, slices) >= -1e-8 * (1 + t)
        if t > 1e-12:
            assert _cone_margin(v + 0.999 * t * dv, slices) > 0
        assert _cone_margin(v + 1.01 * t * dv + 1e-9 * 0, slices) <= 1e-8
    assert hit > 100  # the battery must actually exercise finite steps


def test_max_step_pure_shrink():
    slices, _ = _block_slices([2])
    v = np.array([2.0, 1.0])
    dv = np.array([-1.0, 0.0])
    t = _max_step(v, dv, slices)
    # 2 - t >= |1| -> t <= 1
    assert t == pytest.approx(1.0, rel=1e-12)


# ---------------------------------------------------------------------------
# interior push


def test_push_interior_margins():
    rng = np.random.default_rng(5)
    for _ in range(100):
        dims = list(rng.integers(1, 5, size=rng.integers(1, 4)))
        slices, total = _block_slices(dims)
        v = rng.standard_normal(total) * 3
        out = _push_interior(v, slices)
        for sl in slices:
            b = out[sl]
            tail = np.linalg.norm(b[1:])
            target = 1e-1 * (1.0 + tail)
            assert b[0] - tail >= target - 1e-12
            # only the leading entry may move, and never downward
            assert np.array_equal(b[1:], v[sl][1:])
            assert b[0] >= v[sl.start]
    # already-interior points with clearance are untouched
    v = np.array([5.0, 1.0, 0.0])
    assert np.array_equal(_push_interior(v, _block_slices([3])[0]), v)


# ---------------------------------------------------------------------------
# analytic problems


def test_scalar_bound():
    # min x s.t. x >= -2, via 1-D cone s = 2 + x >= 0
    res = solve_socp(
        np.array([1.0]), np.array([[-1.0]]), np.array([2.0]), [1]
    )
    assert res.status == "optimal"
    assert res.x[0] == pytest.approx(-2.0, abs=1e-7)
    assert res.pcost == pytest.approx(-2.0, abs=1e-7)
    assert res.pcost == pytest.approx(res.dcost, abs=1e-6)


def test_norm_ball_linear_objective():
    # min c^T x over ||x|| <= r has solution -r c / ||c||
    rng = np.random.default_rng(6)
    for _ in range(20):
        n = int(rng.integers(2, 6))
        c = rng.standard_normal(n)
        r = float(rng.uniform(0.5, 3.0))
        G = np.zeros((n + 1, n))
        G[1:] = -np.eye(n)
        h = np.zeros(n + 1)
        h[0] = r
        res = solve_socp(c, G, h, [n + 1])
        assert res.status == "optimal"
        want = -r * c / np.linalg.norm(c)
        assert np.allclose(res.x, want, atol=1e-6 * (1 + r))
        assert res.pcost == pytest.approx(-r * np.linalg.norm(c), rel=1e-6)


def test_ball_with_halfspace():
    # min x0 s.t. ||x|| <= 1 and x0 >= -0.5
    c = np.array([1.0, 0.0])
    G = np.vstack([np.zeros((1, 2)), -np.eye(2), [[-1.0, 0.0]]])
    h = np.array([1.0, 0.0, 0.0, 0.5])
    res = solve_socp(c, G, h, [3, 1])
    assert res.status == "optimal"
    assert res.x[0] == pytest.approx(-0.5, abs=1e-7)
    assert abs(res.x[1]) <= 1e-6
    # the halfspace multiplier is active, the ball's is not
    assert res.z[3] > 1e-3
    assert float(res.s @ res.z) <= 1e-6


def test_least_squares_epigraph():
    # min t s.t. ||A x - b|| <= t reproduces the LS residual
    rng = np.random.default_rng(7)
    for _ in range(10):
        m, n = 6, 3
        A = rng.standard_normal((m, n))
        b = rng.standard_normal(m)
        # vars (x, t); cone (t; b - A x)
        G = np.zeros((m + 1, n + 1))
        G[0, n] = -1.0
        G[1:, :n] = A
        h = np.concatenate([[0.0], b])
        res = solve_socp(
            np.eye(n + 1)[n], G, h, [m + 1]
        )
        x_ls, *_ = np.linalg.lstsq(A, b, rcond=None)
        t_ls = np.linalg.norm(A @ x_ls - b)
        assert res.status == "optimal"
        assert res.pcost == pytest.approx(t_ls, rel=1e-6)
        assert np.allclose(res.x[:n], x_ls, atol=1e-5)


def test_infeasible_pair_certified():
    # x <= -1 and x >= 1 cannot hold; expect the certificate branch
    c = np.array([1.0])
    G = np.array([[1.0], [-1.0]])
    h = np.array([-1.0, -1.0])
    res = solve_socp(c, G, h, [1, 1])
    assert res.status == "infeasible"


def test_unbounded_is_not_optimal():
    # min x with only x <= 10: unbounded below
    res = solve_socp(
        np.array([1.0]), np.array([[1.0]]), np.array([10.0]), [1],
        max_iter=50,
    )
    assert res.status != "optimal"


def test_warm_start_consistency():
    rng = np.random.default_rng(8)
    n = 4
    c = rng.standard_normal(n)
    G = np.zeros((n + 1, n))
    G[1:] = -np.eye(n)
    h = np.zeros(n + 1)
    h[0] = 2.0
    cold = solve_socp(c, G, h, [n + 1])
    warm = solve_socp(c, G, h, [n + 1], x0=cold.x)
    assert warm.status == "optimal"
    assert warm.pcost == pytest.approx(cold.pcost, abs=1e-6)
    far = solve_socp(c, G, h, [n + 1], x0=100 * np.ones(n))
    assert far.status == "optimal"
    assert far.pcost == pytest.approx(cold.pcost, abs=1e-6)


def test_result_invariants_at_optimal():
    rng = np.random.default_rng(9)
    for _ in range(30):
        n = int(rng.integers(2, 5))
        c = rng.standard_normal(n)
        r = float(rng.uniform(0.5, 2.0))
        G = np.zeros((n + 1, n))
        G[1:] = -np.eye(n)
        h = np.zeros(n + 1)
        h[0] = r
        res = solve_socp(c, G, h, [n + 1], tol=1e-9)
        assert res.status == "optimal"
        assert res.pres <= 1e-9 and res.dres <= 1e-9 and res.rel_gap <= 1e-9
        slices, _ = _block_slices([n + 1])
        assert _cone_margin(res.s, slices) >= -1e-9
        assert _cone_margin(res.z, slices) >= -1e-9
        # primal and dual costs agree at the reported gap
        assert abs(res.pcost - res.dcost) <= 1e-6 * (1 + abs(res.pcost))


def test_dims_mismatch_rejected():
    with pytest.raises(ValueError):
        solve_socp(np.array([1.0]), np.array([[1.0]]), np.array([1.0]), [2])


def test_result_dataclass_fields():
    res = solve_socp(
        np.array([1.0]), np.array([[-1.0]]), np.array([1.0]), [1]
    )
    assert isinstance(res, SocpResult)
    assert res.iterations >= 1
    assert isinstance(res.status, str)
