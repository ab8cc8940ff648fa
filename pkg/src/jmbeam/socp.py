"""Dense primal-dual interior-point solver for second-order cone programs.

Standard form:

    minimize    c^T x
    subject to  s = h - G x,   s in K,

where K is a product of second-order cones {(s0, s1) : s0 >= ||s1||}
described by a list of block dimensions. The dual is

    maximize    -h^T z
    subject to  G^T z + c = 0,   z in K.

The algorithm is Mehrotra-style predictor-corrector with Nesterov-Todd
scaling, Newton steps via the normal equations G^T W^{-2} G dx = rhs,
and an optional warm start in x (the slack is pushed into the cone
interior before iterating). Problem sizes here are tiny (tens of
variables), so all blocks are dense and per-cone scaling matrices are
formed explicitly.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NumericalBreakdown

__all__ = ["SocpResult", "solve_socp"]

STATUS_OPTIMAL = "optimal"
STATUS_MAX_ITER = "max_iter"
STATUS_INFEASIBLE = "infeasible"


@dataclass(eq=False)
class SocpResult:
    x: np.ndarray
    s: np.ndarray
    z: np.ndarray
    status: str
    iterations: int
    pcost: float
    dcost: float
    gap: float
    rel_gap: float
    pres: float
    dres: float


def _block_slices(dims):
    out = []
    start = 0
    for d in dims:
        out.append(slice(start, start + d))
        start += d
    return out, start


def _cone_margin(v, slices):
    """Smallest s0 - ||s1|| over blocks (positive inside the cone)."""
    m = np.inf
    for sl in slices:
        b = v[sl]
        m = min(m, b[0] - np.linalg.norm(b[1:]))
    return m


def _push_interior(v, slices):
    """Raise each block's leading entry until it clears the cone boundary
    by a margin proportional to the block's size."""
    v = v.copy()
    for sl in slices:
        b = v[sl]
        n1 = np.linalg.norm(b[1:])
        margin = b[0] - n1
        target = 1e-1 * (1.0 + n1)
        if margin < target:
            v[sl.start] += target - margin
    return v


def _unit_e(dims, slices, total):
    e = np.zeros(total)
    for sl in slices:
        e[sl.start] = 1.0
    return e


def _nt_scaling(s, z, slices):
    """Nesterov-Todd scaling blocks for SOC.

    Returns per-block dense (W, W^{-1}) with W z = W^{-1} s = lambda, and
    the concatenated scaled point lambda.
    """
    Ws, Winvs = [], []
    lam = np.empty_like(s)
    J = None
    for sl in slices:
        sb = s[sl]
        zb = z[sl]
        d = sb.shape[0]
        res_s = sb[0] ** 2 - sb[1:] @ sb[1:]
        res_z = zb[0] ** 2 - zb[1:] @ zb[1:]
        if res_s <= 0 or res_z <= 0:
            raise NumericalBreakdown("iterate left the cone interior")
        ws = np.sqrt(res_s)
        wz = np.sqrt(res_z)
        sbar = sb / ws
        zbar = zb / wz
        gamma = np.sqrt((1.0 + sbar @ zbar) / 2.0)
        # wbar = (sbar + J zbar) / (2 gamma), J = diag(1, -I)
        wbar = zbar.copy()
        wbar[1:] = -wbar[1:]
        wbar = (sbar + wbar) / (2.0 * gamma)
        vbar = np.empty(d)
        vbar[0] = np.sqrt((wbar[0] + 1.0) / 2.0)
        vbar[1:] = wbar[1:] / (2.0 * vbar[0])
        eta = np.sqrt(ws / wz)
        # W = eta (2 vbar vbar^T - J); W^{-1} = (1/eta)(2 J vbar vbar^T J - J)
        outer = 2.0 * np.outer(vbar, vbar)
        W = outer.copy()
        W[0, 0] -= 1.0
        W[1:, 1:] += np.eye(d - 1)
        W *= eta
        Jv = vbar.copy()
        Jv[1:] = -Jv[1:]
        Winv = 2.0 * np.outer(Jv, Jv)
        Winv[0, 0] -= 1.0
        Winv[1:, 1:] += np.eye(d - 1)
        Winv /= eta
        Ws.append(W)
        Winvs.append(Winv)
        lam[sl] = W @ zb
    return Ws, Winvs, lam


def _apply_blocks(mats, v, slices):
    out = np.empty_like(v)
    for mat, sl in zip(mats, slices):
        out[sl] = mat @ v[sl]
    return out


def _jordan_mul(a, b, slices):
    out = np.empty_like(a)
    for sl in slices:
        ab = a[sl]
        bb = b[sl]
        out[sl.start] = ab @ bb
        out[sl.start + 1 : sl.stop] = ab[0] * bb[1:] + bb[0] * ab[1:]
    return out


def _jordan_solve(lam, d, slices):
    """Solve Arr(lam) u = d blockwise (Jordan division)."""
    out = np.empty_like(d)
    for sl in slices:
        lb = lam[sl]
        db = d[sl]
        l0 = lb[0]
        l1 = lb[1:]
        det = l0 * l0 - l1 @ l1
        if det <= 0 or l0 <= 0:
            raise NumericalBreakdown("scaled point left the cone interior")
        u0 = (l0 * db[0] - l1 @ db[1:]) / det
        out[sl.start] = u0
        out[sl.start + 1 : sl.stop] = (db[1:] - u0 * l1) / l0
    return out


def _max_step(v, dv, slices):
    """Largest t >= 0 with v + t*dv in the cone (v strictly interior)."""
    t_max = np.inf
    for sl in slices:
        s0 = v[sl.start]
        s1 = v[sl.start + 1 : sl.stop]
        d0 = dv[sl.start]
        d1 = dv[sl.start + 1 : sl.stop]
        a = d0 * d0 - d1 @ d1
        b = s0 * d0 - s1 @ d1
        cc = s0 * s0 - s1 @ s1  # > 0 strictly interior
        # f(t) = a t^2 + 2 b t + cc must stay >= 0, and s0 + t d0 >= 0
        if d0 < 0:
            t_max = min(t_max, -s0 / d0)
        if a > 0:
            disc = b * b - a * cc
            if disc >= 0:
                r1 = (-b - np.sqrt(disc)) / a
                if r1 > 0:
                    t_max = min(t_max, r1)
        elif a < 0:
            disc = b * b - a * cc  # always > 0 here
            t_max = min(t_max, (b + np.sqrt(disc)) / (-a))
        else:
            if b < 0:
                t_max = min(t_max, -cc / (2.0 * b))
    return t_max


def _solve_normal(G, Winvs, slices, rhs_x, reg0=0.0):
    """Solve (G^T W^{-2} G) dx = rhs_x via Cholesky with escalating
    regularization."""
    WinvG = np.empty_like(G)
    for mat, sl in zip(Winvs, slices):
        WinvG[sl] = mat @ G[sl]
    M = WinvG.T @ WinvG
    n = M.shape[0]
    scale = max(float(np.trace(M)) / n, 1e-300)
    reg = reg0
    for _ in range(4):
        try:
            L = np.linalg.cholesky(M + reg * scale * np.eye(n))
            y = np.linalg.solve(L, rhs_x)
            return np.linalg.solve(L.T, y), WinvG
        except np.linalg.LinAlgError:
            reg = 1e-14 if reg == 0.0 else reg * 1e4
    raise NumericalBreakdown("normal-equation factorization failed")


def solve_socp(c, G, h, dims, x0=None, tol=1e-8, max_iter=100):
    """Solve the cone program; see the module docstring for the form.

    Parameters
    ----------
    c : (n,) float ndarray
    G : (m, n) float ndarray
    h : (m,) float ndarray
    dims : list of int
        Second-order cone block sizes (each >= 1); sum must equal m.
    x0 : optional (n,) warm-start point; its slack is pushed interior.
    tol : float
        Relative tolerance on primal residual, dual residual, and gap.
    max_iter : int

    Returns
    -------
    SocpResult
    """
    c = np.asarray(c, dtype=float)
    G = np.asarray(G, dtype=float)
    h = np.asarray(h, dtype=float)
    slices, m_total = _block_slices(dims)
    if m_total != G.shape[0]:
        raise ValueError("cone dims do not match G")
    n = G.shape[1]
    nu = len(dims)
    e = _unit_e(dims, slices, m_total)

    x = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float).copy()
    s = _push_interior(h - G @ x, slices)
    z = _push_interior(np.zeros(m_total), slices)

    h_norm = max(1.0, np.linalg.norm(h))
    c_norm = max(1.0, np.linalg.norm(c))

    best = None
    status = STATUS_MAX_ITER
    it = 0
    for it in range(1, max_iter + 1):
        r_z = G @ x + s - h
        r_x = G.T @ z + c
        gap = float(s @ z)
        pcost = float(c @ x)
        dcost = float(-h @ z)
        pres = np.linalg.norm(r_z) / h_norm
        dres = np.linalg.norm(r_x) / c_norm
        rel_gap = gap / max(1.0, abs(pcost), abs(dcost))

        snapshot = (pres + dres + rel_gap, x.copy(), s.copy(), z.copy(), it - 1,
                    pcost, dcost, gap, rel_gap, pres, dres)
        if best is None or snapshot[0] < best[0]:
            best = snapshot

        if pres <= tol and dres <= tol and rel_gap <= tol:
            status = STATUS_OPTIMAL
            best = snapshot
            break

        # primal-infeasibility certificate: z in K, G^T z ~ 0, h^T z < 0
        hz = float(h @ z)
        if hz < 0 and np.linalg.norm(G.T @ z) <= 1e-9 * abs(hz):
            status = STATUS_INFEASIBLE
            break

        mu = gap / nu
        try:
            Ws, Winvs, lam = _nt_scaling(s, z, slices)
        except NumericalBreakdown:
            status = STATUS_MAX_ITER
            break

        # predictor: Arr(lam)(W dz + W^{-1} ds) = d with d = -lam o lam
        lam2 = _jordan_mul(lam, lam, slices)

        def directions(d_comb):
            u = _jordan_solve(lam, d_comb, slices)
            # (G^T W^{-2} G) dx = -r_x - G^T W^{-1} u - G^T W^{-2} r_z
            Winv_u = _apply_blocks(Winvs, u, slices)
            Winv_rz = _apply_blocks(Winvs, _apply_blocks(Winvs, r_z, slices), slices)
            rhs = -r_x - G.T @ Winv_u - G.T @ Winv_rz
            dx, _ = _solve_normal(G, Winvs, slices, rhs)
            ds = -r_z - G @ dx
            dz = _apply_blocks(
                Winvs, u - _apply_blocks(Winvs, ds, slices), slices
            )
            return dx, ds, dz

        try:
            dx_a, ds_a, dz_a = directions(-lam2)
            alpha_aff = min(
                1.0, _max_step(s, ds_a, slices), _max_step(z, dz_a, slices)
            )
            sigma = (1.0 - alpha_aff) ** 3

            corr = _jordan_mul(
                _apply_blocks(Winvs, ds_a, slices),
                _apply_blocks(Ws, dz_a, slices),
                slices,
            )
            d_comb = -lam2 + sigma * mu * e - corr
            dx, ds, dz = directions(d_comb)
        except NumericalBreakdown:
            status = STATUS_MAX_ITER
            break

        alpha = min(1.0, 0.99 * _max_step(s, ds, slices),
                    0.99 * _max_step(z, dz, slices))
        if alpha <= 1e-14:
            break
        x += alpha * dx
        s += alpha * ds
        z += alpha * dz

    _, bx, bs, bz, bit, bpc, bdc, bgap, brg, bpr, bdr = best
    if status == STATUS_OPTIMAL:
        bit = it
    return SocpResult(
        x=bx, s=bs, z=bz, status=status, iterations=max(bit, it),
        pcost=bpc, dcost=bdc, gap=bgap, rel_gap=brg, pres=bpr, dres=bdr,
    )
