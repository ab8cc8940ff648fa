"""Convex precoder-update QCQP: construction, interior-point solution,
and independent KKT verification.

The precoder update minimizes, over the precoder matrix P and the common
worst-case variable xi_c,

    xi_c + sum_k ( sum_i p_i^H psi_p[k] p_i - 2 Re{f_p[k]^H p_k} )

subject to, for every user k,

    p_c^H psi_c[k] p_c + sum_i p_i^H psi_c[k] p_i - 2 Re{f_c[k]^H p_c}
        + const[k] <= xi_c,
    ||P||_F^2 <= p_t,

with const[k] = sigma_n2*t_c[k] + u_c[k] - v_c[k]. The additive constant
sum_k (sigma_n2*t_p[k] + u_p[k] - v_p[k]) is dropped from the objective
and recorded so reported values can be rebased to the true average
weighted sum-MSE.

The solver lifts complex variables to reals, rewrites each quadratic
through its Cholesky factor as a second-order cone, and runs the
predictor-corrector kernel in :mod:`jmbeam.socp`. P = 0 with a large
enough xi_c is strictly feasible, so the problems are never infeasible
by construction.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from . import socp
from .errors import NumericalBreakdown
from .linalg import cholesky_psd
from .receivers import precoder_power

__all__ = [
    "QcqpProblem",
    "QcqpSolution",
    "build",
    "solve",
    "kkt_residual",
    "objective_value",
    "constraint_values",
    "dump_problem",
]

# diagonal shift used when a component matrix fails strict factorization
_CHOL_SHIFT_REL = 1e-12


@dataclass(frozen=True, eq=False)
class QcqpProblem:
    """Data of one precoder-update problem.

    psi_obj is the summed private quadratic form sum_k psi_p[k] (each
    private column sees the same total matrix); f_obj[k] is the linear
    term of user k's private column. psi_con/f_con/con_const hold the K
    common-MSE constraints. include_common = False drops the common
    column and its constraints (broadcast-only variant).
    """

    n_t: int
    k: int
    p_t: float
    sigma_n2: float
    psi_obj: np.ndarray
    f_obj: np.ndarray
    psi_con: np.ndarray
    f_con: np.ndarray
    con_const: np.ndarray
    omitted_constant: float
    include_common: bool = True


@dataclass(eq=False)
class QcqpSolution:
    """Solver output: optimizer, objective (constant term excluded),
    worst-case common value, recovered multipliers, and diagnostics."""

    p_star: np.ndarray
    xi_c_star: float
    objective: float
    kkt_residual: float
    iterations: int
    status: str
    mu: np.ndarray
    mu_pow: float
    pres: float
    dres: float
    rel_gap: float


def build(components, sigma_n2, p_t, include_common=True):
    """Assemble the precoder-update problem from averaged components."""
    c = components
    k, n_t = c.f_p.shape
    psi_obj = c.psi_p.sum(axis=0)
    con_const = sigma_n2 * c.t_c + c.u_c - c.v_c
    omitted = float(np.sum(sigma_n2 * c.t_p + c.u_p - c.v_p))
    return QcqpProblem(
        n_t=n_t,
        k=k,
        p_t=float(p_t),
        sigma_n2=float(sigma_n2),
        psi_obj=psi_obj,
        f_obj=c.f_p.copy(),
        psi_con=c.psi_c.copy(),
        f_con=c.f_c.copy(),
        con_const=np.asarray(con_const, dtype=float),
        omitted_constant=omitted,
        include_common=include_common,
    )


def objective_value(q, p, xi_c):
    """Objective of the problem at (P, xi_c), constant term excluded."""
    priv = p[:, 1:]
    quad = float(np.einsum("ni,nm,mi->", priv.conj(), q.psi_obj, priv).real)
    lin = 2.0 * float(np.einsum("kn,nk->", q.f_obj.conj(), priv).real)
    return (xi_c if q.include_common else 0.0) + quad - lin


def constraint_values(q, p):
    """Left-hand sides of the K common-MSE constraints at P (their value
    must be <= xi_c), including the constant terms."""
    p_c = p[:, 0]
    quad_all = np.einsum("ni,unm,mi->u", p.conj(), q.psi_con, p).real
    lin = 2.0 * np.einsum("un,n->u", q.f_con.conj(), p_c).real
    return quad_all + q.con_const - lin


def _chol_factor(psi):
    """Cholesky with the documented fallback shift for round-off PSD."""
    try:
        return cholesky_psd(psi, shift=0.0)
    except Exception:
        pass
    n = psi.shape[0]
    shift = _CHOL_SHIFT_REL * max(float(np.trace(psi).real), 1.0) / n
    return cholesky_psd(psi, shift=shift)


def _lift(mat):
    """Real lifting of a complex matrix action: [Re; Im] stacking."""
    return np.block([[mat.real, -mat.imag], [mat.imag, mat.real]])


def _lift_vec(v):
    return np.concatenate([v.real, v.imag])


class _Encoding:
    """Index bookkeeping for the real-lifted SOC form.

    Variable layout: one 2*n_t real block per precoder column (common
    first when present), then xi_c (JMB only), then the objective
    epigraph tau.
    """

    def __init__(self, q):
        self.q = q
        self.n_t = q.n_t
        self.k = q.k
        self.ncols = q.k + 1 if q.include_common else q.k
        self.blk = 2 * q.n_t
        self.n_p = self.ncols * self.blk
        if q.include_common:
            self.i_xi = self.n_p
            self.i_tau = self.n_p + 1
            self.n = self.n_p + 2
        else:
            self.i_xi = None
            self.i_tau = self.n_p
            self.n = self.n_p + 1

    def col(self, j):
        """Slice of lifted column j of P (j = 0 is common when present)."""
        if not self.q.include_common:
            j = j - 1
        return slice(j * self.blk, (j + 1) * self.blk)

    def pack(self, p, xi_c, tau):
        x = np.zeros(self.n)
        cols = range(self.ncols) if self.q.include_common else range(1, self.k + 1)
        for j in cols:
            x[self.col(j)] = _lift_vec(p[:, j])
        if self.i_xi is not None:
            x[self.i_xi] = xi_c
        x[self.i_tau] = tau
        return x

    def unpack(self, x):
        p = np.zeros((self.n_t, self.k + 1), dtype=complex)
        cols = range(self.ncols) if self.q.include_common else range(1, self.k + 1)
        for j in cols:
            b = x[self.col(j)]
            p[:, j] = b[: self.n_t] + 1j * b[self.n_t :]
        xi_c = float(x[self.i_xi]) if self.i_xi is not None else 0.0
        return p, xi_c


def _encode(q):
    """Build (c, G, h, dims, enc) for the cone solver.

    Cones, in order: objective epigraph, one per common-MSE constraint
    (JMB only), transmit power ball.
    """
    enc = _Encoding(q)
    n = enc.n
    k, n_t, blk = enc.k, enc.n_t, enc.blk

    c = np.zeros(n)
    if enc.i_xi is not None:
        c[enc.i_xi] = 1.0
    c[enc.i_tau] = 1.0
    for j in range(1, k + 1):
        c[enc.col(j)] = -2.0 * _lift_vec(q.f_obj[j - 1])

    L_obj = _lift(_chol_factor(q.psi_obj).conj().T)  # acts as L^H on lifts
    L_con = None
    if q.include_common:
        L_con = [_lift(_chol_factor(q.psi_con[u]).conj().T) for u in range(k)]

    rows = []
    dims = []

    def add_cone(Gb, hb):
        rows.append((Gb, hb))
        dims.append(hb.shape[0])

    # objective epigraph: ||(2 L^H p_1; ...; 2 L^H p_k; 1 - tau)|| <= 1 + tau
    d = 2 + k * blk
    Gb = np.zeros((d, n))
    hb = np.zeros(d)
    Gb[0, enc.i_tau] = -1.0
    hb[0] = 1.0
    for j in range(1, k + 1):
        r = slice(1 + (j - 1) * blk, 1 + j * blk)
        Gb[r, enc.col(j)] = -2.0 * L_obj
    Gb[d - 1, enc.i_tau] = 1.0
    hb[d - 1] = 1.0
    add_cone(Gb, hb)

    if q.include_common:
        # user u: ||(2 L_u^H p_0; ...; 2 L_u^H p_k; 1 - r_u)|| <= 1 + r_u
        # with r_u = xi_c - const[u] + 2 Re{f_c[u]^H p_c}
        for u in range(k):
            d = 2 + (k + 1) * blk
            Gb = np.zeros((d, n))
            hb = np.zeros(d)
            f_l = 2.0 * _lift_vec(q.f_con[u])
            # s_a = 1 + r_u
            Gb[0, enc.i_xi] = -1.0
            Gb[0, enc.col(0)] = -f_l
            hb[0] = 1.0 - q.con_const[u]
            for j in range(k + 1):
                r = slice(1 + j * blk, 1 + (j + 1) * blk)
                Gb[r, enc.col(j)] = -2.0 * L_con[u]
            # s_c = 1 - r_u
            Gb[d - 1, enc.i_xi] = 1.0
            Gb[d - 1, enc.col(0)] = f_l
            hb[d - 1] = 1.0 + q.con_const[u]
            add_cone(Gb, hb)

    # power ball: ||vec(P)|| <= sqrt(p_t)
    d = 1 + enc.n_p
    Gb = np.zeros((d, n))
    hb = np.zeros(d)
    hb[0] = np.sqrt(q.p_t)
    Gb[1:, : enc.n_p] = -np.eye(enc.n_p)
    add_cone(Gb, hb)

    G = np.vstack([g for g, _ in rows])
    h = np.concatenate([hv for _, hv in rows])
    return c, G, h, dims, enc


def solve(q, tol=1e-8, max_iter=100, warm=None):
    """Solve the precoder-update problem.

    Parameters
    ----------
    q : QcqpProblem
    tol : float
        Interior-point tolerance (primal/dual residual and relative gap).
    max_iter : int
    warm : optional (n_t, k+1) complex ndarray
        Incumbent precoder used as the starting point. The returned
        solution is never worse than the incumbent evaluated at its own
        best xi_c, which is what makes the outer loop's descent exact.

    Returns
    -------
    QcqpSolution

    Raises
    ------
    NotPsd
        If a component matrix is not PSD within tolerance (convexity
        guard, via the Cholesky factorization).
    NumericalBreakdown
        On unrecoverable factorization failure.
    """
    cvec, G, h, dims, enc = _encode(q)

    x0 = None
    if warm is not None:
        warm = np.asarray(warm, dtype=complex)
        xi_w = float(np.max(constraint_values(q, warm))) if q.include_common else 0.0
        tau_w = _obj_quad(q, warm)
        x0 = enc.pack(warm, xi_w + 0.1 * (1.0 + abs(xi_w)), tau_w + 0.1 * (1.0 + tau_w))

    res = socp.solve_socp(cvec, G, h, dims, x0=x0, tol=tol, max_iter=max_iter)

    p_star, xi_c_star = enc.unpack(res.x)
    mu, mu_pow = _recover_multipliers(q, res, dims)

    # Newton polish on the identified active set, kept only if it
    # verifiably lowers the recomputed optimality residual
    kkt0 = _kkt_terms(q, p_star, xi_c_star, mu, mu_pow)
    pol = _polish(q, p_star, xi_c_star, mu, mu_pow)
    if pol is not None:
        kkt1 = _kkt_terms(q, *pol)
        if np.isfinite(kkt1) and kkt1 < kkt0:
            p_star, xi_c_star, mu, mu_pow = pol

    obj = objective_value(q, p_star, xi_c_star)

    # never return a point worse than the incumbent (descent guarantee)
    if warm is not None:
        xi_w = float(np.max(constraint_values(q, warm))) if q.include_common else 0.0
        obj_w = objective_value(q, warm, xi_w)
        if obj_w < obj or not np.isfinite(obj):
            p_star, xi_c_star, obj = warm.copy(), xi_w, obj_w
    sol = QcqpSolution(
        p_star=p_star,
        xi_c_star=xi_c_star,
        objective=obj,
        kkt_residual=np.inf,
        iterations=res.iterations,
        status=_map_status(res.status),
        mu=mu,
        mu_pow=mu_pow,
        pres=res.pres,
        dres=res.dres,
        rel_gap=res.rel_gap,
    )
    sol.kkt_residual = kkt_residual(q, sol)
    # a tiny recomputed residual certifies optimality of the returned
    # point for this convex problem even if the cone iteration hit its cap
    if sol.status == "MaxIter" and sol.kkt_residual <= tol:
        sol.status = "Optimal"
    return sol


def _obj_quad(q, p):
    priv = p[:, 1:]
    return float(np.einsum("ni,nm,mi->", priv.conj(), q.psi_obj, priv).real)


def _map_status(s):
    return {
        socp.STATUS_OPTIMAL: "Optimal",
        socp.STATUS_MAX_ITER: "MaxIter",
        socp.STATUS_INFEASIBLE: "Infeasible",
    }[s]


def _recover_multipliers(q, res, dims):
    """Multipliers of the scalar quadratic constraints from the cone duals.

    For a cone written as ||(2w; 1-r)|| <= 1+r encoding ||w||^2 <= r, the
    slack is s = (1+r; 2w; 1-r) and -z.s carries -r(z_first - z_last),
    so the scalar multiplier is z_first - z_last (nonnegative since z
    lies in the cone). For the power ball ||v|| <= sqrt(p_t) it is
    z_first/(2 sqrt(p_t)).
    """
    k = q.k
    starts = np.cumsum([0] + dims[:-1])
    if q.include_common:
        mu = np.empty(k)
        for u in range(k):
            s0 = starts[1 + u]
            mu[u] = res.z[s0] - res.z[s0 + dims[1 + u] - 1]
    else:
        mu = np.zeros(0)
    s0 = starts[-1]
    mu_pow = res.z[s0] / (2.0 * np.sqrt(q.p_t))
    return mu, mu_pow


def _polish(q, p, xi_c, mu, mu_pow):
    """Newton refinement over candidate active sets.

    An interior-point iterate stalls at a residual set by its final
    centrality, but it narrows down which constraints bind. Freezing an
    active set turns the optimality conditions into a square smooth
    system that a few Newton steps solve to round-off. Weakly active
    constraints (multiplier and slack both tiny) are not reliably
    classified by the duals, so plausible active sets are enumerated and
    the one with the smallest recomputed residual wins. Returns
    (p, xi_c, mu, mu_pow) or None.
    """
    best = None
    best_kkt = np.inf
    for act, pow_act in _active_set_candidates(q, p, xi_c, mu, mu_pow):
        out = _newton_active(q, p, xi_c, mu, mu_pow, act, pow_act)
        if out is None:
            continue
        kk = _kkt_terms(q, *out)
        if np.isfinite(kk) and kk < best_kkt:
            best, best_kkt = out, kk
        if best_kkt < 1e-12:
            break
    return best


def _active_set_candidates(q, p, xi_c, mu, mu_pow):
    """Plausible (constraint set, power flag) pairs, best guess first.

    For small k every nonempty constraint subset is tried; beyond that
    only the dual-based guess and its power-flag flip (cheap insurance
    against the most common misclassification).
    """
    k = q.k
    pw = precoder_power(p)
    pow_guess = bool(mu_pow >= (q.p_t - pw) / max(1.0, q.p_t))
    if not q.include_common:
        return [((), pow_guess), ((), not pow_guess)]

    slack = (xi_c - constraint_values(q, p)) / (1.0 + np.abs(q.con_const))
    guess = tuple(np.flatnonzero(mu >= slack))
    if k <= 3:
        subsets = [
            s
            for r in range(k, 0, -1)
            for s in itertools.combinations(range(k), r)
        ]
    else:
        subsets = [guess] if guess else []
    cands = []
    for s in subsets:
        for pa in (pow_guess, not pow_guess):
            cands.append((s, pa))
    cands.sort(key=lambda c: (c[0] != guess, c[1] != pow_guess))
    return cands


def _newton_active(q, p, xi_c, mu, mu_pow, act, pow_act):
    """Newton on the fixed-active-set system, started at the given point."""
    k, n_t = q.k, q.n_t
    blk = 2 * n_t
    eye = np.eye(n_t)
    act = np.asarray(act, dtype=int)
    n_act = act.size
    if q.include_common and n_act == 0:
        return None

    ncols = k + 1 if q.include_common else k
    off = 0 if q.include_common else 1
    n_p = ncols * blk
    i_xi = n_p if q.include_common else None
    i_mu = n_p + (1 if q.include_common else 0)
    n = i_mu + n_act + (1 if pow_act else 0)
    i_pw = n - 1 if pow_act else None

    def split(x):
        pm = np.zeros((n_t, k + 1), dtype=complex)
        for j in range(ncols):
            b = x[j * blk : (j + 1) * blk]
            pm[:, j + off] = b[:n_t] + 1j * b[n_t:]
        xi = float(x[i_xi]) if i_xi is not None else 0.0
        mu_a = x[i_mu : i_mu + n_act]
        mp = float(x[i_pw]) if i_pw is not None else 0.0
        return pm, xi, mu_a, mp

    x = np.zeros(n)
    for j in range(ncols):
        x[j * blk : (j + 1) * blk] = _lift_vec(p[:, j + off])
    if i_xi is not None:
        x[i_xi] = xi_c
    if n_act:
        start = np.maximum(mu[act], 0.0)
        tot = start.sum()
        x[i_mu : i_mu + n_act] = start / tot if tot > 0 else 1.0 / n_act
    if i_pw is not None:
        x[i_pw] = max(mu_pow, 0.0)

    def residual_jacobian(x):
        pm, xi, mu_a, mp = split(x)
        psi_mu = (
            np.einsum("u,unm->nm", mu_a, q.psi_con[act])
            if n_act
            else np.zeros((n_t, n_t))
        )
        F = np.zeros(n)
        J = np.zeros((n, n))
        row = 0
        if q.include_common:
            g = (psi_mu + mp * eye) @ pm[:, 0]
            if n_act:
                g = g - np.einsum("u,un->n", mu_a, q.f_con[act])
            F[row : row + blk] = _lift_vec(g)
            J[row : row + blk, 0:blk] = _lift(psi_mu + mp * eye)
            for a, u in enumerate(act):
                J[row : row + blk, i_mu + a] = _lift_vec(
                    q.psi_con[u] @ pm[:, 0] - q.f_con[u]
                )
            if pow_act:
                J[row : row + blk, i_pw] = _lift_vec(pm[:, 0])
            row += blk
        for j in range(1, k + 1):
            cs = (j - off) * blk
            g = (q.psi_obj + psi_mu + mp * eye) @ pm[:, j] - q.f_obj[j - 1]
            F[row : row + blk] = _lift_vec(g)
            J[row : row + blk, cs : cs + blk] = _lift(q.psi_obj + psi_mu + mp * eye)
            for a, u in enumerate(act):
                J[row : row + blk, i_mu + a] = _lift_vec(q.psi_con[u] @ pm[:, j])
            if pow_act:
                J[row : row + blk, i_pw] = _lift_vec(pm[:, j])
            row += blk
        if q.include_common:
            F[row] = np.sum(mu_a) - 1.0
            J[row, i_mu : i_mu + n_act] = 1.0
            row += 1
            cons = constraint_values(q, pm)
            for a, u in enumerate(act):
                F[row] = cons[u] - xi
                J[row, 0:blk] = 2.0 * _lift_vec(q.psi_con[u] @ pm[:, 0] - q.f_con[u])
                for j in range(1, k + 1):
                    cs = (j - off) * blk
                    J[row, cs : cs + blk] = 2.0 * _lift_vec(q.psi_con[u] @ pm[:, j])
                J[row, i_xi] = -1.0
                row += 1
        if pow_act:
            F[row] = precoder_power(pm) - q.p_t
            for j in range(ncols):
                cs = j * blk
                J[row, cs : cs + blk] = 2.0 * _lift_vec(pm[:, j + off])
        return F, J

    for _ in range(5):
        F, J = residual_jacobian(x)
        if np.linalg.norm(F, np.inf) < 1e-14 * (1.0 + np.linalg.norm(x, np.inf)):
            break
        try:
            dx = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            dx, *_ = np.linalg.lstsq(J, -F, rcond=None)
        if not np.all(np.isfinite(dx)):
            return None
        x = x + dx

    pm, xi, mu_a, mp = split(x)
    mu_full = np.zeros(k) if q.include_common else np.zeros(0)
    if n_act:
        mu_full[act] = np.maximum(mu_a, 0.0)
    return pm, xi, mu_full, max(mp, 0.0)


def kkt_residual(q, sol):
    """Recomputed-from-scratch optimality residual of a candidate solution.

    Maximum of normalized stationarity (in P and xi_c), primal
    feasibility, dual feasibility, and complementary slackness for the
    original quadratic problem, using the recovered multipliers. Small
    values certify the solve independently of the cone reformulation.
    """
    return _kkt_terms(q, sol.p_star, sol.xi_c_star, sol.mu, sol.mu_pow)


def _kkt_terms(q, p, xi_c_star, mu, mu_pow):
    k, n_t = q.k, q.n_t

    scale = 1.0 + float(np.linalg.norm(q.f_obj)) + float(np.linalg.norm(p))
    terms = []

    # stationarity in each private column
    if q.include_common:
        psi_mu = np.einsum("u,unm->nm", mu, q.psi_con)
    else:
        psi_mu = np.zeros((n_t, n_t))
    for j in range(1, k + 1):
        g = (q.psi_obj + psi_mu + mu_pow * np.eye(n_t)) @ p[:, j] - q.f_obj[j - 1]
        terms.append(np.linalg.norm(g) / scale)

    if q.include_common:
        # stationarity in the common column and in xi_c
        g_c = psi_mu @ p[:, 0] - np.einsum("u,un->n", mu, q.f_con) + mu_pow * p[:, 0]
        terms.append(np.linalg.norm(g_c) / scale)
        terms.append(abs(1.0 - float(np.sum(mu))))

        cons = constraint_values(q, p)
        slack = xi_c_star - cons
        terms.append(max(0.0, float(np.max(-slack))) / (1.0 + abs(xi_c_star)))
        terms.append(max(0.0, -float(np.min(mu))))
        comp = np.abs(mu * slack) / (1.0 + np.abs(cons))
        terms.append(float(np.max(comp)))

    pw = precoder_power(p)
    terms.append(max(0.0, pw - q.p_t) / max(1.0, q.p_t))
    terms.append(max(0.0, -mu_pow))
    terms.append(abs(mu_pow * (pw - q.p_t)) / max(1.0, q.p_t))

    return float(max(terms))


def dump_problem(q, path):
    """Write a problem instance as plain text for offline cross-checking:
    dimensions, then each matrix/vector row-major."""
    with open(path, "w") as f:
        f.write(f"{q.n_t} {q.k} {q.p_t!r} {q.sigma_n2!r} {int(q.include_common)}\n")
        f.write(f"{q.omitted_constant!r}\n")

        def mat(name, a):
            a = np.asarray(a)
            f.write(f"{name} {' '.join(str(d) for d in a.shape)}\n")
            for v in a.reshape(-1):
                if np.iscomplexobj(a):
                    f.write(f"{float(v.real)!r} {float(v.imag)!r}\n")
                else:
                    f.write(f"{float(v)!r}\n")

        mat("psi_obj", q.psi_obj)
        mat("f_obj", q.f_obj)
        mat("psi_con", q.psi_con)
        mat("f_con", q.f_con)
        mat("con_const", q.con_const)
