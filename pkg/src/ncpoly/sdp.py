"""Dense primal-dual interior-point solver and SDPA sparse I/O.

Problems come as :class:`~ncpoly.relaxation.SDPProblem`:

    minimise    c.y + c0
    subject to  F_k(y) = const_k + sum_i y_i F_k[i]  PSD   for every block k
                A_eq y  = b_eq
                A_in y >= b_in

Equalities are removed by parametrising their solution set, after which the
problem is an LMI in free variables.  That LMI is the dual half of the
standard pair (min C.X s.t. A(X)=b, X PSD / max b.z s.t. A*(z) + S = C) and
is solved with an infeasible-start path-following method using the
Nesterov-Todd direction and Mehrotra's predictor-corrector.
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .relaxation import SDPBlock, SDPProblem

log = logging.getLogger(__name__)

GAP_TOL = 1e-8
FEAS_TOL = 1e-8
MAX_ITER = 200
STEP_FRACTION = 0.98
# floor on the centering parameter; keeps iterates near the central path so
# that primal values converge linearly in mu on degenerate relaxations
SIGMA_MIN = 0.1
# the loop stops at this fraction of the tolerances so the recomputed
# user-space gap and residuals meet them
TARGET_FRACTION = 0.25


class SolverError(RuntimeError):
    """Numerical breakdown inside the interior-point iteration."""


@dataclass
class SDPSolution:
    """Primal values, dual certificates and diagnostics of one solve.

    ``dual_blocks`` holds one PSD matrix per SDP block, ``dual_ineq`` the
    nonnegative multipliers of the scalar inequalities and ``dual_eq`` the
    free multipliers of the equality rows, so that
    ``c = sum_k F_k . Z_k + A_in^T g + A_eq^T mu`` at optimality.
    """

    y: np.ndarray
    dual_blocks: list
    dual_eq: np.ndarray
    dual_ineq: np.ndarray
    primal_obj: float
    dual_obj: float
    gap: float
    status: str
    iterations: int = 0
    primal_infeas: float = 0.0
    dual_infeas: float = 0.0
    gap_tol: float = GAP_TOL
    feas_tol: float = FEAS_TOL
    message: str = ""
    history: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.status in ("optimal", "near_optimal")


def check_weak_duality(sol: SDPSolution, tol: float | None = None) -> bool:
    """True iff ``dual_obj <= primal_obj + tol`` (minimisation)."""
    tol = sol.gap_tol if tol is None else tol
    return bool(sol.dual_obj <= sol.primal_obj + tol)


# ---------------------------------------------------------------------------
# Interior point core
# ---------------------------------------------------------------------------

def _sym(M):
    return 0.5 * (M + M.T)


def _chol(M):
    try:
        return np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        raise SolverError("iterate lost positive definiteness")


def _max_step(L, dX):
    """Largest alpha with L L^T + alpha dX still PSD."""
    T = linalg.solve_triangular(L, dX, lower=True)
    T = linalg.solve_triangular(L, T.T, lower=True)
    lam = np.linalg.eigvalsh(_sym(T))[0]
    return np.inf if lam >= 0 else -1.0 / lam


class _Cone:
    """Block-diagonal PSD data in flattened form."""

    def __init__(self, A_blocks, C_blocks):
        self.A = [a.reshape(a.shape[0], -1) for a in A_blocks]
        self.C = C_blocks
        self.dims = [c.shape[0] for c in C_blocks]
        self.m = A_blocks[0].shape[0] if A_blocks else 0

    def op(self, X):
        out = np.zeros(self.m)
        for a, x in zip(self.A, X):
            out += a @ x.ravel()
        return out

    def adj(self, z):
        return [_sym((z @ a).reshape(n, n)) for a, n in zip(self.A, self.dims)]

    @staticmethod
    def inner(X, S):
        return float(sum(np.vdot(x, s) for x, s in zip(X, S)))

    @staticmethod
    def norm(X):
        return float(np.sqrt(sum(np.vdot(x, x) for x in X)))


def _ipm(cone: _Cone, b, gap_tol, feas_tol, max_iter):
    m = cone.m
    ntot = sum(cone.dims)
    C = cone.C
    normb = np.linalg.norm(b)
    normC = _Cone.norm(C)

    X, S = [], []
    for a, c, n in zip(cone.A, C, cone.dims):
        anorm = np.linalg.norm(a, axis=1) if m else np.zeros(1)
        xi = max(10.0, np.sqrt(n), n * np.max((1 + np.abs(b)) / (1 + anorm)) if m else 10.0)
        eta = max(10.0, np.sqrt(n), np.linalg.norm(c), np.max(anorm) if m else 0.0)
        X.append(xi * np.eye(n))
        S.append(eta * np.eye(n))
    z = np.zeros(m)

    if m:
        Aflat = np.hstack(cone.A)
        AAt_pinv = np.linalg.pinv(Aflat @ Aflat.T, rcond=1e-13, hermitian=True)
        AAt_solve = lambda r: AAt_pinv @ r

    history = []
    status, message = "iteration_limit", ""
    it = 0
    best = None
    for it in range(1, max_iter + 1):
        rp = b - cone.op(X)
        Rd = [c - s - a for c, s, a in zip(C, S, cone.adj(z))]
        pobj = _Cone.inner(C, X)
        dobj = float(b @ z)
        mu = _Cone.inner(X, S) / ntot
        relgap = abs(pobj - dobj) / (1 + abs(pobj) + abs(dobj))
        pinf = np.linalg.norm(rp) / (1 + normb)
        dinf = _Cone.norm(Rd) / (1 + normC)
        history.append((pobj, dobj, relgap, pinf, dinf, mu))
        score = max(relgap, pinf, dinf)
        if best is None or score <= best[0]:
            best = (score, [x.copy() for x in X], z.copy(), [s.copy() for s in S], relgap, pinf, dinf)
        # internal measures differ from the reported ones by O(1) factors
        if relgap < TARGET_FRACTION * gap_tol and max(pinf, dinf) < TARGET_FRACTION * feas_tol:
            status = "optimal"
            break
        # divergence-based infeasibility detection
        if dobj > 1e8 * (1 + abs(pobj)) and m:
            ray = _Cone.norm([s + a for s, a in zip(S, cone.adj(z))]) / dobj
            if ray < 1e-7:
                status, message = "primal_infeasible", "standard-form primal infeasible"
                break
        if -pobj > 1e8 * (1 + abs(dobj)):
            ray = np.linalg.norm(cone.op(X)) / -pobj
            if ray < 1e-7:
                status, message = "dual_infeasible", "standard-form dual infeasible"
                break

        try:
            step = _nt_step(cone, X, S, z, rp, Rd, mu, ntot, AAt_solve if m else None)
        except (SolverError, np.linalg.LinAlgError, linalg.LinAlgError) as exc:
            message = f"numerical breakdown: {exc}"
            break
        if step is None:
            message = "step length collapsed"
            break
        X, z, S = step

    if status not in ("optimal", "primal_infeasible", "dual_infeasible"):
        _, X, z, S, relgap, pinf, dinf = best
        if max(relgap, pinf, dinf) < 1e-5:
            status = "near_optimal"
    return X, z, S, status, it, history, message


def _nt_step(cone, X, S, z, rp, Rd, mu, ntot, AAt_solve):
    """One Mehrotra predictor-corrector step with Nesterov-Todd scaling."""
    m = cone.m
    # Nesterov-Todd scaling per block: G^T S G = G^-1 X G^-T = diag(d)
    G, Ginv, W, d, Lx, Ls = [], [], [], [], [], []
    for x, s in zip(X, S):
        lx, ls = _chol(x), _chol(s)
        U, dd, Vt = np.linalg.svd(ls.T @ lx)
        dd = np.maximum(dd, 1e-300)
        g = lx @ Vt.T / np.sqrt(dd)
        ginv = (np.sqrt(dd)[:, None] * Vt) @ linalg.solve_triangular(lx, np.eye(len(dd)), lower=True)
        G.append(g)
        Ginv.append(ginv)
        W.append(g @ g.T)
        d.append(dd)
        Lx.append(lx)
        Ls.append(ls)

    M = np.zeros((m, m))
    for a, w, n in zip(cone.A, W, cone.dims):
        Ai = a.reshape(m, n, n)
        WAW = np.matmul(np.matmul(w, Ai), w).reshape(m, -1)
        M += a @ WAW.T
    M = _sym(M)
    try:
        factor = linalg.cho_factor(M)
        solve_M = lambda r: linalg.cho_solve(factor, r)
    except linalg.LinAlgError:
        reg = 1e-14 * max(1.0, np.max(np.abs(np.diag(M))))
        Mi = np.linalg.pinv(M + reg * np.eye(m), rcond=1e-14)
        solve_M = lambda r: Mi @ r

    WRdW = [w @ r @ w for w, r in zip(W, Rd)]

    def direction(Rc):
        H = [2 * rc / (dd[:, None] + dd[None, :]) for rc, dd in zip(Rc, d)]
        GHG = [g @ h @ g.T for g, h in zip(G, H)]
        rhs = rp - cone.op(GHG) + cone.op(WRdW)
        dz = solve_M(rhs) if m else np.zeros(0)
        if m:
            # one step of iterative refinement against the unfactored operator
            dz = dz + solve_M(rhs - cone.op([w @ a @ w for w, a in zip(W, cone.adj(dz))]))
        dS = [r - a for r, a in zip(Rd, cone.adj(dz))]
        dX = [_sym(ghg - w @ ds @ w) for ghg, w, ds in zip(GHG, W, dS)]
        if m:
            # least-norm correction so that A(dX) = rp holds to working precision
            fix = cone.adj(AAt_solve(rp - cone.op(dX)))
            dX = [dx + f for dx, f in zip(dX, fix)]
        return dX, dz, dS

    def steps(dX, dS, tau):
        ap = min([_max_step(l, dx) for l, dx in zip(Lx, dX)] + [np.inf])
        ad = min([_max_step(l, ds) for l, ds in zip(Ls, dS)] + [np.inf])
        return min(1.0, tau * ap), min(1.0, tau * ad)

    Rc_aff = [-np.diag(dd ** 2) for dd in d]
    dX, dz, dS = direction(Rc_aff)
    ap, ad = steps(dX, dS, 1.0)
    mu_aff = _Cone.inner([x + ap * dx for x, dx in zip(X, dX)],
                         [s + ad * ds for s, ds in zip(S, dS)]) / ntot
    sigma = min(1.0, max(SIGMA_MIN, (mu_aff / mu) ** 3)) if mu > 0 else 0.0

    Rc = []
    for g, ginv, dd, dx, ds in zip(G, Ginv, d, dX, dS):
        dxs = ginv @ dx @ ginv.T
        dss = g.T @ ds @ g
        corr = 0.5 * (dxs @ dss + dss @ dxs)
        Rc.append(sigma * mu * np.eye(len(dd)) - np.diag(dd ** 2) - corr)
    dX, dz, dS = direction(Rc)
    ap, ad = steps(dX, dS, STEP_FRACTION)
    if ap < 1e-12 and ad < 1e-12:
        return None
    X = [_sym(x + ap * dx) for x, dx in zip(X, dX)]
    S = [_sym(s + ad * ds) for s, ds in zip(S, dS)]
    return X, z + ad * dz, S


# ---------------------------------------------------------------------------
# Public solve
# ---------------------------------------------------------------------------

def _nullspace(A, b):
    """Particular solution and orthonormal null-space basis of ``A y = b``."""
    m = A.shape[1]
    if A.shape[0] == 0:
        return np.zeros(m), np.eye(m), True
    U, s, Vt = np.linalg.svd(A)
    tol = max(A.shape) * np.finfo(float).eps * (s[0] if len(s) else 0.0) * 10
    r = int(np.sum(s > tol))
    y0 = Vt[:r].T @ ((U[:, :r].T @ b) / s[:r])
    consistent = np.linalg.norm(A @ y0 - b) <= 1e-9 * (1 + np.linalg.norm(b))
    return y0, Vt[r:].T, consistent


def _cone_data(sdp: SDPProblem):
    """All PSD constraints as (coeffs, const, face) triples; inequality rows become 1x1 blocks."""
    F = [(blk.coeffs, blk.const, getattr(blk, "face", None)) for blk in sdp.blocks]
    for row, rhs in zip(sdp.ineq_matrix, sdp.ineq_rhs):
        F.append((row.reshape(-1, 1, 1), np.array([[-rhs]]), None))
    return F


def _compress(coeffs, const, face):
    if face is None:
        return coeffs, const
    return (np.einsum("ia,kij,jb->kab", face, coeffs, face, optimize=True),
            face.T @ const @ face)


def _diagonal_faces(F, A, b, tol=1e-9, max_rounds=20):
    """Shrink faces of blocks whose diagonal entries the equalities force to zero.

    A PSD matrix with a zero diagonal entry has the whole row zero, so the
    direction is dropped from the face and the row entries are appended as
    equality rows.  Repeats until no further entry is forced.  Returns the
    updated faces and the augmented ``(A, b)``.
    """
    faces = [face for _, _, face in F]
    for _ in range(max_rounds):
        y0, N, consistent = _nullspace(A, b)
        if not consistent:
            break
        rows, rhs = [], []
        for i, (coeffs, const, _) in enumerate(F):
            cc, c0 = _compress(coeffs, const, faces[i])
            n = c0.shape[0]
            if n == 0:
                continue
            dc = cc[:, np.arange(n), np.arange(n)]
            val = np.diag(c0) + y0 @ dc
            var = np.linalg.norm(N.T @ dc, axis=0) if N.shape[1] else np.zeros(n)
            scale = 1.0 + np.abs(np.diag(c0)) + np.linalg.norm(dc, axis=0)
            zero = (np.abs(val) <= tol * scale) & (var <= tol * scale)
            if not zero.any():
                continue
            Q = faces[i] if faces[i] is not None else np.eye(coeffs.shape[1])
            faces[i] = Q[:, ~zero]
            for j in np.flatnonzero(zero):
                for l in range(n):
                    if l == j or (zero[l] and l < j):
                        continue
                    row, r = cc[:, j, l], -c0[j, l]
                    if np.abs(row).max(initial=0.0) > tol or abs(r) > tol:
                        rows.append(row)
                        rhs.append(r)
        if not rows:
            break
        A = np.vstack([A, np.array(rows)])
        b = np.concatenate([b, rhs])
    return faces, A, b


def solve(sdp: SDPProblem, gap_tol: float = GAP_TOL, feas_tol: float = FEAS_TOL,
          max_iter: int = MAX_ITER) -> SDPSolution:
    """Solve ``sdp`` and return primal and dual information.

    ``status`` is one of ``optimal``, ``near_optimal``, ``infeasible``,
    ``unbounded`` or ``iteration_limit``; on the latter two the best iterate
    found is returned.  Blocks carrying a ``face`` are solved on that
    subspace and their dual matrices are lifted back to full size.
    """
    c = sdp.objective
    nblocks, nineq = len(sdp.blocks), len(sdp.ineq_rhs)
    F = _cone_data(sdp)
    faces, A, b = _diagonal_faces(F, np.asarray(sdp.eq_matrix, float).reshape(-1, sdp.num_vars),
                                  np.asarray(sdp.eq_rhs, float))
    F = [(coeffs, const, face) for (coeffs, const, _), face in zip(F, faces)]
    eq = (A, b)
    y0, N, consistent = _nullspace(A, b)
    if not consistent:
        return _empty_solution(sdp, "infeasible", "equality constraints are inconsistent",
                               gap_tol, feas_tol)
    k = N.shape[1]

    # reduced LMI: const' + sum_j z_j F'_j with F'_j = sum_i N_ij F_i
    red_coeffs, red_const, kept = [], [], []
    for i, (coeffs, const, face) in enumerate(F):
        coeffs, const = _compress(coeffs, const, face)
        if const.shape[0] == 0:
            continue
        red_coeffs.append(np.tensordot(N.T, coeffs, axes=1))
        red_const.append(_sym(const + np.tensordot(y0, coeffs, axes=1)))
        kept.append(i)
    c_red = N.T @ c

    active = np.zeros(k, dtype=bool)
    for rc in red_coeffs:
        if k:
            active |= np.abs(rc.reshape(k, -1)).max(axis=1, initial=0.0) > 1e-12
    if np.any(np.abs(c_red[~active]) > 1e-10 * max(1.0, np.abs(c).max(initial=0.0))):
        return _empty_solution(sdp, "unbounded",
                               "objective depends on a variable no constraint restricts",
                               gap_tol, feas_tol)
    idx = np.flatnonzero(active)

    Z = [np.zeros((coeffs.shape[1], coeffs.shape[1])) for coeffs, _, _ in F]
    if not red_coeffs or not len(idx):
        y = y0
        infeasible = any(np.linalg.eigvalsh(rc)[0] < -feas_tol for rc in red_const)
        status = "infeasible" if infeasible else "optimal"
        return _finish(sdp, y, Z[:nblocks], np.zeros(nineq), status, 0, gap_tol, feas_tol, [], "",
                       eq)

    cone = _Cone([-rc[idx] for rc in red_coeffs], red_const)
    X, zs, S, status, it, history, message = _ipm(cone, -c_red[idx], gap_tol, feas_tol, max_iter)
    z = np.zeros(k)
    z[idx] = zs
    y = y0 + N @ z
    status = {"primal_infeasible": "unbounded", "dual_infeasible": "infeasible"}.get(status, status)
    for i, x in zip(kept, X):
        face = F[i][2]
        Z[i] = _sym(x) if face is None else _sym(face @ x @ face.T)
    g = np.array([float(x[0, 0]) for x in Z[nblocks:nblocks + nineq]])
    return _finish(sdp, y, Z[:nblocks], g, status, it, gap_tol, feas_tol, history, message, eq)


def _finish(sdp, y, dual_blocks, g, status, it, gap_tol, feas_tol, history, message, eq=None):
    c = sdp.objective
    A, b = eq if eq is not None else (sdp.eq_matrix, sdp.eq_rhs)
    n_eq = len(sdp.eq_rhs)
    m = sdp.num_vars
    grad = np.zeros(m)
    for blk, Zb in zip(sdp.blocks, dual_blocks):
        grad += blk.coeffs.reshape(m, -1) @ Zb.ravel()
    if len(g):
        grad += sdp.ineq_matrix.T @ g
    resid = c - grad
    if A.shape[0]:
        mu, *_ = np.linalg.lstsq(A.T, resid, rcond=None)
        dres = resid - A.T @ mu
    else:
        mu = np.zeros(0)
        dres = resid
    primal = float(c @ y) + sdp.objective_const
    dual = sdp.objective_const + float(b @ mu) + float(sdp.ineq_rhs @ g) - sum(
        float(np.vdot(blk.const, Zb)) for blk, Zb in zip(sdp.blocks, dual_blocks))
    gap = abs(primal - dual) / (1 + abs(primal))

    pinf = 0.0
    for blk in sdp.blocks:
        pinf = max(pinf, -np.linalg.eigvalsh(_sym(blk.value(y)))[0])
    if len(sdp.ineq_rhs):
        pinf = max(pinf, float(np.max(sdp.ineq_rhs - sdp.ineq_matrix @ y)))
    if len(sdp.eq_rhs):
        pinf = max(pinf, float(np.max(np.abs(sdp.eq_matrix @ y - sdp.eq_rhs))))
    dinf = float(np.linalg.norm(dres)) / (1.0 + float(np.linalg.norm(c)))
    for Zb in dual_blocks:
        dinf = max(dinf, -np.linalg.eigvalsh(Zb)[0])
    if len(g):
        dinf = max(dinf, -float(np.min(g)))
    pinf = max(pinf, 0.0)
    dinf = max(dinf, 0.0)
    if status == "optimal" and (gap > gap_tol or pinf > feas_tol or dinf > feas_tol):
        status = "near_optimal"
        message = (message + "; " if message else "") + (
            f"tolerances missed after recovery (gap {gap:.2e}, pinf {pinf:.2e}, dinf {dinf:.2e})")
    if len(mu) > n_eq:
        message = (message + "; " if message else "") + (
            f"{len(mu) - n_eq} equality rows implied by zero diagonals")
    return SDPSolution(y=y, dual_blocks=dual_blocks, dual_eq=mu[:n_eq], dual_ineq=g,
                       primal_obj=primal, dual_obj=dual, gap=gap, status=status,
                       iterations=it, primal_infeas=pinf, dual_infeas=dinf,
                       gap_tol=gap_tol, feas_tol=feas_tol, message=message, history=history)


def _empty_solution(sdp, status, message, gap_tol, feas_tol):
    nan = float("nan")
    return SDPSolution(y=np.full(sdp.num_vars, nan),
                       dual_blocks=[np.full((b.size, b.size), nan) for b in sdp.blocks],
                       dual_eq=np.full(len(sdp.eq_rhs), nan), dual_ineq=np.full(len(sdp.ineq_rhs), nan),
                       primal_obj=nan, dual_obj=nan, gap=nan, status=status,
                       gap_tol=gap_tol, feas_tol=feas_tol, message=message)


# ---------------------------------------------------------------------------
# SDPA sparse format
# ---------------------------------------------------------------------------

def export_sdpa(sdp: SDPProblem, comment: str | None = None) -> str:
    """Write ``sdp`` in SDPA sparse format (``.dat-s``).

    SDPA reads ``min c.x s.t. sum_i F_i x_i - F_0 PSD``, so ``F_0`` is the
    negated block constant.  Every PSD block keeps its size; scalar
    inequalities and both halves of each equality row share one trailing
    diagonal block.  Only upper-triangular nonzeros are written.
    """
    m = sdp.num_vars
    diag_rows = [(row, rhs) for row, rhs in zip(sdp.ineq_matrix, sdp.ineq_rhs)]
    for row, rhs in zip(sdp.eq_matrix, sdp.eq_rhs):
        diag_rows.append((row, rhs))
        diag_rows.append((-row, -rhs))
    sizes = [b.size for b in sdp.blocks]
    if diag_rows or not sizes:
        sizes.append(-max(len(diag_rows), 1))
    lines = []
    if comment:
        lines.extend(f'"{text}' for text in comment.splitlines())
    if sdp.objective_const:
        lines.append(f'"objective constant {sdp.objective_const!r}')
    lines.append(str(m))
    lines.append(str(len(sizes)))
    lines.append(" ".join(str(s) for s in sizes))
    lines.append(" ".join(repr(float(v)) for v in sdp.objective))

    def emit(mat, blk, i, j, v):
        if v != 0.0:
            lines.append(f"{mat} {blk} {i + 1} {j + 1} {float(v)!r}")

    for b_idx, blk in enumerate(sdp.blocks, start=1):
        n = blk.size
        iu, ju = np.triu_indices(n)
        for i, j in zip(iu, ju):
            emit(0, b_idx, i, j, -blk.const[i, j])
        for var in range(m):
            F = blk.coeffs[var]
            for i, j in zip(iu, ju):
                emit(var + 1, b_idx, i, j, F[i, j])
    if diag_rows:
        b_idx = len(sdp.blocks) + 1
        for r, (_, rhs) in enumerate(diag_rows):
            emit(0, b_idx, r, r, rhs)
        for var in range(m):
            for r, (row, _) in enumerate(diag_rows):
                emit(var + 1, b_idx, r, r, row[var])
    return "\n".join(lines) + "\n"


@dataclass
class SDPAData:
    """Parsed SDPA file: ``matrices[k][i]`` is block ``k`` of ``F_i`` (``i=0`` is F_0)."""

    num_vars: int
    block_sizes: list
    objective: np.ndarray
    matrices: list


def parse_sdpa(text: str) -> SDPAData:
    """Read SDPA sparse text; comment lines start with ``"`` or ``*``."""
    body = []
    for line in text.splitlines():
        s = line.strip()
        if not s or s[0] in '"*':
            continue
        body.append(s)
    tokens = lambda s: [t for t in re.split(r"[\s,{}()]+", s) if t]
    m = int(tokens(body[0])[0])
    nblocks = int(tokens(body[1])[0])
    sizes = [int(t) for t in tokens(body[2])[:nblocks]]
    c = np.array([float(t) for t in tokens(body[3])[:m]])
    mats = [np.zeros((m + 1, abs(n), abs(n))) for n in sizes]
    for s in body[4:]:
        t = tokens(s)
        mat, blk, i, j, v = int(t[0]), int(t[1]) - 1, int(t[2]) - 1, int(t[3]) - 1, float(t[4])
        mats[blk][mat, i, j] = v
        mats[blk][mat, j, i] = v
    return SDPAData(m, sizes, c, mats)


def sdpa_to_problem(data: SDPAData) -> SDPProblem:
    """Rebuild an :class:`SDPProblem` from parsed SDPA data (diagonal blocks -> rows)."""
    m = data.num_vars
    blocks, rows, rhs = [], [], []
    for size, mats in zip(data.block_sizes, data.matrices):
        if size > 0:
            blocks.append(SDPBlock(f"block{len(blocks)}", mats[1:].copy(), -mats[0].copy()))
        else:
            for r in range(-size):
                rows.append(mats[1:, r, r])
                rhs.append(mats[0, r, r])
    return SDPProblem(num_vars=m, objective=data.objective, blocks=blocks,
                      eq_matrix=np.zeros((0, m)), eq_rhs=np.zeros(0),
                      ineq_matrix=np.array(rows).reshape(-1, m), ineq_rhs=np.array(rhs))
