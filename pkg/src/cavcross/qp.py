"""Small dense strictly convex QP solver, dual active-set method.

Solves  min 1/2 x'Hx + f'x  s.t.  a_i'x <= b_i  and box bounds, for a handful
of variables and rows.  The method starts at the unconstrained minimum and
adds violated rows one at a time while keeping the working set dually
feasible (Goldfarb-Idnani scheme with dense KKT re-solves; problem sizes here
never justify factor updates).  Needs no feasible starting point, detects
infeasibility with a certificate of conflicting rows, and warm starts from a
previous active set.

Ties break on the lowest row index, so identical problems yield bit-identical
solutions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

FEAS_TOL = 1e-10
DEP_TOL = 1e-11

OPTIMAL = "Optimal"
INFEASIBLE = "Infeasible"


class QpError(RuntimeError):
    pass


@dataclass(frozen=True)
class QpRow:
    """One inequality a'x <= b."""

    a: tuple
    b: float
    tag: str = ""


@dataclass
class QpProblem:
    H: np.ndarray
    f: np.ndarray
    rows: list[QpRow] = field(default_factory=list)
    lb: np.ndarray | None = None
    ub: np.ndarray | None = None

    def dim(self) -> int:
        return len(self.f)


@dataclass
class QpResult:
    status: str
    x: np.ndarray | None
    objective: float | None
    active_tags: tuple[str, ...] = ()
    conflict_tags: tuple[str, ...] = ()
    iterations: int = 0
    lam: dict = field(default_factory=dict)


def _expanded_rows(problem: QpProblem) -> tuple[np.ndarray, np.ndarray, list[str]]:
    n = problem.dim()
    A, b, tags = [], [], []
    for row in problem.rows:
        A.append(np.asarray(row.a, dtype=float))
        b.append(float(row.b))
        tags.append(row.tag)
    lb = problem.lb if problem.lb is not None else np.full(n, -np.inf)
    ub = problem.ub if problem.ub is not None else np.full(n, np.inf)
    for i in range(n):
        if np.isfinite(ub[i]):
            e = np.zeros(n)
            e[i] = 1.0
            A.append(e)
            b.append(float(ub[i]))
            tags.append(f"ub:{i}")
        if np.isfinite(lb[i]):
            e = np.zeros(n)
            e[i] = -1.0
            A.append(e)
            b.append(-float(lb[i]))
            tags.append(f"lb:{i}")
    if A:
        return np.vstack(A), np.asarray(b), tags
    return np.zeros((0, n)), np.zeros(0), tags


def _kkt_direction(H, A_W, g_p):
    """(dx, dlam) with H dx + A_W' dlam = -g_p and A_W dx = 0."""
    m = A_W.shape[0]
    if m == 0:
        return np.linalg.solve(H, -g_p), np.zeros(0)
    n = H.shape[0]
    M = np.zeros((n + m, n + m))
    M[:n, :n] = H
    M[:n, n:] = A_W.T
    M[n:, :n] = A_W
    rhs = np.concatenate([-g_p, np.zeros(m)])
    sol = np.linalg.solve(M, rhs)
    return sol[:n], sol[n:]


def solve_qp(problem: QpProblem, warm_start: tuple[str, ...] = ()) -> QpResult:
    H = np.asarray(problem.H, dtype=float)
    f = np.asarray(problem.f, dtype=float)
    n = problem.dim()
    A, b, tags = _expanded_rows(problem)
    m = len(b)

    x = np.linalg.solve(H, -f)
    W: list[int] = []
    lam: list[float] = []
    iters = 0

    if warm_start:
        wanted = [i for i, t in enumerate(tags) if t in set(warm_start)]
        for i in wanted:
            if len(W) >= n:
                break
            cand = A[W + [i]]
            if np.linalg.matrix_rank(cand) == len(W) + 1:
                W.append(i)
        while W:
            Aw = A[W]
            k = len(W)
            M = np.zeros((n + k, n + k))
            M[:n, :n] = H
            M[:n, n:] = Aw.T
            M[n:, :n] = Aw
            rhs = np.concatenate([-f, b[W]])
            try:
                sol = np.linalg.solve(M, rhs)
            except np.linalg.LinAlgError:
                W.pop()
                continue
            x, lam_w = sol[:n], sol[n:]
            if np.all(lam_w >= -1e-12):
                lam = list(lam_w)
                break
            W.pop(int(np.argmin(lam_w)))
        else:
            lam = []

    max_iter = 50 * (m + n + 1)
    while True:
        iters += 1
        if iters > max_iter:
            raise QpError("active-set iteration limit exceeded")
        s = A @ x - b if m else np.zeros(0)
        scale = 1.0 + float(np.abs(x).max(initial=0.0))
        viol = s > FEAS_TOL * scale + FEAS_TOL
        if not viol.any():
            obj = 0.5 * float(x @ H @ x) + float(f @ x)
            lam_map = {tags[i]: lam[k] for k, i in enumerate(W)}
            return QpResult(OPTIMAL, x, obj, tuple(tags[i] for i in W), (), iters, lam_map)
        # most violated, lowest index on ties
        p = int(np.argmax(np.where(viol, s, -np.inf)))

        g_p = A[p]
        lam_p = 0.0
        while True:
            iters += 1
            if iters > max_iter:
                raise QpError("active-set iteration limit exceeded")
            Aw = A[W] if W else np.zeros((0, n))
            dx, dlam = _kkt_direction(H, Aw, g_p)
            kappa = float(g_p @ dx)  # equals -dx'H dx <= 0
            s_p = float(g_p @ x - b[p])
            if kappa >= -DEP_TOL:
                # g_p lies in the span of active normals: dual-only step
                if not len(dlam) or not np.any(dlam < -DEP_TOL):
                    conflict = tuple(tags[i] for i in W) + (tags[p],)
                    return QpResult(INFEASIBLE, None, None, (), conflict, iters)
                ratios = [
                    (lam[k] / -dlam[k], k) for k in range(len(W)) if dlam[k] < -DEP_TOL
                ]
                tau, k_drop = min(ratios)
                lam = [lam[k] + tau * dlam[k] for k in range(len(W))]
                lam_p += tau
                W.pop(k_drop)
                lam.pop(k_drop)
                continue
            tau_full = s_p / -kappa
            ratios = [
                (lam[k] / -dlam[k], k) for k in range(len(W)) if dlam[k] < -DEP_TOL
            ]
            tau_block, k_drop = min(ratios) if ratios else (np.inf, -1)
            tau = min(tau_full, tau_block)
            x = x + tau * dx
            lam = [lam[k] + tau * dlam[k] for k in range(len(W))]
            lam_p += tau
            if tau_full <= tau_block:
                W.append(p)
                lam.append(lam_p)
                break
            W.pop(k_drop)
            lam.pop(k_drop)


def kkt_residual(problem: QpProblem, result: QpResult) -> float:
    """Stationarity residual ||Hx + f + sum lam_i a_i|| at an Optimal result."""
    if result.status != OPTIMAL:
        raise QpError("KKT residual needs an Optimal result")
    A, b, tags = _expanded_rows(problem)
    g = problem.H @ result.x + problem.f
    for i, t in enumerate(tags):
        if t in result.lam:
            g = g + result.lam[t] * A[i]
    return float(np.linalg.norm(g))
