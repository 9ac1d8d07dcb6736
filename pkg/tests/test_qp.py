import numpy as np
import pytest

from cavcross.qp import (
    INFEASIBLE,
    OPTIMAL,
    QpProblem,
    QpRow,
    kkt_residual,
    solve_qp,
)


def enumeration_oracle(problem):
    """Exact brute-force minimizer: try every candidate active set.

    For each subset of constraints (rows plus box faces) of size <= n, solve
    the equality-constrained QP and keep the best candidate that satisfies
    every constraint.  The optimum binds some active set, so it appears among
    the candidates; every kept candidate is feasible, so the minimum is exact.
    """
    from itertools import combinations

    H, f = problem.H, problem.f
    n = len(f)
    lb = problem.lb if problem.lb is not None else np.full(n, -np.inf)
    ub = problem.ub if problem.ub is not None else np.full(n, np.inf)
    A_list = [np.asarray(r.a, float) for r in problem.rows]
    b_list = [r.b for r in problem.rows]
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        if np.isfinite(ub[i]):
            A_list.append(e.copy())
            b_list.append(float(ub[i]))
        if np.isfinite(lb[i]):
            A_list.append(-e)
            b_list.append(-float(lb[i]))
    A = np.vstack(A_list) if A_list else np.zeros((0, n))
    b = np.asarray(b_list)

    def feasible(x):
        return not len(b) or np.all(A @ x <= b + 1e-9)

    best_x, best_obj = None, np.inf
    for k in range(0, n + 1):
        for S in combinations(range(len(b)), k):
            if k == 0:
                try:
                    x = np.linalg.solve(H, -f)
                except np.linalg.LinAlgError:
                    continue
            else:
                As, bs = A[list(S)], b[list(S)]
                M = np.zeros((n + k, n + k))
                M[:n, :n] = H
                M[:n, n:] = As.T
                M[n:, :n] = As
                rhs = np.concatenate([-f, bs])
                try:
                    x = np.linalg.solve(M, rhs)[:n]
                except np.linalg.LinAlgError:
                    continue
            if feasible(x):
                obj = 0.5 * float(x @ H @ x) + float(f @ x)
                if obj < best_obj - 1e-15:
                    best_obj, best_x = obj, x
    return best_x, best_obj


def random_feasible_problem(rng, n=3, m=8):
    H = np.diag(rng.uniform(0.5, 3.0, n))
    f = rng.uniform(-2.0, 2.0, n)
    lb, ub = np.full(n, -2.0), np.full(n, 2.0)
    seed = rng.uniform(-1.2, 1.2, n)
    rows = []
    for i in range(m):
        a = rng.normal(size=n)
        margin = rng.uniform(0.35, 1.5)
        rows.append(QpRow(tuple(a), float(a @ seed + margin), tag=f"r{i}"))
    return QpProblem(H, f, rows, lb, ub)


def test_unconstrained_minimum():
    H = np.diag([2.0, 1.0])
    x0 = np.array([1.5, -0.5])
    res = solve_qp(QpProblem(H, -H @ x0))
    assert res.status == OPTIMAL
    assert res.x == pytest.approx(x0)


def test_single_active_row():
    # minimize 1/2 (u - 2)^2 s.t. u <= 1
    res = solve_qp(QpProblem(np.array([[1.0]]), np.array([-2.0]), [QpRow((1.0,), 1.0, "cap")]))
    assert res.status == OPTIMAL
    assert res.x[0] == pytest.approx(1.0)
    assert res.active_tags == ("cap",)


def test_box_bounds_respected():
    res = solve_qp(
        QpProblem(np.array([[1.0]]), np.array([-5.0]), [], lb=np.array([-3.0]), ub=np.array([3.0]))
    )
    assert res.x[0] == pytest.approx(3.0)


def test_infeasible_reports_conflict():
    rows = [QpRow((1.0,), 1.0, "le1"), QpRow((-1.0,), -2.0, "ge2")]
    res = solve_qp(QpProblem(np.array([[1.0]]), np.array([0.0]), rows))
    assert res.status == INFEASIBLE
    assert set(res.conflict_tags) == {"le1", "ge2"}


def test_deterministic_bitwise():
    rng = np.random.default_rng(3)
    prob = random_feasible_problem(rng)
    a = solve_qp(prob)
    b = solve_qp(prob)
    assert a.x.tobytes() == b.x.tobytes()


def test_warm_start_same_solution():
    rng = np.random.default_rng(4)
    for _ in range(20):
        prob = random_feasible_problem(rng)
        cold = solve_qp(prob)
        warm = solve_qp(prob, warm_start=cold.active_tags)
        assert cold.status == warm.status == OPTIMAL
        assert warm.x == pytest.approx(cold.x, abs=1e-9)


def test_feasibility_and_kkt_residuals():
    rng = np.random.default_rng(7)
    for _ in range(100):
        prob = random_feasible_problem(rng)
        res = solve_qp(prob)
        assert res.status == OPTIMAL
        for row in prob.rows:
            assert np.dot(row.a, res.x) <= row.b + 1e-8
        assert np.all(res.x >= prob.lb - 1e-8)
        assert np.all(res.x <= prob.ub + 1e-8)
        assert kkt_residual(prob, res) <= 1e-6


def test_matches_enumeration_oracle_sample():
    # a fast slice of the acceptance oracle suite
    rng = np.random.default_rng(12)
    for _ in range(60):
        prob = random_feasible_problem(rng)
        res = solve_qp(prob)
        gx, gobj = enumeration_oracle(prob)
        assert res.status == OPTIMAL
        assert abs(res.objective - gobj) <= 1e-5
        assert np.max(np.abs(res.x - gx)) <= 2e-3


def test_equality_like_pair_of_rows():
    # u <= 1 and -u <= -1 pin u = 1 exactly
    rows = [QpRow((1.0, 0.0), 1.0, "up"), QpRow((-1.0, 0.0), -1.0, "dn")]
    H = np.eye(2)
    res = solve_qp(QpProblem(H, np.array([0.0, -1.0]), rows))
    assert res.status == OPTIMAL
    assert res.x[0] == pytest.approx(1.0)
    assert res.x[1] == pytest.approx(1.0)
