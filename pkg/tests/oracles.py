"""Independent oracles the tests check the library against.

Everything here is deliberately written without touching the library's
own code paths: plain-Python union-find, brute-force one-dimensional
search for the shrinkage operator, exhaustive active-set enumeration for
the constrained projection, extended-precision loss sums, and central
finite differences.
"""

import mpmath
import numpy as np
from scipy.linalg import null_space
from scipy.optimize import minimize_scalar


def central_diff(f, x, h=1e-5):
    """Central finite-difference gradient of a scalar function of a vector."""
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def union_find_components(node_count, edges):
    """Partition via union-find; returns sorted lists ordered by min member."""
    parent = list(range(node_count))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i, j in edges:
        ri, rj = find(int(i)), find(int(j))
        if ri != rj:
            parent[ri] = rj
    groups = {}
    for node in range(node_count):
        groups.setdefault(find(node), []).append(node)
    return sorted((sorted(g) for g in groups.values()), key=lambda g: g[0])


def brute_prox_coordinate(v, kappa, nonneg):
    """Brute-force maximizer of g*v - |g| - g^2/(2 kappa) [s.t. g >= 0].

    Grid search bracketed well past the closed-form scale, then an exact
    parabolic refine: away from the kink at zero the objective is a
    parabola, so a three-point fit recovers its vertex to roundoff
    (value-based minimizers stall near sqrt(eps) before that).
    """

    def neg_objective(g):
        return abs(g) + g * g / (2.0 * kappa) - g * v

    def piece_vertex(sign):
        """Grid minimum on one sign piece, refined by exact parabola fit."""
        span = kappa * (abs(v) + 2.0) + 1.0
        grid = sign * np.linspace(span / 8001.0, span, 8001)
        values = np.array([neg_objective(g) for g in grid])
        x2 = float(grid[np.argmin(values)])
        h = abs(x2) / 2.0
        f1, f2, f3 = neg_objective(x2 - h), neg_objective(x2), neg_objective(x2 + h)
        curv = f1 - 2.0 * f2 + f3
        if curv == 0.0:
            return x2
        vertex = x2 + h * (f1 - f3) / (2.0 * curv)
        # keep the candidate on its own piece; the kink candidate is 0
        return vertex if np.sign(vertex) == sign else 0.0

    candidates = [0.0, piece_vertex(1.0)]
    if not nonneg:
        candidates.append(piece_vertex(-1.0))
    return min(candidates, key=neg_objective)


def constraint_rows(p, s_v, s_g, edges):
    """Equality-constraint matrix: zero rows off s_v, difference rows off s_g."""
    rows = []
    in_sv = set(int(i) for i in s_v)
    in_sg = set(int(i) for i in s_g)
    for i in range(p):
        if i not in in_sv:
            row = np.zeros(p)
            row[i] = 1.0
            rows.append(row)
    for e, (i, j) in enumerate(edges):
        if e not in in_sg:
            row = np.zeros(p)
            row[int(i)] = 1.0
            row[int(j)] = -1.0
            rows.append(row)
    return np.array(rows) if rows else np.zeros((0, p))


def _project_null(A, b):
    """Euclidean projection of b onto {x : A x = 0}."""
    if A.shape[0] == 0:
        return b.copy()
    N = null_space(A)
    if N.size == 0:
        return np.zeros_like(b)
    return N @ (N.T @ b)


def qp_project_oracle(beta_pre, s_v, s_g, edges, nonneg):
    """Constrained projection by exhaustive active-set enumeration.

    Every subset of coordinates is tried as the additional zero set; each
    candidate is the equality-constrained projection, kept if feasible.
    The best feasible candidate is the exact solution (the true active
    set is among the subsets).  Exponential in p; for test sizes only.
    """
    b = np.asarray(beta_pre, dtype=float)
    p = b.size
    A = constraint_rows(p, s_v, s_g, edges)
    if not nonneg:
        return _project_null(A, b)

    best, best_val = None, np.inf
    for bits in range(2**p):
        zero_set = [i for i in range(p) if bits >> i & 1]
        extra = np.zeros((len(zero_set), p))
        for r, i in enumerate(zero_set):
            extra[r, i] = 1.0
        cand = _project_null(np.vstack([A, extra]) if len(zero_set) else A, b)
        if cand.min() < -1e-9:
            continue
        val = float(np.sum((cand - b) ** 2))
        if val < best_val - 1e-15:
            best, best_val = cand, val
    return np.maximum(best, 0.0)


def logistic_loss_mp(beta0, beta, X, y, digits=50):
    """Averaged logistic loss summed term by term at high precision."""
    with mpmath.workdps(digits):
        total = mpmath.mpf(0)
        for i in range(len(y)):
            u = mpmath.mpf(float(beta0))
            for j in range(X.shape[1]):
                u += mpmath.mpf(float(X[i, j])) * mpmath.mpf(float(beta[j]))
            uy = u * mpmath.mpf(float(y[i]))
            total += mpmath.log(1 + mpmath.e**uy) - uy
        return float(total / len(y))


def squared_loss_direct(beta0, beta, X, y):
    """Two-term direct evaluation of the half mean squared error."""
    total = 0.0
    for i in range(len(y)):
        mu = beta0 + sum(X[i, j] * beta[j] for j in range(X.shape[1]))
        total += (mu - y[i]) ** 2
    return total / (2.0 * len(y))
