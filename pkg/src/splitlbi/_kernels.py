"""Inner-loop kernels for the path solver.

The iteration is a long sequence of very cheap steps (two thin matvecs
plus soft-thresholding), so per-step Python overhead dominates a naive
numpy loop.  The chunk runners below advance the state many steps at a
time and are JIT-compiled with numba when it is importable; the numpy
fallback implements the identical update order.

State layout: beta (p,), v (p+m,) are updated in place; gamma is implied
by v (kappa * soft-threshold) and recomputed each step.  All gradients
are evaluated at the pre-step state (simultaneous update).
"""

from __future__ import annotations

import numpy as np

FAMILY_LOGISTIC = 0
FAMILY_SQUARED = 1

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f

        if args and callable(args[0]):
            return args[0]
        return wrap


@njit(cache=True, nogil=True)
def _soft_shrink_inplace(v, gamma, kappa, nonneg, p):
    n = v.shape[0]
    for i in range(n):
        vi = v[i]
        if i < p and nonneg:
            g = vi - 1.0
            gamma[i] = kappa * g if g > 0.0 else 0.0
        else:
            if vi > 1.0:
                gamma[i] = kappa * (vi - 1.0)
            elif vi < -1.0:
                gamma[i] = kappa * (vi + 1.0)
            else:
                gamma[i] = 0.0


@njit(cache=True, nogil=True)
def _run_chunk_jit(
    X, y, ei, ej, rho, nu, alpha, kappa, nonneg, family, b0, beta, v, n_steps
):
    N, p = X.shape
    m = ei.shape[0]
    ak = alpha * kappa
    inv_nu = 1.0 / nu
    a_nu = alpha * inv_nu

    gamma = np.empty(p + m)
    _soft_shrink_inplace(v, gamma, kappa, nonneg, p)
    r = np.empty(N)
    resid_v = np.empty(p)
    resid_g = np.empty(m)

    for step in range(n_steps):
        # data-loss residual r and intercept gradient
        mu = np.dot(X, beta)
        g0 = 0.0
        if family == 0:
            for i in range(N):
                u = (mu[i] + b0) * y[i]
                ri = -y[i] / (1.0 + np.exp(u))
                r[i] = ri
                g0 += ri
        else:
            for i in range(N):
                ri = mu[i] + b0 - y[i]
                r[i] = ri
                g0 += ri
        g0 /= N

        g_beta = np.dot(r, X)  # X^T r

        # splitting residual D beta - gamma at the pre-step state
        for j in range(p):
            resid_v[j] = beta[j] - gamma[j]
        for e in range(m):
            resid_g[e] = rho * (beta[ei[e]] - beta[ej[e]]) - gamma[p + e]

        # g_beta = grad loss + D^T resid / nu
        for j in range(p):
            g_beta[j] = g_beta[j] / N + resid_v[j] * inv_nu
        for e in range(m):
            w = rho * resid_g[e] * inv_nu
            g_beta[ei[e]] += w
            g_beta[ej[e]] -= w

        b0 -= ak * g0
        # v step is -alpha * g_gamma = +(alpha/nu) * (D beta - gamma)
        for j in range(p):
            beta[j] -= ak * g_beta[j]
            v[j] += a_nu * resid_v[j]
        for e in range(m):
            v[p + e] += a_nu * resid_g[e]
        _soft_shrink_inplace(v, gamma, kappa, nonneg, p)

        if not np.isfinite(b0):
            return b0, step + 1
    return b0, n_steps


def soft_shrink(v, kappa, nonneg, p):
    """gamma = kappa * soft-threshold(v) with the node block clamped under nonneg."""
    v = np.asarray(v, dtype=float)
    gamma = np.sign(v) * np.maximum(np.abs(v) - 1.0, 0.0)
    if nonneg:
        gamma[:p] = np.maximum(v[:p] - 1.0, 0.0)
    return kappa * gamma


def _run_chunk_numpy(
    X, y, ei, ej, rho, nu, alpha, kappa, nonneg, family, b0, beta, v, n_steps
):
    N, p = X.shape
    ak = alpha * kappa
    inv_nu = 1.0 / nu
    a_nu = alpha * inv_nu
    gamma = soft_shrink(v, kappa, nonneg, p)
    for step in range(n_steps):
        mu = X @ beta + b0
        if family == FAMILY_LOGISTIC:
            # overflow in exp saturates the residual to 0, which is exact
            with np.errstate(over="ignore"):
                r = -y / (1.0 + np.exp(mu * y))
        else:
            r = mu - y
        g0 = r.mean()
        g_beta = X.T @ r / N

        resid_v = beta - gamma[:p]
        resid_g = rho * (beta[ei] - beta[ej]) - gamma[p:]
        g_beta += resid_v * inv_nu
        if len(ei):
            w = rho * resid_g * inv_nu
            g_beta += np.bincount(ei, weights=w, minlength=p)
            g_beta -= np.bincount(ej, weights=w, minlength=p)

        b0 -= ak * g0
        beta -= ak * g_beta
        v[:p] += a_nu * resid_v
        v[p:] += a_nu * resid_g
        gamma = soft_shrink(v, kappa, nonneg, p)

        if not np.isfinite(b0):
            return b0, step + 1
    return b0, n_steps


def run_chunk(X, y, ei, ej, rho, nu, alpha, kappa, nonneg, family, b0, beta, v, n_steps):
    """Advance (b0, beta, v) by up to n_steps; returns (b0, steps_taken).

    Stops early only when the intercept goes non-finite (divergence);
    beta and v are mutated in place either way.
    """
    runner = _run_chunk_jit if HAVE_NUMBA else _run_chunk_numpy
    return runner(
        X, y, ei, ej, rho, nu, alpha, kappa, nonneg, family, b0, beta, v, n_steps
    )
