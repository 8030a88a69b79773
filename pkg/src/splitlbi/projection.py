"""Support extraction, the cone-constrained projection, and decomposition.

The sparse estimator ``beta_les`` is the Euclidean projection of the dense
estimator onto the subspace cut out by the inactive rows of D (rows whose
gamma entry is exactly zero), intersected with the nonnegative orthant
when the sign prior is on:

    minimize ||b - beta_pre||_2
    s.t.     b_i = 0        for every node i with gamma_V[i] == 0
             b_i = b_j      for every edge (i,j) with gamma_G[e] == 0
             b >= 0         (only when nonneg)

The equality constraints glue nodes into connected components of the
"equality graph" (all edges whose gamma_G entry is zero); a component
touching any zero-forced node collapses to zero, every other component
takes the component mean of beta_pre, clamped at zero under the cone.
Because the objective decouples across components, the clamp is the exact
cone projection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import VoxelGraph, component_labels


@dataclass(frozen=True)
class Support:
    """Index sets of the nonzero entries of gamma's node and edge blocks."""

    s_v: np.ndarray
    s_g: np.ndarray

    @classmethod
    def from_gamma(cls, gamma, p):
        """Exact nonzero test; shrink produces exact zeros so no epsilon."""
        gamma = np.asarray(gamma)
        return cls(
            s_v=np.flatnonzero(gamma[:p] != 0.0),
            s_g=np.flatnonzero(gamma[p:] != 0.0),
        )

    @property
    def size(self) -> int:
        return len(self.s_v) + len(self.s_g)


@dataclass(frozen=True)
class Decomposition:
    """Disjoint lesion / procedural-bias / null index sets covering 0..p-1."""

    lesion: np.ndarray
    procedural_bias: np.ndarray
    null_set: np.ndarray
    rule: tuple


def project_lesion(beta_pre, support: Support, graph: VoxelGraph, nonneg: bool):
    """Project beta_pre onto the support-constrained (cone) subspace.

    Nodes outside ``support.s_v`` are forced to zero; edges outside
    ``support.s_g`` force their endpoints equal.  Under ``nonneg`` the
    result is additionally clamped into the nonnegative orthant, which is
    exact per equality component.
    """
    beta_pre = np.asarray(beta_pre, dtype=float)
    p = graph.p
    if beta_pre.shape[0] != p:
        raise ValueError(f"beta_pre has length {beta_pre.shape[0]}, expected {p}")

    if graph.m:
        inactive = np.ones(graph.m, dtype=bool)
        inactive[support.s_g] = False
        eq_edges = graph.edges[inactive]
    else:
        eq_edges = np.empty((0, 2), dtype=int)
    labels = component_labels(p, eq_edges)
    n_comp = labels.max() + 1

    free = np.zeros(p, dtype=bool)
    free[support.s_v] = True
    # a component is killed if any member is zero-forced
    killed = np.bincount(labels, weights=(~free).astype(float), minlength=n_comp) > 0

    sums = np.bincount(labels, weights=beta_pre, minlength=n_comp)
    counts = np.bincount(labels, minlength=n_comp)
    means = sums / counts
    values = np.where(killed, 0.0, means)
    if nonneg:
        values = np.maximum(values, 0.0)
    return values[labels]


def decompose(beta_pre, beta_les, rule) -> Decomposition:
    """Split coordinates into lesion, procedural-bias, and null sets.

    lesion is the support of beta_les; the residual is beta_pre off that
    support.  ``rule`` selects the procedural-bias part of the residual:

    - ``("threshold", tau)``: nonzero residuals with |r| >= tau
    - ``("top_k", k)``: the k largest nonzero |r|
    - ``("top_k_neg", k)``: the k most negative residuals

    Everything else off the lesion support is null.
    """
    beta_pre = np.asarray(beta_pre, dtype=float)
    beta_les = np.asarray(beta_les, dtype=float)
    if beta_pre.shape != beta_les.shape:
        raise ValueError("beta_pre and beta_les must have the same length")
    p = beta_pre.shape[0]

    lesion = np.flatnonzero(beta_les != 0.0)
    rest = np.setdiff1d(np.arange(p), lesion, assume_unique=True)
    r = beta_pre[rest]

    kind = rule[0]
    if kind == "threshold":
        tau = float(rule[1])
        if tau < 0:
            raise ValueError(f"threshold must be >= 0, got {tau}")
        pick = rest[(np.abs(r) >= tau) & (r != 0.0)]
    elif kind in ("top_k", "top_k_neg"):
        k = int(rule[1])
        if k > p:
            raise ValueError(f"top_k rule asks for {k} of only {p} coordinates")
        if kind == "top_k":
            candidates = rest[r != 0.0]
            key = -np.abs(beta_pre[candidates])
        else:
            candidates = rest[r < 0.0]
            key = beta_pre[candidates]
        order = np.argsort(key, kind="stable")
        pick = np.sort(candidates[order[:k]])
    else:
        raise ValueError(f"unknown decomposition rule {rule!r}")

    null_set = np.setdiff1d(rest, pick, assume_unique=True)
    return Decomposition(
        lesion=lesion,
        procedural_bias=np.sort(pick),
        null_set=null_set,
        rule=tuple(rule),
    )
