"""Voxel-lattice graphs, the split operator D, and connected components.

A :class:`VoxelGraph` is built from a k-dimensional lattice (1-, 2- or
3-d) with an optional boolean mask of active cells.  Nodes are the active
cells in raster order; edges join axis-aligned neighbors.  The split
operator stacks an identity block on top of rho-scaled edge differences:

    D beta = [beta ; rho * (beta_i - beta_j) for (i, j) in E],

so ``||D beta||_1`` combines plain coordinate sparsity with the graph
total variation.  D is applied matrix-free; it is never densified except
in small test fixtures.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class PowerIterationError(RuntimeError):
    """Power iteration failed to converge; carries the best estimate."""

    def __init__(self, message, best_estimate):
        super().__init__(message)
        self.best_estimate = best_estimate


@dataclass(frozen=True)
class VoxelGraph:
    """Active cells of a lattice and the edges between neighbors.

    ``nodes[i]`` is the raster index of graph node i; edges are pairs of
    graph-node indices (i, j) with i < j, sorted lexicographically.
    """

    dims: tuple
    mask: np.ndarray
    nodes: np.ndarray
    edges: np.ndarray  # shape (m, 2), possibly empty

    @property
    def p(self) -> int:
        return len(self.nodes)

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def edge_i(self) -> np.ndarray:
        return self.edges[:, 0] if self.m else np.empty(0, dtype=int)

    @property
    def edge_j(self) -> np.ndarray:
        return self.edges[:, 1] if self.m else np.empty(0, dtype=int)


def build_lattice(dims, mask=None) -> VoxelGraph:
    """Build the 2k-neighborhood lattice graph over active cells.

    dims is the lattice shape (up to 3 axes); mask, if given, marks the
    active cells and must have that shape.  Neighbors are at distance 1
    along one axis (4-neighborhood in 2-d, 6 in 3-d).  Node and edge
    ordering is deterministic: raster order for nodes, lexicographic for
    edges.
    """
    dims = tuple(int(d) for d in np.atleast_1d(dims))
    if len(dims) == 0 or any(d < 1 for d in dims):
        raise ValueError(f"invalid lattice dims {dims}")
    if mask is None:
        mask = np.ones(dims, dtype=bool)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != dims:
        raise ValueError(f"mask shape {mask.shape} does not match dims {dims}")
    if not mask.any():
        raise ValueError("no active voxels")

    flat_mask = mask.ravel()
    nodes = np.flatnonzero(flat_mask)
    compact = -np.ones(flat_mask.size, dtype=int)
    compact[nodes] = np.arange(len(nodes))

    edges = []
    grid = np.arange(flat_mask.size).reshape(dims)
    for axis in range(len(dims)):
        if dims[axis] < 2:
            continue
        lo = np.take(grid, range(dims[axis] - 1), axis=axis).ravel()
        hi = np.take(grid, range(1, dims[axis]), axis=axis).ravel()
        keep = flat_mask[lo] & flat_mask[hi]
        edges.append(np.column_stack([compact[lo[keep]], compact[hi[keep]]]))
    if edges:
        edges = np.vstack(edges)
        # raster index increases along every axis, so i < j already holds
        order = np.lexsort((edges[:, 1], edges[:, 0]))
        edges = edges[order]
    else:
        edges = np.empty((0, 2), dtype=int)
    return VoxelGraph(dims=dims, mask=mask, nodes=nodes, edges=edges)


def edgeless_graph(p) -> VoxelGraph:
    """Graph with p isolated nodes; the split operator degenerates to I."""
    if p < 1:
        raise ValueError("need at least one node")
    return VoxelGraph(
        dims=(int(p),),
        mask=np.ones(int(p), dtype=bool),
        nodes=np.arange(int(p)),
        edges=np.empty((0, 2), dtype=int),
    )


def graph_from_edges(p, edges) -> VoxelGraph:
    """Graph over p nodes from an explicit edge list (internal use)."""
    edges = np.asarray(edges, dtype=int).reshape(-1, 2)
    if len(edges):
        if edges.min() < 0 or edges.max() >= p:
            raise ValueError("edge references a node outside 0..p-1")
        lo = edges.min(axis=1)
        hi = edges.max(axis=1)
        if np.any(lo == hi):
            raise ValueError("self-loop in edge list")
        edges = np.unique(np.column_stack([lo, hi]), axis=0)
    else:
        edges = np.empty((0, 2), dtype=int)
    return VoxelGraph(
        dims=(int(p),),
        mask=np.ones(int(p), dtype=bool),
        nodes=np.arange(int(p)),
        edges=edges,
    )


@dataclass(frozen=True)
class SplitOperator:
    """Matrix-free D = [I ; rho * D_G] for a voxel graph."""

    graph: VoxelGraph
    rho: float = 1.0

    def __post_init__(self):
        if self.rho < 0:
            raise ValueError(f"rho must be >= 0, got {self.rho}")

    @property
    def p(self) -> int:
        return self.graph.p

    @property
    def m(self) -> int:
        return self.graph.m

    @property
    def n_rows(self) -> int:
        return self.graph.p + self.graph.m

    def apply_D(self, beta: np.ndarray) -> np.ndarray:
        beta = np.asarray(beta, dtype=float)
        if beta.shape[0] != self.p:
            raise ValueError(f"beta has length {beta.shape[0]}, expected {self.p}")
        if self.m == 0:
            return beta.copy()
        g = self.graph
        return np.concatenate([beta, self.rho * (beta[g.edge_i] - beta[g.edge_j])])

    def apply_Dt(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.shape[0] != self.n_rows:
            raise ValueError(f"u has length {u.shape[0]}, expected {self.n_rows}")
        out = u[: self.p].copy()
        if self.m:
            g = self.graph
            w = self.rho * u[self.p :]
            out += np.bincount(g.edge_i, weights=w, minlength=self.p)
            out -= np.bincount(g.edge_j, weights=w, minlength=self.p)
        return out

    def dense(self) -> np.ndarray:
        """Densify D; test-scale instances only."""
        if self.p > 1000:
            raise ValueError("refusing to densify an operator with p > 1000")
        D = np.zeros((self.n_rows, self.p))
        D[: self.p, : self.p] = np.eye(self.p)
        for row, (i, j) in enumerate(self.graph.edges):
            D[self.p + row, i] = self.rho
            D[self.p + row, j] = -self.rho
        return D


def connected_components(node_count, edge_subset):
    """Partition {0..p-1} into components of the given edge subset.

    Iterative depth-first search with an explicit stack, O(p + m).
    Components are emitted in order of their smallest member; each
    isolated node forms its own component.  Returns a list of sorted
    node-index lists.
    """
    labels = component_labels(node_count, edge_subset)
    comps = [[] for _ in range(labels.max() + 1)] if node_count else []
    for node, lab in enumerate(labels):
        comps[lab].append(node)
    return comps


def component_labels(node_count, edge_subset) -> np.ndarray:
    """Component id per node; ids increase with the component's smallest member."""
    p = int(node_count)
    edges = np.asarray(edge_subset, dtype=int).reshape(-1, 2)
    if len(edges) and (edges.min() < 0 or edges.max() >= p):
        raise ValueError("edge references a node outside 0..p-1")

    # CSR-style adjacency for the iterative DFS
    deg = np.zeros(p, dtype=int)
    if len(edges):
        np.add.at(deg, edges[:, 0], 1)
        np.add.at(deg, edges[:, 1], 1)
    offsets = np.concatenate([[0], np.cumsum(deg)])
    adj = np.empty(offsets[-1], dtype=int)
    cursor = offsets[:-1].copy()
    for i, j in edges:
        adj[cursor[i]] = j
        cursor[i] += 1
        adj[cursor[j]] = i
        cursor[j] += 1

    labels = -np.ones(p, dtype=int)
    current = 0
    stack = []
    for start in range(p):
        if labels[start] >= 0:
            continue
        labels[start] = current
        stack.append(start)
        while stack:
            node = stack.pop()
            for k in range(offsets[node], offsets[node + 1]):
                nbr = adj[k]
                if labels[nbr] < 0:
                    labels[nbr] = current
                    stack.append(nbr)
        current += 1
    return labels


def _power_iteration_sq(matvec, n, tol, max_iters):
    """Largest eigenvalue of a PSD operator given by matvec, by power iteration."""
    rng = np.random.default_rng(20240117)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iters):
        w = matvec(v)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        lam_new = float(v @ w)
        v = w / nw
        if abs(lam_new - lam) <= tol * max(abs(lam_new), 1e-30):
            return lam_new
        lam = lam_new
    raise PowerIterationError(
        f"power iteration did not converge in {max_iters} iterations",
        best_estimate=lam,
    )


def operator_norms(op: SplitOperator, X, tol=1e-6, max_iters=10_000):
    """Largest singular values (Lambda_X, Lambda_D) via power iteration.

    Runs on X^T X and D^T D to relative tolerance ``tol`` with an
    iteration cap; raises :class:`PowerIterationError` carrying the best
    estimate if the cap is hit.
    """
    X = np.asarray(X, dtype=float)
    lam_x = _power_iteration_sq(lambda v: X.T @ (X @ v), X.shape[1], tol, max_iters)
    lam_d = _power_iteration_sq(
        lambda v: op.apply_Dt(op.apply_D(v)), op.p, tol, max_iters
    )
    return float(np.sqrt(max(lam_x, 0.0))), float(np.sqrt(max(lam_d, 0.0)))
