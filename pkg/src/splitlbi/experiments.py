"""Ready-made benchmark experiments built on the simulators and solver.

These are the protocols the demos, the benchmark CLI and the acceptance
tests share: the 9x9 grid study (clustered positive signal + corner
negatives), the flat 80-coordinate support-recovery study, and the
single-path-versus-lambda-grid iteration race against FISTA.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .baseline import default_lambda_grid, fista_path, kkt_residual
from .evaluation import classify_metrics, support_auc
from .glm import Dataset, Family
from .lattice import SplitOperator, build_lattice, edgeless_graph
from .projection import decompose
from .simulate import SimSpec, gen_design, gen_labels, preset_grid_signal, preset_table1_signal
from .solver import Hyperparams, SupportSizeCap, default_step_size, run_path


@dataclass
class GridRunSummary:
    seed: int
    best_t: int
    val_acc_pre: float
    val_acc_les: float
    center_hits: int
    false_positives: int
    corners_recovered: bool
    frac_points_pre_ge_les: float
    max_dist_pre_les: float
    final_dist_pre_les: float
    beta0_at_best: float
    support_onset_t: int | None
    support_sizes_from_onset: list
    n_points: int


def make_grid_instance(seed, n_train=300, n_val=100):
    """The 9x9 study: N=400 logit draws, split into train and validation."""
    sig = preset_grid_signal()
    spec = SimSpec(N=n_train + n_val, p=81, seed=seed, label_model="logit")
    X = gen_design(spec)
    y = gen_labels(X, sig.beta_star, spec)
    train = Dataset(X[:n_train], y[:n_train])
    return train, X[n_train:], y[n_train:], sig


def run_grid_study(
    seed,
    kappa=80.0,
    nu=2.0,
    rho=1.0,
    max_iters=3_200_000,
    record_every=25_000,
    top_k_bias=4,
) -> GridRunSummary:
    """One seeded grid run, selecting the path point by beta_les accuracy.

    Feature-selection quality is read off supp(beta_les) at the selected
    point; the bias check asks whether the top_k most negative residual
    coordinates of beta_pre are exactly the planted corners.
    """
    train, Xv, yv, sig = make_grid_instance(seed)
    graph = build_lattice(sig.dims)
    op = SplitOperator(graph, rho)
    hyper = Hyperparams(
        kappa=kappa, nu=nu, max_iters=max_iters, record_every=record_every, nonneg=True
    )
    path = run_path(train, Family.LOGISTIC, op, hyper)

    acc_pre = np.array(
        [classify_metrics(yv, Xv @ pt.beta_pre + pt.beta0).acc for pt in path.points]
    )
    acc_les = np.array(
        [classify_metrics(yv, Xv @ pt.beta_les + pt.beta0).acc for pt in path.points]
    )
    best = int(np.argmax(acc_les))  # first max: ties resolve to smaller t
    pt = path.points[best]

    supp_les = set(np.flatnonzero(pt.beta_les != 0.0).tolist())
    center = set(sig.lesion_set.tolist())
    dec = decompose(pt.beta_pre, pt.beta_les, ("top_k_neg", top_k_bias))

    sizes = [q.support_size for q in path.points]
    onset = next((i for i, s in enumerate(sizes) if s > 0), None)
    return GridRunSummary(
        seed=seed,
        best_t=pt.t,
        val_acc_pre=float(acc_pre[best]),
        val_acc_les=float(acc_les[best]),
        center_hits=len(supp_les & center),
        false_positives=len(supp_les - center),
        corners_recovered=set(dec.procedural_bias.tolist()) == set(sig.bias_set.tolist()),
        frac_points_pre_ge_les=float(np.mean(acc_pre >= acc_les)),
        max_dist_pre_les=max(q.diagnostics["dist_pre_les"] for q in path.points),
        final_dist_pre_les=path.points[-1].diagnostics["dist_pre_les"],
        beta0_at_best=float(pt.beta0),
        support_onset_t=None if onset is None else path.points[onset].t,
        support_sizes_from_onset=[] if onset is None else sizes[onset : onset + 10],
        n_points=len(path.points),
    )


def make_table1_instance(seed, label_model="linear"):
    """The flat support-recovery study: n=100, p=80, signal (+2 x4, -2 x4)."""
    beta_star = preset_table1_signal()
    spec = SimSpec(N=100, p=80, seed=seed, label_model=label_model, noise_sigma=1.0)
    X = gen_design(spec)
    y = gen_labels(X, beta_star, spec)
    return Dataset(X, y), beta_star


def table1_best_auc(seed, nu, kappa=10.0, max_iters=150_000, record_every=500) -> float:
    """Best support AUC of beta_les over one path on the linear-model draw."""
    data, beta_star = make_table1_instance(seed, label_model="linear")
    op = SplitOperator(edgeless_graph(data.p), rho=0.0)
    hyper = Hyperparams(
        kappa=kappa, nu=nu, max_iters=max_iters, record_every=record_every, nonneg=False
    )
    path = run_path(data, Family.SQUARED, op, hyper, SupportSizeCap(45))
    true_supp = np.flatnonzero(beta_star)
    return max(support_auc(pt.beta_les, true_supp) for pt in path.points)


@dataclass
class SupportRace:
    seed: int
    true_support: tuple
    gsplit_iters: int | None
    fista_cumulative_iters: int | None
    fista_per_lambda: list
    fista_max_kkt: float
    gsplit_wins: bool


def support_recovery_race(
    seed,
    nu=2.0,
    kappa=3.0,
    max_iters=100_000,
    record_every=10,
    n_lambda=20,
    fista_max_iters=100_000,
) -> SupportRace:
    """Iterations to true-support recovery: one path vs a warm-started grid.

    Recovery means the estimator's support contains every true signal
    coordinate (noise coordinates interleave with the weakest signals on
    the logit draws, so exact set equality occurs for neither method).
    The path side reports the first recorded step where supp(beta_les)
    covers the true support; the grid side walks its descending lambdas
    accumulating FISTA iterations until some lambda's solution does.

    The path runs at the looser curvature-based step-size policy; each
    iteration of either method costs the same O(Np).
    """
    data, beta_star = make_table1_instance(seed, label_model="logit")
    true_supp = frozenset(np.flatnonzero(beta_star).tolist())

    op = SplitOperator(edgeless_graph(data.p), rho=0.0)
    probe = Hyperparams(kappa=kappa, nu=nu, max_iters=max_iters,
                        record_every=record_every, nonneg=False)
    alpha = default_step_size(probe, op, data.X, Family.LOGISTIC, policy="hessian")
    hyper = Hyperparams(
        kappa=kappa, nu=nu, alpha=alpha, max_iters=max_iters,
        record_every=record_every, nonneg=False,
    )
    path = run_path(data, Family.LOGISTIC, op, hyper, SupportSizeCap(30))
    gsplit_iters = None
    for pt in path.points:
        if true_supp <= frozenset(np.flatnonzero(pt.beta_les != 0.0).tolist()):
            gsplit_iters = pt.t
            break

    grid = default_lambda_grid(data, n=n_lambda)
    results = fista_path(data, grid, max_iters=fista_max_iters)
    fista_cum = None
    running = 0
    max_kkt = 0.0
    per_lambda = []
    for res in results:
        running += res.iters
        max_kkt = max(max_kkt, kkt_residual(data, res.beta, res.beta0, res.lam))
        per_lambda.append(
            {"lam": res.lam, "iters": res.iters,
             "support_size": int(np.sum(res.beta != 0.0))}
        )
        if fista_cum is None and true_supp <= frozenset(np.flatnonzero(res.beta).tolist()):
            fista_cum = running

    wins = gsplit_iters is not None and (fista_cum is None or gsplit_iters < fista_cum)
    return SupportRace(
        seed=seed,
        true_support=tuple(sorted(true_supp)),
        gsplit_iters=gsplit_iters,
        fista_cumulative_iters=fista_cum,
        fista_per_lambda=per_lambda,
        fista_max_kkt=max_kkt,
        gsplit_wins=wins,
    )
