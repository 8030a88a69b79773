"""Classification metrics, support-recovery AUC, mDC, and cross-validation.

Prediction uses the sign rule (ties at zero go to +1).  Sensitivity is
the recall of the -1 class, specificity of the +1 class; a class absent
from y_true leaves that rate undefined (NaN with the defined-flag off).

Cross-validation runs the path solver per fold and selects the
(hyper, t) pair with the best mean validation accuracy of the dense
estimator, breaking ties toward smaller t and then smaller rho.  For
selection-stability analysis each fold also reports the sparse
estimator's support at that fold's own best beta_les-accuracy time,
which is what the multi-set Dice coefficient is computed over.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .glm import Dataset
from .lattice import SplitOperator
from .solver import FixedIters, Hyperparams, run_path


@dataclass(frozen=True)
class Metrics:
    acc: float
    sen: float
    spe: float
    sen_defined: bool = True
    spe_defined: bool = True


def predict_labels(margins) -> np.ndarray:
    """Sign rule with mu = 0 mapped to +1."""
    return np.where(np.asarray(margins, dtype=float) >= 0.0, 1.0, -1.0)


def classify_metrics(y_true, margins) -> Metrics:
    """Accuracy, sensitivity (class -1), specificity (class +1)."""
    y_true = np.asarray(y_true, dtype=float).ravel()
    margins = np.asarray(margins, dtype=float).ravel()
    if y_true.shape != margins.shape:
        raise ValueError("y_true and margins must have equal length")
    if not np.all(np.abs(y_true) == 1.0):
        raise ValueError("labels must be in {-1, +1}")
    y_hat = predict_labels(margins)
    acc = float(np.mean(y_hat == y_true))
    neg = y_true == -1.0
    pos = ~neg
    sen_defined = bool(neg.any())
    spe_defined = bool(pos.any())
    sen = float(np.mean(y_hat[neg] == -1.0)) if sen_defined else float("nan")
    spe = float(np.mean(y_hat[pos] == 1.0)) if spe_defined else float("nan")
    return Metrics(acc=acc, sen=sen, spe=spe, sen_defined=sen_defined, spe_defined=spe_defined)


def support_auc(scores, true_support) -> float:
    """Mann-Whitney AUC of |scores| separating the true support, midrank ties."""
    scores = np.asarray(scores, dtype=float).ravel()
    p = scores.shape[0]
    is_true = np.zeros(p, dtype=bool)
    is_true[np.asarray(true_support, dtype=int)] = True
    n_pos = int(is_true.sum())
    if n_pos == 0 or n_pos == p:
        raise ValueError("true support must be a nonempty strict subset")
    ranks = rankdata(np.abs(scores))
    u = float(ranks[is_true].sum()) - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * (p - n_pos))


def mdc(supports) -> float:
    """Multi-set Dice coefficient K * |intersection| / sum of sizes."""
    supports = [set(int(i) for i in s) for s in supports]
    if len(supports) < 2:
        raise ValueError("mdc needs at least two supports")
    total = sum(len(s) for s in supports)
    if total == 0:
        warnings.warn("all supports empty; mdc reported as 0 by convention")
        return 0.0
    common = set.intersection(*supports)
    return len(supports) * len(common) / total


@dataclass(frozen=True)
class FoldPlan:
    """Label-stratified K-fold assignment of samples."""

    K: int
    assignments: np.ndarray
    seed: int

    @classmethod
    def stratified(cls, y, K, seed):
        y = np.asarray(y, dtype=float).ravel()
        if not np.all(np.abs(y) == 1.0):
            raise ValueError("fold planning requires labels in {-1, +1}")
        if K < 2 or K > len(y):
            raise ValueError(f"K={K} infeasible for {len(y)} samples")
        rng = np.random.default_rng(seed)
        assignments = np.empty(len(y), dtype=int)
        for label in (-1.0, 1.0):
            idx = np.flatnonzero(y == label)
            rng.shuffle(idx)
            assignments[idx] = np.arange(len(idx)) % K
        for k in range(K):
            fold_labels = y[assignments == k]
            if len(np.unique(fold_labels)) < 2:
                raise ValueError(f"fold {k} contains a single class")
        return cls(K=K, assignments=assignments, seed=seed)

    def split(self, k):
        val = self.assignments == k
        return np.flatnonzero(~val), np.flatnonzero(val)


@dataclass
class CVResult:
    best_hyper: Hyperparams
    best_t: int
    fold_metrics: list
    fold_supports: list
    mean_acc_table: dict  # (hyper index, t) -> mean val accuracy
    mdc_les: float


def _effective(hyper: Hyperparams, op: SplitOperator) -> SplitOperator:
    if hyper.rho is None or hyper.rho == op.rho:
        return op
    return SplitOperator(op.graph, hyper.rho)


def _fold_run(data, family, op, hyper, plan, k, stop):
    train, val = plan.split(k)
    sub = Dataset(data.X[train], data.y[train])
    path = run_path(sub, family, _effective(hyper, op), hyper, stop)
    Xv, yv = data.X[val], data.y[val]
    recs = []
    for pt in path.points:
        m_pre = classify_metrics(yv, Xv @ pt.beta_pre + pt.beta0)
        m_les = classify_metrics(yv, Xv @ pt.beta_les + pt.beta0)
        recs.append(
            {
                "t": pt.t,
                "acc_pre": m_pre.acc,
                "acc_les": m_les.acc,
                "metrics_pre": m_pre,
                "supp_les": np.flatnonzero(pt.beta_les != 0.0),
            }
        )
    return recs


def cross_validate(
    data: Dataset, family, op, hyper_grid, plan: FoldPlan, stop=None, threads=1
) -> CVResult:
    """Grid search over hyper-parameters with path-point early stopping.

    Every (hyper, fold) pair gets its own solver run; validation accuracy
    of beta_pre is collected at each recorded t.  The winning (hyper, t)
    maximizes mean accuracy across folds (ties: smaller t, then smaller
    rho).  fold_supports holds each winning-hyper fold's supp(beta_les)
    at that fold's best beta_les-accuracy point.

    With threads > 1 the independent (hyper, fold) runs execute
    concurrently; aggregation order is fixed, so results do not depend
    on the thread count.
    """
    hyper_grid = list(hyper_grid)
    if not hyper_grid:
        raise ValueError("empty hyper-parameter grid")
    stop = stop if stop is not None else FixedIters()

    jobs = [(hi, k) for hi in range(len(hyper_grid)) for k in range(plan.K)]
    runs = {}  # (hyper index, fold) -> list of per-point records
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = {
                key: pool.submit(
                    _fold_run, data, family, op, hyper_grid[key[0]], plan, key[1], stop
                )
                for key in jobs
            }
            for key, fut in futures.items():
                runs[key] = fut.result()
    else:
        for hi, k in jobs:
            runs[(hi, k)] = _fold_run(data, family, op, hyper_grid[hi], plan, k, stop)

    mean_acc = {}
    for hi, hyper in enumerate(hyper_grid):
        common = min(len(runs[(hi, k)]) for k in range(plan.K))
        for j in range(common):
            t = runs[(hi, 0)][j]["t"]
            mean_acc[(hi, t)] = float(
                np.mean([runs[(hi, k)][j]["acc_pre"] for k in range(plan.K)])
            )

    def rho_of(hi):
        h = hyper_grid[hi]
        return h.rho if h.rho is not None else op.rho

    best_hi, best_t = max(
        mean_acc, key=lambda key: (mean_acc[key], -key[1], -rho_of(key[0]))
    )
    best_hyper = hyper_grid[best_hi]

    fold_metrics = []
    fold_supports = []
    for k in range(plan.K):
        recs = runs[(best_hi, k)]
        at_best = next(r for r in recs if r["t"] == best_t)
        fold_metrics.append(at_best["metrics_pre"])
        stability = max(recs, key=lambda r: (r["acc_les"], -r["t"]))
        fold_supports.append(stability["supp_les"])

    return CVResult(
        best_hyper=best_hyper,
        best_t=best_t,
        fold_metrics=fold_metrics,
        fold_supports=fold_supports,
        mean_acc_table=mean_acc,
        mdc_les=mdc(fold_supports),
    )
