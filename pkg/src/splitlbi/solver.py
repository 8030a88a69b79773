"""Split linearized Bregman iteration and the regularization path it traces.

One run produces a path of coupled estimators indexed by the step count t
(regularization time t * alpha): the dense predictor ``beta_pre`` follows
damped gradient descent on the augmented loss while the dual variable v
accumulates the splitting gradient and pops coordinates of gamma out of
the soft-threshold dead zone, from strongest to weakest.  At every
recorded point the sparse estimator ``beta_les`` is obtained by projecting
beta_pre onto the support structure of gamma.

All state starts at exactly zero, so the path begins at the null model
and densifies monotonically in regularization time.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .glm import Dataset, Family, LinearPredictor, augmented_grads, augmented_loss, loss
from .lattice import SplitOperator, operator_norms
from .projection import Support, project_lesion


class DivergedError(RuntimeError):
    """Iterates went non-finite; the step size is too large."""

    def __init__(self, t, beta_norm, v_norm):
        super().__init__(
            f"iteration diverged at step {t} "
            f"(|beta|={beta_norm:.3g}, |v|={v_norm:.3g}); reduce alpha"
        )
        self.t = t
        self.beta_norm = beta_norm
        self.v_norm = v_norm


@dataclass(frozen=True)
class Hyperparams:
    """Solver hyper-parameters.

    alpha=None means auto: resolved once, before iteration 0, to
    nu / (kappa * (1 + nu Lambda_X^2 + nu Lambda_D^2)).  rho is carried
    here only as an override used when cross-validation or the CLI builds
    operators; the solver itself reads rho from the SplitOperator.
    """

    kappa: float
    nu: float
    alpha: float | None = None
    max_iters: int = 100_000
    record_every: int = 500
    nonneg: bool = False
    rho: float | None = None

    def __post_init__(self):
        if self.kappa <= 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if self.nu <= 0:
            raise ValueError(f"nu must be positive, got {self.nu}")
        if self.alpha is not None and self.alpha <= 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if self.max_iters < 1 or self.record_every < 1:
            raise ValueError("max_iters and record_every must be >= 1")
        if self.rho is not None and self.rho < 0:
            raise ValueError(f"rho must be >= 0, got {self.rho}")


@dataclass
class ModelState:
    """The coupled iterate at step t; all blocks zero at t=0."""

    t: int
    beta0: float
    beta_pre: np.ndarray
    v: np.ndarray
    gamma: np.ndarray

    @classmethod
    def initial(cls, p, n_rows):
        return cls(
            t=0,
            beta0=0.0,
            beta_pre=np.zeros(p),
            v=np.zeros(n_rows),
            gamma=np.zeros(n_rows),
        )


@dataclass(frozen=True)
class PathPoint:
    """One recorded point of the path with both estimators and diagnostics."""

    t: int
    beta0: float
    beta_pre: np.ndarray
    beta_les: np.ndarray
    s_v: np.ndarray
    s_g: np.ndarray
    diagnostics: dict

    @property
    def support_size(self) -> int:
        return len(self.s_v) + len(self.s_g)


@dataclass
class RegularizationPath:
    points: list
    alpha: float
    hyper: Hyperparams
    stop_reason: str = "max_iters"

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def point_at(self, t):
        for pt in self.points:
            if pt.t == t:
                return pt
        raise KeyError(f"no recorded point at t={t}")


# stop rules ---------------------------------------------------------------


@dataclass(frozen=True)
class FixedIters:
    """Run to hyper.max_iters."""

    def should_stop(self, points):
        return False


@dataclass(frozen=True)
class SupportSizeCap:
    """Stop once |supp(gamma)| reaches the cap (checked at record points)."""

    cap: int

    def should_stop(self, points):
        return points[-1].support_size >= self.cap


@dataclass
class ValidationAccuracyPlateau:
    """Stop when beta_pre validation accuracy stops improving.

    Accuracy is evaluated at every recorded point; the rule fires after
    ``patience`` consecutive recorded points without a new maximum.
    """

    X_val: np.ndarray
    y_val: np.ndarray
    patience: int = 5

    def should_stop(self, points):
        accs = [pt.diagnostics["val_acc"] for pt in points]
        best = int(np.argmax(accs))
        return len(accs) - 1 - best >= self.patience

    def val_accuracy(self, beta0, beta_pre):
        mu = self.X_val @ beta_pre + beta0
        pred = np.where(mu >= 0, 1.0, -1.0)
        return float(np.mean(pred == self.y_val))


# operations ---------------------------------------------------------------


def default_step_size(hyper, op, X, family=None, policy="singular", norms=None):
    """Step size from the stability bound.

    policy="singular" (default): nu / (kappa (1 + nu Lambda_X^2 + nu Lambda_D^2)).
    policy="hessian": nu / (kappa (1 + nu Lambda_H + Lambda_D^2)) with the loss
    curvature bound Lambda_H = Lambda_X^2 / (4N) for logistic and
    Lambda_X^2 / N for squared loss (losses are N-averaged).  The default
    policy is the more conservative of the two on real instances.
    """
    lam_x, lam_d = operator_norms(op, X) if norms is None else norms
    if policy == "singular":
        denom = 1.0 + hyper.nu * lam_x**2 + hyper.nu * lam_d**2
    elif policy == "hessian":
        N = np.asarray(X).shape[0]
        lam_h = lam_x**2 / (4.0 * N if family is Family.LOGISTIC else N)
        denom = 1.0 + hyper.nu * lam_h + lam_d**2
    else:
        raise ValueError(f"unknown step-size policy {policy!r}")
    return hyper.nu / (hyper.kappa * denom)


def resolve_alpha(hyper, op, X, family=None) -> Hyperparams:
    """Fill in hyper.alpha when it is auto (None); no-op otherwise."""
    if hyper.alpha is not None:
        return hyper
    return replace(hyper, alpha=default_step_size(hyper, op, X, family))


def shrink(v, hyper, p):
    """gamma = kappa * soft-threshold(v) at level 1.

    Node block (first p entries): max(v-1, 0) under the nonneg prior,
    signed shrinkage otherwise.  Edge block: always signed shrinkage.
    """
    return _kernels.soft_shrink(v, hyper.kappa, hyper.nonneg, p)


def step(state: ModelState, data: Dataset, family, op, hyper) -> ModelState:
    """One simultaneous update of (beta0, beta_pre, v, gamma).

    All gradients are taken at the incoming state; gamma is then refreshed
    from the new v in closed form.  hyper.alpha must already be resolved.
    """
    if hyper.alpha is None:
        raise ValueError("hyper.alpha is unresolved; call resolve_alpha first")
    alpha, kappa = hyper.alpha, hyper.kappa
    pred = LinearPredictor(state.beta0, state.beta_pre)
    g0, g_beta, g_gamma = augmented_grads(
        pred, state.gamma, op, hyper.nu, data, family
    )
    beta0 = state.beta0 - alpha * kappa * g0
    beta_pre = state.beta_pre - alpha * kappa * g_beta
    v = state.v - alpha * g_gamma
    if not (np.isfinite(beta0) and np.all(np.isfinite(beta_pre)) and np.all(np.isfinite(v))):
        raise DivergedError(state.t + 1, float(np.linalg.norm(state.beta_pre)), float(np.linalg.norm(state.v)))
    gamma = shrink(v, hyper, op.p)
    return ModelState(t=state.t + 1, beta0=beta0, beta_pre=beta_pre, v=v, gamma=gamma)


def _record_point(state, data, family, op, hyper, stop):
    sup = Support.from_gamma(state.gamma, op.p)
    beta_les = project_lesion(state.beta_pre, sup, op.graph, hyper.nonneg)
    pred = LinearPredictor(state.beta0, state.beta_pre)
    diagnostics = {
        "loss": loss(pred, data, family),
        "aug_loss": augmented_loss(pred, state.gamma, op, hyper.nu, data, family),
        "dist_pre_les": float(np.linalg.norm(state.beta_pre - beta_les)),
        "support_size": sup.size,
    }
    if isinstance(stop, ValidationAccuracyPlateau):
        diagnostics["val_acc"] = stop.val_accuracy(state.beta0, state.beta_pre)
        mu_les = stop.X_val @ beta_les + state.beta0
        diagnostics["val_acc_les"] = float(
            np.mean(np.where(mu_les >= 0, 1.0, -1.0) == stop.y_val)
        )
    return PathPoint(
        t=state.t,
        beta0=state.beta0,
        beta_pre=state.beta_pre.copy(),
        beta_les=beta_les,
        s_v=sup.s_v,
        s_g=sup.s_g,
        diagnostics=diagnostics,
    )


def run_path(data: Dataset, family, op: SplitOperator, hyper: Hyperparams, stop=None):
    """Iterate the solver, recording a path point every record_every steps.

    The first recorded point is the null model at t=0 (empty support,
    beta_les = 0).  Halts at max_iters or when the stop rule fires at a
    record point; raises DivergedError if iterates go non-finite.
    """
    if op.p != data.p:
        raise ValueError(f"operator is over {op.p} nodes but data has {data.p} features")
    if family is Family.LOGISTIC:
        data.require_binary_labels()
    stop = stop if stop is not None else FixedIters()
    hyper = resolve_alpha(hyper, op, data.X, family)

    g = op.graph
    fam_code = (
        _kernels.FAMILY_LOGISTIC if family is Family.LOGISTIC else _kernels.FAMILY_SQUARED
    )
    beta = np.zeros(op.p)
    v = np.zeros(op.n_rows)
    b0 = 0.0
    t = 0

    state = ModelState.initial(op.p, op.n_rows)
    points = [_record_point(state, data, family, op, hyper, stop)]
    stop_reason = "max_iters"
    ei = np.ascontiguousarray(g.edge_i)
    ej = np.ascontiguousarray(g.edge_j)
    X = np.ascontiguousarray(data.X)

    while t < hyper.max_iters:
        n_steps = min(hyper.record_every, hyper.max_iters - t)
        b0, taken = _kernels.run_chunk(
            X, data.y, ei, ej, op.rho, hyper.nu, hyper.alpha, hyper.kappa,
            hyper.nonneg, fam_code, b0, beta, v, n_steps,
        )
        t += taken
        if not (np.isfinite(b0) and np.all(np.isfinite(beta)) and np.all(np.isfinite(v))):
            raise DivergedError(t, float(np.linalg.norm(beta)), float(np.linalg.norm(v)))
        state = ModelState(
            t=t, beta0=b0, beta_pre=beta.copy(), v=v.copy(),
            gamma=shrink(v, hyper, op.p),
        )
        points.append(_record_point(state, data, family, op, hyper, stop))
        if stop.should_stop(points):
            stop_reason = type(stop).__name__
            break
    return RegularizationPath(points=points, alpha=hyper.alpha, hyper=hyper, stop_reason=stop_reason)


def entry_order(path: RegularizationPath):
    """First recorded time each feature enters supp(gamma_V).

    Returns (feature, entry_t) pairs sorted by entry time, ties by index.
    """
    if not path.points:
        raise ValueError("path has no recorded points")
    seen = {}
    for pt in path.points:
        for j in pt.s_v:
            if int(j) not in seen:
                seen[int(j)] = pt.t
    return sorted(seen.items(), key=lambda kv: (kv[1], kv[0]))
