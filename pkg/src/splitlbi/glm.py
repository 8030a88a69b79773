"""Loss functions and gradients for the generalized linear model family.

Two families are supported: logistic (binary labels in {-1, +1}) and
squared error (real-valued responses).  Losses are averaged over the N
samples so that curvature, and hence any step-size bound derived from it,
does not grow with the dataset.  The intercept is kept explicit and is
never penalized.

The augmented loss adds the variable-splitting coupling
``(1/2 nu) * ||D beta - gamma||^2`` on top of the data loss, where ``D``
is a :class:`~splitlbi.lattice.SplitOperator`.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import expit


class Family(Enum):
    """GLM family; fixes the loss and gradient formulas."""

    LOGISTIC = "logistic"
    SQUARED = "squared"


@dataclass(frozen=True)
class Dataset:
    """Design matrix and response, with shapes validated up front.

    X is N x p with one sample per row.  For the logistic family y must
    contain exactly +/-1; for the squared family y is any real vector.
    """

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float).ravel()
        if X.ndim != 2:
            raise ValueError(f"X must be 2-d, got shape {X.shape}")
        if X.shape[0] != y.shape[0]:
            raise ValueError(
                f"X has {X.shape[0]} rows but y has {y.shape[0]} entries"
            )
        if X.shape[0] < 1 or X.shape[1] < 1:
            raise ValueError("need at least one sample and one feature")
        if not np.all(np.isfinite(X)):
            raise ValueError("X contains non-finite entries")
        if not np.all(np.isfinite(y)):
            raise ValueError("y contains non-finite entries")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def N(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def require_binary_labels(self):
        if not np.all(np.abs(self.y) == 1.0):
            raise ValueError("logistic family requires labels in {-1, +1}")


@dataclass(frozen=True)
class LinearPredictor:
    """Intercept plus coefficient vector; mu_i = <x_i, beta_pre> + beta0."""

    beta0: float
    beta_pre: np.ndarray

    def margins(self, data: Dataset) -> np.ndarray:
        mu = data.X @ self.beta_pre + self.beta0
        if not np.all(np.isfinite(mu)):
            raise FloatingPointError("non-finite linear predictor")
        return mu


def logistic_loss(pred: LinearPredictor, data: Dataset) -> float:
    """Mean negative log-likelihood of the +/-1 logistic model.

    Evaluated in the stable form ``mean(log(1 + exp(-mu*y)))``, which is
    identical to ``log(1 + exp(mu*y)) - mu*y`` but never overflows.
    """
    data.require_binary_labels()
    u = pred.margins(data) * data.y
    return float(np.mean(np.logaddexp(0.0, -u)))


def logistic_grad(pred: LinearPredictor, data: Dataset):
    """Gradient of :func:`logistic_loss` as ``(g0, g)``.

    Per sample the residual is ``r_i = -y_i * sigmoid(-mu_i y_i)``;
    g = X^T r / N and g0 = mean(r).
    """
    data.require_binary_labels()
    u = pred.margins(data) * data.y
    r = -data.y * expit(-u)
    g = data.X.T @ r / data.N
    g0 = float(np.mean(r))
    return g0, g


def squared_loss(pred: LinearPredictor, data: Dataset) -> float:
    """Half mean squared error, (1/2N) ||X beta + beta0 - y||^2."""
    e = pred.margins(data) - data.y
    return float(0.5 * np.dot(e, e) / data.N)


def squared_grad(pred: LinearPredictor, data: Dataset):
    e = (pred.margins(data) - data.y) / data.N
    return float(np.sum(e)), data.X.T @ e


def loss(pred: LinearPredictor, data: Dataset, family: Family) -> float:
    if family is Family.LOGISTIC:
        return logistic_loss(pred, data)
    return squared_loss(pred, data)


def grad(pred: LinearPredictor, data: Dataset, family: Family):
    if family is Family.LOGISTIC:
        return logistic_grad(pred, data)
    return squared_grad(pred, data)


def augmented_loss(pred, gamma, op, nu, data, family) -> float:
    """Data loss plus the splitting term (1/2 nu) ||D beta - gamma||^2."""
    if nu <= 0:
        raise ValueError(f"nu must be positive, got {nu}")
    gamma = np.asarray(gamma, dtype=float)
    if gamma.shape[0] != op.n_rows:
        raise ValueError(
            f"gamma has length {gamma.shape[0]}, operator expects {op.n_rows}"
        )
    resid = op.apply_D(pred.beta_pre) - gamma
    return loss(pred, data, family) + 0.5 / nu * float(np.dot(resid, resid))


def augmented_grads(pred, gamma, op, nu, data, family):
    """Gradients of the augmented loss in all three blocks.

    Returns ``(g0, g_beta, g_gamma)`` with
    g_beta  = grad_beta L + (1/nu) D^T (D beta - gamma),
    g_gamma = (1/nu) (gamma - D beta).
    """
    if nu <= 0:
        raise ValueError(f"nu must be positive, got {nu}")
    gamma = np.asarray(gamma, dtype=float)
    if gamma.shape[0] != op.n_rows:
        raise ValueError(
            f"gamma has length {gamma.shape[0]}, operator expects {op.n_rows}"
        )
    g0, g_loss = grad(pred, data, family)
    resid = op.apply_D(pred.beta_pre) - gamma
    g_beta = g_loss + op.apply_Dt(resid) / nu
    g_gamma = -resid / nu
    return g0, g_beta, g_gamma
