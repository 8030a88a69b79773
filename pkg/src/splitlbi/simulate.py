"""Seeded synthetic data generators for the two benchmark designs.

Two presets are provided: a 9x9 image whose center 5x5 block carries a
positive signal and whose four corners carry a negative one (a toy of
clustered disease features plus scattered preprocessing artifacts), and a
flat 80-coordinate vector with four +2 and four -2 entries for support
recovery studies with D = I.

Randomness comes from numpy's PCG64 Generator.  A SimSpec seed is split
with SeedSequence into independent child streams (design matrix first,
labels second), so the design is reproducible independently of which
label model is drawn from it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit


@dataclass(frozen=True)
class GridSignal:
    dims: tuple
    beta_star: np.ndarray
    lesion_set: np.ndarray
    bias_set: np.ndarray


@dataclass(frozen=True)
class SimSpec:
    """Sampling plan: N samples of p standard-normal features plus labels.

    label_model "logit" draws y = +1 with probability sigmoid(<x, beta*>);
    "linear" sets y = X beta* + noise_sigma * eps.
    """

    N: int
    p: int
    seed: int
    label_model: str = "logit"
    noise_sigma: float = 1.0

    def __post_init__(self):
        if self.N < 1 or self.p < 1:
            raise ValueError("N and p must be >= 1")
        if self.label_model not in ("logit", "linear"):
            raise ValueError(f"unknown label model {self.label_model!r}")

    def streams(self):
        design_seed, label_seed = np.random.SeedSequence(self.seed).spawn(2)
        return np.random.default_rng(design_seed), np.random.default_rng(label_seed)


def preset_grid_signal() -> GridSignal:
    """9x9 grid: centered 5x5 block = +3, the four corners = -3, else 0."""
    dims = (9, 9)
    beta = np.zeros(dims)
    beta[2:7, 2:7] = 3.0
    corners = [(0, 0), (0, 8), (8, 0), (8, 8)]
    for r, c in corners:
        beta[r, c] = -3.0
    flat = beta.ravel()
    return GridSignal(
        dims=dims,
        beta_star=flat,
        lesion_set=np.flatnonzero(flat > 0),
        bias_set=np.flatnonzero(flat < 0),
    )


def preset_table1_signal() -> np.ndarray:
    """Length-80 signal: +2 on coordinates 0..3, -2 on 4..7, zero elsewhere."""
    beta = np.zeros(80)
    beta[0:4] = 2.0
    beta[4:8] = -2.0
    return beta


def gen_design(spec: SimSpec) -> np.ndarray:
    """N x p matrix of i.i.d. standard normals from the design stream."""
    rng, _ = spec.streams()
    return rng.standard_normal((spec.N, spec.p))


def gen_labels(X, beta_star, spec: SimSpec) -> np.ndarray:
    """Draw labels from the label stream given the design and true signal."""
    X = np.asarray(X, dtype=float)
    beta_star = np.asarray(beta_star, dtype=float)
    if X.shape != (spec.N, spec.p) or beta_star.shape[0] != spec.p:
        raise ValueError("shape mismatch between X, beta_star and spec")
    _, rng = spec.streams()
    mu = X @ beta_star
    if spec.label_model == "logit":
        return np.where(rng.random(spec.N) < expit(mu), 1.0, -1.0)
    return mu + spec.noise_sigma * rng.standard_normal(spec.N)
