"""Latent-factor models over binary user-item incidence matrices.

Two fitters share a factor-pair representation: multiplicative-update
nonnegative matrix factorization, and pairwise-ranking matrix
factorization trained by stochastic gradient descent on sampled
(user, positive, negative) triples.  Both are deterministic for a fixed
seed and run single-threaded.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .changepoint import SegmentedMatrix

_EPS = 1e-12


@dataclass
class FactorizationConfig:
    """Shared settings for both fitters.

    max_iters counts full update sweeps for multiplicative updates and
    epochs for pairwise training; learning_rate and regularization apply
    to pairwise training only.
    """

    d: int = 40
    max_iters: int = 200
    seed: int = 0
    learning_rate: float = 0.05
    regularization: float = 0.01
    convergence_tol: float = 1e-5

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.regularization < 0:
            raise ValueError("regularization must be >= 0")
        if self.convergence_tol < 0:
            raise ValueError("convergence_tol must be >= 0")


@dataclass
class FactorPair:
    """Row factors p (one row per matrix row) and item factors q."""

    p: np.ndarray
    q: np.ndarray
    d: int

    def __post_init__(self):
        self.p = np.asarray(self.p, dtype=float)
        self.q = np.asarray(self.q, dtype=float)
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if self.p.ndim != 2 or self.p.shape[1] != self.d:
            raise ValueError(f"p must have shape (n, {self.d})")
        if self.q.ndim != 2 or self.q.shape[1] != self.d:
            raise ValueError(f"q must have shape (m, {self.d})")


def _as_matrix(M) -> np.ndarray:
    if isinstance(M, SegmentedMatrix):
        M = M.rows
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.size == 0:
        raise ValueError("matrix must be 2-D and non-empty")
    return M


def frobenius_objective(M: np.ndarray, pair: FactorPair) -> float:
    """Squared reconstruction error of the factor pair."""
    diff = M - pair.p @ pair.q.T
    return float(np.sum(diff * diff))


def nmf_fit(M, cfg: FactorizationConfig | None = None, return_history: bool = False):
    """Nonnegative factorization by multiplicative updates.

    Each sweep rescales p then q by the ratio of the reconstruction
    gradient terms, which keeps every entry exactly nonnegative and never
    increases the squared error.  Stops after max_iters sweeps or when the
    relative objective improvement drops below convergence_tol.

    With return_history=True, returns (pair, objective per sweep) where
    the first entry is the starting objective.
    """
    cfg = cfg or FactorizationConfig()
    M = _as_matrix(M)
    if not np.any(M):
        raise ValueError("matrix is all zeros")
    n, m = M.shape
    rng = np.random.default_rng(cfg.seed)
    scale = np.sqrt(M.mean() / cfg.d)
    p = rng.uniform(0.0, 1.0, size=(n, cfg.d)) * scale
    q = rng.uniform(0.0, 1.0, size=(m, cfg.d)) * scale

    history = [frobenius_objective(M, FactorPair(p=p, q=q, d=cfg.d))]
    for _ in range(cfg.max_iters):
        p *= (M @ q) / (p @ (q.T @ q) + _EPS)
        q *= (M.T @ p) / (q @ (p.T @ p) + _EPS)
        obj = frobenius_objective(M, FactorPair(p=p, q=q, d=cfg.d))
        history.append(obj)
        prev = history[-2]
        if prev - obj < cfg.convergence_tol * max(1.0, prev):
            break

    pair = FactorPair(p=p, q=q, d=cfg.d)
    if return_history:
        return pair, history
    return pair


def sigmoid(x: float) -> float:
    """Numerically stable logistic function."""
    return float(np.exp(-np.logaddexp(0.0, -x)))


def bpr_triple_loss(p_u, q_i, q_j, regularization: float) -> float:
    """Pairwise ranking loss of one (user, preferred, other) triple."""
    x = float(p_u @ (q_i - q_j))
    penalty = 0.5 * regularization * (p_u @ p_u + q_i @ q_i + q_j @ q_j)
    return float(np.logaddexp(0.0, -x) + penalty)


def bpr_triple_grad(p_u, q_i, q_j, regularization: float):
    """Gradient of bpr_triple_loss with respect to (p_u, q_i, q_j)."""
    x = float(p_u @ (q_i - q_j))
    s = sigmoid(-x)
    g_p = -s * (q_i - q_j) + regularization * p_u
    g_i = -s * p_u + regularization * q_i
    g_j = s * p_u + regularization * q_j
    return g_p, g_i, g_j


def bpr_fit(M, cfg: FactorizationConfig | None = None) -> FactorPair:
    """Pairwise-ranking factorization trained by stochastic gradient descent.

    Each epoch draws one triple per observed positive: a uniform eligible
    user, one of their positives, and a uniformly resampled item outside
    their positive set.  Users lacking either a positive or a negative
    item cannot form a triple and are skipped, with one warning giving the
    count.  Sampling and update order are fixed by cfg.seed.
    """
    cfg = cfg or FactorizationConfig()
    M = _as_matrix(M)
    n, m = M.shape
    positives = [np.flatnonzero(M[u] > 0) for u in range(n)]
    eligible = np.array(
        [u for u in range(n) if 0 < len(positives[u]) < m], dtype=np.int64
    )
    skipped = n - len(eligible)
    if skipped:
        warnings.warn(f"skipped {skipped} users lacking a positive/negative item pair")
    if len(eligible) == 0:
        raise ValueError("no user has both a positive and a negative item")
    pos_sets = {u: set(positives[u].tolist()) for u in eligible.tolist()}

    rng = np.random.default_rng(cfg.seed)
    p = rng.normal(0.0, 0.1, size=(n, cfg.d))
    q = rng.normal(0.0, 0.1, size=(m, cfg.d))
    triples_per_epoch = int(sum(len(positives[u]) for u in eligible))

    for _ in range(cfg.max_iters):
        users = eligible[rng.integers(0, len(eligible), size=triples_per_epoch)]
        pos_pick = rng.random(triples_per_epoch)
        items = np.array(
            [positives[u][int(r * len(positives[u]))] for u, r in zip(users, pos_pick)],
            dtype=np.int64,
        )
        negs = rng.integers(0, m, size=triples_per_epoch)
        bad = np.array([int(j) in pos_sets[int(u)] for u, j in zip(users, negs)])
        while bad.any():
            negs[bad] = rng.integers(0, m, size=int(bad.sum()))
            bad[bad] = np.array(
                [int(j) in pos_sets[int(u)] for u, j in zip(users[bad], negs[bad])]
            )
        for u, i, j in zip(users, items, negs):
            g_p, g_i, g_j = bpr_triple_grad(p[u], q[i], q[j], cfg.regularization)
            p[u] -= cfg.learning_rate * g_p
            q[i] -= cfg.learning_rate * g_i
            q[j] -= cfg.learning_rate * g_j

    return FactorPair(p=p, q=q, d=cfg.d)


def save_factors(path: str | Path, pair: FactorPair, meta: dict | None = None) -> None:
    """Write a factor pair as JSON with exact float round-trip."""
    payload = {
        "format": "driftrec-factors-v1",
        "d": pair.d,
        "p": pair.p.tolist(),
        "q": pair.q.tolist(),
        "meta": meta or {},
    }
    Path(path).write_text(json.dumps(payload, indent=1))


def load_factors(path: str | Path) -> tuple[FactorPair, dict]:
    payload = json.loads(Path(path).read_text())
    if payload.get("format") != "driftrec-factors-v1":
        raise ValueError(f"{path}: not a driftrec factor file")
    pair = FactorPair(
        p=np.array(payload["p"], dtype=float),
        q=np.array(payload["q"], dtype=float),
        d=int(payload["d"]),
    )
    return pair, payload.get("meta", {})
