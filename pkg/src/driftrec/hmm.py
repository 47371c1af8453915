"""Discrete-observation hidden Markov models over item interaction sequences.

A single global model is learned from a corpus of user sequences and then
used for likelihood scoring, state decoding, and downstream change-point
detection.  All probability computations are scaled or carried out in log
space so that sequences of realistic length (~80 interactions) do not
underflow.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

_ROW_SUM_TOL = 1e-9


@dataclass
class HmmModel:
    """Model parameters: initial distribution, state transitions, emissions.

    pi has shape (h,), trans has shape (h, h) with trans[z, z'] the
    probability of moving from state z to z', and emit has shape (h, m)
    with emit[z, i] the probability of observing item i in state z.
    Instances are treated as immutable once constructed.
    """

    pi: np.ndarray
    trans: np.ndarray
    emit: np.ndarray

    def __post_init__(self):
        self.pi = np.asarray(self.pi, dtype=float)
        self.trans = np.asarray(self.trans, dtype=float)
        self.emit = np.asarray(self.emit, dtype=float)
        h = self.pi.shape[0]
        if self.pi.ndim != 1 or h < 1:
            raise ValueError("pi must be a non-empty 1-D probability vector")
        if self.trans.shape != (h, h):
            raise ValueError(f"trans must have shape ({h}, {h}), got {self.trans.shape}")
        if self.emit.ndim != 2 or self.emit.shape[0] != h or self.emit.shape[1] < 1:
            raise ValueError(f"emit must have shape ({h}, m), got {self.emit.shape}")
        for name, arr in (("pi", self.pi), ("trans", self.trans), ("emit", self.emit)):
            if np.any(arr < 0):
                raise ValueError(f"{name} has negative entries")
        if abs(self.pi.sum() - 1.0) > _ROW_SUM_TOL:
            raise ValueError("pi does not sum to 1")
        for name, arr in (("trans", self.trans), ("emit", self.emit)):
            if np.any(np.abs(arr.sum(axis=1) - 1.0) > _ROW_SUM_TOL):
                raise ValueError(f"{name} has a row that does not sum to 1")
        if np.any(self.emit.sum(axis=1) == 0):
            raise ValueError("emit has an identically zero row")

    @property
    def num_states(self) -> int:
        return self.pi.shape[0]

    @property
    def num_items(self) -> int:
        return self.emit.shape[1]


@dataclass
class InteractionSequence:
    """One user's time-ordered item indices, with optional known change index.

    truth_change, when present, is the index of the first item after the
    change, so it splits items into items[:truth_change] and
    items[truth_change:].
    """

    user_id: str
    items: np.ndarray
    truth_change: int | None = None

    def __post_init__(self):
        self.items = np.asarray(self.items, dtype=np.int64)
        if self.items.ndim != 1 or len(self.items) < 1:
            raise ValueError("items must be a non-empty 1-D index array")
        if np.any(self.items < 0):
            raise ValueError("item indices must be nonnegative")
        if self.truth_change is not None:
            t = int(self.truth_change)
            if not 1 <= t < len(self.items):
                raise ValueError(
                    f"truth_change {t} outside [1, {len(self.items)}) for user {self.user_id}"
                )
            self.truth_change = t

    def __len__(self) -> int:
        return len(self.items)


@dataclass
class DecodedPath:
    """Most likely state path and the log joint probability it achieves."""

    states: np.ndarray
    log_joint: float


@dataclass
class TrainConfig:
    """Baum-Welch settings: iteration budget, stopping rule, init seed, smoothing."""

    max_iters: int = 100
    log_lik_tol: float = 1e-5
    seed: int = 0
    emission_floor: float = 1e-6

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.log_lik_tol < 0:
            raise ValueError("log_lik_tol must be >= 0")
        if self.emission_floor <= 0:
            raise ValueError("emission_floor must be > 0")


def _check_items(model: HmmModel, seq: InteractionSequence) -> np.ndarray:
    items = seq.items
    if items.max(initial=-1) >= model.num_items:
        raise ValueError(
            f"sequence {seq.user_id!r} contains item index {int(items.max())} "
            f">= model item count {model.num_items}"
        )
    return items


def forward_log_likelihood(model: HmmModel, seq: InteractionSequence) -> float:
    """Log probability of the observed sequence under the model.

    Uses the scaled forward recursion; returns -inf if the sequence has
    zero probability (an impossible observation under the model).
    """
    items = _check_items(model, seq)
    alpha = model.pi * model.emit[:, items[0]]
    total = 0.0
    c = alpha.sum()
    if c == 0.0:
        return float("-inf")
    alpha = alpha / c
    total += np.log(c)
    for t in range(1, len(items)):
        alpha = (alpha @ model.trans) * model.emit[:, items[t]]
        c = alpha.sum()
        if c == 0.0:
            return float("-inf")
        alpha = alpha / c
        total += np.log(c)
    return float(total)


def viterbi_decode(model: HmmModel, seq: InteractionSequence) -> DecodedPath:
    """Most likely hidden state path for the observed sequence.

    Ties are broken toward the lowest state index, both in the per-step
    backpointers and in the final state, so decoding is deterministic.
    Raises ValueError if every path has probability zero.
    """
    items = _check_items(model, seq)
    T = len(items)
    h = model.num_states
    with np.errstate(divide="ignore"):
        log_pi = np.log(model.pi)
        log_trans = np.log(model.trans)
        log_emit = np.log(model.emit)

    delta = log_pi + log_emit[:, items[0]]
    back = np.zeros((T, h), dtype=np.int64)
    for t in range(1, T):
        # scores[i, j]: best log prob ending in j after transitioning from i
        scores = delta[:, None] + log_trans
        back[t] = np.argmax(scores, axis=0)
        delta = scores[back[t], np.arange(h)] + log_emit[:, items[t]]

    last = int(np.argmax(delta))
    log_joint = float(delta[last])
    if log_joint == float("-inf"):
        raise ValueError("sequence inconsistent with model")
    states = np.zeros(T, dtype=np.int64)
    states[T - 1] = last
    for t in range(T - 1, 0, -1):
        states[t - 1] = back[t, states[t]]
    return DecodedPath(states=states, log_joint=log_joint)


def _init_params(corpus, h, m, cfg):
    """Seeded starting point: uniform pi, near-uniform transitions, and
    per-state emission prototypes taken from short windows of the corpus.

    Random contiguous windows tend to be dominated by one latent regime, so
    seeding each state from a different window gives EM clearly separated
    emission profiles.  Candidates are drawn at random and thinned by
    farthest-point selection, which keeps the prototypes mutually distant;
    without this, near-identical starting states sit on a symmetric saddle
    that the likelihood climb escapes only very slowly, if at all.  Global
    item frequencies plus Dirichlet noise are blended in so every item
    starts with positive probability in every state.
    """
    rng = np.random.default_rng(cfg.seed)
    pi = np.full(h, 1.0 / h)
    trans = np.full((h, h), 1.0 / h) + 0.25 * rng.dirichlet(np.ones(h), size=h)
    trans /= trans.sum(axis=1, keepdims=True)
    freq = np.zeros(m)
    for seq in corpus:
        np.add.at(freq, seq.items, 1.0)
    freq /= freq.sum()
    n_cand = max(8, 4 * h)
    cands = np.zeros((n_cand, m))
    for c in range(n_cand):
        items = corpus[int(rng.integers(len(corpus)))].items
        w = min(10, len(items))
        r = int(rng.integers(0, len(items) - w + 1))
        np.add.at(cands[c], items[r : r + w], 1.0)
        cands[c] /= cands[c].sum()
    chosen = [0]
    while len(chosen) < h:
        dist = np.linalg.norm(cands[:, None, :] - cands[chosen][None, :, :], axis=2)
        nearest = dist.min(axis=1)
        nearest[chosen] = -np.inf
        chosen.append(int(np.argmax(nearest)))
    emit = cands[chosen] + 0.5 * freq[None, :] + 0.1 * rng.dirichlet(np.ones(m), size=h)
    emit /= emit.sum(axis=1, keepdims=True)
    return pi, trans, emit


def _pack_corpus(corpus, m):
    lengths = np.array([len(seq) for seq in corpus], dtype=np.int64)
    t_max = int(lengths.max())
    obs = np.zeros((len(corpus), t_max), dtype=np.int64)
    for i, seq in enumerate(corpus):
        if seq.items.max(initial=-1) >= m:
            raise ValueError(
                f"sequence {seq.user_id!r} contains item index >= num_items {m}"
            )
        obs[i, : lengths[i]] = seq.items
    return obs, lengths


def baum_welch_train(
    corpus: list[InteractionSequence],
    h: int,
    cfg: TrainConfig | None = None,
    num_items: int | None = None,
    return_history: bool = False,
):
    """Learn model parameters from a corpus by expectation-maximization.

    The E-step runs the scaled forward-backward recursions batched across
    all sequences (padded to the longest length and masked), with sums
    accumulated in a fixed order so training is bit-reproducible.  The
    returned corpus log-likelihood history is non-decreasing up to
    floating-point slack; a small emission pseudo-count keeps every
    emission probability strictly positive.

    With return_history=True, returns (model, per-iteration log-likelihoods).
    """
    if not corpus:
        raise ValueError("corpus must not be empty")
    if h < 1:
        raise ValueError("h must be >= 1")
    cfg = cfg or TrainConfig()
    m = num_items if num_items is not None else int(max(seq.items.max() for seq in corpus)) + 1
    obs, lengths = _pack_corpus(corpus, m)
    n, t_max = obs.shape
    pi, trans, emit = _init_params(corpus, h, m, cfg)
    floor = cfg.emission_floor / m

    valid = np.arange(t_max)[None, :] < lengths[:, None]  # (n, t_max)
    history: list[float] = []
    for _ in range(cfg.max_iters):
        # forward pass, scaled per step; padded steps are frozen with scale 1
        alpha = np.zeros((t_max, n, h))
        scale = np.ones((t_max, n))
        a = pi[None, :] * emit[:, obs[:, 0]].T
        c = a.sum(axis=1)
        c[c == 0] = np.finfo(float).tiny
        alpha[0] = a / c[:, None]
        scale[0] = c
        for t in range(1, t_max):
            live = valid[:, t]
            a = (alpha[t - 1] @ trans) * emit[:, obs[:, t]].T
            c = a.sum(axis=1)
            c[c == 0] = np.finfo(float).tiny
            alpha[t] = np.where(live[:, None], a / c[:, None], alpha[t - 1])
            scale[t] = np.where(live, c, 1.0)
        log_lik = float(np.log(scale).sum())
        history.append(log_lik)

        # backward pass with the same scaling constants
        beta = np.zeros((t_max, n, h))
        beta[t_max - 1] = np.where(
            (lengths - 1 == t_max - 1)[:, None], 1.0 / scale[t_max - 1][:, None], 0.0
        )
        for t in range(t_max - 2, -1, -1):
            tmp = emit[:, obs[:, t + 1]].T * beta[t + 1]
            b = (tmp @ trans.T) / scale[t][:, None]
            is_last = lengths - 1 == t
            beta[t] = np.where(is_last[:, None], 1.0 / scale[t][:, None], b)
            beta[t][~valid[:, t]] = 0.0

        # accumulate expected counts in fixed sequence-major order
        gamma0 = alpha[0] * beta[0] * scale[0][:, None]
        pi_new = gamma0.sum(axis=0)
        trans_num = np.zeros((h, h))
        emit_num = np.zeros((m, h))
        emit_den = np.zeros(h)
        for t in range(t_max):
            live = valid[:, t]
            gamma = alpha[t] * beta[t] * scale[t][:, None]
            gamma[~live] = 0.0
            np.add.at(emit_num, obs[live, t], gamma[live])
            emit_den += gamma.sum(axis=0)
            if t < t_max - 1:
                mid = valid[:, t + 1]
                tmp = emit[:, obs[:, t + 1]].T * beta[t + 1]
                tmp[~mid] = 0.0
                masked_alpha = np.where(mid[:, None], alpha[t], 0.0)
                trans_num += trans * (masked_alpha.T @ tmp)

        pi = pi_new / pi_new.sum()
        # row sums of the expected transition counts are the state occupancies
        # at steps with a successor; rows with no evidence keep their values
        trans_den = trans_num.sum(axis=1)
        safe = trans_den > 0
        trans = np.where(
            safe[:, None], trans_num / np.where(safe, trans_den, 1.0)[:, None], trans
        )
        trans /= trans.sum(axis=1, keepdims=True)
        emit = (emit_num.T + floor) / (emit_den + floor * m)[:, None]
        emit /= emit.sum(axis=1, keepdims=True)

        if len(history) >= 2:
            prev = history[-2]
            if (history[-1] - prev) / max(1.0, abs(prev)) < cfg.log_lik_tol:
                break

    model = HmmModel(pi=pi, trans=trans, emit=emit)
    if return_history:
        return model, history
    return model


def total_log_likelihood(model: HmmModel, corpus: list[InteractionSequence]) -> float:
    """Corpus log-likelihood, summed in corpus order."""
    return sum(forward_log_likelihood(model, seq) for seq in corpus)


def save_model(
    path: str | Path,
    model: HmmModel,
    train_config: TrainConfig | None = None,
    meta: dict | None = None,
) -> None:
    """Write the model (and the training settings that produced it) as JSON.

    Floats are serialized with Python's shortest round-trip representation,
    so loading reproduces the parameter arrays bit-exactly.  meta may carry
    provenance (run seed, config hash); it is stored but not interpreted.
    """
    payload = {
        "format": "driftrec-hmm-v1",
        "num_states": model.num_states,
        "num_items": model.num_items,
        "pi": model.pi.tolist(),
        "trans": model.trans.tolist(),
        "emit": model.emit.tolist(),
        "train_config": None
        if train_config is None
        else {
            "max_iters": train_config.max_iters,
            "log_lik_tol": train_config.log_lik_tol,
            "seed": train_config.seed,
            "emission_floor": train_config.emission_floor,
        },
        "meta": meta or {},
    }
    Path(path).write_text(json.dumps(payload, indent=1))


def load_model(path: str | Path) -> tuple[HmmModel, TrainConfig | None]:
    payload = json.loads(Path(path).read_text())
    if payload.get("format") != "driftrec-hmm-v1":
        raise ValueError(f"{path}: not a driftrec HMM file")
    model = HmmModel(
        pi=np.array(payload["pi"], dtype=float),
        trans=np.array(payload["trans"], dtype=float),
        emit=np.array(payload["emit"], dtype=float),
    )
    cfg = payload.get("train_config")
    train_config = None if cfg is None else TrainConfig(**cfg)
    return model, train_config
