"""Playlist corpus ingestion and the mixed-playlist benchmark.

A corpus is read either from a one-playlist-per-line text file or from a
directory of JSON slice files in the public million-playlist layout.
Benchmark sequences splice a random-length prefix of one playlist onto a
random-length prefix of another, so the splice index is a known ground
truth change point, and the final ten items of the second window are held
out as ranking test data.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .hmm import InteractionSequence

HOLDOUT_SIZE = 10


@dataclass
class CorpusStats:
    num_playlists: int
    num_items: int
    pair_count: int
    sparsity: float
    mean_length: float


@dataclass
class PlaylistCorpus:
    """Sampled playlists as contiguous item indices plus the vocabulary."""

    playlists: list[np.ndarray]
    item_vocab: dict[str, int]
    item_keys: list[str]
    stats: CorpusStats


@dataclass
class MixedSequence:
    """One synthesized two-taste sequence with known change point.

    truth_change is the length of the first playlist's window: the index
    of the first item that came from the second playlist.  holdout keeps
    the last ten items of the second window, in order, removed from items.
    """

    user_id: str
    items: np.ndarray
    truth_change: int
    source_ids: tuple[int, int]
    holdout: np.ndarray

    def __post_init__(self):
        self.items = np.asarray(self.items, dtype=np.int64)
        self.holdout = np.asarray(self.holdout, dtype=np.int64)
        if self.truth_change < 1:
            raise ValueError("truth_change must be >= 1")
        if len(self.holdout) != HOLDOUT_SIZE:
            raise ValueError(f"holdout must hold exactly {HOLDOUT_SIZE} items")


def _read_line_format(path: Path) -> list[list[str]]:
    playlists = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            try:
                keys = line.split()
            except Exception as exc:  # pragma: no cover - split cannot fail on str
                raise ValueError(f"{path}:{lineno}: unreadable line") from exc
            if keys:
                playlists.append(keys)
    return playlists


def _read_slice_directory(path: Path) -> list[list[str]]:
    files = sorted(path.glob("*.json"))
    if not files:
        raise ValueError(f"{path}: no .json slice files found")
    playlists = []
    for file in files:
        try:
            payload = json.loads(file.read_text(encoding="utf-8"))
            for playlist in payload["playlists"]:
                keys = [track["album_uri"] for track in playlist["tracks"]]
                if keys:
                    playlists.append(keys)
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ValueError(f"{file}: malformed playlist slice: {exc}") from exc
    return playlists


def load_corpus(
    path: str | Path, min_len: int = 1, sample_size: int | None = None, seed: int = 0
) -> PlaylistCorpus:
    """Read, filter, and sample playlists, then index their items.

    Playlists shorter than min_len are dropped before sampling.  Sampling
    is uniform without replacement and keeps file order; the vocabulary is
    built from the sampled playlists only, in first-appearance order.
    Asking for more playlists than exist keeps them all with a warning.
    """
    path = Path(path)
    if min_len < 1:
        raise ValueError("min_len must be >= 1")
    raw = _read_slice_directory(path) if path.is_dir() else _read_line_format(path)
    kept = [keys for keys in raw if len(keys) >= min_len]
    if not kept:
        raise ValueError(f"{path}: no playlist of length >= {min_len}")
    if sample_size is None or sample_size > len(kept):
        if sample_size is not None:
            warnings.warn(
                f"requested {sample_size} playlists but only {len(kept)} qualify; keeping all"
            )
        chosen = range(len(kept))
    else:
        rng = np.random.default_rng(seed)
        chosen = np.sort(rng.choice(len(kept), size=sample_size, replace=False))
    sample = [kept[i] for i in chosen]

    vocab: dict[str, int] = {}
    keys_in_order: list[str] = []
    playlists = []
    for pl in sample:
        row = np.empty(len(pl), dtype=np.int64)
        for pos, key in enumerate(pl):
            if key not in vocab:
                vocab[key] = len(vocab)
                keys_in_order.append(key)
            row[pos] = vocab[key]
        playlists.append(row)

    n, m = len(playlists), len(vocab)
    pair_count = int(sum(len(np.unique(pl)) for pl in playlists))
    stats = CorpusStats(
        num_playlists=n,
        num_items=m,
        pair_count=pair_count,
        sparsity=1.0 - pair_count / (n * m),
        mean_length=float(np.mean([len(pl) for pl in playlists])),
    )
    return PlaylistCorpus(
        playlists=playlists, item_vocab=vocab, item_keys=keys_in_order, stats=stats
    )


def synthesize_mixed(
    corpus: PlaylistCorpus,
    count: int,
    seed: int = 0,
    min_window: int = 10,
    pool_split: int | None = None,
) -> list[MixedSequence]:
    """Splice prefix windows of random playlist pairs into drift sequences.

    For each output: two distinct playlists are drawn uniformly; window
    sizes are w1 uniform on [min_window, |p1|] and w2 uniform on
    [min_window + 10, |p2|]; the observed sequence is the first w1 items
    of p1 followed by the first w2 - 10 items of p2, the change point is
    w1, and the last 10 items of the p2 window are held out.

    With pool_split set, the first playlist comes from corpus positions
    [0, pool_split) and the second from [pool_split, end), so a corpus
    laid out as two blocks yields only cross-block pairs.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if min_window < 1:
        raise ValueError("min_window must be >= 1")
    lengths = np.array([len(pl) for pl in corpus.playlists])
    first_ok = np.flatnonzero(lengths >= min_window)
    second_ok = np.flatnonzero(lengths >= min_window + HOLDOUT_SIZE)
    if pool_split is not None:
        if not 1 <= pool_split < len(corpus.playlists):
            raise ValueError("pool_split must split the corpus into two nonempty blocks")
        first_ok = first_ok[first_ok < pool_split]
        second_ok = second_ok[second_ok >= pool_split]
    if len(first_ok) < 1 or len(second_ok) < 1 or (len(first_ok) == 1 and len(second_ok) == 1 and first_ok[0] == second_ok[0]):
        raise ValueError(
            f"need one playlist of length >= {min_window} and a distinct one of "
            f"length >= {min_window + HOLDOUT_SIZE}"
        )
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        while True:
            p1 = int(first_ok[rng.integers(len(first_ok))])
            p2 = int(second_ok[rng.integers(len(second_ok))])
            if p1 != p2:
                break
        w1 = int(rng.integers(min_window, lengths[p1] + 1))
        w2 = int(rng.integers(min_window + HOLDOUT_SIZE, lengths[p2] + 1))
        window2 = corpus.playlists[p2][:w2]
        out.append(
            MixedSequence(
                user_id=f"u{i:05d}",
                items=np.concatenate([corpus.playlists[p1][:w1], window2[:-HOLDOUT_SIZE]]),
                truth_change=w1,
                source_ids=(p1, p2),
                holdout=window2[-HOLDOUT_SIZE:].copy(),
            )
        )
    return out


def to_interaction_sequences(
    mixed: list[MixedSequence],
) -> tuple[list[InteractionSequence], dict[str, np.ndarray]]:
    """Repackage benchmark records for the sequence models, losslessly."""
    sequences = [
        InteractionSequence(user_id=mx.user_id, items=mx.items, truth_change=mx.truth_change)
        for mx in mixed
    ]
    holdout = {mx.user_id: mx.holdout for mx in mixed}
    return sequences, holdout


def save_benchmark(path: str | Path, mixed: list[MixedSequence], meta: dict) -> None:
    """Write the benchmark as columnar text with a metadata header.

    The header carries the provenance key=value pairs (seed, parameters,
    config hash); records are one sequence per line.  Integer items make
    the round trip bit-exact.
    """
    lines = [
        "# driftrec-benchmark-v1 "
        + " ".join(f"{key}={meta[key]}" for key in sorted(meta))
    ]
    for mx in mixed:
        lines.append(
            "\t".join(
                [
                    mx.user_id,
                    str(mx.truth_change),
                    f"{mx.source_ids[0]},{mx.source_ids[1]}",
                    " ".join(str(int(i)) for i in mx.items),
                    " ".join(str(int(i)) for i in mx.holdout),
                ]
            )
        )
    Path(path).write_text("\n".join(lines) + "\n")


def load_benchmark(path: str | Path) -> tuple[list[MixedSequence], dict]:
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith("# driftrec-benchmark-v1"):
        raise ValueError(f"{path}: not a driftrec benchmark file")
    meta = {}
    for token in lines[0].split()[2:]:
        key, _, value = token.partition("=")
        meta[key] = value
    mixed = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            user_id, truth, sources, observed, holdout = line.split("\t")
            s1, _, s2 = sources.partition(",")
            mixed.append(
                MixedSequence(
                    user_id=user_id,
                    items=np.array(observed.split(), dtype=np.int64),
                    truth_change=int(truth),
                    source_ids=(int(s1), int(s2)),
                    holdout=np.array(holdout.split(), dtype=np.int64),
                )
            )
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: malformed benchmark record") from exc
    return mixed, meta
