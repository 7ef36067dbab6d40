"""Triple files, vocabularies, reverse-relation augmentation, and negative sampling.

Triple files are UTF-8 text, one fact per line, three tab-separated fields
(head, relation, tail), LF line endings, no header. Classification datasets
may carry a fourth field "1"/"-1" labeling the fact true or false.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import DataError, SamplingExhausted

REVERSE_SUFFIX = "_rev"


class Triple(NamedTuple):
    head: int
    rel: int
    tail: int


class Vocab:
    """Bijective name/index maps for entities and relations, first-seen order."""

    def __init__(self):
        self.ent2id: dict[str, int] = {}
        self.id2ent: list[str] = []
        self.rel2id: dict[str, int] = {}
        self.id2rel: list[str] = []

    @property
    def n_entities(self) -> int:
        return len(self.id2ent)

    @property
    def n_relations(self) -> int:
        return len(self.id2rel)

    def add_entity(self, name: str) -> int:
        idx = self.ent2id.get(name)
        if idx is None:
            idx = self.ent2id[name] = len(self.id2ent)
            self.id2ent.append(name)
        return idx

    def add_relation(self, name: str) -> int:
        idx = self.rel2id.get(name)
        if idx is None:
            idx = self.rel2id[name] = len(self.id2rel)
            self.id2rel.append(name)
        return idx

    def encode(self, h: str, r: str, t: str) -> Triple:
        return Triple(self.ent2id[h], self.rel2id[r], self.ent2id[t])

    def decode(self, triple: Triple) -> tuple[str, str, str]:
        return (self.id2ent[triple.head], self.id2rel[triple.rel], self.id2ent[triple.tail])

    def export_entities(self, path):
        _write_index_file(path, self.id2ent)

    def export_relations(self, path):
        _write_index_file(path, self.id2rel)


def _write_index_file(path, names):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for idx, name in enumerate(names):
            fh.write(f"{idx}\t{name}\n")


@dataclass
class KnowledgeGraph:
    vocab: Vocab
    train: list[Triple]
    valid: list[Triple]
    test: list[Triple]
    truth_index: set[tuple[int, int, int]]
    augmented: bool = False
    n_base_relations: int = 0
    _train_arr: np.ndarray | None = field(default=None, repr=False)
    _known_tails: dict | None = field(default=None, repr=False)
    _train_entities: set | None = field(default=None, repr=False)

    @property
    def n_entities(self) -> int:
        return self.vocab.n_entities

    @property
    def n_relations(self) -> int:
        return self.vocab.n_relations

    def train_array(self) -> np.ndarray:
        if self._train_arr is None:
            self._train_arr = np.asarray(self.train, dtype=np.int64).reshape(-1, 3)
        return self._train_arr

    def known_tails(self) -> dict[tuple[int, int], np.ndarray]:
        """All truth-index tails grouped by (head, relation), for filtered ranking."""
        if self._known_tails is None:
            groups: dict[tuple[int, int], list[int]] = defaultdict(list)
            for h, r, t in self.truth_index:
                groups[(h, r)].append(t)
            self._known_tails = {
                key: np.asarray(sorted(tails), dtype=np.int64)
                for key, tails in groups.items()
            }
        return self._known_tails

    def train_entities(self) -> set[int]:
        if self._train_entities is None:
            ents = set()
            for h, _, t in self.train:
                ents.add(h)
                ents.add(t)
            self._train_entities = ents
        return self._train_entities


def load_triples(path) -> list[tuple[str, str, str]]:
    """Name-level triples in file order; empty lines are ignored."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"triple file not found: {path}")
    triples = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise DataError(
                    f"{path}:{lineno}: expected 3 tab-separated fields, got {len(fields)}"
                )
            triples.append(tuple(fields))
    return triples


def load_labeled_triples(path) -> tuple[list[tuple[str, str, str]], list[int]]:
    """Triples plus +1/-1 labels; a missing fourth field means positive."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"triple file not found: {path}")
    triples, labels = [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) == 3:
                label = 1
            elif len(fields) == 4:
                if fields[3] not in ("1", "-1"):
                    raise DataError(f"{path}:{lineno}: label must be 1 or -1, got {fields[3]!r}")
                label = int(fields[3])
            else:
                raise DataError(
                    f"{path}:{lineno}: expected 3 or 4 tab-separated fields, got {len(fields)}"
                )
            triples.append((fields[0], fields[1], fields[2]))
            labels.append(label)
    return triples, labels


def build_graph(train, valid, test) -> KnowledgeGraph:
    """Index name-level splits; indices are assigned in first-seen order.

    A triple occurring in more than one split is rejected outright: silent
    dedup would leak evaluation facts into training.
    """
    vocab = Vocab()
    splits: list[list[Triple]] = []
    seen: dict[tuple[int, int, int], str] = {}
    for split_name, raw in (("train", train), ("valid", valid), ("test", test)):
        encoded = []
        for h, r, t in raw:
            triple = Triple(vocab.add_entity(h), vocab.add_relation(r), vocab.add_entity(t))
            prior = seen.get(triple)
            if prior is not None and prior != split_name:
                raise DataError(
                    f"triple ({h}, {r}, {t}) appears in both {prior} and {split_name}"
                )
            seen[triple] = split_name
            encoded.append(triple)
        splits.append(encoded)
    truth = set(seen)
    return KnowledgeGraph(
        vocab=vocab,
        train=splits[0],
        valid=splits[1],
        test=splits[2],
        truth_index=truth,
        n_base_relations=vocab.n_relations,
    )


def augment_reverse(kg: KnowledgeGraph) -> KnowledgeGraph:
    """Add (t, r_rev, h) for every (h, r, t).

    Reverse triples join the train and valid splits, doubling both. The
    test split keeps only original-direction triples; head prediction is
    later expressed as a tail query under the reverse relation. The truth
    index covers both directions of every split so filtered ranking and
    negative sampling see reversed facts.
    """
    if kg.augmented:
        raise DataError("graph is already reverse-augmented")
    vocab = kg.vocab
    m = vocab.n_relations
    for rel in list(vocab.id2rel):
        vocab.add_relation(rel + REVERSE_SUFFIX)

    def reverse(triple: Triple) -> Triple:
        return Triple(triple.tail, triple.rel + m, triple.head)

    train = kg.train + [reverse(t) for t in kg.train]
    valid = kg.valid + [reverse(t) for t in kg.valid]
    truth = set(kg.truth_index)
    for split in (kg.train, kg.valid, kg.test):
        truth.update(reverse(t) for t in split)
    return KnowledgeGraph(
        vocab=vocab,
        train=train,
        valid=valid,
        test=list(kg.test),
        truth_index=truth,
        augmented=True,
        n_base_relations=m,
    )


@dataclass
class BernStats:
    """Per-relation corruption statistics.

    tph: mean distinct tails per head; hpt: mean distinct heads per tail.
    The head slot of a triple with relation r is corrupted with
    probability tph / (tph + hpt); relations without training triples hit
    the 0.5 fallback.
    """

    tph: dict[int, float]
    hpt: dict[int, float]

    def head_corruption_prob(self, rel: int) -> float:
        tph = self.tph.get(rel)
        if tph is None:
            return 0.5
        hpt = self.hpt[rel]
        return tph / (tph + hpt)


def compute_bern_stats(train: list[Triple]) -> BernStats:
    if not train:
        raise DataError("cannot compute corruption statistics on an empty training split")
    pairs: dict[int, set] = defaultdict(set)
    heads: dict[int, set] = defaultdict(set)
    tails: dict[int, set] = defaultdict(set)
    for h, r, t in train:
        pairs[r].add((h, t))
        heads[r].add(h)
        tails[r].add(t)
    tph = {r: len(pairs[r]) / len(heads[r]) for r in pairs}
    hpt = {r: len(pairs[r]) / len(tails[r]) for r in pairs}
    return BernStats(tph=tph, hpt=hpt)


class NegativeSampler:
    """Corrupt one entity slot of a true triple, avoiding known truths.

    "unif" always corrupts the tail: the training stream is
    reverse-augmented, so head corruption is covered by reversed triples.
    "bern" picks the slot from per-relation statistics. Replacement
    entities are uniform over all entities except the one replaced;
    candidates found in the truth index are resampled up to max_retries
    times before exhaustion is signalled.
    """

    def __init__(self, kg: KnowledgeGraph, mode: str = "unif", max_retries: int = 100):
        if mode not in ("unif", "bern"):
            raise ValueError(f"sampling mode must be 'unif' or 'bern', got {mode!r}")
        if kg.n_entities < 2:
            raise ValueError("negative sampling needs at least 2 entities")
        self.kg = kg
        self.mode = mode
        self.max_retries = max_retries
        self.stats = compute_bern_stats(kg.train) if mode == "bern" else None

    def _draw_excluding(self, rng: np.random.Generator, exclude: int) -> int:
        draw = int(rng.integers(self.kg.n_entities - 1))
        return draw + 1 if draw >= exclude else draw

    def sample(self, triple: Triple, rng: np.random.Generator) -> Triple:
        h, r, t = triple
        corrupt_head = False
        if self.mode == "bern":
            corrupt_head = rng.random() < self.stats.head_corruption_prob(r)
        candidate = triple
        for _ in range(self.max_retries):
            if corrupt_head:
                candidate = Triple(self._draw_excluding(rng, h), r, t)
            else:
                candidate = Triple(h, r, self._draw_excluding(rng, t))
            if candidate not in self.kg.truth_index:
                return candidate
        raise SamplingExhausted(
            f"no non-true corruption of {triple} found in {self.max_retries} tries",
            candidate=candidate,
        )

    def sample_batch(self, triples: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """Corrupt a (B, 3) batch; exhausted rows keep their last candidate."""
        triples = np.asarray(triples, dtype=np.int64)
        bsz = triples.shape[0]
        n = self.kg.n_entities
        if self.mode == "bern":
            probs = np.array(
                [self.stats.head_corruption_prob(r) for r in triples[:, 1]]
            )
            corrupt_head = rng.random(bsz) < probs
        else:
            corrupt_head = np.zeros(bsz, dtype=bool)
        out = triples.copy()
        slot = np.where(corrupt_head, 0, 2)
        pending = np.arange(bsz)
        truth = self.kg.truth_index
        for _ in range(self.max_retries):
            if pending.size == 0:
                break
            draws = rng.integers(n - 1, size=pending.size)
            replacements = draws + (draws >= triples[pending, slot[pending]])
            out[pending, slot[pending]] = replacements
            still = [
                j
                for j, row in enumerate(pending)
                if (out[row, 0], out[row, 1], out[row, 2]) in truth
            ]
            pending = pending[still]
        return out
