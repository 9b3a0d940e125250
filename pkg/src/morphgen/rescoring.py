"""Layered sentence graphs, k-best path search and LM rescoring.

Every token is a layer.  Tokens with a classifier distribution get one
node per class (3 nodes, in class order); the rest get a single node of
probability 1 carrying the token unchanged.  Consecutive layers are
completely connected, so an edge's weight depends only on its head node
and probabilities can live on nodes.

The best path falls out of per-layer argmax; the k-best list comes from
Yen's algorithm run on negated log probabilities (additive, non-negative
costs).  Path scores are order-independent (math.fsum) and ties resolve
to the lexicographically smallest node-index sequence, which makes the
output comparable, path for path, with brute-force enumeration sorted
stably by score.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .errors import DataError
from .tagset import CLASSES

_PROB_TOL = 1e-6


@dataclass(frozen=True)
class GraphNode:
    token_id: int
    class_value: Optional[str]   # None on single-node (pass-through) layers
    probability: float

    @property
    def log_prob(self) -> float:
        return math.log(self.probability)


@dataclass
class SentenceGraph:
    """Layered DAG: one layer per token, 1 or 3 nodes per layer."""

    task: str
    layers: List[List[GraphNode]]

    @property
    def num_layers(self) -> int:
        return len(self.layers)

    def path_count(self) -> int:
        count = 1
        for layer in self.layers:
            count *= len(layer)
        return count

    def path_score(self, choices: Sequence[int]) -> float:
        """Sum of ln node probabilities, independent of summation order."""
        return math.fsum(
            layer[j].log_prob for layer, j in zip(self.layers, choices)
        )


@dataclass
class Path:
    """One node per layer, with the scores attached along the way."""

    choices: tuple                       # node index per layer
    classifier_score: float              # sum of ln node probabilities
    lm_score: Optional[float] = None
    combined_score: Optional[float] = None

    def class_values(self, graph: SentenceGraph) -> List[Optional[str]]:
        return [graph.layers[i][j].class_value for i, j in enumerate(self.choices)]


def build_graph(sentence: Sequence, distributions: Sequence[Optional[np.ndarray]],
                task: str) -> SentenceGraph:
    """Graph for one sentence; ``distributions`` is aligned per token and
    holds a 3-class probability array or None."""
    if len(sentence) != len(distributions):
        raise DataError(
            f"sentence has {len(sentence)} tokens but {len(distributions)} distributions"
        )
    classes = CLASSES[task]
    layers = []
    for token_id, dist in enumerate(distributions):
        if dist is None:
            layers.append([GraphNode(token_id, None, 1.0)])
            continue
        probs = np.asarray(dist, dtype=float)
        if probs.shape != (len(classes),):
            raise DataError(f"token {token_id}: distribution shape {probs.shape}")
        if abs(float(probs.sum()) - 1.0) > _PROB_TOL:
            raise DataError(f"token {token_id}: probabilities sum to {probs.sum()}")
        layers.append([
            GraphNode(token_id, cls, float(p)) for cls, p in zip(classes, probs)
        ])
    return SentenceGraph(task=task, layers=layers)


def best_path(graph: SentenceGraph) -> Path:
    """Per-layer argmax; complete connectivity makes layers independent.
    Ties pick the earlier node, i.e. class order M<F<N / S<P<N."""
    if graph.num_layers == 0:
        raise DataError("empty graph")
    choices = tuple(_argmax_node(layer) for layer in graph.layers)
    return Path(choices=choices, classifier_score=graph.path_score(choices))


def _argmax_node(layer: List[GraphNode]) -> int:
    best, best_p = 0, layer[0].probability
    for j in range(1, len(layer)):
        if layer[j].probability > best_p:
            best, best_p = j, layer[j].probability
    return best


def _best_suffix(graph: SentenceGraph, start_layer: int,
                 banned_start: frozenset) -> Optional[tuple]:
    """Cheapest completion from ``start_layer`` to the last layer with some
    first-layer nodes removed.  Thanks to complete connectivity this is a
    per-layer argmax; per-layer probability ties pick the smaller index,
    which yields the lexicographically smallest minimal path."""
    layers = graph.layers
    first = None
    first_p = -1.0
    for j, node in enumerate(layers[start_layer]):
        if j in banned_start:
            continue
        if node.probability > first_p:
            first, first_p = j, node.probability
    if first is None:
        return None
    rest = tuple(_argmax_node(layer) for layer in layers[start_layer + 1 :])
    return (first,) + rest


def yen_k_best(graph: SentenceGraph, k: int) -> List[Path]:
    """The k highest-probability paths, best first, no duplicates.

    Canonical Yen: walk spur positions along the last accepted path, ban
    the continuations used by accepted paths sharing the root prefix,
    complete with the best allowed suffix, and pool candidates in a heap.
    Stops early when the graph has fewer than k distinct paths.
    """
    if k < 1:
        raise DataError(f"k must be >= 1, got {k}")
    if graph.num_layers == 0:
        raise DataError("empty graph")

    first = best_path(graph)
    accepted: List[tuple] = [first.choices]
    candidates: list = []          # heap of (-score, choices)
    seen = {first.choices}

    while len(accepted) < k:
        prev = accepted[-1]
        # spur_pos == -1 deviates at the very first layer (virtual source)
        for spur_pos in range(-1, graph.num_layers - 1):
            root = prev[: spur_pos + 1]
            banned = {
                path[spur_pos + 1]
                for path in accepted
                if path[: spur_pos + 1] == root
            }
            suffix = _best_suffix(graph, spur_pos + 1, frozenset(banned))
            if suffix is None:
                continue
            candidate = root + suffix
            if candidate in seen:
                continue
            seen.add(candidate)
            heapq.heappush(candidates, (-graph.path_score(candidate), candidate))
        if not candidates:
            break
        _, choices = heapq.heappop(candidates)
        accepted.append(choices)

    return [Path(choices=c, classifier_score=graph.path_score(c)) for c in accepted]


def rescore(paths: List[Path], realized_sentences: Sequence[Sequence[str]],
            lm, lam: float) -> Path:
    """Pick the path maximizing classifier_score + lam * lm_score.

    ``realized_sentences`` holds, per path, the surface tokens its class
    assignment generates.  Ties keep the earlier (better classifier rank)
    path.  lm_score and combined_score are filled in on every path.
    """
    from .ngram_lm import score_sequence

    if not math.isfinite(lam):
        raise DataError(f"lambda must be finite, got {lam}")
    if len(paths) != len(realized_sentences):
        raise DataError(
            f"{len(paths)} paths but {len(realized_sentences)} realized sentences"
        )
    if not paths:
        raise DataError("cannot rescore an empty path list")
    best = None
    for path, tokens in zip(paths, realized_sentences):
        path.lm_score = score_sequence(lm, tokens)
        path.combined_score = path.classifier_score + lam * path.lm_score
        if best is None or path.combined_score > best.combined_score:
            best = path
    return best


def format_nbest(sentence_id: int, paths: List[Path],
                 realized_sentences: Sequence[Sequence[str]]) -> List[str]:
    """n-best lines: ``sentence_id ||| realized text ||| c_score lm_score combined``."""
    lines = []
    for path, tokens in zip(paths, realized_sentences):
        lm = path.lm_score if path.lm_score is not None else float("nan")
        comb = path.combined_score if path.combined_score is not None else float("nan")
        lines.append(
            f"{sentence_id} ||| {' '.join(tokens)} ||| "
            f"{path.classifier_score:.6f} {lm:.6f} {comb:.6f}"
        )
    return lines
