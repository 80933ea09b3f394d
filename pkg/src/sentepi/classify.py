"""Naive Bayes and maximum-entropy classifiers plus the ensemble rule.

Both classifiers consume the same token-count features. The ensemble
lets Naive Bayes decide between positive and negative while the
maximum-entropy model owns the neutral/irrelevant verdicts; on conflict
the maximum-entropy decision is final.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import sparse

from .corpus import LABEL_ORDER, SentimentLabel, TokenVector

logger = logging.getLogger(__name__)

__all__ = [
    "NaiveBayesModel",
    "MaxEntModel",
    "EnsembleModel",
    "train_naive_bayes",
    "train_maxent",
    "ensemble_predict",
    "evaluate_accuracy",
    "save_ensemble",
    "load_ensemble",
]

MODEL_FORMAT_VERSION = 1

LabeledDoc = tuple[TokenVector, SentimentLabel]


@dataclass
class NaiveBayesModel:
    """Multinomial Naive Bayes with add-constant smoothing."""

    labels: tuple[SentimentLabel, ...]
    vocabulary: tuple[str, ...]
    log_priors: np.ndarray  # (K,)
    log_cond: np.ndarray  # (K, V)
    smoothing: float

    def __post_init__(self):
        self._token_index = {t: i for i, t in enumerate(self.vocabulary)}
        priors = np.exp(self.log_priors)
        if abs(priors.sum() - 1.0) > 1e-9:
            raise ValueError("class priors do not sum to 1")
        if self.log_cond.shape[1] > 0:
            cond_sums = np.exp(self.log_cond).sum(axis=1)
            if np.any(np.abs(cond_sums - 1.0) > 1e-9):
                raise ValueError("conditional distributions do not sum to 1")

    def log_scores(self, tv: TokenVector) -> np.ndarray:
        scores = self.log_priors.copy()
        for token, count in tv.counts.items():
            col = self._token_index.get(token)
            if col is not None:  # unseen tokens are ignored
                scores += count * self.log_cond[:, col]
        return scores

    def predict(self, tv: TokenVector) -> SentimentLabel:
        return self.labels[int(np.argmax(self.log_scores(tv)))]


@dataclass
class MaxEntModel:
    """Multinomial logistic regression over token counts."""

    labels: tuple[SentimentLabel, ...]
    vocabulary: tuple[str, ...]
    weights: np.ndarray  # (K, V)
    bias: np.ndarray  # (K,)
    l2: float
    converged: bool
    n_iter: int

    def __post_init__(self):
        self._token_index = {t: i for i, t in enumerate(self.vocabulary)}
        if not np.all(np.isfinite(self.weights)) or not np.all(np.isfinite(self.bias)):
            raise ValueError("non-finite model parameters")

    def scores(self, tv: TokenVector) -> np.ndarray:
        s = self.bias.copy()
        for token, count in tv.counts.items():
            col = self._token_index.get(token)
            if col is not None:  # unseen tokens carry zero weight
                s += count * self.weights[:, col]
        return s

    def predict_proba(self, tv: TokenVector) -> np.ndarray:
        s = self.scores(tv)
        s -= s.max()
        e = np.exp(s)
        return e / e.sum()

    def predict(self, tv: TokenVector) -> SentimentLabel:
        return self.labels[int(np.argmax(self.scores(tv)))]


@dataclass
class EnsembleModel:
    nb: NaiveBayesModel
    maxent: MaxEntModel

    def __post_init__(self):
        if self.nb.labels != self.maxent.labels:
            raise ValueError("sub-models were trained on different label sets")

    def predict(self, tv: TokenVector) -> SentimentLabel:
        return ensemble_predict(self.nb.predict(tv), self.maxent.predict(tv))


def _present_labels(docs: Sequence[LabeledDoc]) -> tuple[SentimentLabel, ...]:
    present = {label for _, label in docs}
    labels = tuple(lab for lab in LABEL_ORDER if lab in present)
    if len(labels) < 2:
        raise ValueError(
            f"training needs at least two classes, got {len(labels)}"
        )
    return labels


def _build_matrix(
    docs: Sequence[LabeledDoc],
    labels: tuple[SentimentLabel, ...],
    vocabulary: tuple[str, ...],
) -> tuple[sparse.csr_matrix, np.ndarray]:
    token_index = {t: i for i, t in enumerate(vocabulary)}
    label_index = {lab: i for i, lab in enumerate(labels)}
    rows, cols, vals = [], [], []
    y = np.empty(len(docs), dtype=np.int64)
    for i, (tv, label) in enumerate(docs):
        y[i] = label_index[label]
        for token, count in tv.counts.items():
            col = token_index.get(token)
            if col is not None:
                rows.append(i)
                cols.append(col)
                vals.append(float(count))
    X = sparse.csr_matrix(
        (vals, (rows, cols)), shape=(len(docs), len(vocabulary)), dtype=float
    )
    return X, y


def _union_vocabulary(docs: Sequence[LabeledDoc]) -> tuple[str, ...]:
    vocab = set()
    for tv, _ in docs:
        vocab.update(tv.counts)
    return tuple(sorted(vocab))


def train_naive_bayes(docs: Sequence[LabeledDoc], smoothing: float = 1.0) -> NaiveBayesModel:
    """Train multinomial NB over the union vocabulary of ``docs``.

    The smoothing constant is added to each class-conditional token
    frequency rather than to raw counts, so the fitted model depends
    only on the empirical distributions: duplicating the whole corpus k
    times changes nothing.
    """
    if smoothing <= 0:
        raise ValueError("smoothing must be positive")
    if not docs:
        raise ValueError("empty training set")
    labels = _present_labels(docs)
    vocabulary = _union_vocabulary(docs)
    k, v = len(labels), len(vocabulary)
    label_index = {lab: i for i, lab in enumerate(labels)}
    token_index = {t: i for i, t in enumerate(vocabulary)}

    doc_counts = np.zeros(k)
    token_counts = np.zeros((k, v))
    for tv, label in docs:
        li = label_index[label]
        doc_counts[li] += 1
        for token, count in tv.counts.items():
            token_counts[li, token_index[token]] += count

    log_priors = np.log(doc_counts / doc_counts.sum())
    totals = token_counts.sum(axis=1, keepdims=True)
    freq = np.divide(
        token_counts, totals, out=np.zeros_like(token_counts), where=totals > 0
    )
    if v > 0:  # classes with no tokens at all fall back to uniform
        freq[totals[:, 0] == 0] = 1.0 / v
    log_cond = np.log(freq + smoothing) - math.log(1.0 + smoothing * v)
    return NaiveBayesModel(
        labels=labels,
        vocabulary=vocabulary,
        log_priors=log_priors,
        log_cond=log_cond,
        smoothing=float(smoothing),
    )


def maxent_objective(
    weights: np.ndarray,
    bias: np.ndarray,
    X: sparse.csr_matrix,
    y: np.ndarray,
    l2: float,
) -> tuple[float, np.ndarray, np.ndarray]:
    """L2-penalized log-likelihood and its gradient.

    Returns (objective, grad_weights, grad_bias). The penalty applies to
    the weights only, never the biases. Exposed at module level so the
    gradient can be checked against finite differences.
    """
    n = X.shape[0]
    scores = X @ weights.T + bias  # (n, K)
    shift = scores.max(axis=1, keepdims=True)
    log_z = shift[:, 0] + np.log(np.exp(scores - shift).sum(axis=1))
    log_probs = scores - log_z[:, None]
    ll = float(log_probs[np.arange(n), y].sum()) - 0.5 * l2 * float((weights**2).sum())

    probs = np.exp(log_probs)
    resid = -probs
    resid[np.arange(n), y] += 1.0
    grad_w = (resid.T @ X) - l2 * weights
    grad_b = resid.sum(axis=0)
    return ll, np.asarray(grad_w), grad_b


def train_maxent(
    docs: Sequence[LabeledDoc],
    l2: float = 0.1,
    max_iter: int = 1000,
    tol: float = 1e-6,
) -> MaxEntModel:
    """Fit by full-batch gradient ascent with backtracking line search.

    Converged when the gradient max-norm drops below ``tol``; otherwise
    stops at ``max_iter`` and logs that the cap was hit.
    """
    if l2 < 0:
        raise ValueError("l2 must be non-negative")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not docs:
        raise ValueError("empty training set")
    labels = _present_labels(docs)
    vocabulary = _union_vocabulary(docs)
    X, y = _build_matrix(docs, labels, vocabulary)
    k, v = len(labels), len(vocabulary)

    weights = np.zeros((k, v))
    bias = np.zeros(k)
    step = 1.0
    converged = False
    n_iter = 0
    obj, grad_w, grad_b = maxent_objective(weights, bias, X, y, l2)
    for it in range(1, max_iter + 1):
        n_iter = it
        if not math.isfinite(obj):
            raise ArithmeticError(f"non-finite objective at iteration {it}")
        grad_norm = max(
            float(np.abs(grad_w).max(initial=0.0)), float(np.abs(grad_b).max(initial=0.0))
        )
        if grad_norm < tol:
            converged = True
            n_iter = it - 1
            break
        sq = float((grad_w**2).sum() + (grad_b**2).sum())
        # Backtracking Armijo search along the gradient direction.
        trial = step
        for _ in range(60):
            new_w = weights + trial * grad_w
            new_b = bias + trial * grad_b
            new_obj, new_gw, new_gb = maxent_objective(new_w, new_b, X, y, l2)
            if math.isfinite(new_obj) and new_obj >= obj + 1e-4 * trial * sq:
                break
            trial *= 0.5
        else:
            raise ArithmeticError(f"line search failed at iteration {it}")
        weights, bias = new_w, new_b
        obj, grad_w, grad_b = new_obj, new_gw, new_gb
        step = trial * 2.0

    if converged:
        logger.info("maxent converged after %d iterations", n_iter)
    else:
        logger.info("maxent stopped at the %d-iteration cap", max_iter)
    return MaxEntModel(
        labels=labels,
        vocabulary=vocabulary,
        weights=weights,
        bias=bias,
        l2=float(l2),
        converged=converged,
        n_iter=n_iter,
    )


def ensemble_predict(
    nb_label: SentimentLabel, me_label: SentimentLabel
) -> SentimentLabel:
    """Combine the two verdicts: MaxEnt is final for neutral/irrelevant,
    Naive Bayes decides between positive and negative otherwise."""
    if me_label in (SentimentLabel.NEUTRAL, SentimentLabel.IRRELEVANT):
        return me_label
    return nb_label


def evaluate_accuracy(model, testset: Sequence[LabeledDoc]) -> float:
    """Fraction of exact label matches of ``model.predict`` on ``testset``."""
    if not testset:
        raise ValueError("empty test set")
    hits = sum(1 for tv, label in testset if model.predict(tv) == label)
    return hits / len(testset)


def save_ensemble(model: EnsembleModel, path: str | Path) -> None:
    """Write the ensemble to a versioned JSON file."""
    payload = {
        "format_version": MODEL_FORMAT_VERSION,
        "labels": [lab.value for lab in model.nb.labels],
        "nb": {
            "vocabulary": list(model.nb.vocabulary),
            "log_priors": model.nb.log_priors.tolist(),
            "log_cond": model.nb.log_cond.tolist(),
            "smoothing": model.nb.smoothing,
        },
        "maxent": {
            "vocabulary": list(model.maxent.vocabulary),
            "weights": model.maxent.weights.tolist(),
            "bias": model.maxent.bias.tolist(),
            "l2": model.maxent.l2,
            "converged": model.maxent.converged,
            "n_iter": model.maxent.n_iter,
        },
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=1))


def load_ensemble(path: str | Path) -> EnsembleModel:
    """Load a model file written by :func:`save_ensemble`.

    Fails loudly on unknown format versions.
    """
    payload = json.loads(Path(path).read_text())
    version = payload.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise ValueError(
            f"unsupported model format version {version!r} "
            f"(expected {MODEL_FORMAT_VERSION})"
        )
    labels = tuple(SentimentLabel(v) for v in payload["labels"])
    nb_data = payload["nb"]
    nb = NaiveBayesModel(
        labels=labels,
        vocabulary=tuple(nb_data["vocabulary"]),
        log_priors=np.asarray(nb_data["log_priors"]),
        log_cond=np.asarray(nb_data["log_cond"]),
        smoothing=nb_data["smoothing"],
    )
    me_data = payload["maxent"]
    maxent = MaxEntModel(
        labels=labels,
        vocabulary=tuple(me_data["vocabulary"]),
        weights=np.asarray(me_data["weights"]),
        bias=np.asarray(me_data["bias"]),
        l2=me_data["l2"],
        converged=me_data["converged"],
        n_iter=me_data["n_iter"],
    )
    return EnsembleModel(nb=nb, maxent=maxent)
