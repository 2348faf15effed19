"""Linear-chain CRF per head: emissions, exact log-partition, NLL with
analytic gradients via forward-backward, and Viterbi decoding.

Sequence score of labels y given emissions E (n x C) and transitions T
(C x C) is ``sum_i E[i, y_i] + sum_i T[y_i, y_{i+1}]``; there are no
begin/end transition vectors. The dynamic-programming kernels come from the
compiled extension when available and otherwise from the numpy reference
backend; set TOXTAG_CRF_BACKEND=python|cython to force one.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from ..errors import ToxtagError


def _load_backend():
    forced = os.environ.get("TOXTAG_CRF_BACKEND", "").strip().lower()
    if forced not in ("", "python", "cython"):
        raise ToxtagError(f"unknown TOXTAG_CRF_BACKEND value {forced!r}")
    if forced == "python":
        from . import _backend_py

        return _backend_py
    try:
        from . import _kernels

        return _kernels
    except ImportError:
        if forced == "cython":
            raise
        from . import _backend_py

        return _backend_py


_impl = _load_backend()
BACKEND = _impl.NAME


@dataclass
class CRFHead:
    """Parameters of one tagging head: emission projection plus transitions."""

    weights: np.ndarray  # d x C
    bias: np.ndarray  # C
    transitions: np.ndarray  # C x C

    def __post_init__(self):
        d, C = self.weights.shape
        if self.bias.shape != (C,) or self.transitions.shape != (C, C):
            raise ToxtagError(
                f"inconsistent head shapes: W {self.weights.shape}, "
                f"b {self.bias.shape}, T {self.transitions.shape}"
            )

    @property
    def dim(self) -> int:
        return self.weights.shape[0]

    @property
    def num_tags(self) -> int:
        return self.weights.shape[1]


@dataclass
class CRFGradients:
    """Gradients of the (possibly weighted) NLL for one head."""

    d_weights: np.ndarray | None
    d_bias: np.ndarray | None
    d_transitions: np.ndarray
    d_emissions: np.ndarray


def init_head(dim: int, num_tags: int, rng: np.random.Generator) -> CRFHead:
    """Zero transitions, uniform [-0.1, 0.1] projection; with T = 0 the first
    iteration behaves like independent per-token classification."""
    return CRFHead(
        weights=rng.uniform(-0.1, 0.1, size=(dim, num_tags)),
        bias=rng.uniform(-0.1, 0.1, size=num_tags),
        transitions=np.zeros((num_tags, num_tags)),
    )


def _as_f64(a: np.ndarray, name: str) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    if not np.all(np.isfinite(a)):
        raise ToxtagError(f"{name} contains non-finite values")
    return a


def _check_pair(E: np.ndarray, T: np.ndarray):
    if E.ndim != 2 or T.ndim != 2:
        raise ToxtagError("emissions and transitions must be 2-D")
    if E.shape[0] < 1:
        raise ToxtagError("need at least one token")
    if T.shape != (E.shape[1], E.shape[1]):
        raise ToxtagError(
            f"transition shape {T.shape} does not match {E.shape[1]} tags"
        )


def emissions(embeddings: np.ndarray, head: CRFHead) -> np.ndarray:
    """Per-token label scores: ``H @ W + b``."""
    H = np.asarray(embeddings, dtype=np.float64)
    if H.ndim != 2 or H.shape[1] != head.dim:
        raise ToxtagError(
            f"embedding dim {H.shape} does not match head dim {head.dim}"
        )
    return H @ head.weights + head.bias


def _check_labels(y: np.ndarray, n: int, C: int) -> np.ndarray:
    y = np.asarray(y, dtype=np.int64)
    if y.shape != (n,):
        raise ToxtagError(f"label sequence length {y.shape} != token count {n}")
    if y.size and (y.min() < 0 or y.max() >= C):
        raise ToxtagError(f"label index out of range for C={C}")
    return y


def score_sequence(E: np.ndarray, T: np.ndarray, y) -> float:
    """Unnormalized score of one label sequence."""
    E = _as_f64(E, "emissions")
    T = _as_f64(T, "transitions")
    _check_pair(E, T)
    y = _check_labels(y, E.shape[0], E.shape[1])
    total = float(E[np.arange(len(y)), y].sum())
    if len(y) > 1:
        total += float(T[y[:-1], y[1:]].sum())
    return total


def log_partition(E: np.ndarray, T: np.ndarray) -> float:
    """log sum over all C^n label sequences of exp(score)."""
    E = _as_f64(E, "emissions")
    T = np.ascontiguousarray(T, dtype=np.float64)
    _check_pair(E, T)
    return float(_impl.forward_logz(E, T))


def nll(E: np.ndarray, T: np.ndarray, y) -> float:
    """Negative log-likelihood of the gold sequence; always >= 0."""
    return log_partition(E, T) - score_sequence(E, T, y)


def nll_gradients(
    E: np.ndarray, T: np.ndarray, y, embeddings: np.ndarray | None = None
) -> tuple[float, CRFGradients]:
    """NLL and its exact gradients from the forward-backward marginals.

    d/dE[i,c] = P(y_i = c) - 1{gold}; d/dT[c,c'] = expected minus observed
    transition counts. When ``embeddings`` is given, the chain rule fills in
    the projection gradients (d_weights = H^T dE, d_bias = column sums).
    """
    E = _as_f64(E, "emissions")
    T = _as_f64(T, "transitions")
    _check_pair(E, T)
    y = _check_labels(y, E.shape[0], E.shape[1])
    logz, marginals, pairwise, _ = _impl.forward_backward(E, T)
    loss = float(logz) - score_sequence(E, T, y)
    dE = marginals
    dE[np.arange(len(y)), y] -= 1.0
    dT = pairwise
    if len(y) > 1:
        np.subtract.at(dT, (y[:-1], y[1:]), 1.0)
    dW = db = None
    if embeddings is not None:
        H = np.asarray(embeddings, dtype=np.float64)
        dW = H.T @ dE
        db = dE.sum(axis=0)
    return loss, CRFGradients(dW, db, dT, dE)


def weighted_nll_gradients(
    E: np.ndarray,
    T: np.ndarray,
    y,
    token_weights: np.ndarray,
    embeddings: np.ndarray | None = None,
) -> tuple[float, CRFGradients]:
    """Label-weighted NLL for imbalance training.

    The loss is the per-token chain-rule decomposition of the NLL
    (``l_i = -log P(y_i | y_<i)``, which sums exactly to the NLL) with each
    term scaled by its gold tag's weight; the emission gradient scales each
    token's row the same way, while the transition gradient stays unweighted.
    All weights 1 reproduces the plain NLL and its emission gradient.
    """
    E = _as_f64(E, "emissions")
    T = _as_f64(T, "transitions")
    _check_pair(E, T)
    n, C = E.shape
    y = _check_labels(y, n, C)
    w = np.asarray(token_weights, dtype=np.float64)
    if w.shape != (n,):
        raise ToxtagError(f"token weight length {w.shape} != token count {n}")
    if np.any(w < 0):
        raise ToxtagError("token weights must be non-negative")
    logz, marginals, pairwise, beta = _impl.forward_backward(E, T)
    terms = np.empty(n)
    terms[0] = logz - E[0, y[0]] - beta[0, y[0]]
    for i in range(1, n):
        terms[i] = (
            beta[i - 1, y[i - 1]] - E[i, y[i]] - T[y[i - 1], y[i]] - beta[i, y[i]]
        )
    loss = float(w @ terms)
    dE = marginals
    dE[np.arange(n), y] -= 1.0
    dE *= w[:, None]
    dT = pairwise
    if n > 1:
        np.subtract.at(dT, (y[:-1], y[1:]), 1.0)
    dW = db = None
    if embeddings is not None:
        H = np.asarray(embeddings, dtype=np.float64)
        dW = H.T @ dE
        db = dE.sum(axis=0)
    return loss, CRFGradients(dW, db, dT, dE)


def viterbi_decode(E: np.ndarray, T: np.ndarray) -> list[int]:
    """Argmax label sequence; ties break toward the lowest label index."""
    E = _as_f64(E, "emissions")
    T = np.ascontiguousarray(T, dtype=np.float64)
    _check_pair(E, T)
    return [int(i) for i in _impl.viterbi(E, T)]


def bio_transition_mask(scheme) -> np.ndarray:
    """Additive mask forbidding transitions into I-c from anything but B-c or
    I-c. Off by default everywhere; add to T for constrained decoding."""
    C = scheme.size
    mask = np.zeros((C, C))
    for target in range(C):
        if not scheme.is_inside(target):
            continue
        cat = scheme.category_of(target)
        for source in range(C):
            ok = source != 0 and scheme.category_of(source) == cat
            if not ok:
                mask[source, target] = -np.inf
    return mask
