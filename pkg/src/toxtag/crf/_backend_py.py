"""Pure-numpy CRF dynamic-programming kernels.

Reference implementation of the hot kernels also provided by the compiled
extension ``toxtag.crf._kernels``; both expose the same three functions over
float64 arrays. All recursions run in log space with log-sum-exp
stabilization and accumulate in double precision.
"""

from __future__ import annotations

import numpy as np

NAME = "python"


def _lse(x: np.ndarray, axis=None):
    """Stable log-sum-exp, safe for -inf entries (masked transitions)."""
    m = np.max(x, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    out = np.squeeze(m, axis=axis) if axis is not None else m.reshape(())
    return out + np.log(np.sum(np.exp(x - m), axis=axis))


def forward_logz(E: np.ndarray, T: np.ndarray) -> float:
    """Log of the partition function by the forward recursion."""
    alpha = E[0].astype(np.float64, copy=True)
    for i in range(1, E.shape[0]):
        alpha = E[i] + _lse(alpha[:, None] + T, axis=0)
    return float(_lse(alpha))


def forward_backward(E: np.ndarray, T: np.ndarray):
    """Forward-backward pass.

    Returns ``(logz, marginals, pairwise, beta)`` where ``marginals[i, c]``
    is P(y_i = c), ``pairwise[c, c']`` is the sum over positions of
    P(y_i = c, y_{i+1} = c'), and ``beta`` is the backward table (log space,
    ``beta[n-1] = 0``).
    """
    n, C = E.shape
    alpha = np.empty((n, C))
    alpha[0] = E[0]
    for i in range(1, n):
        alpha[i] = E[i] + _lse(alpha[i - 1][:, None] + T, axis=0)
    logz = float(_lse(alpha[-1]))

    beta = np.zeros((n, C))
    for i in range(n - 2, -1, -1):
        beta[i] = _lse(T + (E[i + 1] + beta[i + 1])[None, :], axis=1)

    marginals = np.exp(alpha + beta - logz)
    pairwise = np.zeros((C, C))
    for i in range(n - 1):
        joint = alpha[i][:, None] + T + (E[i + 1] + beta[i + 1])[None, :] - logz
        pairwise += np.exp(joint)
    return logz, marginals, pairwise, beta


def viterbi(E: np.ndarray, T: np.ndarray) -> np.ndarray:
    """Maximum-score label sequence; ties resolved toward the lowest label
    index at every backtrack step (argmax keeps the first maximum)."""
    n, C = E.shape
    back = np.zeros((n, C), dtype=np.int64)
    delta = E[0].astype(np.float64, copy=True)
    for i in range(1, n):
        scores = delta[:, None] + T
        back[i] = np.argmax(scores, axis=0)
        delta = E[i] + np.take_along_axis(scores, back[i][None, :], axis=0)[0]
    path = np.zeros(n, dtype=np.int64)
    path[-1] = int(np.argmax(delta))
    for i in range(n - 1, 0, -1):
        path[i - 1] = back[i, path[i]]
    return path
