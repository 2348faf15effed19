"""Linear-chain CRF with compiled kernels and a numpy fallback."""

from .core import (
    BACKEND,
    CRFGradients,
    CRFHead,
    bio_transition_mask,
    emissions,
    init_head,
    log_partition,
    nll,
    nll_gradients,
    score_sequence,
    viterbi_decode,
    weighted_nll_gradients,
)

__all__ = [
    "BACKEND",
    "CRFGradients",
    "CRFHead",
    "bio_transition_mask",
    "emissions",
    "init_head",
    "log_partition",
    "nll",
    "nll_gradients",
    "score_sequence",
    "viterbi_decode",
    "weighted_nll_gradients",
]
