"""Spatial smoothing: stacked subarray data and smoothed sample covariances.

An N-sensor snapshot block is split into ``P = N - M + 1`` overlapping
M-sensor subarrays. The forward-only stack concatenates the subarray
blocks side by side; the forward-backward stack appends a conjugated,
row-reversed copy scaled by ``1/sqrt(2)`` so that a single covariance
formula serves both modes. Stacks are materialized explicitly because M
and P are small and estimators take the better-conditioned SVD route on
the stack itself.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import SubarrayTooLargeError
from .model import SnapshotMatrix

FOSS = "foss"
FBSS = "fbss"


@dataclass(frozen=True)
class SmoothedStack:
    """Stacked subarray data: M x (L*P) forward-only, M x (2*L*P) forward-backward."""

    mode: str
    m: int
    p: int
    snapshots: int
    stack: np.ndarray


def _subarray_blocks(y: np.ndarray, m: int) -> list[np.ndarray]:
    n = y.shape[0]
    if not 1 <= m <= n:
        raise SubarrayTooLargeError(f"subarray length {m} outside [1, {n}]")
    p = n - m + 1
    return [y[q : q + m, :] for q in range(p)]


def foss_stack(y: SnapshotMatrix, m: int) -> SmoothedStack:
    """Forward-only stack ``[Y_(1), ..., Y_(P)]`` of the M-row subarray blocks.

    For a single snapshot the result is the Hankel matrix built from the
    observed vector.
    """
    blocks = _subarray_blocks(y.y, m)
    return SmoothedStack(
        mode=FOSS,
        m=m,
        p=len(blocks),
        snapshots=y.snapshots,
        stack=np.hstack(blocks),
    )


def fbss_stack(y: SnapshotMatrix, m: int) -> SmoothedStack:
    """Forward-backward stack with the reversed-conjugate blocks appended.

    Equals ``[Y_(1), ..., Y_(P), J conj(Y_(1)), ..., J conj(Y_(P))] / sqrt(2)``
    where ``J`` is the M x M anti-identity. The ``1/sqrt(2)`` keeps the
    covariance normalization identical to the forward-only case.
    """
    blocks = _subarray_blocks(y.y, m)
    backward = [np.conj(b[::-1, :]) for b in blocks]
    return SmoothedStack(
        mode=FBSS,
        m=m,
        p=len(blocks),
        snapshots=y.snapshots,
        stack=np.hstack(blocks + backward) / np.sqrt(2.0),
    )


def smoothed_sample_covariance(stack: SmoothedStack, l: int | None = None) -> np.ndarray:
    """Smoothed M x M sample covariance ``stack stack^H / (L P)``.

    With ``P = 1`` and forward-only mode this reduces to the plain sample
    covariance ``Y Y^H / L``. The forward-backward stack's internal
    ``1/sqrt(2)`` makes the same normalization produce the symmetrized
    average of the forward covariance and its reversed conjugate.
    """
    snapshots = stack.snapshots if l is None else l
    r = stack.stack @ stack.stack.conj().T / (snapshots * stack.p)
    return 0.5 * (r + r.conj().T)
