"""Deterministic low-discrepancy sampling (Halton sequence).

All stochastic-looking sweeps in the package draw from the Halton
sequence in prime bases, with the seed acting as a start offset.  That
keeps every experiment reproducible bit-for-bit: the same seed always
yields the same points in the same order.
"""

from __future__ import annotations

import numpy as np

__all__ = ["halton", "ball_points"]

_PRIMES = (2, 3, 5, 7, 11, 13)


def _radical_inverse(indices, base):
    inv = np.zeros(indices.shape, dtype=float)
    denom = 1.0
    work = indices.copy()
    while np.any(work > 0):
        denom *= base
        inv += (work % base) / denom
        work //= base
    return inv


def halton(count: int, dim: int, seed: int = 0) -> np.ndarray:
    """First `count` Halton points in [0, 1)^dim, offset by `seed`.

    The offset skips seed * 1000 + 1 initial terms (the +1 drops the
    origin), so distinct seeds give disjoint, equally well distributed
    slices of the sequence.
    """
    if count < 0 or dim < 1 or dim > len(_PRIMES):
        raise ValueError(f"need count >= 0 and 1 <= dim <= {len(_PRIMES)}")
    if seed < 0:
        raise ValueError("seed must be nonnegative")
    start = seed * 1000 + 1
    idx = np.arange(start, start + count, dtype=np.int64)
    return np.stack([_radical_inverse(idx, b) for b in _PRIMES[:dim]], axis=1)


def ball_points(count: int, n: int, radius: float, center=None, seed: int = 0) -> np.ndarray:
    """Quasi-random points in the open ball of given radius.

    Halton points in the bounding cube are filtered to the ball, keeping
    the sequence order; generation continues until `count` survivors.
    """
    if radius <= 0.0:
        raise ValueError("radius must be positive")
    c = np.zeros(n) if center is None else np.asarray(center, dtype=float)
    out = np.empty((0, n))
    block = max(count * 2, 64)
    offset = 0
    while out.shape[0] < count:
        cube = halton(block, n, seed=seed)
        cube = cube[offset:]
        pts = (2.0 * cube - 1.0) * radius
        keep = np.linalg.norm(pts, axis=1) < radius
        out = np.concatenate([out, pts[keep]])
        offset = block
        block *= 2
    return c + out[:count]
