"""Reference (numpy) implementation of the hot word-ball kernel.

The compiled twin in _speedups.pyx implements the same contract; both must
produce children in the same order: parents in input order, letters ascending
with the parent's inverse letter skipped.
"""

from __future__ import annotations

import numpy as np

_ALLOWED_CACHE: dict[int, np.ndarray] = {}


def _allowed(n_letters: int) -> np.ndarray:
    """allowed[l] = the n_letters - 1 letters that may follow letter l."""
    table = _ALLOWED_CACHE.get(n_letters)
    if table is None:
        table = np.array(
            [[j for j in range(n_letters) if j != (l ^ 1)] for l in range(n_letters)],
            dtype=np.int64,
        )
        _ALLOWED_CACHE[n_letters] = table
    return table


def expand_level(mats: np.ndarray, last: np.ndarray, gens: np.ndarray):
    """Extend freely reduced words by one letter.

    mats: (N, 2, 2) float64, matrices of the current words
    last: (N,) int8, last letter of each word (letter 2g is generator g,
          letter 2g+1 its inverse)
    gens: (2k, 2, 2) float64, generator matrices indexed by letter

    Returns (children, child_last) with children.shape == (N*(2k-1), 2, 2).
    """
    allowed = _allowed(gens.shape[0])[last]          # (N, 2k-1)
    children = np.matmul(mats[:, None, :, :], gens[allowed])
    child_last = allowed.astype(np.int8).reshape(-1)
    return children.reshape(-1, 2, 2), child_last
