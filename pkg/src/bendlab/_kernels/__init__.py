"""Hot kernels for word-ball enumeration.

A compiled Cython implementation is preferred when it was built; otherwise a
numpy implementation with the identical contract is used.  Set the
environment variable BENDLAB_PURE=1 to force the numpy path.
"""

from __future__ import annotations

import os

import numpy as np

from . import _ref

COMPILED = False
_impl = _ref
if not os.environ.get("BENDLAB_PURE"):
    try:
        from . import _speedups  # type: ignore[attr-defined]

        _impl = _speedups
        COMPILED = True
    except ImportError:
        pass

MAX_BALL_CAP = 12


def expand_level(mats: np.ndarray, last: np.ndarray, gens: np.ndarray):
    """Extend freely reduced words by one letter (see _ref.expand_level)."""
    if (
        _impl is not _ref
        and mats.dtype == np.float64
        and gens.dtype == np.float64
        and mats.flags.c_contiguous
        and gens.flags.c_contiguous
    ):
        return _impl.expand_level(mats, np.ascontiguousarray(last, dtype=np.int8), gens)
    return _ref.expand_level(mats, last, gens)


def iter_ball_levels(gens: np.ndarray, cap: int, chunk: int = 200_000):
    """Yield (level, mats, last) for freely reduced words of length 1..cap.

    gens is the (2k, 2, 2) array of generator matrices indexed by letter
    (letter 2g is generator g, 2g+1 its inverse).  A level may be emitted in
    several chunks; chunks of one level arrive in word order.  The identity
    word (level 0) is not emitted.
    """
    if cap > MAX_BALL_CAP:
        raise ValueError(f"cap {cap} exceeds the kernel limit {MAX_BALL_CAP}")
    if cap < 1:
        return
    gens = np.ascontiguousarray(gens, dtype=gens.dtype)
    n_letters = gens.shape[0]
    mats = gens.copy()
    last = np.arange(n_letters, dtype=np.int8)
    yield 1, mats, last
    for level in range(2, cap + 1):
        pieces_m = []
        pieces_l = []
        for lo in range(0, mats.shape[0], chunk):
            sub_m, sub_l = expand_level(mats[lo : lo + chunk], last[lo : lo + chunk], gens)
            yield level, sub_m, sub_l
            if level < cap:
                pieces_m.append(sub_m)
                pieces_l.append(sub_l)
        if level < cap:
            mats = np.concatenate(pieces_m, axis=0)
            last = np.concatenate(pieces_l, axis=0)
