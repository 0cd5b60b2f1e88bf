"""Finitely generated groups of isometries: presentations, representations,
word evaluation, relator residuals, word balls, and the genus-2 flagship
group built on the regular hyperbolic octagon.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import CapExceeded
from .hypcore import (
    BOUNDARY_TOL,
    GeodesicTransfer,
    UnimodularMatrix,
    norm_diff_pm,
)

MAX_WORD_CAP = 10

# A word is a tuple of letters; letter 2*g is generator g, letter 2*g + 1 its
# inverse, so the inverse of a letter is letter ^ 1.
Word = tuple

def letter_of(gen_index: int, exponent: int) -> int:
    return 2 * gen_index + (0 if exponent > 0 else 1)


def free_reduce(letters) -> Word:
    out = []
    for l in letters:
        if out and out[-1] == (l ^ 1):
            out.pop()
        else:
            out.append(l)
    return tuple(out)


def word_inverse(w: Word) -> Word:
    return tuple((l ^ 1) for l in reversed(w))


def concat(w1: Word, w2: Word) -> Word:
    return free_reduce(tuple(w1) + tuple(w2))


def parse_word(text: str, names) -> Word:
    """Parse 'a b A B' or 'abAB'; an uppercase letter denotes the inverse."""
    lower = [n.lower() for n in names]
    tokens = text.split() if " " in text.strip() else list(text.strip())
    letters = []
    for tok in tokens:
        if not tok:
            continue
        idx = lower.index(tok.lower())
        letters.append(letter_of(idx, -1 if tok.isupper() else +1))
    return free_reduce(letters)


def format_word(w: Word, names) -> str:
    parts = []
    for l in w:
        name = names[l // 2]
        parts.append(name.upper() if (l & 1) else name.lower())
    return " ".join(parts)


@dataclass(frozen=True)
class GroupPresentation:
    """Generator names plus (possibly empty) freely reduced relator words."""

    names: tuple
    relators: tuple = ()

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise ValueError("generator names must be distinct")
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(
            self, "relators", tuple(free_reduce(r) for r in self.relators)
        )

    @property
    def rank(self) -> int:
        return len(self.names)


@dataclass
class Representation:
    """Map from group generators to unimodular matrices, with a boundary transfer."""

    presentation: GroupPresentation
    images: dict
    transfer: GeodesicTransfer = field(default_factory=GeodesicTransfer.identity)

    def __post_init__(self):
        for name in self.presentation.names:
            if name not in self.images:
                raise ValueError(f"missing image for generator {name!r}")
            if abs(self.images[name].det - 1.0) > 1e-10:
                raise ValueError(f"image of {name!r} is not unimodular")

    # -- access --------------------------------------------------------

    @property
    def rank(self) -> int:
        return self.presentation.rank

    def generator(self, i: int) -> UnimodularMatrix:
        return self.images[self.presentation.names[i]]

    def letter_matrix(self, letter: int) -> UnimodularMatrix:
        m = self.generator(letter // 2)
        return m.inverse() if (letter & 1) else m

    def letter_array(self) -> np.ndarray:
        """(2k, 2, 2) array of letter matrices; float64 when the images are real."""
        k = self.rank
        arr = np.empty((2 * k, 2, 2), dtype=complex)
        for l in range(2 * k):
            m = self.letter_matrix(l)
            arr[l] = [[m.a, m.b], [m.c, m.d]]
        if np.abs(arr.imag).max() <= BOUNDARY_TOL:
            return np.ascontiguousarray(arr.real)
        return arr

    def is_real(self, tol: float = 1e-12) -> bool:
        return all(self.images[n].is_real(tol) for n in self.presentation.names)

    # -- evaluation ------------------------------------------------------

    def evaluate(self, w) -> UnimodularMatrix:
        """Ordered product of letter images; accepts a Word or a word string."""
        if isinstance(w, str):
            w = parse_word(w, self.presentation.names)
        m = UnimodularMatrix.identity()
        for l in w:
            m = m @ self.letter_matrix(l)
        return m

    def relator_residual(self) -> float:
        """max over relators R of min(|rho(R) - I|, |rho(R) + I|); 0 if none."""
        ident = UnimodularMatrix.identity()
        worst = 0.0
        for r in self.presentation.relators:
            worst = max(worst, norm_diff_pm(self.evaluate(r), ident))
        return worst

    def conjugated(self, g: UnimodularMatrix) -> "Representation":
        images = {n: g @ m @ g.inverse() for n, m in self.images.items()}
        return Representation(self.presentation, images, self.transfer)

    def with_images(self, images: dict) -> "Representation":
        return Representation(self.presentation, images, self.transfer)

    # -- serialization ----------------------------------------------------

    def to_json(self) -> dict:
        gens = {}
        for name in self.presentation.names:
            m = self.images[name]
            gens[name] = [
                round(v, 8)
                for v in (m.a.real, m.a.imag, m.b.real, m.b.imag,
                          m.c.real, m.c.imag, m.d.real, m.d.imag)
            ]
        return {
            "generators": gens,
            "relators": [format_word(r, self.presentation.names)
                         for r in self.presentation.relators],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Representation":
        names = tuple(data["generators"].keys())
        images = {}
        for name, vals in data["generators"].items():
            ar, ai, br, bi, cr, ci, dr, di = vals
            images[name] = UnimodularMatrix(
                complex(ar, ai), complex(br, bi), complex(cr, ci), complex(dr, di)
            )
        pres = GroupPresentation(names, tuple())
        relators = tuple(parse_word(r, names) for r in data.get("relators", []))
        pres = GroupPresentation(names, relators)
        return cls(pres, images)


def evaluate_word(rep: Representation, w) -> UnimodularMatrix:
    return rep.evaluate(w)


def relator_residual(rep: Representation) -> float:
    return rep.relator_residual()


# ---------------------------------------------------------------------------
# word balls


def group_ball(rep: Representation, length: int, cap: int = MAX_WORD_CAP):
    """All freely reduced words of length <= length with their matrices.

    Deduplication is by free reduction only (never by matrix value), and the
    order is deterministic: by length, then lexicographically by letter index
    with letters ordered a < A < b < B < ...
    """
    if length > cap:
        raise CapExceeded(f"ball radius {length} exceeds cap {cap}")
    out = [((), UnimodularMatrix.identity())]
    frontier = [((), UnimodularMatrix.identity())]
    n_letters = 2 * rep.rank
    letters = [rep.letter_matrix(l) for l in range(n_letters)]
    for _ in range(length):
        new = []
        for word, mat in frontier:
            for l in range(n_letters):
                if word and word[-1] == (l ^ 1):
                    continue
                new.append((word + (l,), mat @ letters[l]))
        frontier = new
        out.extend(new)
    return out


def free_ball_size(rank: int, length: int) -> int:
    """1 + sum over l of 2k (2k-1)^(l-1): freely reduced words of length <= length."""
    k2 = 2 * rank
    total = 1
    for l in range(1, length + 1):
        total += k2 * (k2 - 1) ** (l - 1)
    return total


def iter_ball_matrices(rep: Representation, cap: int, chunk: int = 200_000):
    """Stream (level, mats) arrays of word matrices of length 1..cap."""
    gens = rep.letter_array()
    for level, mats, _last in _kernels.iter_ball_levels(gens, cap, chunk=chunk):
        yield level, mats


# ---------------------------------------------------------------------------
# the genus-2 octagon group

_OCTAGON_CACHE = None


def _octagon_candidate_relators(names):
    """Standard relator candidates for opposite-side identifications."""
    a, A, b, B, c, C, d, D = (
        letter_of(0, 1), letter_of(0, -1), letter_of(1, 1), letter_of(1, -1),
        letter_of(2, 1), letter_of(2, -1), letter_of(3, 1), letter_of(3, -1),
    )
    cands = []
    for eb, ec, ed in [(s1, s2, s3) for s1 in (1, -1) for s2 in (1, -1) for s3 in (1, -1)]:
        w = (
            a,
            letter_of(1, eb),
            letter_of(2, ec),
            letter_of(3, ed),
            A,
            letter_of(1, -eb),
            letter_of(2, -ec),
            letter_of(3, -ed),
        )
        cands.append(free_reduce(w))
    cands.append(free_reduce((a, b, A, B, c, d, C, D)))  # commutator form
    cands.append(free_reduce((a, c, A, C, b, d, B, D)))
    return cands


def genus2_octagon() -> Representation:
    """Surface group of genus two from the regular octagon with opposite sides
    identified.

    The four generators pair opposite sides of the regular hyperbolic octagon
    with vertex angle pi/4 centered at i (half-plane coordinates): generator k
    translates by 2 arccosh(1 + sqrt 2) along the rotated diameter at angle
    k pi/4, so every generator has trace 2 (1 + sqrt 2).  The single length-8
    side-pairing relator is selected from the standard candidates by its
    numerically vanishing residual.
    """
    global _OCTAGON_CACHE
    if _OCTAGON_CACHE is not None:
        return _OCTAGON_CACHE

    half_len = math.acosh(1.0 + math.sqrt(2.0))  # half the translation length
    ch = 1.0 + math.sqrt(2.0)
    sh = math.sinh(half_len)

    cay = np.array([[1.0, -1.0j], [1.0, 1.0j]])  # half-plane -> disk
    cay_inv = np.linalg.inv(cay)
    names = ("a", "b", "c", "d")
    images = {}
    for k in range(4):
        phase = cmath.exp(1j * k * math.pi / 4.0)
        disk = np.array([[ch, sh * phase], [sh * phase.conjugate(), ch]])
        half = cay_inv @ disk @ cay
        assert np.abs(half.imag).max() < 1e-12
        images[names[k]] = UnimodularMatrix.from_array(half.real)

    pres0 = GroupPresentation(names, ())
    rep0 = Representation(pres0, images)
    best = None
    for cand in _octagon_candidate_relators(names):
        res = norm_diff_pm(rep0.evaluate(cand), UnimodularMatrix.identity())
        if best is None or res < best[1]:
            best = (cand, res)
    relator, res = best
    if res > 1e-9:
        raise RuntimeError(f"no octagon relator candidate closes (best residual {res})")
    rep = Representation(GroupPresentation(names, (relator,)), images)
    _OCTAGON_CACHE = rep
    return rep


def free_group_representation(mats) -> Representation:
    """Representation of a free group with the given generator matrices."""
    names = tuple("abcdefgh"[: len(mats)])
    images = dict(zip(names, mats))
    return Representation(GroupPresentation(names, ()), images)
