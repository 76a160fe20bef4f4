"""The single-qubit Clifford group.

The 24 Clifford rotations are found by a breadth-first closure over the
generators ``X(+pi/2), X(-pi/2), Y(+pi/2), Y(-pi/2)``. Each element keeps
the first shortest generator word found, with generators tried in that
order. Words are time ordered: the first generator is applied first.

The generators are odd permutations of the cube's body diagonals, and
Z(pi) is an even one, so Z(pi) is the one element that needs four
generators. All other elements take at most three.
"""
from __future__ import annotations

import functools
import logging
import math
from collections import deque
from typing import Dict, List, Sequence, Tuple

import numpy as np

from ionaddress.rotor import (
    I,
    X90,
    X180,
    XM90,
    Y90,
    Y180,
    YM90,
    Z180,
    Rotation,
    compose,
)

log = logging.getLogger(__name__)

CLIFFORD_GROUP_ORDER = 24

# Generator names, in tie-breaking order
GENERATORS: Tuple[str, ...] = ("X+", "X-", "Y+", "Y-")

GENERATOR_ROTATIONS: Dict[str, Rotation] = {
    "X+": X90,
    "X-": XM90,
    "Y+": Y90,
    "Y-": YM90,
}

# Pulse phase (radians) of the pi/2 pulse realizing each generator
GENERATOR_PHASES: Dict[str, float] = {
    "X+": 0.0,
    "Y+": math.pi / 2,
    "X-": math.pi,
    "Y-": 3 * math.pi / 2,
}

Word = Tuple[str, ...]
RotationKey = Tuple[float, ...]


class CliffordClosureError(Exception):
    """Raised when the generator closure does not produce the Clifford
    group."""


def rotation_key(rotation: Rotation) -> RotationKey:
    """Hashable, sign-independent key for exact (Clifford-like) rotations."""
    return tuple(round(c, 9) + 0.0 for c in rotation.canonical())


def word_rotation(word: Sequence[str]) -> Rotation:
    """Compose a generator word, first generator applied first.

    >>> word_rotation(("X+", "X+")) == X180
    True
    """
    r = I
    for g in word:
        r = compose(GENERATOR_ROTATIONS[g], r)
    return r


class CliffordTable:
    """Clifford elements with their generator words.

    Element 0 is the identity. `products` holds the group multiplication
    table by index, ``products[a, b]`` being ``compose(a, b)``.
    """

    def __init__(
        self,
        elements: Sequence[Rotation],
        words: Sequence[Word],
        products: np.ndarray,
    ) -> None:
        self.elements: Tuple[Rotation, ...] = tuple(elements)
        self.words: Tuple[Word, ...] = tuple(words)
        self.products = products
        self.products.flags.writeable = False
        self.inverse_index: Tuple[int, ...] = tuple(
            int(np.flatnonzero(row == 0)[0]) for row in products
        )
        self._lookup = {rotation_key(r): i for i, r in enumerate(self.elements)}

    def __len__(self) -> int:
        return len(self.elements)

    def index_of(self, rotation: Rotation) -> int:
        """Index of the Clifford element equal to `rotation`.

        Raises `KeyError` if `rotation` is not a Clifford.
        """
        return self._lookup[rotation_key(rotation)]

    def multiply(self, a: int, b: int) -> int:
        """Index of ``compose(elements[a], elements[b])``."""
        return int(self.products[a, b])

    @functools.cached_property
    def paulis(self) -> Tuple[int, ...]:
        """Indices of I, X(pi), Y(pi) and Z(pi)."""
        return tuple(self.index_of(r) for r in (I, X180, Y180, Z180))

    @property
    def word_lengths(self) -> List[int]:
        return [len(w) for w in self.words]

    @property
    def mean_word_length(self) -> float:
        return sum(self.word_lengths) / len(self.words)

    def __repr__(self) -> str:
        return f"<CliffordTable {len(self)} elements, mean word length {self.mean_word_length:.4f}>"


@functools.lru_cache(maxsize=None)
def build_clifford_table() -> CliffordTable:
    """Breadth-first closure over the +-pi/2 generators.

    >>> table = build_clifford_table()
    >>> len(table), max(table.word_lengths)
    (24, 4)
    >>> table.words[table.index_of(X180)]
    ('X+', 'X+')
    """
    elements: List[Rotation] = [I]
    words: List[Word] = [()]
    seen = {rotation_key(I): 0}
    queue = deque([0])
    while queue:
        n = queue.popleft()
        for g in GENERATORS:
            r = compose(GENERATOR_ROTATIONS[g], elements[n])
            k = rotation_key(r)
            if k not in seen:
                seen[k] = len(elements)
                elements.append(r)
                words.append(words[n] + (g,))
                queue.append(seen[k])

    if len(elements) != CLIFFORD_GROUP_ORDER:
        raise CliffordClosureError(
            f"Generator closure produced {len(elements)} elements, expected {CLIFFORD_GROUP_ORDER}"
        )

    size = len(elements)
    products = np.empty((size, size), dtype=int)
    for a in range(size):
        for b in range(size):
            k = rotation_key(compose(elements[a], elements[b]))
            if k not in seen:
                raise CliffordClosureError("Clifford table is not closed")
            products[a, b] = seen[k]

    table = CliffordTable(elements, words, products)
    log.debug("Clifford table built; mean word length %.4f", table.mean_word_length)
    return table
