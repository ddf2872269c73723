"""Set-function calculus: discrete derivatives and the Mobius transform.

The discrete derivative of v with respect to a set S, evaluated at a
disjoint set T, is the alternating sum over W subseteq S of v(W | T),
signed by the parity of |S| - |W|.  The Mobius coefficients a(T) are the
coordinates of v in the unanimity basis; a(T) equals the derivative with
respect to T at the empty set.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import fsum

import numpy as np

from .games import DENSE_LIMIT, Game, PlayerSet, as_mask, ids_from_mask, popcounts


def iter_submasks(mask: int):
    """All submasks of `mask` in ascending numeric order (includes 0 and mask)."""
    sub = 0
    while True:
        yield sub
        if sub == mask:
            return
        sub = (sub - mask) & mask


def masks_of_size(n: int, size: int):
    """All n-bit masks with `size` set bits, ascending (Gosper's hack)."""
    if size == 0:
        yield 0
        return
    if size > n:
        return
    mask = (1 << size) - 1
    limit = 1 << n
    while mask < limit:
        yield mask
        low = mask & -mask
        ripple = mask + low
        mask = ripple | ((mask ^ ripple) >> (low.bit_length() + 1))


def signed_by_parity(k: int) -> int:
    """(-1)**k computed from parity, never through float pow."""
    return -1 if k & 1 else 1


def discrete_derivative(game: Game, diff_set, at) -> float:
    """Derivative of the game with respect to diff_set, evaluated at `at`.

    The two sets must be disjoint.  diff_set of size 1 is the plain
    marginal v(T | i) - v(T); the empty diff_set returns v(T) itself.
    """
    s_mask = as_mask(diff_set, game.n)
    t_mask = as_mask(at, game.n)
    if s_mask & t_mask:
        raise ValueError(
            f"differentiation set {ids_from_mask(s_mask)} overlaps "
            f"evaluation point {ids_from_mask(t_mask)}")
    s = s_mask.bit_count()
    if s > DENSE_LIMIT:
        raise ValueError(f"derivative order {s} exceeds the {DENSE_LIMIT} guard")
    terms = []
    for w_mask in iter_submasks(s_mask):
        sign = signed_by_parity(s - w_mask.bit_count())
        terms.append(sign * game.value(w_mask | t_mask))
    return fsum(terms)


def derivative_table(table: np.ndarray, n: int, s_mask: int) -> np.ndarray:
    """Derivative with respect to s_mask at every point of the complement.

    `table` is the dense 2^n value array.  The result has one entry per
    subset of N minus S, indexed by the packed mask whose bit j stands for
    the j-th smallest remaining player.  Computed by successive axis
    differencing, so each entry costs O(1) amortized.
    """
    cube = table.reshape((2,) * n)
    axis_player = list(range(n - 1, -1, -1))  # axis 0 is the highest player bit
    for player in ids_from_mask(s_mask):
        axis = axis_player.index(player)
        cube = cube.take(1, axis=axis) - cube.take(0, axis=axis)
        axis_player.pop(axis)
    return cube.reshape(-1)


@dataclass
class MobiusExpansion:
    """Sparse coordinates of a game in the unanimity basis.

    `coefficients` maps bitmasks to reals; absent masks mean zero.  The
    empty set may carry a coefficient (a constant offset of the game).
    """

    n: int
    coefficients: dict[int, float] = field(default_factory=dict)

    def coefficient(self, subset) -> float:
        return self.coefficients.get(as_mask(subset, self.n), 0.0)

    def items(self):
        """(PlayerSet, coefficient) pairs in ascending mask order."""
        for mask in sorted(self.coefficients):
            yield PlayerSet(mask, self.n), self.coefficients[mask]

    def dense(self) -> np.ndarray:
        out = np.zeros(1 << self.n, dtype=np.float64)
        for mask, c in self.coefficients.items():
            out[mask] = c
        return out

    def reconstruct_value(self, subset) -> float:
        """v(S) rebuilt as the sum of coefficients over subsets of S."""
        mask = as_mask(subset, self.n)
        return fsum(c for t, c in sorted(self.coefficients.items())
                    if t & ~mask == 0)


def mobius_transform(game: Game) -> MobiusExpansion:
    """Mobius coefficients of a game, by the in-place subset-sum transform.

    O(n 2^n) over the dense table, so gated at n <= 24.  Exact zeros are
    dropped from the sparse result.
    """
    dense = mobius_dense(game)
    coefs = {int(mask): float(dense[mask]) for mask in np.flatnonzero(dense)}
    return MobiusExpansion(game.n, coefs)


def mobius_dense(game: Game) -> np.ndarray:
    """Dense 2^n array of Mobius coefficients, cached on the game."""
    cached = game.derived.get("mobius_dense")
    if cached is not None:
        return cached
    n = game.n
    out = game.dense_table().copy()
    for i in range(n):
        view = out.reshape(-1, 2, 1 << i)
        view[:, 1, :] -= view[:, 0, :]
    out.setflags(write=False)
    return game.derived.setdefault("mobius_dense", out)


def mobius_derivative_relation(game: Game, diff_set, at) -> tuple[float, float]:
    """Both sides of the coefficient/derivative identity, for checking.

    Left: the Mobius coefficient of the union of the two (disjoint) sets.
    Right: the alternating sum over W subseteq T of the S-derivative at W.
    The two agree up to roundoff; callers assert the gap.
    """
    s_mask = as_mask(diff_set, game.n)
    t_mask = as_mask(at, game.n)
    if s_mask & t_mask:
        raise ValueError("sets must be disjoint")
    union = s_mask | t_mask
    if union.bit_count() > DENSE_LIMIT:
        raise ValueError(f"combined order exceeds the {DENSE_LIMIT} guard")
    lhs = discrete_derivative(game, union, 0)  # a(T | S) as a derivative at empty
    t = t_mask.bit_count()
    rhs = fsum(signed_by_parity(t - w.bit_count())
               * discrete_derivative(game, s_mask, w)
               for w in iter_submasks(t_mask))
    return lhs, rhs
