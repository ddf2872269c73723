"""Exact attribution indices: Shapley, Shapley-Taylor, and Shapley interaction.

The Shapley-Taylor index of order k assigns a value to every subset of at
most k players: sets smaller than k get the discrete derivative at the
empty set, sets of size exactly k get a weighted sweep of derivatives over
the complement.  The weights come from averaging over uniformly random
orderings; `stv_permutation_oracle` recomputes the size-k case by literal
enumeration of all n! orderings and exists purely as a cross-check.

The Shapley interaction index is the older alternative with factorial
weights.  It does not satisfy efficiency; `sii_main_effects` adds the
usual repair convention (subtract half of each pairwise interaction from
the Shapley value), which restores efficiency by construction.

Summations over subsets use math.fsum, which is exactly rounded, so
results do not depend on iteration or thread order.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial, fsum

import numpy as np

from .calculus import derivative_table, iter_submasks, masks_of_size, signed_by_parity
from .games import (DENSE_LIMIT, Game, PlayerSet, as_mask, ids_from_mask,
                    mask_from_ids, popcounts)

ORACLE_LIMIT = 8  # n! permutations are enumerated outright


@dataclass
class IndexResult:
    """Attribution values for all scored subsets, tagged with provenance.

    values maps PlayerSet -> real for every subset that was scored; meta
    records how they were produced (exact / oracle / sampled, sample
    count, seed, and similar knobs).
    """

    method: str
    k: int
    values: dict[PlayerSet, float]
    meta: dict = field(default_factory=dict)

    def get(self, subset, n: int | None = None) -> float:
        if isinstance(subset, PlayerSet):
            return self.values[subset]
        if n is None:
            n = next(iter(self.values)).n
        return self.values[PlayerSet(as_mask(subset, n), n)]

    def total(self) -> float:
        """Sum of all stored values (exactly rounded)."""
        return fsum(self.values.values())

    def sorted_items(self) -> list[tuple[PlayerSet, float]]:
        return sorted(self.values.items(), key=lambda kv: (kv[0].size, kv[0].bits))

    def to_csv(self) -> str:
        lines = ["set,size,method,k,value"]
        for pset, val in self.sorted_items():
            ids = " ".join(str(i) for i in pset.members())
            lines.append(f"{ids},{pset.size},{self.method},{self.k},{val!r}")
        return "\n".join(lines) + "\n"

    def to_json_document(self) -> dict:
        return {
            "method": self.method,
            "k": self.k,
            "meta": self.meta,
            "values": [
                {"set": list(pset.members()), "size": pset.size,
                 "method": self.method, "k": self.k, "value": val}
                for pset, val in self.sorted_items()
            ],
        }


def _pmap(fn, items, threads: int):
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _require_dense(game: Game, what: str):
    if game.n > DENSE_LIMIT:
        raise ValueError(f"{what} needs n <= {DENSE_LIMIT}, got n={game.n}")


def derivative_at_empty(table: np.ndarray, s_mask: int) -> float:
    """Discrete derivative at the empty set, straight off the dense table."""
    s = s_mask.bit_count()
    return fsum(signed_by_parity(s - w.bit_count()) * float(table[w])
                for w in iter_submasks(s_mask))


def stv_taylor_weights(n: int, k: int) -> np.ndarray:
    """Order-k sweep weight per complement size t, exact ratios as floats."""
    return np.array([float(Fraction(k, n * comb(n - 1, t)))
                     for t in range(n - k + 1)], dtype=np.float64)


def sii_weights(n: int, s: int) -> np.ndarray:
    """Interaction-index weight per complement size t, exact ratios as floats."""
    return np.array(
        [float(Fraction(factorial(n - t - s) * factorial(t), factorial(n - s + 1)))
         for t in range(n - s + 1)], dtype=np.float64)


def stv_exact(game: Game, k: int, threads: int = 1) -> IndexResult:
    """Order-k Shapley-Taylor values for every subset of size 1..k.

    Sizes below k get the derivative at the empty set; size k gets the
    closed-form weighted sweep over the complement.  The result satisfies
    efficiency: the values sum to v(N) - v(0) up to roundoff.
    """
    n = game.n
    if not 1 <= k <= n:
        raise ValueError(f"order k must be in 1..{n}, got {k}")
    _require_dense(game, "exact index computation")
    table = game.dense_table()
    values: dict[PlayerSet, float] = {}
    for j in range(1, k):
        for s_mask in masks_of_size(n, j):
            values[PlayerSet(s_mask, n)] = derivative_at_empty(table, s_mask)
    weights = stv_taylor_weights(n, k)
    sizes = popcounts(1 << (n - k))
    targets = list(masks_of_size(n, k))

    def sweep(s_mask: int) -> float:
        deriv = derivative_table(table, n, s_mask)
        return fsum((deriv * weights[sizes]).tolist())

    for s_mask, val in zip(targets, _pmap(sweep, targets, threads)):
        values[PlayerSet(s_mask, n)] = val
    return IndexResult("stv", k, values, {"mode": "exact"})


def shapley(game: Game, threads: int = 1) -> IndexResult:
    """Classic Shapley values: the order-1 Shapley-Taylor index."""
    result = stv_exact(game, 1, threads=threads)
    return IndexResult("shapley", 1, result.values, result.meta)


def stv_permutation_oracle(game: Game, k: int) -> IndexResult:
    """Order-k values by exact averaging over all n! player orderings.

    Brute-force oracle for `stv_exact`: for each size-k set the derivative
    is taken at the set of players preceding all its members, tallied over
    every ordering, and divided by n!.  Gated to n <= 8.
    """
    n = game.n
    if n > ORACLE_LIMIT:
        raise ValueError(
            f"permutation oracle enumerates n! orderings; needs n <= {ORACLE_LIMIT}")
    if not 1 <= k <= n:
        raise ValueError(f"order k must be in 1..{n}, got {k}")
    table = game.dense_table()
    values: dict[PlayerSet, float] = {}
    for j in range(1, k):
        for s_mask in masks_of_size(n, j):
            values[PlayerSet(s_mask, n)] = derivative_at_empty(table, s_mask)

    targets = list(masks_of_size(n, k))
    members = [ids_from_mask(m) for m in targets]
    derivs = [derivative_table(table, n, m) for m in targets]
    # packed index of each n-bit mask within a target's complement
    pack = []
    for s_mask in targets:
        rest = ids_from_mask(((1 << n) - 1) & ~s_mask)
        lut = np.zeros(1 << n, dtype=np.int64)
        for mask in range(1 << n):
            lut[mask] = sum(((mask >> p) & 1) << j for j, p in enumerate(rest))
        pack.append(lut)

    counts = [np.zeros(1 << (n - k), dtype=np.int64) for _ in targets]
    pos = [0] * n
    for perm in itertools.permutations(range(n)):
        prefixes = [0] * (n + 1)
        acc = 0
        for i, player in enumerate(perm):
            pos[player] = i
            acc |= 1 << player
            prefixes[i + 1] = acc
        for idx, mem in enumerate(members):
            first = min(pos[p] for p in mem)
            counts[idx][pack[idx][prefixes[first]]] += 1

    total = factorial(n)
    for idx, s_mask in enumerate(targets):
        acc = fsum((counts[idx].astype(np.float64) * derivs[idx]).tolist())
        values[PlayerSet(s_mask, n)] = acc / total
    return IndexResult("stv", k, values, {"mode": "permutation-oracle"})


def sii_exact(game: Game, subset) -> float:
    """Shapley interaction index of one nonempty subset."""
    n = game.n
    s_mask = as_mask(subset, n)
    if s_mask == 0:
        raise ValueError("interaction index needs a nonempty subset")
    _require_dense(game, "exact index computation")
    table = game.dense_table()
    weights = sii_weights(n, s_mask.bit_count())
    sizes = popcounts(1 << (n - s_mask.bit_count()))
    deriv = derivative_table(table, n, s_mask)
    return fsum((deriv * weights[sizes]).tolist())


def sii_index(game: Game, k: int, threads: int = 1) -> IndexResult:
    """Shapley interaction indices for every subset of size 1..k."""
    n = game.n
    if not 1 <= k <= n:
        raise ValueError(f"order k must be in 1..{n}, got {k}")
    _require_dense(game, "exact index computation")
    masks = [m for j in range(1, k + 1) for m in masks_of_size(n, j)]
    vals = _pmap(lambda m: sii_exact(game, m), masks, threads)
    values = {PlayerSet(m, n): v for m, v in zip(masks, vals)}
    return IndexResult("sii", k, values, {"mode": "exact"})


def sii_main_effects(game: Game, threads: int = 1) -> IndexResult:
    """Pairwise interaction indices plus efficiency-restoring main effects.

    The interaction index defines no main effects of its own; the usual
    convention subtracts half of each pairwise interaction from the
    player's Shapley value.  Main effects and pairs then sum to
    v(N) - v(0) by construction.
    """
    n = game.n
    _require_dense(game, "exact index computation")
    phi = stv_exact(game, 1, threads=threads)
    pair_masks = list(masks_of_size(n, 2))
    pair_vals = dict(zip(pair_masks,
                         _pmap(lambda m: sii_exact(game, m), pair_masks, threads)))
    values: dict[PlayerSet, float] = {}
    for i in range(n):
        own = phi.values[PlayerSet(1 << i, n)]
        cross = fsum(v for m, v in sorted(pair_vals.items()) if m >> i & 1)
        values[PlayerSet(1 << i, n)] = own - 0.5 * cross
    for m, v in pair_vals.items():
        values[PlayerSet(m, n)] = v
    return IndexResult("sii", 2, values,
                       {"mode": "exact", "convention": "main-effects"})


def efficiency_residual(result: IndexResult, game: Game) -> float:
    """Sum of all attribution values minus v(N) - v(0)."""
    return result.total() - game.span()


def restrict_players(game: Game, keep, fill: str = "baseline") -> Game:
    """Induced game on a nonempty subset of the players.

    Players outside `keep` are frozen: absent under fill="baseline",
    present under fill="grand".  The kept players are renumbered
    0..m-1 in ascending original id; the mapping is recorded in params.
    """
    keep_mask = as_mask(keep, game.n)
    if keep_mask == 0:
        raise ValueError("must keep at least one player")
    if fill not in ("baseline", "grand"):
        raise ValueError(f"fill must be 'baseline' or 'grand', got {fill!r}")
    kept = ids_from_mask(keep_mask)
    outside = ((1 << game.n) - 1) & ~keep_mask
    base = outside if fill == "grand" else 0

    def fn(sub_mask: int) -> float:
        lifted = base
        for j, player in enumerate(kept):
            if sub_mask >> j & 1:
                lifted |= 1 << player
        return game.value(lifted)

    return Game(len(kept), fn, "restricted",
                {"kept": kept, "fill": fill, "parent": game.kind})


def relabel_result(result: IndexResult, kept: tuple[int, ...], n: int) -> IndexResult:
    """Map a restricted game's result back to the original player ids."""
    values = {}
    for pset, val in result.values.items():
        original = mask_from_ids(kept[j] for j in pset.members())
        values[PlayerSet(original, n)] = val
    meta = dict(result.meta)
    meta["restricted_to"] = list(kept)
    return IndexResult(result.method, result.k, values, meta)
