"""Shared test helpers: seeded game factories and independent mini-oracles."""

import itertools
from fractions import Fraction
from math import factorial

from interax import make_tabular
from interax.games import ids_from_mask


def random_tabular(rng, n, scale=1.0):
    """Dense game with iid normal values (empty set included)."""
    return make_tabular(n, scale * rng.normal(size=1 << n))


def derivative_recursive(game, s_mask, t_mask):
    """Discrete derivative by the recursive marginal definition.

    Independent of the library's alternating-sum path: peels one player
    at a time, d_S v(T) = d_{S-i} v(T+i) - d_{S-i} v(T).
    """
    if s_mask == 0:
        return game.value(t_mask)
    low = s_mask & -s_mask
    rest = s_mask ^ low
    return (derivative_recursive(game, rest, t_mask | low)
            - derivative_recursive(game, rest, t_mask))


def shapley_by_orderings(game):
    """Shapley values by literal averaging of marginals over all orderings."""
    n = game.n
    totals = [0.0] * n
    for perm in itertools.permutations(range(n)):
        mask = 0
        for player in perm:
            totals[player] += game.value(mask | (1 << player)) - game.value(mask)
            mask |= 1 << player
    count = factorial(n)
    return [t / count for t in totals]


def sii_exact_fractions(game, s_mask):
    """Interaction index in exact rational arithmetic (floats lifted exactly)."""
    n = game.n
    s = bin(s_mask).count("1")
    rest = [p for p in range(n) if not s_mask >> p & 1]
    total = Fraction(0)
    for r in range(len(rest) + 1):
        for combo in itertools.combinations(rest, r):
            t_mask = 0
            for p in combo:
                t_mask |= 1 << p
            weight = Fraction(factorial(n - r - s) * factorial(r),
                              factorial(n - s + 1))
            deriv = Fraction(0)
            for w_players in _submask_players(s_mask):
                sign = -1 if (s - len(w_players)) & 1 else 1
                w_mask = 0
                for p in w_players:
                    w_mask |= 1 << p
                deriv += sign * Fraction(game.value(w_mask | t_mask))
            total += weight * deriv
    return float(total)


def _submask_players(mask):
    players = ids_from_mask(mask)
    for r in range(len(players) + 1):
        yield from itertools.combinations(players, r)


def all_masks_of_size(n, size):
    out = []
    for combo in itertools.combinations(range(n), size):
        mask = 0
        for p in combo:
            mask |= 1 << p
        out.append(mask)
    return out
