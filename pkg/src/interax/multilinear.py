"""Multilinear extension of a game and its Taylor/remainder identities.

The multilinear extension f is the unique multilinear polynomial agreeing
with the game on the hypercube corners; f(x) is the expected game value
when player i joins independently with probability x_i.  Along the
diagonal x = (t, ..., t), the order-j Taylor terms of f at 0 reproduce the
size-j Shapley-Taylor values (j < k), and the size-k values are the
Lagrange remainder integrals

    integral_0^1 k (1-t)^(k-1) D_S f(t, ..., t) dt.

The remainder is computed two independent ways: analytically, with exact
integer Beta weights 1 / C(w+k, k), and by adaptive Simpson quadrature of
the diagonal mixed partial.  The quadrature path exists purely as an
oracle for the analytic one.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, fsum

import numpy as np

from .calculus import masks_of_size, mobius_dense
from .games import Game, as_mask, ids_from_mask, popcounts

TAYLOR_LIMIT = 20
_QUAD_TOL = 1e-9


def multilinear_eval(game: Game, point) -> float:
    """f(x) for componentwise x in [0, 1], via the Mobius form.

    f(x) is the coefficient-weighted sum of monomials prod_{i in T} x_i;
    at a binary corner it reproduces the game value.
    """
    x = np.asarray(point, dtype=np.float64)
    if x.shape != (game.n,):
        raise ValueError(f"point must have {game.n} coordinates, got shape {x.shape}")
    if np.any(x < 0.0) or np.any(x > 1.0):
        raise ValueError("coordinates must lie in [0, 1]")
    coefs = mobius_dense(game)
    monomials = np.ones(1, dtype=np.float64)
    for i in range(game.n):
        monomials = np.concatenate([monomials, monomials * x[i]])
    products = coefs * monomials
    if game.n <= 16:
        return fsum(products.tolist())
    return float(np.sum(products))


def diagonal_partial_poly(game: Game, subset) -> np.ndarray:
    """Coefficients c[w] with D_S f(t,...,t) = sum_w c[w] t^w.

    c[w] collects the Mobius coefficients of supersets of S that add w
    extra players.  Cached per (game, subset).
    """
    s_mask = as_mask(subset, game.n)
    key = ("diagonal-poly", s_mask)
    cached = game.derived.get(key)
    if cached is not None:
        return cached
    n = game.n
    cube = mobius_dense(game).reshape((2,) * n)
    axis_player = list(range(n - 1, -1, -1))
    for player in ids_from_mask(s_mask):
        axis = axis_player.index(player)
        cube = cube.take(1, axis=axis)
        axis_player.pop(axis)
    supersets = cube.reshape(-1)
    extra = popcounts(supersets.size)
    poly = np.bincount(extra, weights=supersets,
                       minlength=n - s_mask.bit_count() + 1)
    poly.setflags(write=False)
    return game.derived.setdefault(key, poly)


def mixed_partial_diagonal(game: Game, subset, t: float) -> float:
    """The mixed partial of f over `subset`, evaluated on the diagonal at t."""
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"diagonal coordinate must be in [0, 1], got {t}")
    poly = diagonal_partial_poly(game, subset)
    acc = 0.0
    for c in poly[::-1]:
        acc = acc * t + float(c)
    return acc


def adaptive_simpson(fn, a: float, b: float, tol: float,
                     max_depth: int = 40) -> float:
    """Adaptive Simpson quadrature with Richardson correction."""
    fa, fb = fn(a), fn(b)
    mid = 0.5 * (a + b)
    fm = fn(mid)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(a, fa, b, fb, mid, fm, whole, tol, depth):
        lm = 0.5 * (a + mid)
        rm = 0.5 * (mid + b)
        flm, frm = fn(lm), fn(rm)
        left = (mid - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - mid) / 6.0 * (fm + 4.0 * frm + fb)
        delta = left + right - whole
        if depth <= 0 or abs(delta) <= 15.0 * tol:
            return left + right + delta / 15.0
        return (recurse(a, fa, mid, fm, lm, flm, left, 0.5 * tol, depth - 1)
                + recurse(mid, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1))

    return recurse(a, fa, b, fb, mid, fm, whole, tol, max_depth)


def lagrange_remainder_term(game: Game, subset, k: int,
                            mode: str = "analytic") -> float:
    """The size-k remainder integral for one subset, |subset| = k.

    mode="analytic" sums Mobius coefficients against exact Beta weights
    1/C(w+k, k); mode="quadrature" integrates the diagonal mixed partial
    numerically.  Both equal the subset's order-k Shapley-Taylor value.
    """
    s_mask = as_mask(subset, game.n)
    if s_mask.bit_count() != k:
        raise ValueError(
            f"remainder term needs |subset| = k; got size {s_mask.bit_count()} "
            f"with k={k}")
    poly = diagonal_partial_poly(game, s_mask)
    if mode == "analytic":
        return fsum(float(poly[w]) * float(Fraction(1, comb(w + k, k)))
                    for w in range(poly.size))
    if mode == "quadrature":
        def integrand(t: float) -> float:
            acc = 0.0
            for c in poly[::-1]:
                acc = acc * t + float(c)
            return k * (1.0 - t) ** (k - 1) * acc

        return adaptive_simpson(integrand, 0.0, 1.0, _QUAD_TOL)
    raise ValueError(f"mode must be 'analytic' or 'quadrature', got {mode!r}")


@dataclass
class TaylorReport:
    """Outcome of the truncated-expansion identity check."""

    k: int
    lhs: float                 # v(N) - v(0)
    lower_order_total: float   # sum of diagonal partials at 0, sizes < k
    remainder_total: float     # sum of remainder terms, size k
    rhs: float
    abs_error: float
    tolerance: float
    remainder_mode: str
    passed: bool


def taylor_identity_check(game: Game, k: int,
                          remainder_mode: str = "analytic") -> TaylorReport:
    """Check v(N) - v(0) against the order-(k-1) expansion plus remainder.

    The left side is evaluated directly on the game; the right side sums
    diagonal mixed partials at 0 for sizes below k and remainder terms for
    size k.  Passes when the two agree to 1e-7 relative.
    """
    n = game.n
    if n > TAYLOR_LIMIT:
        raise ValueError(f"identity check needs n <= {TAYLOR_LIMIT}, got n={n}")
    if not 1 <= k <= n:
        raise ValueError(f"order k must be in 1..{n}, got {k}")
    lhs = game.span()
    coefs = mobius_dense(game)
    lower_terms = [float(coefs[s_mask])
                   for j in range(1, k)
                   for s_mask in masks_of_size(n, j)]
    remainder_terms = [lagrange_remainder_term(game, s_mask, k, remainder_mode)
                       for s_mask in masks_of_size(n, k)]
    lower_total = fsum(lower_terms)
    remainder_total = fsum(remainder_terms)
    rhs = fsum(lower_terms + remainder_terms)
    tolerance = 1e-7 * max(1.0, abs(lhs))
    abs_error = abs(lhs - rhs)
    return TaylorReport(k, lhs, lower_total, remainder_total, rhs,
                        abs_error, tolerance, remainder_mode,
                        abs_error <= tolerance)


def multilinear_eval_probability_form(game: Game, point) -> float:
    """f(x) straight from the definition: expectation over random subsets.

    Sums v(S) prod_{i in S} x_i prod_{i not in S} (1 - x_i) over all S.
    Quadratically slower bookkeeping than the Mobius route; kept as an
    independent reference for tests.
    """
    x = np.asarray(point, dtype=np.float64)
    if x.shape != (game.n,):
        raise ValueError(f"point must have {game.n} coordinates, got shape {x.shape}")
    if np.any(x < 0.0) or np.any(x > 1.0):
        raise ValueError("coordinates must lie in [0, 1]")
    table = game.dense_table()
    weights = np.ones(1, dtype=np.float64)
    for i in range(game.n):
        weights = np.concatenate([weights * (1.0 - x[i]), weights * x[i]])
    return fsum((table * weights).tolist())
