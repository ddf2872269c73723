"""Shapley, Shapley-Taylor, and Shapley interaction indices on set functions.

Build a game (builtin family, JSON file, or external evaluator), then ask
for exact, oracle, or sampled attribution values; verify the axioms and
the Taylor-expansion identity; or run the comparative analyses.
"""

from .games import (EvaluationError, Game, PlayerSet, attach_external, combine,
                    from_function, load_game, load_mobius, load_tabular,
                    make_interaction, make_linear_crosses, make_majority,
                    make_mobius_game, make_product, make_tabular, make_unanimity,
                    relabel)
from .calculus import (MobiusExpansion, discrete_derivative,
                       mobius_derivative_relation, mobius_transform)
from .indices import (IndexResult, efficiency_residual, restrict_players, shapley,
                      sii_exact, sii_index, sii_main_effects, stv_exact,
                      stv_permutation_oracle)
from .sampling import (SamplingPlan, required_samples, sample_permutation,
                       stv_sampled, stv_sampled_mom)
from .multilinear import (TaylorReport, lagrange_remainder_term,
                          mixed_partial_diagonal, multilinear_eval,
                          taylor_identity_check)
from .analysis import (CrossRanking, MajoritySweepRow, aggregate_crosses,
                       cross_comparison, majority_sweep)
from .axioms import AxiomCheck, run_axiom_checks

__version__ = "0.1.0"

__all__ = [
    "AxiomCheck", "CrossRanking", "EvaluationError", "Game", "IndexResult",
    "MajoritySweepRow", "MobiusExpansion", "PlayerSet", "SamplingPlan",
    "TaylorReport", "aggregate_crosses", "attach_external", "combine",
    "cross_comparison", "discrete_derivative", "efficiency_residual",
    "from_function", "lagrange_remainder_term", "load_game", "load_mobius",
    "load_tabular", "majority_sweep", "make_interaction", "make_linear_crosses",
    "make_majority", "make_mobius_game", "make_product", "make_tabular",
    "make_unanimity", "mixed_partial_diagonal", "mobius_derivative_relation",
    "mobius_transform", "multilinear_eval", "relabel", "required_samples",
    "restrict_players", "run_axiom_checks", "sample_permutation", "shapley",
    "sii_exact", "sii_index", "sii_main_effects", "stv_exact",
    "stv_permutation_oracle", "stv_sampled", "stv_sampled_mom",
    "taylor_identity_check",
]
