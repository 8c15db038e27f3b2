"""Stochastic runoff on hill-slope lattices and critical drainage trees."""
from .analytics import ExactSolution, Regime, Tail, alpha_c, solve
from .core import BinaryParams, ParameterError, RngStream, XLaw
from .general_x import GeneralSolution, solve_general
from .runoff import LabeledTree, compute_runoff, maxsum_oracle
from .trees import SampleCaps, Tree, sample_bgw, sample_diamond_tree

__all__ = [
    "BinaryParams", "ExactSolution", "GeneralSolution", "LabeledTree", "ParameterError",
    "Regime", "RngStream", "SampleCaps", "Tail", "Tree", "XLaw", "alpha_c", "compute_runoff",
    "maxsum_oracle", "sample_bgw", "sample_diamond_tree", "solve", "solve_general",
]
