"""Structure and parameter learning."""

from ..network import BayesianNetwork, Cpt, parameter_count
from .params import EMResult, fit_cpts_em, fit_cpts_mle
from .pc import CITestResult, PCResult, chi_square_ci_test, pc_learn, pc_search
from .score import BDEU, BIC, ScoreCache, ScoreSpec, family_score, graph_score, score_counts
from .search import SearchResult, hill_climb, hill_climb_search

__all__ = [
    "BDEU",
    "BIC",
    "BayesianNetwork",
    "CITestResult",
    "Cpt",
    "EMResult",
    "PCResult",
    "ScoreCache",
    "ScoreSpec",
    "SearchResult",
    "chi_square_ci_test",
    "family_score",
    "fit_cpts_em",
    "fit_cpts_mle",
    "graph_score",
    "hill_climb",
    "hill_climb_search",
    "parameter_count",
    "pc_learn",
    "pc_search",
    "score_counts",
]
