from .inner import InnerWorkspace, inner_convex, kkt_residual
from .methods import (round_lp, solve_alp, solve_irls, solve_linf_relaxation,
                      solve_manppa, solve_rgd, solve_rsg, solve_rtr)
from .pipeline import (MatchReport, deflate, init_spectral, match_atoms,
                       recover_dictionary)
from .types import (CONVERGED, MAX_ITERS, SUBPROBLEM_FAIL, Backtracking,
                    Constant, Geometric, InnerSettings, PolyDecay, SolveResult,
                    SolverConfig, Trace, TrustRegionSettings)

__all__ = [
    "InnerWorkspace", "inner_convex", "kkt_residual",
    "round_lp", "solve_alp", "solve_irls", "solve_linf_relaxation",
    "solve_manppa", "solve_rgd", "solve_rsg", "solve_rtr",
    "MatchReport", "deflate", "init_spectral", "match_atoms",
    "recover_dictionary",
    "CONVERGED", "MAX_ITERS", "SUBPROBLEM_FAIL",
    "Backtracking", "Constant", "Geometric", "PolyDecay",
    "InnerSettings", "SolveResult", "SolverConfig", "Trace",
    "TrustRegionSettings",
]
