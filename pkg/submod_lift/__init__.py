"""
Multi-agent submodular optimization through lifting reductions
"""

from .blockers import (BlockingFamily, CardinalityFamily, Clutter, EdgeCoverFamily,
                       ExplicitBlockingFamily, HittingSetFamily, StPathFamily, VertexCoverFamily)
from .config import DEFAULT_SETTINGS, Settings
from .exceptions import (ArityMismatchError, BoundViolationError, CapExceededError,
                         ConvergenceError, DomainMismatchError, InfeasibleError,
                         InstanceParseError, InvalidRingError, PreconditionError, StageError,
                         SubmodError, UnsupportedOperationError)
from .harness import bench, run
from .lifting import LiftedGroundSet, lift_constraint, lift_oracle
from .matroids import Matroid, MatroidIntersection, verify_matroid_axioms
from .maximize import greedy_max, ma_maximize, robust_maximize
from .minimize import (fracture_expand_return, ma_bounded_blocker_round, msca_bmatching,
                       msca_greedy, mv_reduce_k_alpha, solve_ma_lp, solve_sa_lp)
from .models import GroundSet, MultiAgentSolution, ReportRecord, SetTuple, Subset
from .oracles import MultivariateOracle, SubmodularOracle
from .parser import InstanceFileParser, InstanceParser, Problem
from .sfm import RingFamily, lovasz, sfm_minimize

__version__ = "1.0.0"
__all__ = [
    'GroundSet',
    'Subset',
    'SetTuple',
    'MultiAgentSolution',
    'ReportRecord',
    'SubmodularOracle',
    'MultivariateOracle',
    'Matroid',
    'MatroidIntersection',
    'verify_matroid_axioms',
    'LiftedGroundSet',
    'lift_oracle',
    'lift_constraint',
    'BlockingFamily',
    'Clutter',
    'CardinalityFamily',
    'EdgeCoverFamily',
    'ExplicitBlockingFamily',
    'HittingSetFamily',
    'StPathFamily',
    'VertexCoverFamily',
    'RingFamily',
    'lovasz',
    'sfm_minimize',
    'greedy_max',
    'ma_maximize',
    'robust_maximize',
    'solve_sa_lp',
    'solve_ma_lp',
    'ma_bounded_blocker_round',
    'fracture_expand_return',
    'mv_reduce_k_alpha',
    'msca_greedy',
    'msca_bmatching',
    'InstanceParser',
    'InstanceFileParser',
    'Problem',
    'run',
    'bench',
    'Settings',
    'DEFAULT_SETTINGS',
    'SubmodError',
    'DomainMismatchError',
    'ArityMismatchError',
    'PreconditionError',
    'UnsupportedOperationError',
    'CapExceededError',
    'InfeasibleError',
    'InvalidRingError',
    'ConvergenceError',
    'StageError',
    'BoundViolationError',
    'InstanceParseError',
]
