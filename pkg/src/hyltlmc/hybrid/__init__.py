"""Hybrid automata: valuations, trajectories, constraints, composition."""

from .automaton import (
    GBHA,
    HybridAutomaton,
    Transition,
    accepts,
    compose,
    discrete_step,
    is_generated,
)
from .constraints import (
    FlowConstraint,
    JumpConstraint,
    Relation,
    complement_of,
    satisfies_jump,
)
from .lasso import HybridLassoTrace
from .trajectory import DEFAULT_FLOW_TOL, SampledTrajectory, satisfies_flow
from .valuation import Valuation

__all__ = [
    "GBHA",
    "HybridAutomaton",
    "Transition",
    "accepts",
    "compose",
    "discrete_step",
    "is_generated",
    "FlowConstraint",
    "JumpConstraint",
    "Relation",
    "complement_of",
    "satisfies_jump",
    "HybridLassoTrace",
    "DEFAULT_FLOW_TOL",
    "SampledTrajectory",
    "satisfies_flow",
    "Valuation",
]
