"""Exact, XP and FPT solvers for incremental stable matching."""
from ..core import Objective
from .agent_types import agent_types, solve_ismt_agent_types
from .almost import count_blockers, solve_iasm_exact, solve_iasm_xp_b, solve_iasm_xp_k
from .incremental import clone_hospitals, resident_optimal, solve_ihr, solve_ism
from .stable import (
    EdgeWeights,
    Rotation,
    RotationPoset,
    build_rotation_poset,
    gale_shapley,
    max_weight_stable_matching,
)

__all__ = [
    "EdgeWeights", "Objective", "Rotation", "RotationPoset", "agent_types",
    "build_rotation_poset", "clone_hospitals", "count_blockers", "gale_shapley",
    "max_weight_stable_matching", "resident_optimal", "solve_iasm_exact",
    "solve_iasm_xp_b", "solve_iasm_xp_k", "solve_ihr", "solve_ism",
    "solve_ismt_agent_types",
]
