"""Hooke-Jeeves direct search over bounded amplitude vectors.

The search maximizes a black-box objective without gradients.  Each cycle
first adjusts one coordinate at a time by ±alpha (exploratory phase, n to 2n
objective queries), then extrapolates once along the net displacement of the
cycle (pattern move, 1 query).  A cycle without strict improvement shrinks
alpha by the factor rho; the search stops when alpha falls below alpha_min
or the query budget runs out.

Every trial point is clipped into the bounds *before* it is queried, and a
clipped trial that coincides with the incumbent still costs a query: in the
online setting every parameter change is an experiment.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ObjectiveError, ParameterError
from .waveform import AmplitudeBounds

DETERMINISTIC = "deterministic-objective"
SEED_PER_CYCLE = "fixed-seed-per-cycle"
SEED_PER_QUERY = "fresh-seed-per-query"
_SEED_POLICIES = (DETERMINISTIC, SEED_PER_CYCLE, SEED_PER_QUERY)


@dataclass(frozen=True)
class OptimizerConfig:
    """Search hyperparameters.

    ``seed_policy`` controls how stochastic objectives are seeded: a
    deterministic objective is called as f(u); the seeded policies call
    f(u, seed) with a seed derived from ``base_seed`` and either the cycle
    or the query counter, so the whole trajectory replays exactly.
    """

    bounds: AmplitudeBounds = field(default_factory=AmplitudeBounds)
    alpha0: float = 0.1
    rho: float = 0.5
    alpha_min: float = 1e-3
    max_queries: int = 5000
    seed_policy: str = DETERMINISTIC
    base_seed: int = 0

    def __post_init__(self) -> None:
        if not (0 < self.alpha_min < self.alpha0):
            raise ParameterError(
                f"need 0 < alpha_min < alpha0, got {self.alpha_min}, {self.alpha0}"
            )
        if not (0 < self.rho < 1):
            raise ParameterError(f"rho must lie in (0, 1), got {self.rho}")
        if self.max_queries < 1:
            raise ParameterError(f"max_queries must be >= 1, got {self.max_queries}")
        if self.seed_policy not in _SEED_POLICIES:
            raise ParameterError(f"unknown seed policy {self.seed_policy!r}")


@dataclass
class QueryRecord:
    """One objective evaluation, in query order."""

    query_index: int
    cycle: int
    u: np.ndarray
    value: float
    alpha: float
    accepted: bool

    def as_dict(self) -> dict:
        return {
            "query_index": self.query_index,
            "cycle": self.cycle,
            "u": [float(x) for x in self.u],
            "value": float(self.value),
            "alpha": float(self.alpha),
            "accepted": bool(self.accepted),
        }


@dataclass
class OptimizerState:
    """Mutable state of one search run, including the full query history."""

    config: OptimizerConfig
    current: np.ndarray
    current_value: float
    best: np.ndarray
    best_value: float
    alpha: float
    queries: int = 0
    iterations: int = 0
    cycle: int = 0
    budget_exhausted: bool = False
    history: list[QueryRecord] = field(default_factory=list)


def _derive_seed(base_seed: int, index: int) -> int:
    # disjoint per-index streams; documented so logs can be replayed
    return (int(base_seed) << 32) + int(index)


def _evaluate(state: OptimizerState, objective, u: np.ndarray) -> float:
    policy = state.config.seed_policy
    if policy == DETERMINISTIC:
        value = objective(u)
    elif policy == SEED_PER_CYCLE:
        value = objective(u, _derive_seed(state.config.base_seed, state.cycle))
    else:
        value = objective(u, _derive_seed(state.config.base_seed, state.queries))
    value = float(value)
    if not np.isfinite(value):
        raise ObjectiveError(f"objective returned {value} at u = {u.tolist()}")
    return value


def _query(state: OptimizerState, objective, u: np.ndarray) -> tuple[float, QueryRecord]:
    value = _evaluate(state, objective, u)
    record = QueryRecord(
        query_index=state.queries, cycle=state.cycle, u=u.copy(),
        value=value, alpha=state.alpha, accepted=False,
    )
    state.queries += 1
    state.history.append(record)
    if value > state.best_value:
        state.best_value = value
        state.best = u.copy()
    return value, record


def _budget_left(state: OptimizerState) -> bool:
    if state.queries >= state.config.max_queries:
        state.budget_exhausted = True
        return False
    return True


def exploratory_move(state: OptimizerState, objective) -> OptimizerState:
    """Adjust each coordinate in turn by ±alpha, keeping strict improvements.

    For every coordinate the +alpha trial is queried first; only if it fails
    to strictly improve on the incumbent is the -alpha trial queried.  Costs
    between n and 2n queries for an n-vector.  Returns with
    ``budget_exhausted`` set if the budget runs out mid-phase.
    """
    bounds = state.config.bounds
    for i in range(state.current.size):
        for sign in (+1.0, -1.0):
            if not _budget_left(state):
                return state
            trial = state.current.copy()
            trial[i] = bounds.clip(state.current[i] + sign * state.alpha)
            value, record = _query(state, objective, trial)
            if value > state.current_value:
                record.accepted = True
                state.current = trial
                state.current_value = value
                break
    return state


def pattern_move(state: OptimizerState, base: np.ndarray, objective) -> OptimizerState:
    """Extrapolate once from the cycle's starting point through the incumbent.

    The trial is current + (current - base), clipped into the bounds, and is
    accepted only on strict improvement.  Always costs one query, even when
    the exploratory phase made no progress so the trial equals the incumbent.
    """
    if not _budget_left(state):
        return state
    trial = state.config.bounds.clip(state.current + (state.current - base))
    value, record = _query(state, objective, trial)
    if value > state.current_value:
        record.accepted = True
        state.current = trial
        state.current_value = value
    return state


def hj_optimize(objective, u0, cfg: OptimizerConfig) -> OptimizerState:
    """Run the full search from ``u0`` and return the final state.

    The first query evaluates the starting point; each subsequent cycle is
    an exploratory phase followed by one pattern move (n+1 to 2n+1 queries
    per cycle).  alpha shrinks by rho exactly on cycles whose best value did
    not improve.  The incumbent best-value sequence is non-decreasing and,
    with a deterministic objective, the whole trajectory is a pure function
    of (u0, cfg).
    """
    u0 = np.asarray(u0, dtype=float).ravel().copy()
    if u0.size < 1:
        raise ParameterError("starting point must have at least one coordinate")
    if not cfg.bounds.contains(u0):
        raise ParameterError(
            f"starting point outside bounds [{cfg.bounds.lo}, {cfg.bounds.hi}]: {u0}"
        )
    state = OptimizerState(
        config=cfg, current=u0.copy(), current_value=-np.inf,
        best=u0.copy(), best_value=-np.inf, alpha=cfg.alpha0,
    )
    value, record = _query(state, objective, u0)
    record.accepted = True
    state.current_value = value
    state.best_value = value
    state.best = u0.copy()

    while state.alpha >= cfg.alpha_min and _budget_left(state):
        state.cycle += 1
        base = state.current.copy()
        value_before = state.best_value
        exploratory_move(state, objective)
        if state.budget_exhausted:
            break
        pattern_move(state, base, objective)
        if state.budget_exhausted:
            break
        state.iterations += 1
        if state.best_value <= value_before:
            state.alpha *= cfg.rho
    return state
