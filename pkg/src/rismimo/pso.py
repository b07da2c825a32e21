"""Particle swarm optimization of the RIS phase shifts.

Fitness is the negated closed-form sum rate, so lower is better and the
global best is monotonically nonincreasing by construction.  The inertia
weight adapts through a stagnation counter: improvements shrink the counter
and rescale the inertia (doubled while the counter is small, halved once it
is large), stalls grow the counter and leave the inertia untouched.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .channels import LinkGains
from .config import TWO_PI, ScenarioConfig, wrap_angle
from .rates import PhaseVector, RateContext, phase_grid_value
from .rng import substream

Objective = Callable[[np.ndarray], np.ndarray]


@dataclass
class PsoParams:
    """Swarm hyperparameters; defaults follow the evaluation setup
    (L = min(100, 10N), T = 200N, v_max = 2*pi, omega = 0.9, c1 = c2 = 1.49).
    """

    swarm: int
    iterations: int
    v_max: float = TWO_PI
    omega0: float = 0.9
    c1: float = 1.49
    c2: float = 1.49
    omega_bounds: tuple = (0.1, 1.1)
    per_dimension_r: bool = False     # draw r1, r2 per dimension instead of per particle
    memoryless_counter: bool = False  # literal variant: reset the counter every iteration

    def __post_init__(self):
        if self.swarm < 1:
            raise ValueError(f"swarm size must be >= 1; got {self.swarm}")
        if self.iterations < 0:
            raise ValueError(f"iteration count must be >= 0; got {self.iterations}")
        if not self.v_max > 0:
            raise ValueError(f"v_max must be > 0; got {self.v_max}")
        if self.c1 < 0 or self.c2 < 0:
            raise ValueError("acceleration constants c1, c2 must be >= 0")

    @classmethod
    def for_dimension(cls, n: int, iterations: Optional[int] = None,
                      swarm: Optional[int] = None, **kwargs) -> "PsoParams":
        return cls(swarm=swarm if swarm is not None else min(100, 10 * n),
                   iterations=iterations if iterations is not None else 200 * n,
                   **kwargs)


@dataclass
class PsoState:
    """Mutable swarm state; invariants: velocities within [-v_max, v_max],
    positions within [0, 2*pi), gbest_fit <= min(pbest_fit)."""

    positions: np.ndarray
    velocities: np.ndarray
    pbest_pos: np.ndarray
    pbest_fit: np.ndarray
    gbest_pos: np.ndarray
    gbest_fit: float
    omega: float
    stagnation: int = 0
    iteration: int = 0
    improved_last: bool = False


def fitness(phases, config: ScenarioConfig, gains: LinkGains) -> float:
    """Negated closed-form sum rate; the quantity the swarm minimizes."""
    ctx = RateContext.from_scenario(config, gains)
    theta = np.asarray(getattr(phases, "theta", phases), dtype=float)
    return float(-ctx.sum_rates(theta[None])[0])


def init_swarm(objective: Objective, n_dims: int, params: PsoParams,
               rng: np.random.Generator,
               seed_positions: Optional[np.ndarray] = None) -> PsoState:
    """Uniform random swarm; optional seed positions replace the first rows
    (used for warm starts across related scenarios)."""
    pos = rng.uniform(0.0, TWO_PI, size=(params.swarm, n_dims))
    vel = rng.uniform(-params.v_max, params.v_max, size=(params.swarm, n_dims))
    if seed_positions is not None:
        seed_positions = np.atleast_2d(np.asarray(seed_positions, dtype=float))
        n_seed = min(seed_positions.shape[0], params.swarm)
        pos[:n_seed] = wrap_angle(seed_positions[:n_seed])
    fit = np.asarray(objective(pos), dtype=float)
    best = int(np.argmin(fit))
    return PsoState(positions=pos, velocities=vel,
                    pbest_pos=pos.copy(), pbest_fit=fit.copy(),
                    gbest_pos=pos[best].copy(), gbest_fit=float(fit[best]),
                    omega=params.omega0)


def pso_step(state: PsoState, params: PsoParams, objective: Objective,
             rng: np.random.Generator) -> PsoState:
    """One velocity/position/best update of the whole swarm.

    r1 and r2 are fresh uniform [0,1] scalars per particle (per dimension when
    ``per_dimension_r``); velocities are clamped to +-v_max and positions
    wrap modulo 2*pi.  Sets ``improved_last`` for the inertia adaptation.
    """
    L, N = state.positions.shape
    shape = (L, N) if params.per_dimension_r else (L, 1)
    r1 = rng.uniform(size=shape)
    r2 = rng.uniform(size=shape)
    state.velocities = (state.omega * state.velocities
                        + params.c1 * r1 * (state.pbest_pos - state.positions)
                        + params.c2 * r2 * (state.gbest_pos[None, :] - state.positions))
    np.clip(state.velocities, -params.v_max, params.v_max, out=state.velocities)
    state.positions = wrap_angle(state.positions + state.velocities)

    fit = np.asarray(objective(state.positions), dtype=float)
    better = fit < state.pbest_fit
    state.pbest_pos[better] = state.positions[better]
    state.pbest_fit[better] = fit[better]

    best = int(np.argmin(state.pbest_fit))
    state.improved_last = bool(state.pbest_fit[best] < state.gbest_fit)
    if state.improved_last:
        state.gbest_fit = float(state.pbest_fit[best])
        state.gbest_pos = state.pbest_pos[best].copy()
    state.iteration += 1
    return state


def adjust_adaptive_parameter(state: PsoState, params: PsoParams) -> PsoState:
    """Stagnation-counter inertia adaptation after one iteration.

    No improvement: counter += 1, inertia untouched.  Improvement: counter
    decrements (floored at 0), then inertia doubles while the counter is
    below 2 or halves once it exceeds 5, clamped into ``omega_bounds``.
    """
    if params.memoryless_counter:
        state.stagnation = 0
    if not state.improved_last:
        state.stagnation += 1
        return state
    state.stagnation = max(state.stagnation - 1, 0)
    if state.stagnation < 2:
        state.omega *= 2.0
    elif state.stagnation > 5:
        state.omega /= 2.0
    lo, hi = params.omega_bounds
    state.omega = min(max(state.omega, lo), hi)
    return state


def pso_optimize(config: ScenarioConfig, gains: LinkGains,
                 params: Optional[PsoParams] = None,
                 rng: Optional[np.random.Generator] = None,
                 seed_positions: Optional[np.ndarray] = None):
    """Maximize the closed-form sum rate over continuous phase shifts.

    Returns (best PhaseVector, best sum rate, trace) where trace[t] is the
    global-best fitness after t iterations (trace[0] is the initial swarm).
    Deterministic for a fixed generator state.
    """
    if params is None:
        params = PsoParams.for_dimension(config.N)
    if rng is None:
        rng = substream(config.seed, "pso")
    ctx = RateContext.from_scenario(config, gains)

    def objective(batch):
        return -ctx.sum_rates(batch)

    state = init_swarm(objective, config.N, params, rng, seed_positions=seed_positions)
    trace = np.empty(params.iterations + 1)
    trace[0] = state.gbest_fit
    for t in range(params.iterations):
        pso_step(state, params, objective, rng)
        adjust_adaptive_parameter(state, params)
        trace[t + 1] = state.gbest_fit
    return PhaseVector.continuous(state.gbest_pos.copy()), -state.gbest_fit, trace


def project_discrete(phases, bits: int) -> PhaseVector:
    """Snap each phase to the nearest point of the 2**bits grid under
    circular distance, breaking exact ties toward the smaller grid value."""
    if bits < 1:
        raise ValueError(f"discrete grid needs bits >= 1; got {bits}")
    theta = wrap_angle(np.asarray(getattr(phases, "theta", phases), dtype=float))
    levels = 2 ** bits
    step = TWO_PI / levels
    k_lo = np.floor(theta / step)              # in [0, levels-1]
    d_lo = theta - k_lo * step
    d_hi = (k_lo + 1.0) * step - theta
    k_hi = np.mod(k_lo + 1.0, levels)
    v_lo = phase_grid_value(k_lo, bits)
    v_hi = phase_grid_value(k_hi, bits)
    # strict win for the upper neighbor; ties pick the smaller grid value
    take_hi = (d_hi < d_lo) | ((d_hi == d_lo) & (v_hi < v_lo))
    return PhaseVector.discrete(np.where(take_hi, v_hi, v_lo), bits)


def refine_discrete(phases: PhaseVector, config: ScenarioConfig, gains: LinkGains,
                    max_passes: int = 4) -> PhaseVector:
    """Optional coordinate-wise local search on the discrete grid (off by
    default in the experiment runners, which report the raw projection)."""
    if phases.bits is None:
        raise ValueError("discrete refinement needs a discrete phase vector")
    ctx = RateContext.from_scenario(config, gains)
    step = TWO_PI / (2 ** phases.bits)
    theta = phases.theta.copy()
    best = float(ctx.sum_rates(theta[None])[0])
    for _ in range(max_passes):
        moved = False
        for n in range(theta.shape[0]):
            candidates = wrap_angle(np.array([theta[n] - step, theta[n] + step]))
            for cand in candidates:
                trial = theta.copy()
                trial[n] = cand
                val = float(ctx.sum_rates(trial[None])[0])
                if val > best:
                    best = val
                    theta = trial
                    moved = True
        if not moved:
            break
    # re-snap so every entry is bitwise on the grid after wrap arithmetic
    return project_discrete(theta, phases.bits)
