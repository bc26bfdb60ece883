"""Trajectories and the variation-of-constants fixed-point map.

A trajectory holds states on a uniform time grid.  One Picard sweep maps a
trajectory u to

    t_k -> e^{-t_k A} u0 + sum_j e^{-(t_k - t_{j+1}) A} B F(u(t_{j+1})),

with B = A^{-1}(I - e^{-dt A}) the exact one-step integral of the semigroup,
i.e. the step integral is evaluated with F frozen at the step's right node.
Every factor (the step propagator, B, and the shifted reaction term) is
order-preserving, so the sweep is monotone in both the trajectory argument
and the initial value at round-off level; the converged iteration therefore
realizes the implicit exponential-Euler relation, which keeps the extremal
branches of non-Lipschitz problems (an explicit left-node rule would collapse
them onto the equilibrium).
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, replace

import numpy as np

from . import generators
from .errors import DimensionMismatchError, ValidationError
from .generators import GeneratorSpec
from .nonlin import Nonlinearity, quasi_increasing_shift
from .order import (
    GridFunction,
    OrderInterval,
    clamp_values,
    monotone_norm,
    order_slack,
)

STABILITY_FLOOR = 0.1  # scaled problems keep min eigenvalue >= this


@dataclass
class Trajectory:
    t_grid: np.ndarray
    states: np.ndarray
    components: int = 1

    def __post_init__(self):
        self.t_grid = np.asarray(self.t_grid, dtype=float)
        self.states = np.atleast_2d(np.asarray(self.states, dtype=float))
        if self.states.shape[0] != self.t_grid.size:
            raise DimensionMismatchError("one state per time node required")
        steps = np.diff(self.t_grid)
        if self.t_grid.size < 2 or np.any(steps <= 0):
            raise ValidationError("time grid must be increasing with dt > 0")
        if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
            raise ValidationError("time grid must be uniform")

    @property
    def dt(self) -> float:
        return float(self.t_grid[1] - self.t_grid[0])

    @property
    def horizon(self) -> float:
        return float(self.t_grid[-1])

    @property
    def n_steps(self) -> int:
        return self.t_grid.size - 1

    def state(self, k: int) -> GridFunction:
        return GridFunction(self.states[k].copy(), self.components)

    def terminal(self) -> GridFunction:
        return self.state(self.n_steps)


def time_grid(horizon: float, dt: float) -> np.ndarray:
    if dt <= 0 or horizon <= 0:
        raise ValidationError("horizon and dt must be positive")
    k = max(1, int(round(horizon / dt)))
    return dt * np.arange(k + 1)


def constant_trajectory(u: GridFunction, horizon: float, dt: float) -> Trajectory:
    grid = time_grid(horizon, dt)
    return Trajectory(grid, np.tile(u.values, (grid.size, 1)), u.components)


@dataclass
class ProblemSpec:
    """Data of the evolution problem du/dt + A u = F(u) on an order interval.

    `mu` is the accumulated quasi-increasing shift: the generator already
    contains +mu*I and the effective reaction term is F + mu*id, so fixed
    points and equilibria coincide with the unshifted problem.
    """

    A: GeneratorSpec
    F: Nonlinearity
    interval: OrderInterval
    mu: float = 0.0
    horizon: float = 1.0
    dt: float = 1e-2

    def __post_init__(self):
        if self.interval.dim != self.A.dim:
            raise DimensionMismatchError("interval and generator dimensions differ")
        if self.F.components != self.interval.components:
            raise DimensionMismatchError("nonlinearity/interval component mismatch")

    def rhs(self, values: np.ndarray) -> np.ndarray:
        """Shifted reaction term F(u) + mu*u, vectorized over rows."""
        out = self.F.eval_values(values)
        if self.mu != 0.0:
            out = out + self.mu * values
        return out

    def equilibrium_residual(self, u: GridFunction) -> float:
        """Sup norm of A u - F(u); shift-independent."""
        return monotone_norm(self.A.matrix @ u.values - self.rhs(u.values))


def scale_problem(problem: ProblemSpec, mu: float) -> ProblemSpec:
    """Shift A by +mu*I and F by +mu*id; the solution set is unchanged."""
    if mu < 0:
        raise ValidationError("shift must be >= 0")
    if mu == 0.0:
        return problem
    return replace(problem, A=generators.shifted(problem.A, mu), mu=problem.mu + mu)


def auto_scale(problem: ProblemSpec, floor: float = STABILITY_FLOOR) -> ProblemSpec:
    """Apply the engine's scaling policy.

    The total shift must certify F + mu*id increasing on the interval and
    push the generator's smallest eigenvalue to at least `floor` so that the
    one-step integral B exists and the scaled semigroup is exponentially
    stable.
    """
    mu_qi = quasi_increasing_shift(problem.F, problem.interval)
    need_monotone = mu_qi - problem.mu
    need_stable = floor - problem.A.min_eigenvalue()
    delta = max(0.0, need_monotone, need_stable)
    return scale_problem(problem, delta)


def _propagators(a: GeneratorSpec, dt: float) -> tuple[np.ndarray, np.ndarray]:
    cache = getattr(a, "_prop_cache", None)
    if cache is None:
        cache = {}
        object.__setattr__(a, "_prop_cache", cache)
    if dt not in cache:
        cache[dt] = generators.propagator_matrices(a, dt)
    return cache[dt]


def picard_step(
    problem: ProblemSpec,
    u0: GridFunction,
    traj: Trajectory,
    clamp_stats: dict | None = None,
    slack: float | None = None,
) -> Trajectory:
    """One application of the integral fixed-point map to a trajectory.

    The argument trajectory is clamped to the order interval before the
    reaction term is evaluated (its certificates are interval-local); clamp
    magnitudes beyond `slack` (round-off scale by default) are counted in
    `clamp_stats`.
    """
    interval = problem.interval
    if traj.states.shape[1] != problem.A.dim:
        raise DimensionMismatchError("trajectory dimension does not match problem")
    if slack is None:
        slack = order_slack(interval.value_scale(), interval.dim)
    u0_values = clamp_values(u0.values, interval)
    if monotone_norm(u0_values - u0.values) > slack:
        warnings.warn("initial value clamped to the order interval", stacklevel=2)
    clamped = clamp_values(traj.states, interval)
    if clamp_stats is not None:
        moved = np.abs(clamped - traj.states) > slack
        clamp_stats["clamped"] = clamp_stats.get("clamped", 0) + int(np.sum(moved))
        clamp_stats["total"] = clamp_stats.get("total", 0) + int(clamped.size)
    p_mat, b_mat = _propagators(problem.A, traj.dt)
    f_vals = problem.rhs(clamped)
    out = np.empty_like(traj.states)
    out[0] = u0_values
    if problem.A.dim == 1:
        p, b = float(p_mat[0, 0]), float(b_mat[0, 0])
        v = float(u0_values[0])
        f_flat = f_vals[:, 0].tolist()
        row = out[:, 0]
        for k in range(traj.n_steps):
            v = p * v + b * f_flat[k + 1]
            row[k + 1] = v
    else:
        source = f_vals @ b_mat.T  # B F(u(t_{k+1})) for every step at once
        v = u0_values
        buf = np.empty_like(v)
        for k in range(traj.n_steps):
            np.dot(p_mat, v, out=buf)
            buf += source[k + 1]
            out[k + 1] = buf
            v = out[k + 1]
    return Trajectory(traj.t_grid, out, traj.components)


def mild_residual(problem: ProblemSpec, traj: Trajectory) -> float:
    """Sup-over-grid defect of the integral equation, ||u - sweep(u)||."""
    image = picard_step(problem, traj.state(0), traj)
    return float(np.max(np.abs(traj.states - image.states)))


def weak_form_defect(problem: ProblemSpec, traj: Trajectory) -> float:
    """Worst defect of d/dt<e_i,u> + <A'e_i,u> - <e_i,F(u)> over the basis.

    Time derivatives by central differences on interior nodes; a diagnostic
    companion to `mild_residual`, not a convergence criterion.
    """
    if traj.t_grid.size < 3:
        raise ValidationError("need at least 3 time nodes")
    dudt = (traj.states[2:] - traj.states[:-2]) / (2.0 * traj.dt)
    mid = traj.states[1:-1]
    defect = dudt + mid @ problem.A.matrix.T - problem.rhs(mid)
    return float(np.max(np.abs(defect)))


def translate(traj: Trajectory, t0_index: int) -> Trajectory:
    """Restart the trajectory at node t0_index (autonomous problem)."""
    if not 0 <= t0_index <= traj.n_steps:
        raise ValidationError(f"t0_index {t0_index} outside 0..{traj.n_steps}")
    if t0_index == 0:
        return Trajectory(traj.t_grid.copy(), traj.states.copy(), traj.components)
    if t0_index == traj.n_steps:
        raise ValidationError("translating to the last node leaves no grid")
    grid = traj.t_grid[t0_index:] - traj.t_grid[t0_index]
    return Trajectory(grid, traj.states[t0_index:].copy(), traj.components)


# -- serialization -----------------------------------------------------------


def csv_header(n_points: int, components: int) -> list[str]:
    if components == 1:
        return ["t"] + [f"node_{i}" for i in range(n_points)]
    return ["t"] + [
        f"node_{i}_c{c}" for c in range(components) for i in range(n_points)
    ]


def trajectory_to_csv(traj: Trajectory, path) -> None:
    n = traj.states.shape[1] // traj.components
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(csv_header(n, traj.components))
        for t, row in zip(traj.t_grid, traj.states):
            writer.writerow([repr(float(t))] + [repr(float(x)) for x in row])


def trajectory_from_csv(path, components: int = 1) -> Trajectory:
    data = np.genfromtxt(path, delimiter=",", skip_header=1)
    data = np.atleast_2d(data)
    return Trajectory(data[:, 0], data[:, 1:], components)
