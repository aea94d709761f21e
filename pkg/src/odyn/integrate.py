"""Fixed-step time integration with trajectory recording.

Forward Euler is the reference scheme for the kernels here; classical
RK4 is provided as a higher-accuracy cross-check.  Snapshots are taken at
step 0 and at every ``record_every``-th step, so recording densely and
subsampling gives bit-identical snapshots to recording sparsely.

For damped kernels the step size must satisfy dt < 1/d: at dt >= 1/d the
damping term flips the sign of the state at every update and the scheme
is rejected up front.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import NumericalError
from .kernels import KernelState


@dataclass
class Trajectory:
    """Time-indexed snapshots with per-step scalar metrics."""

    times: list[float] = field(default_factory=list)
    states: list[np.ndarray] = field(default_factory=list)
    energy: list[float] = field(default_factory=list)
    diameter: list[float] = field(default_factory=list)
    kernel_tag: str = ""

    def terminal(self) -> np.ndarray:
        return self.states[-1]


def _check_finite(state: KernelState, step: int) -> None:
    ok = np.all(np.isfinite(state.x)) and (
        state.y is None or np.all(np.isfinite(state.y))
    )
    if not ok:
        raise NumericalError(f"non-finite state at step {step}")


def _guard_step(dt: float, steps: int, damping: float | None) -> None:
    if dt <= 0:
        raise ValueError("step size must be positive")
    if steps < 1:
        raise ValueError("need at least one step")
    if damping is not None and dt * damping >= 1.0:
        raise ValueError(
            f"step size {dt} is not below 1/d = {1.0 / damping}; every update "
            "would flip the sign of the damped state, so the scheme is unstable"
        )


def _record(traj: Trajectory, t: float, state: KernelState, energy_fn, diameter_fn):
    traj.times.append(t)
    traj.states.append(state.x.copy())
    traj.energy.append(float(energy_fn(state.x)) if energy_fn else float("nan"))
    traj.diameter.append(float(diameter_fn(state.x)) if diameter_fn else float("nan"))


def euler_integrate(
    state0: KernelState,
    rhs: Callable[[KernelState], KernelState],
    dt: float,
    steps: int,
    record_every: int = 1,
    *,
    kernel_tag: str = "",
    damping: float | None = None,
    energy_fn: Callable[[np.ndarray], float] | None = None,
    diameter_fn: Callable[[np.ndarray], float] | None = None,
) -> Trajectory:
    """Forward Euler: X(t+dt) = X(t) + dt * rhs(X(t))."""
    _guard_step(dt, steps, damping)
    if record_every < 1:
        raise ValueError("record_every must be at least 1")
    traj = Trajectory(kernel_tag=kernel_tag)
    state = KernelState(
        x=np.array(state0.x, dtype=np.float64),
        y=None if state0.y is None else np.array(state0.y, dtype=np.float64),
    )
    _check_finite(state, 0)
    _record(traj, 0.0, state, energy_fn, diameter_fn)
    for k in range(1, steps + 1):
        dstate = rhs(state)
        x = state.x + dt * dstate.x
        y = None if state.y is None else state.y + dt * dstate.y
        state = KernelState(x=x, y=y)
        _check_finite(state, k)
        if k % record_every == 0:
            _record(traj, k * dt, state, energy_fn, diameter_fn)
    return traj


def rk4_integrate(
    state0: KernelState,
    rhs: Callable[[KernelState], KernelState],
    dt: float,
    steps: int,
    record_every: int = 1,
    *,
    kernel_tag: str = "",
    damping: float | None = None,
    energy_fn: Callable[[np.ndarray], float] | None = None,
    diameter_fn: Callable[[np.ndarray], float] | None = None,
) -> Trajectory:
    """Classical fourth-order Runge-Kutta with the same recording contract."""
    _guard_step(dt, steps, damping)
    if record_every < 1:
        raise ValueError("record_every must be at least 1")

    def shift(s: KernelState, h: float, ds: KernelState) -> KernelState:
        return KernelState(
            x=s.x + h * ds.x,
            y=None if s.y is None else s.y + h * ds.y,
        )

    traj = Trajectory(kernel_tag=kernel_tag)
    state = KernelState(
        x=np.array(state0.x, dtype=np.float64),
        y=None if state0.y is None else np.array(state0.y, dtype=np.float64),
    )
    _check_finite(state, 0)
    _record(traj, 0.0, state, energy_fn, diameter_fn)
    for k in range(1, steps + 1):
        k1 = rhs(state)
        k2 = rhs(shift(state, dt / 2.0, k1))
        k3 = rhs(shift(state, dt / 2.0, k2))
        k4 = rhs(shift(state, dt, k3))
        x = state.x + (dt / 6.0) * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x)
        y = None
        if state.y is not None:
            y = state.y + (dt / 6.0) * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y)
        state = KernelState(x=x, y=y)
        _check_finite(state, k)
        if k % record_every == 0:
            _record(traj, k * dt, state, energy_fn, diameter_fn)
    return traj


def save_trajectory_csv(traj: Trajectory, path) -> None:
    """Long-format CSV with header ``t,node,option,value``."""
    lines = ["t,node,option,value"]
    for t, x in zip(traj.times, traj.states):
        for i in range(x.shape[0]):
            for j in range(x.shape[1]):
                lines.append(f"{t!r},{i},{j},{float(x[i, j])!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def save_metrics_csv(traj: Trajectory, path) -> None:
    """Metric CSV with header ``t,dirichlet,diameter``."""
    lines = ["t,dirichlet,diameter"]
    for t, e, d in zip(traj.times, traj.energy, traj.diameter):
        lines.append(f"{t!r},{e!r},{d!r}")
    Path(path).write_text("\n".join(lines) + "\n")
