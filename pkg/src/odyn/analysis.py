"""Oversmoothing diagnostics, bifurcation sweeps, and closed-form oracles.

The Dirichlet energy measures squared feature differences across graph
edges; it reaching zero means every connected pair of nodes agrees.  The
opinion diameter (per-option max minus min across agents, maximized over
options) is the Lyapunov-like quantity contracted by products of
row-stochastic influence matrices.

The bifurcation sweep locates every equilibrium of the scalar reduced
dynamics on a grid of attention values via Newton from a seed grid; the
stable/unstable split reproduces the pitchfork and its unfolding under a
nonzero input.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .graphs import Graph
from .integrate import Trajectory
from .kernels import rhs_reduced_1d
from .spectral import symmetric_eigendecomposition


def dirichlet_energy(x: np.ndarray, g: Graph) -> float:
    """Mean squared feature difference over the directed edges of ``g``.

    E(X) = (1/n) sum_i sum_{j in N(i)} ||x_i - x_j||_2^2
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != g.n:
        raise ValueError(f"state must have {g.n} rows, got {x.shape}")
    if g.edge_count == 0:
        return 0.0
    rows = np.repeat(np.arange(g.n), np.diff(g.offsets))
    diffs = x[rows] - x[g.targets]
    return float(np.sum(diffs * diffs) / g.n)


def opinion_diameter(x: np.ndarray) -> float:
    """Largest per-option spread: max over options of (max - min over agents).

    A 1-d input is read as one option held by many agents.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    return float(np.max(x.max(axis=0) - x.min(axis=0)))


def consensus_time(traj: Trajectory, tol: float) -> float | None:
    """First recorded time with diameter below ``tol``, or None."""
    for t, d in zip(traj.times, traj.diameter):
        if d < tol:
            return t
    return None


@dataclass(frozen=True)
class BifurcationPoint:
    """Equilibria of the reduced scalar dynamics at one attention value."""

    u: float
    equilibria: tuple[tuple[float, bool], ...]


def reduced_equilibria(
    u: float,
    d: float,
    alpha: float,
    b: float = 0.0,
    seed_points: int = 41,
    newton_iters: int = 50,
    dedup_tol: float = 1e-8,
) -> tuple[tuple[float, bool], ...]:
    """All equilibria of dy/dt = -d y + tanh(u (alpha+3) y) + b with stability.

    Newton runs from a seed grid over [-2, 2]; seeds that fail to converge
    are skipped.  Roots are deduplicated and sorted ascending; a root is
    stable when the derivative of the rhs is negative there.
    """
    c = u * (alpha + 3.0)

    def f(y: float) -> float:
        return rhs_reduced_1d(y, u, d, alpha, b)

    def fprime(y: float) -> float:
        z = c * y
        # sech^2 underflows to exactly 0 long before cosh overflows
        sech2 = 0.0 if abs(z) > 350.0 else 1.0 / math.cosh(z) ** 2
        return -d + c * sech2

    roots: list[float] = []
    for y in np.linspace(-2.0, 2.0, seed_points):
        y = float(y)
        converged = False
        for _ in range(newton_iters):
            fy = f(y)
            if abs(fy) < 1e-13:
                converged = True
                break
            dfy = fprime(y)
            if dfy == 0.0 or not math.isfinite(dfy):
                break
            step = fy / dfy
            y -= step
            if not math.isfinite(y) or abs(y) > 1e6:
                break
            if abs(step) < 1e-14:
                converged = abs(f(y)) < 1e-10
                break
        if converged and all(abs(y - r) > dedup_tol for r in roots):
            roots.append(y)
    roots.sort()
    return tuple((r, fprime(r) < 0.0) for r in roots)


def bifurcation_sweep(
    u_range: tuple[float, float, int], d: float, alpha: float, b: float = 0.0
) -> list[BifurcationPoint]:
    """Equilibrium structure over a grid of attention values."""
    lo, hi, points = u_range
    if not lo < hi:
        raise ValueError("need lo < hi")
    if points < 2:
        raise ValueError("need at least two sweep points")
    if d <= 0:
        raise ValueError("damping must be positive")
    return [
        BifurcationPoint(u=float(u), equilibria=reduced_equilibria(float(u), d, alpha, b))
        for u in np.linspace(lo, hi, points)
    ]


def save_bifurcation_csv(points: list[BifurcationPoint], path) -> None:
    """CSV with header ``u,y,stable`` (stable encoded as 1/0)."""
    lines = ["u,y,stable"]
    for p in points:
        for y, stable in p.equilibria:
            lines.append(f"{p.u!r},{y!r},{int(stable)}")
    Path(path).write_text("\n".join(lines) + "\n")


@dataclass(frozen=True)
class ClosedFormSolution:
    """Modal solution of dX/dt = -L X + B for symmetric L with a simple kernel.

    X(t) = sum_{lam_i > 0} v_i (b_i / lam_i + c_i exp(-lam_i t))
           + v_0 (b_0 t + c_0)

    The zero mode grows linearly with slope ``b_0`` while every other mode
    relaxes exponentially to its offset b_i / lam_i.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    input_coeffs: np.ndarray
    decay_coeffs: np.ndarray
    zero_b: np.ndarray
    zero_c: np.ndarray

    def evaluate(self, t: float) -> np.ndarray:
        lam = self.eigenvalues
        modal = np.empty((lam.shape[0], self.zero_b.shape[0]))
        modal[0] = self.zero_b * t + self.zero_c
        pos = lam[1:]
        modal[1:] = self.input_coeffs[1:] / pos[:, None] + self.decay_coeffs[
            1:
        ] * np.exp(-pos * t)[:, None]
        return self.eigenvectors @ modal


def grandpp_closed_form(
    l: np.ndarray, x0: np.ndarray, b: np.ndarray, zero_tol: float = 1e-10
) -> ClosedFormSolution:
    """Fit the modal solution of dX/dt = -L X + B from the initial state.

    Requires symmetric positive-semidefinite ``l`` whose zero eigenvalue is
    simple (a connected graph).  The fitted solution reproduces ``x0`` at
    t = 0.
    """
    l = np.asarray(l, dtype=np.float64)
    x0 = np.atleast_2d(np.asarray(x0, dtype=np.float64))
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    if x0.shape != b.shape or x0.shape[0] != l.shape[0]:
        raise ValueError("state, source, and operator shapes are inconsistent")
    eigenvalues, eigenvectors = symmetric_eigendecomposition(l)
    if eigenvalues[0] < -zero_tol:
        raise ValueError("operator must be positive semidefinite")
    if abs(eigenvalues[0]) > zero_tol:
        raise ValueError("operator has no zero eigenvalue")
    if eigenvalues.shape[0] > 1 and eigenvalues[1] <= zero_tol:
        raise ValueError("zero eigenvalue is repeated (graph is disconnected)")
    input_coeffs = eigenvectors.T @ b
    state_coeffs = eigenvectors.T @ x0
    decay_coeffs = np.zeros_like(state_coeffs)
    decay_coeffs[1:] = state_coeffs[1:] - input_coeffs[1:] / eigenvalues[1:, None]
    return ClosedFormSolution(
        eigenvalues=eigenvalues,
        eigenvectors=eigenvectors,
        input_coeffs=input_coeffs,
        decay_coeffs=decay_coeffs,
        zero_b=input_coeffs[0],
        zero_c=state_coeffs[0],
    )


@dataclass(frozen=True)
class ScramblingReport:
    """Outcome of the windowed scrambling test on a matrix sequence."""

    window: int
    delta: float
    scrambling: bool
    diameters: tuple[float, ...]

    def to_json(self) -> str:
        return json.dumps(
            {
                "window": self.window,
                "delta": self.delta,
                "scrambling": self.scrambling,
                "diameters": list(self.diameters),
            }
        )


def _pair_common_mass(phi: np.ndarray) -> float:
    """Smallest over row pairs of the best shared-column mass.

    Positive iff every pair of rows has a column where both are positive,
    i.e. iff the matrix is scrambling.
    """
    n = phi.shape[0]
    worst = np.inf
    for i in range(n):
        for k in range(i + 1, n):
            mass = float(np.max(np.minimum(phi[i], phi[k])))
            worst = min(worst, mass)
    return worst if n > 1 else float(np.max(phi))


def scrambling_check(
    matrices: list[np.ndarray], zeta: float, x0: np.ndarray
) -> ScramblingReport:
    """Windowed scrambling test for time-varying row-stochastic influence.

    With window T = n - 1, each window product Phi is tested for the
    scrambling condition (every pair of rows shares a positively weighted
    column); ``delta`` is the smallest such shared mass over all windows
    and pairs.  The diameter of x(t) under x(t+1) = A(t) x(t) is recorded
    at every step.
    """
    if not matrices:
        raise ValueError("need at least one matrix")
    mats = [np.asarray(m, dtype=np.float64) for m in matrices]
    n = mats[0].shape[0]
    for m in mats:
        if m.shape != (n, n):
            raise ValueError("all matrices must share one square shape")
        if np.any(m < 0) or np.max(np.abs(m.sum(axis=1) - 1.0)) > 1e-10:
            raise ValueError("matrices must be row-stochastic")
        positive = m[m > 0]
        if positive.size and float(positive.min()) < zeta - 1e-12:
            raise ValueError(
                f"positive entry {float(positive.min())} below the uniform "
                f"positivity floor {zeta}"
            )
    window = max(n - 1, 1)
    x = np.asarray(x0, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] != n:
        raise ValueError(f"state must have {n} rows")
    diameters = [opinion_diameter(x)]
    for m in mats:
        x = m @ x
        diameters.append(opinion_diameter(x))
    scrambling = True
    delta = np.inf
    n_windows = len(mats) // window
    for w in range(n_windows):
        phi = np.eye(n)
        for m in mats[w * window : (w + 1) * window]:
            phi = m @ phi
        mass = _pair_common_mass(phi)
        if mass <= 0.0:
            scrambling = False
        else:
            delta = min(delta, mass)
    if n_windows == 0:
        scrambling = False
    if not scrambling or not math.isfinite(delta):
        delta = 0.0
    return ScramblingReport(
        window=window,
        delta=float(delta),
        scrambling=scrambling,
        diameters=tuple(diameters),
    )
