"""Desk-scale learning on synthetic graphs through the unrolled dynamics.

A linear encoder X0 = X_in W feeds the saturated kernel, which is
unrolled with forward Euler for M steps with the source held at X0.  The
loss gradient with respect to W is accumulated in reverse through the
unrolled map; the coupling matrices are treated as constants.  A central
finite-difference oracle and an analytic norm bound on the gradient give
two independent checks.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .attention import (
    build_communication_attention,
    build_option_attention,
    init_attention_weights,
)
from .errors import NumericalError
from .graphs import Graph, from_edge_list
from .kernels import BimpParams, rhs_bimp


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters of one unrolled run.

    ``steps`` is the unroll depth M; the attention value is pinned to the
    critical d / (alpha + 3).  Euler stability requires dt * d < 1.
    """

    lr: float
    epochs: int
    steps: int
    dt: float
    d: float
    alpha: float
    seed: int = 0

    def __post_init__(self):
        if self.lr < 0:
            raise ValueError("learning rate must be nonnegative")
        if self.epochs < 0:
            raise ValueError("epoch count must be nonnegative")
        if self.steps < 0:
            raise ValueError("unroll depth must be nonnegative")
        if self.dt <= 0:
            raise ValueError("step size must be positive")
        if self.dt * self.d >= 1.0:
            raise ValueError(
                f"step size {self.dt} is not below 1/d = {1.0 / self.d}"
            )

    @property
    def u(self) -> float:
        return self.d / (self.alpha + 3.0)


@dataclass
class Tape:
    """Saved forward pass: every intermediate state plus the constants."""

    x_in: np.ndarray
    w: np.ndarray
    states: list[np.ndarray]
    aa: np.ndarray
    ao: np.ndarray


def forward_unroll(
    x_in: np.ndarray,
    w: np.ndarray,
    aa: np.ndarray,
    ao: np.ndarray,
    cfg: TrainConfig,
) -> tuple[np.ndarray, Tape]:
    """Encode and run M Euler steps of the saturated kernel with source X0."""
    x_in = np.asarray(x_in, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if x_in.shape[1] != w.shape[0]:
        raise ValueError(
            f"encoder shape {w.shape} does not accept features of dim {x_in.shape[1]}"
        )
    x0 = x_in @ w
    params = BimpParams(d=cfg.d, alpha=cfg.alpha, b=x0, u=cfg.u)
    states = [x0]
    x = x0
    for _ in range(cfg.steps):
        x = x + cfg.dt * rhs_bimp(x, aa, ao, params)
        states.append(x)
    return x, Tape(x_in=x_in, w=w, states=states, aa=aa, ao=ao)


def mse_loss(x_final: np.ndarray, target: np.ndarray) -> float:
    """(1 / 2 Na No) * sum of squared residuals."""
    x_final = np.asarray(x_final, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if x_final.shape != target.shape:
        raise ValueError("prediction and target shapes differ")
    r = x_final - target
    return float(np.sum(r * r) / (2.0 * x_final.size))


def _coupling_transpose(h: np.ndarray, aa: np.ndarray, ao: np.ndarray, alpha: float) -> np.ndarray:
    """Adjoint of H -> alpha H + Aa H + H Ao^T + Aa H Ao^T."""
    aat_h = aa.T @ h
    return alpha * h + aat_h + h @ ao + aat_h @ ao


def encoding_grad(tape: Tape, target: np.ndarray, cfg: TrainConfig) -> np.ndarray:
    """Gradient of the loss with respect to the encoder output X0.

    Exact reverse accumulation through the unrolled Euler map.  X0 enters
    both as the initial state and as the source added at every step; both
    paths are accumulated.
    """
    target = np.asarray(target, dtype=np.float64)
    x_final = tape.states[-1]
    if target.shape != x_final.shape:
        raise ValueError("target shape does not match the unrolled state")
    if len(tape.states) != cfg.steps + 1:
        raise ValueError("tape does not match the configured unroll depth")
    n_elems = x_final.size
    grad_state = (x_final - target) / n_elems
    grad_x0 = np.zeros_like(grad_state)
    u, alpha = cfg.u, cfg.alpha
    for t in range(cfg.steps, 0, -1):
        grad_x0 += cfg.dt * grad_state
        x_prev = tape.states[t - 1]
        mixed = tape.aa @ x_prev
        z = u * (alpha * x_prev + mixed + x_prev @ tape.ao.T + mixed @ tape.ao.T)
        h = cfg.dt * grad_state * (1.0 / np.cosh(z)) ** 2
        grad_state = (1.0 - cfg.d * cfg.dt) * grad_state + u * _coupling_transpose(
            h, tape.aa, tape.ao, alpha
        )
    return grad_x0 + grad_state


def backward_grad(tape: Tape, target: np.ndarray, cfg: TrainConfig) -> np.ndarray:
    """dL/dW by reverse accumulation; same shape as W."""
    return tape.x_in.T @ encoding_grad(tape, target, cfg)


def finite_difference_grad(
    x_in: np.ndarray,
    w: np.ndarray,
    target: np.ndarray,
    aa: np.ndarray,
    ao: np.ndarray,
    cfg: TrainConfig,
    h: float = 1e-5,
) -> np.ndarray:
    """Entrywise central differences of the loss with respect to W."""
    w = np.array(w, dtype=np.float64)
    grad = np.zeros_like(w)
    for idx in np.ndindex(*w.shape):
        w_plus = w.copy()
        w_plus[idx] += h
        w_minus = w.copy()
        w_minus[idx] -= h
        loss_plus = mse_loss(forward_unroll(x_in, w_plus, aa, ao, cfg)[0], target)
        loss_minus = mse_loss(forward_unroll(x_in, w_minus, aa, ao, cfg)[0], target)
        grad[idx] = (loss_plus - loss_minus) / (2.0 * h)
    return grad


def gradient_upper_bound(
    cfg: TrainConfig,
    x0_norm: float,
    target_norm: float,
    xin_norm: float,
    n_agents: int,
    n_options: int,
) -> float:
    """Analytic bound on the max-entry norm of dL/dW.

    With beta = M dt and gamma = (1 + 4 M u dt)(1 + (4u + 1) dt):

        (1 / Na No) (beta + (1 + beta) |X0| + |target|) gamma |X_in|
    """
    beta = cfg.steps * cfg.dt
    gamma = (1.0 + 4.0 * cfg.steps * cfg.u * cfg.dt) * (
        1.0 + (4.0 * cfg.u + 1.0) * cfg.dt
    )
    return (
        (beta + (1.0 + beta) * x0_norm + target_norm)
        * gamma
        * xin_norm
        / (n_agents * n_options)
    )


@dataclass
class GradReport:
    """Analytic gradient against the finite-difference oracle and the bound.

    ``analytic`` is the tied f-by-No gradient used for descent and checked
    entrywise against ``finite_diff``.  ``inf_norm`` is the max-entry norm
    of the gradient with respect to the vectorized encoder (an outer
    product of the encoding gradient with the input features); that is the
    quantity the analytic chain bounds, and weight tying only regroups its
    entries.
    """

    analytic: np.ndarray
    finite_diff: np.ndarray
    rel_error: float
    inf_norm: float
    bound: float

    def to_json(self) -> str:
        import json

        return json.dumps(
            {
                "rel_error": self.rel_error,
                "inf_norm": self.inf_norm,
                "bound": self.bound,
                "within_bound": bool(self.inf_norm <= self.bound),
                "shape": list(self.analytic.shape),
            }
        )


def gradient_check(
    x_in: np.ndarray,
    w: np.ndarray,
    aa: np.ndarray,
    ao: np.ndarray,
    target: np.ndarray,
    cfg: TrainConfig,
    h: float = 1e-5,
) -> GradReport:
    """Run both gradient routes and evaluate the analytic bound."""
    x_final, tape = forward_unroll(x_in, w, aa, ao, cfg)
    g_x0 = encoding_grad(tape, target, cfg)
    analytic = tape.x_in.T @ g_x0
    fd = finite_difference_grad(x_in, w, target, aa, ao, cfg, h=h)
    rel_error = float(
        np.max(np.abs(analytic - fd)) / max(np.max(np.abs(fd)), 1e-12)
    )
    n_agents, n_options = x_final.shape
    xin_norm = float(np.max(np.abs(x_in)))
    bound = gradient_upper_bound(
        cfg,
        x0_norm=float(np.max(np.abs(tape.states[0]))),
        target_norm=float(np.max(np.abs(target))),
        xin_norm=xin_norm,
        n_agents=n_agents,
        n_options=n_options,
    )
    return GradReport(
        analytic=analytic,
        finite_diff=fd,
        rel_error=rel_error,
        inf_norm=float(np.max(np.abs(g_x0)) * xin_norm),
        bound=bound,
    )


def step_jacobian(x: np.ndarray, aa: np.ndarray, ao: np.ndarray, cfg: TrainConfig) -> np.ndarray:
    """Dense Jacobian of one Euler step with respect to the previous state.

    (1 - d dt) I + dt diag(sech^2(z)) u ((alpha - 1) I + K) on the
    column-stacked state, with K the materialized joint coupling.
    """
    n_a, n_o = x.shape
    kron = np.kron(ao + np.eye(n_o), aa + np.eye(n_a))
    op = cfg.u * ((cfg.alpha - 1.0) * np.eye(n_a * n_o) + kron)
    xvec = x.ravel(order="F")
    z = op @ xvec
    sech2 = (1.0 / np.cosh(z)) ** 2
    return (1.0 - cfg.d * cfg.dt) * np.eye(n_a * n_o) + cfg.dt * (sech2[:, None] * op)


def jacobian_chain_norm(tape: Tape, cfg: TrainConfig) -> float:
    """Max-row-sum norm of the accumulated step-Jacobian product.

    Staying well above zero even at large depth is the non-vanishing
    gradient property.
    """
    n = tape.states[0].size
    product = np.eye(n)
    for t in range(1, cfg.steps + 1):
        product = step_jacobian(tape.states[t - 1], tape.aa, tape.ao, cfg) @ product
    return float(np.max(np.sum(np.abs(product), axis=1)))


@dataclass(frozen=True)
class SbmTask:
    """Synthetic two-block node classification task."""

    graph: Graph
    x_in: np.ndarray
    target: np.ndarray


def make_sbm_task(
    n_per_block: int, p_in: float, p_out: float, noise: float, seed: int
) -> SbmTask:
    """Two-block stochastic block model with noisy one-hot features.

    Features are the one-hot block label plus Gaussian noise; the target
    is the clean one-hot label.  Identical seeds reproduce the dataset
    byte for byte.
    """
    for name, p in (("p_in", p_in), ("p_out", p_out)):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {p}")
    rng = np.random.default_rng(seed)
    n = 2 * n_per_block
    labels = np.repeat([0, 1], n_per_block)
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            p = p_in if labels[i] == labels[j] else p_out
            if rng.uniform() < p:
                edges.append((i, j, 1.0))
                edges.append((j, i, 1.0))
    graph = from_edge_list(edges, n)
    onehot = np.eye(2)[labels]
    x_in = onehot + noise * rng.standard_normal((n, 2))
    return SbmTask(graph=graph, x_in=x_in, target=onehot.astype(np.float64))


def accuracy(x_final: np.ndarray, target: np.ndarray) -> float:
    """Fraction of rows whose argmax matches the target argmax."""
    return float(
        np.mean(np.argmax(x_final, axis=1) == np.argmax(target, axis=1))
    )


def train_sgd(
    task: SbmTask,
    cfg: TrainConfig,
    heads: int = 1,
    attention_dim: int = 4,
) -> tuple[np.ndarray, list[tuple[float, float]]]:
    """Plain gradient descent on the encoder through the unrolled dynamics.

    The coupling matrices are built once from the initial encoding and
    held fixed.  History holds (loss, accuracy) at the start of every
    epoch plus one terminal evaluation.
    """
    rng = np.random.default_rng(cfg.seed)
    n_features = task.x_in.shape[1]
    n_options = task.target.shape[1]
    w = rng.uniform(-0.5, 0.5, size=(n_features, n_options)) / np.sqrt(n_features)
    x0 = task.x_in @ w
    w_agent = init_attention_weights(heads, attention_dim, n_options, seed=cfg.seed)
    w_option = init_attention_weights(heads, attention_dim, task.graph.n, seed=cfg.seed + 1)
    aa = build_communication_attention(x0, w_agent, task.graph)
    ao = build_option_attention(x0, w_option)
    history: list[tuple[float, float]] = []
    for epoch in range(cfg.epochs):
        x_final, tape = forward_unroll(task.x_in, w, aa, ao, cfg)
        loss = mse_loss(x_final, task.target)
        if not np.isfinite(loss):
            raise NumericalError(f"training diverged at epoch {epoch}")
        history.append((loss, accuracy(x_final, task.target)))
        w = w - cfg.lr * backward_grad(tape, task.target, cfg)
    x_final, _ = forward_unroll(task.x_in, w, aa, ao, cfg)
    terminal_loss = mse_loss(x_final, task.target)
    if not np.isfinite(terminal_loss):
        raise NumericalError(f"training diverged at epoch {cfg.epochs}")
    history.append((terminal_loss, accuracy(x_final, task.target)))
    return w, history


def save_history_csv(history: list[tuple[float, float]], path) -> None:
    """CSV with header ``epoch,loss,accuracy``."""
    lines = ["epoch,loss,accuracy"]
    for epoch, (loss, acc) in enumerate(history):
        lines.append(f"{epoch},{loss!r},{acc!r}")
    Path(path).write_text("\n".join(lines) + "\n")
