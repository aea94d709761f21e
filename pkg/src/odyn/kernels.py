"""Right-hand sides of the opinion-dynamics systems.

The saturated kernel couples agents through ``Aa``, options through
``Ao``, and both jointly through their product term:

    dX/dt = -d X + S(u (alpha X + Aa X + X Ao^T + Aa X Ao^T)) + B

Linear consensus kernels (degree-damped averaging, Laplacian flow, a
Laplacian flow with a constant source, a damped second-order oscillator,
and two reaction-diffusion variants) share the same calling shape so the
integrator stays agnostic.  All functions are pure.

Kernel tags for external selection:
``bimp | linear-od | laplacian | laplacian-source | graphcon-tran |
gread-f | gread-fb | reduced``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .fixtures import random_row_stochastic
from .graphs import Graph, degrees, laplacian, row_normalize
from .spectral import KroneckerOperator, vec


@dataclass(frozen=True)
class SaturationKind:
    """A saturating nonlinearity: elementwise function and derivative."""

    tag: str
    fn: Callable[[np.ndarray], np.ndarray]
    deriv: Callable[[np.ndarray], np.ndarray]


def _softsign(x):
    return x / (1.0 + np.abs(x))


def _softsign_deriv(x):
    return 1.0 / (1.0 + np.abs(x)) ** 2


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def _sigmoid_deriv(x):
    s = _sigmoid(x)
    return s * (1.0 - s)


_erf = np.vectorize(math.erf, otypes=[np.float64])


def _gelu(x):
    return 0.5 * x * (1.0 + _erf(x / np.sqrt(2.0)))


def _gelu_deriv(x):
    phi = np.exp(-0.5 * x * x) / np.sqrt(2.0 * np.pi)
    return 0.5 * (1.0 + _erf(x / np.sqrt(2.0))) + x * phi


TANH = SaturationKind("tanh", np.tanh, lambda x: 1.0 - np.tanh(x) ** 2)
SOFTSIGN = SaturationKind("softsign", _softsign, _softsign_deriv)
ARCTAN = SaturationKind("arctan", np.arctan, lambda x: 1.0 / (1.0 + x * x))
SIGMOID = SaturationKind("sigmoid", _sigmoid, _sigmoid_deriv)
RELU = SaturationKind("relu", lambda x: np.maximum(x, 0.0), lambda x: (x > 0).astype(float))
GELU = SaturationKind("gelu", _gelu, _gelu_deriv)
IDENTITY = SaturationKind("identity", lambda x: np.asarray(x, dtype=float), lambda x: np.ones_like(np.asarray(x, dtype=float)))

SATURATIONS = {s.tag: s for s in (TANH, SOFTSIGN, ARCTAN, SIGMOID, RELU, GELU, IDENTITY)}


def saturation_kind(tag: str) -> SaturationKind:
    try:
        return SATURATIONS[tag]
    except KeyError:
        raise ValueError(f"unknown saturation {tag!r}; choose from {sorted(SATURATIONS)}")


@dataclass(frozen=True)
class NodValidity:
    valid: bool
    reason: str | None = None


def nod_validity(s: SaturationKind) -> NodValidity:
    """Check the saturation conditions S(0)=0, S'(0)=1, S'''(0) != 0.

    All checks are numerical: the origin value directly, differentiability
    by one-sided slope agreement, the unit slope by a central difference,
    and the curvature by a five-point third-derivative stencil.  No closed
    forms are consulted.
    """
    f = s.fn
    if abs(float(f(0.0))) > 1e-12:
        return NodValidity(False, "does not pass through the origin")
    h = 1e-6
    left = (float(f(0.0)) - float(f(-h))) / h
    right = (float(f(h)) - float(f(0.0))) / h
    if abs(left - right) > 1e-4:
        return NodValidity(False, "not differentiable at the origin")
    slope = (float(f(h)) - float(f(-h))) / (2.0 * h)
    if abs(slope - 1.0) > 1e-6:
        return NodValidity(False, "slope at the origin is not 1")
    h3 = 1e-2
    third = (
        float(f(2 * h3)) - 2.0 * float(f(h3)) + 2.0 * float(f(-h3)) - float(f(-2 * h3))
    ) / (2.0 * h3**3)
    if abs(third) <= 1e-6:
        return NodValidity(False, "vanishing third derivative at the origin (linear regime)")
    return NodValidity(True)


@dataclass(frozen=True)
class BimpParams:
    """Intrinsic and extrinsic parameters of the saturated kernel.

    ``u`` defaults to the critical attention d / (alpha + 3), the value at
    which the neutral equilibrium of the joint dynamics loses stability.
    """

    d: float
    alpha: float
    b: np.ndarray
    u: float | None = None
    saturation: SaturationKind = TANH

    def __post_init__(self):
        if self.d < 0:
            raise ValueError("damping d must be nonnegative")
        if self.alpha < 0:
            raise ValueError("self-reinforcement alpha must be nonnegative")
        if self.u is None:
            object.__setattr__(self, "u", self.d / (self.alpha + 3.0))
        if not self.u > 0:
            raise ValueError("attention u must be positive")
        b = np.asarray(self.b, dtype=np.float64)
        if not np.all(np.isfinite(b)):
            raise ValueError("input matrix b must be finite")
        object.__setattr__(self, "b", b)


@dataclass(frozen=True)
class KernelState:
    """Dynamical state; ``y`` is the velocity of second-order kernels only."""

    x: np.ndarray
    y: np.ndarray | None = None


def _check_bimp_shapes(x, aa, ao, b):
    n_a, n_o = x.shape
    if aa.shape != (n_a, n_a):
        raise ValueError(f"agent coupling must be {n_a}x{n_a}, got {aa.shape}")
    if ao.shape != (n_o, n_o):
        raise ValueError(f"option coupling must be {n_o}x{n_o}, got {ao.shape}")
    if b.shape != x.shape:
        raise ValueError(f"input matrix must match state shape {x.shape}, got {b.shape}")


def rhs_bimp(x: np.ndarray, aa: np.ndarray, ao: np.ndarray, p: BimpParams) -> np.ndarray:
    """Saturated kernel in matrix form.

    dX/dt = -d X + S(u (alpha X + Aa X + X Ao^T + Aa X Ao^T)) + B
    """
    x = np.asarray(x, dtype=np.float64)
    _check_bimp_shapes(x, aa, ao, p.b)
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite state")
    mixed = aa @ x
    coupling = p.alpha * x + mixed + x @ ao.T + mixed @ ao.T
    return -p.d * x + p.saturation.fn(p.u * coupling) + p.b


def rhs_bimp_vectorized(xvec: np.ndarray, op: KroneckerOperator, p: BimpParams) -> np.ndarray:
    """Saturated kernel on the column-stacked state.

    dx/dt = -d x + S(u ((alpha - 1) x + K x)) + b, with K the factored
    joint coupling operator.
    """
    xvec = np.asarray(xvec, dtype=np.float64)
    if xvec.shape != (op.dim,):
        raise ValueError(f"expected vector of length {op.dim}, got {xvec.shape}")
    coupling = (p.alpha - 1.0) * xvec + op.matvec(xvec)
    return -p.d * xvec + p.saturation.fn(p.u * coupling) + vec(p.b)


def rhs_bimp_filter_form(xvec: np.ndarray, op: KroneckerOperator, p: BimpParams) -> np.ndarray:
    """Saturated kernel split into sharpening and smoothing components.

    dx/dt = -d x + S(u ((alpha - 1)(x - K x) + alpha K x)) + b.  The
    high-pass term (x - K x) is active for alpha > 1; algebraically this
    equals the plain vectorized form.
    """
    xvec = np.asarray(xvec, dtype=np.float64)
    if xvec.shape != (op.dim,):
        raise ValueError(f"expected vector of length {op.dim}, got {xvec.shape}")
    kx = op.matvec(xvec)
    coupling = (p.alpha - 1.0) * (xvec - kx) + p.alpha * kx
    return -p.d * xvec + p.saturation.fn(p.u * coupling) + vec(p.b)


def rhs_linear_opinion(x: np.ndarray, a: np.ndarray, d_vec: np.ndarray) -> np.ndarray:
    """Degree-damped linear averaging: dx_i/dt = -d_i x_i + sum_k a_ik x_k."""
    x = np.asarray(x, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    d_vec = np.asarray(d_vec, dtype=np.float64)
    if np.any(a < 0):
        raise ValueError("influence weights must be nonnegative")
    if a.shape[0] != x.shape[0] or d_vec.shape != (a.shape[0],):
        raise ValueError("inconsistent shapes")
    if np.max(np.abs(a.sum(axis=1) - d_vec), initial=0.0) > 1e-10:
        raise ValueError("damping vector must equal the influence row sums")
    return -d_vec[:, None] * x + a @ x


def rhs_laplacian(x: np.ndarray, l: np.ndarray) -> np.ndarray:
    """Laplacian flow dX/dt = -(D - A) X."""
    x = np.asarray(x, dtype=np.float64)
    if l.shape[1] != x.shape[0]:
        raise ValueError("Laplacian and state shapes do not match")
    return -(l @ x)


def rhs_laplacian_source(x: np.ndarray, l: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Laplacian flow with a constant source: dX/dt = -L X + B."""
    b = np.asarray(b, dtype=np.float64)
    if b.shape != np.asarray(x).shape:
        raise ValueError("source must match the state shape")
    return rhs_laplacian(x, l) + b


def rhs_graphcon_tran(state: KernelState, aa: np.ndarray) -> KernelState:
    """Damped oscillator wrapped around linear averaging.

    dY/dt = (Aa - I) X - Y,  dX/dt = Y  (unit damping coefficients).
    """
    if state.y is None:
        raise ValueError("second-order kernel needs a velocity component")
    x, y = state.x, state.y
    return KernelState(x=y.copy(), y=(aa @ x - x) - y)


def rhs_gread(
    x: np.ndarray, l: np.ndarray, variant: str, alpha: float = 1.0, beta: float = 0.5
) -> np.ndarray:
    """Reaction-diffusion variants on the Laplacian.

    ``F``: dX/dt = -L X + X o (1 - X); ``FBstar``: dX/dt = -a L X + b (L X + X).
    """
    x = np.asarray(x, dtype=np.float64)
    if variant == "F":
        return -(l @ x) + x * (1.0 - x)
    if variant == "FBstar":
        lx = l @ x
        return -alpha * lx + beta * (lx + x)
    raise ValueError(f"unknown variant {variant!r}; expected 'F' or 'FBstar'")


def gread_threshold(l: np.ndarray) -> float:
    """Constant C with |[L X]_i| <= C |X|_max: the max absolute row sum of L."""
    return float(np.max(np.sum(np.abs(l), axis=1)))


def rhs_reduced_1d(y: float, u: float, d: float, alpha: float, b: float = 0.0) -> float:
    """Scalar dynamics along the leading joint-coupling direction.

    dy/dt = -d y + tanh(u (alpha + 3) y) + b.
    """
    return -d * y + math.tanh(u * (alpha + 3.0) * y) + b


@dataclass(frozen=True)
class KernelSetup:
    """A ready-to-integrate kernel: rhs closure, initial state, damping if any."""

    tag: str
    rhs: Callable[[KernelState], KernelState]
    state0: KernelState
    damping: float | None = None


KERNEL_TAGS = (
    "bimp",
    "linear-od",
    "laplacian",
    "laplacian-source",
    "graphcon-tran",
    "gread-f",
    "gread-fb",
    "reduced",
)


def kernel_setup(
    tag: str,
    g: Graph,
    x0: np.ndarray,
    *,
    d: float = 1.0,
    alpha: float = 1.0,
    u: float | None = None,
    b: np.ndarray | None = None,
    beta: float = 0.5,
    saturation: SaturationKind = TANH,
    seed: int = 0,
) -> KernelSetup:
    """Assemble a kernel by tag from a graph and an initial state.

    The saturated kernel draws its agent coupling from the row-normalized
    adjacency and a seeded random row-stochastic option coupling; ``b``
    defaults to zero.
    """
    x0 = np.asarray(x0, dtype=np.float64)
    if tag == "reduced":
        if x0.size != 1:
            raise ValueError("reduced kernel expects a 1x1 state")
        b_scalar = 0.0 if b is None else float(np.asarray(b).reshape(-1)[0])

        def rhs_r(s: KernelState) -> KernelState:
            val = rhs_reduced_1d(float(s.x[0, 0]), u if u is not None else d / (alpha + 3.0), d, alpha, b_scalar)
            return KernelState(x=np.array([[val]]))

        return KernelSetup(tag, rhs_r, KernelState(x=x0.reshape(1, 1)), damping=d)

    if x0.ndim != 2 or x0.shape[0] != g.n:
        raise ValueError(f"initial state must have {g.n} rows, got {x0.shape}")

    if tag == "bimp":
        aa = row_normalize(g.dense_adjacency())
        ao = random_row_stochastic(x0.shape[1], np.random.default_rng(seed))
        params = BimpParams(
            d=d,
            alpha=alpha,
            b=np.zeros_like(x0) if b is None else b,
            u=u,
            saturation=saturation,
        )
        return KernelSetup(
            tag,
            lambda s: KernelState(x=rhs_bimp(s.x, aa, ao, params)),
            KernelState(x=x0),
            damping=d,
        )
    if tag == "linear-od":
        a = g.dense_adjacency()
        d_vec = degrees(g)
        return KernelSetup(
            tag,
            lambda s: KernelState(x=rhs_linear_opinion(s.x, a, d_vec)),
            KernelState(x=x0),
        )
    if tag == "laplacian":
        l = laplacian(g)
        return KernelSetup(
            tag, lambda s: KernelState(x=rhs_laplacian(s.x, l)), KernelState(x=x0)
        )
    if tag == "laplacian-source":
        l = laplacian(g)
        src = np.zeros_like(x0) if b is None else np.asarray(b, dtype=np.float64)
        return KernelSetup(
            tag,
            lambda s: KernelState(x=rhs_laplacian_source(s.x, l, src)),
            KernelState(x=x0),
        )
    if tag == "graphcon-tran":
        aa = row_normalize(g.dense_adjacency())
        return KernelSetup(
            tag,
            lambda s: rhs_graphcon_tran(s, aa),
            KernelState(x=x0, y=np.zeros_like(x0)),
            damping=1.0,
        )
    if tag == "gread-f":
        l = laplacian(g)
        return KernelSetup(
            tag, lambda s: KernelState(x=rhs_gread(s.x, l, "F")), KernelState(x=x0)
        )
    if tag == "gread-fb":
        l = laplacian(g)
        return KernelSetup(
            tag,
            lambda s: KernelState(x=rhs_gread(s.x, l, "FBstar", alpha=alpha, beta=beta)),
            KernelState(x=x0),
        )
    raise ValueError(f"unknown kernel tag {tag!r}; choose from {KERNEL_TAGS}")
