"""Strongly convex inner subproblems built around the data-backed loss.

The accelerated inner solvers all minimize objectives of the form

    F_sub(y) = loss(y) + quad/2 * ||y||^2 - smooth_h(y)     (the problem's f)
             + <lin, y> + 1/2 * sum_j w_j (y_j - c_j)^2     (linearization + prox)
             + phi(y)

over the same block structure, with block constants L_tilde raised by the
added quadratic.  Everything here is stateless; solvers carry their own
(y, A y) caches and ask for gradients at those points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..blocks import BlockPartition
from ..errors import InvalidParameterError
from ..penalties import ConcaveH, SeparablePhi, h_subgrad, h_value, phi_zero
from ..problem import CompositeProblem


@dataclass
class SmoothSurrogate:
    """Smooth part of an inner subproblem; see the module docstring."""

    oracle: object                 # SmoothOracle
    quad: float = 0.0              # convex quadratic centered at the origin
    smooth_h: ConcaveH | None = None
    lin: np.ndarray | None = None
    prox_w: np.ndarray | None = None      # per-coordinate weights, >= 0
    prox_center: np.ndarray | None = None

    def value(self, y: np.ndarray, Ay: np.ndarray) -> float:
        v = self.oracle.value_from_product(Ay)
        if self.quad:
            v += 0.5 * self.quad * float(np.dot(y, y))
        if self.smooth_h is not None:
            v -= h_value(self.smooth_h, y)
        if self.lin is not None:
            v += float(np.dot(self.lin, y))
        if self.prox_w is not None:
            dz = y - self.prox_center
            v += 0.5 * float(np.dot(self.prox_w * dz, dz))
        return v

    def _extras_on(self, y_part: np.ndarray, sl: slice) -> np.ndarray:
        g = np.zeros(y_part.size)
        if self.quad:
            g += self.quad * y_part
        if self.smooth_h is not None:
            g -= h_subgrad(self.smooth_h, y_part)
        if self.lin is not None:
            g += self.lin[sl]
        if self.prox_w is not None:
            g += self.prox_w[sl] * (y_part - self.prox_center[sl])
        return g

    def block_grad(self, i: int, y: np.ndarray, Ay: np.ndarray) -> np.ndarray:
        sl = self.oracle.part.block(i)
        g = self.oracle.block_gradient_from(i, self.oracle.grad_weights(Ay))
        return g + self._extras_on(y[sl], sl)

    def full_grad(self, y: np.ndarray, Ay: np.ndarray) -> np.ndarray:
        g = self.oracle.full_gradient_from_product(Ay)
        return g + self._extras_on(y, slice(0, y.size))


@dataclass
class SubProblem:
    """Strongly convex composite subproblem handed to the inner solvers."""

    smooth: SmoothSurrogate
    phi: SeparablePhi
    part: BlockPartition           # carries the subproblem constants L_tilde
    mu_tilde: float                # strong convexity w.r.t. the L_tilde-weighted norm

    def __post_init__(self):
        if not 0.0 < self.mu_tilde <= 1.0:
            raise InvalidParameterError(
                f"relative strong convexity must lie in (0, 1], got {self.mu_tilde}"
            )


def dc_subproblem(problem: CompositeProblem, v: np.ndarray, mu: float,
                  center: np.ndarray) -> SubProblem:
    """Linearized concave part plus a blockwise-weighted proximal term.

    Minimizes f(y) + phi(y) - <v, y> + (mu/2) ||y - center||_[1]^2 up to a
    constant.  Block constants become (1 + mu) L_i and the subproblem is
    mu/(1+mu) strongly convex in its own weighted norm.
    """
    if mu <= 0:
        raise InvalidParameterError("mu must be positive")
    coord_L = problem.part.coord_L()
    smooth = SmoothSurrogate(
        oracle=problem.oracle,
        quad=problem.quad,
        smooth_h=problem.smooth_h,
        lin=-np.asarray(v, dtype=np.float64),
        prox_w=mu * coord_L,
        prox_center=np.asarray(center, dtype=np.float64),
    )
    part = problem.part.with_L((1.0 + mu) * problem.part.L)
    return SubProblem(smooth=smooth, phi=problem.phi, part=part,
                      mu_tilde=mu / (1.0 + mu))


def proximal_subproblem(problem: CompositeProblem, mu: float,
                        center: np.ndarray, *, s: float = 1.0) -> SubProblem:
    """Proximal-point subproblem F(y) + mu ||y - center||^2 (plain Euclidean).

    Requires the concave part to be void.  Block constants become
    L_i + 2 mu; relative strong convexity is mu / max_i (L_i + 2 mu)^s
    w.r.t. the norm at exponent ``s`` (s = 1 for the accelerated coordinate
    gradient inner solver).
    """
    if mu <= 0:
        raise InvalidParameterError("mu must be positive")
    if not problem.h.is_zero():
        raise InvalidParameterError("proximal subproblem requires a void concave part")
    smooth = SmoothSurrogate(
        oracle=problem.oracle,
        quad=problem.quad,
        smooth_h=problem.smooth_h,
        prox_w=np.full(problem.part.d, 2.0 * mu),
        prox_center=np.asarray(center, dtype=np.float64),
    )
    L_tilde = problem.part.L + 2.0 * mu
    part = problem.part.with_L(L_tilde)
    mu_tilde = mu / float(np.max(L_tilde) ** s) if s > 0 else mu
    return SubProblem(smooth=smooth, phi=problem.phi, part=part, mu_tilde=mu_tilde)


def linearized_subproblem(problem: CompositeProblem, v: np.ndarray,
                          center: np.ndarray, eps: float) -> SubProblem:
    """Exact-linearization subproblem with a small convexity floor.

    Minimizes f(y) + phi(y) - <v, y> + (eps/2) ||y - center||^2; the floor
    guarantees strong convexity even when f is merely convex.
    """
    if eps <= 0:
        raise InvalidParameterError("convexity floor eps must be positive")
    smooth = SmoothSurrogate(
        oracle=problem.oracle,
        quad=problem.quad,
        smooth_h=problem.smooth_h,
        lin=-np.asarray(v, dtype=np.float64),
        prox_w=np.full(problem.part.d, eps),
        prox_center=np.asarray(center, dtype=np.float64),
    )
    L_tilde = problem.part.L + eps
    part = problem.part.with_L(L_tilde)
    return SubProblem(smooth=smooth, phi=problem.phi, part=part,
                      mu_tilde=eps / float(np.max(L_tilde)))


def smooth_only(sub: SubProblem) -> SubProblem:
    """Same subproblem with the separable penalty dropped (for smooth solvers)."""
    return SubProblem(smooth=sub.smooth, phi=phi_zero(), part=sub.part,
                      mu_tilde=sub.mu_tilde)
