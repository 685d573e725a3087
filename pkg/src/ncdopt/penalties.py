"""Separable convex penalties, their proximal maps, and concave penalty parts.

Objectives have the three-term form F(x) = f(x) + phi(x) - h(x): a smooth
loss ``f``, a coordinate-separable convex penalty ``phi`` with a cheap prox,
and a convex continuous ``h`` whose subtraction makes F nonconvex.  The SCAD
penalty, for example, splits as phi = lam * |x| and h the smooth hinge-like
remainder; the k-sparsity penalty splits as the l1 norm minus the sum of the
k largest magnitudes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, InvalidStepError
from .topk import TopKTracker, topk_indices

_PHI_KINDS = ("zero", "l1", "elastic_net")
_H_KINDS = ("zero", "scad", "largest_k")


# ---------------------------------------------------------------------------
# convex separable part
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SeparablePhi:
    """Coordinate-separable convex penalty.

    kind
        ``"zero"``, ``"l1"`` (weight ``lam``) or ``"elastic_net"``
        (l1 weight ``lam`` plus quadratic weight ``lam2 / 2 * ||x||^2``).
    scale
        Multiplies every weight; lets experiment presets apply a common
        rho/d factor without touching the base weights.
    """

    kind: str = "zero"
    lam: float = 0.0
    lam2: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in _PHI_KINDS:
            raise InvalidParameterError(f"unknown penalty kind {self.kind!r}")
        if self.lam < 0 or self.lam2 < 0 or self.scale < 0:
            raise InvalidParameterError("penalty weights must be nonnegative")

    @property
    def l1_weight(self) -> float:
        return self.scale * self.lam

    @property
    def quad_weight(self) -> float:
        return self.scale * self.lam2

    def is_zero(self) -> bool:
        if self.kind == "zero":
            return True
        return self.l1_weight == 0.0 and (self.kind == "l1" or self.quad_weight == 0.0)

    def value(self, x) -> float:
        x = np.asarray(x, dtype=np.float64)
        if self.kind == "zero":
            return 0.0
        v = self.l1_weight * float(np.abs(x).sum())
        if self.kind == "elastic_net":
            v += 0.5 * self.quad_weight * float(np.dot(x, x))
        return v


def phi_zero() -> SeparablePhi:
    return SeparablePhi("zero")


def phi_l1(lam: float, scale: float = 1.0) -> SeparablePhi:
    return SeparablePhi("l1", lam=lam, scale=scale)


def phi_elastic_net(lam: float, lam2: float, scale: float = 1.0) -> SeparablePhi:
    return SeparablePhi("elastic_net", lam=lam, lam2=lam2, scale=scale)


def soft_threshold(u, t):
    """Componentwise shrinkage of ``u`` toward zero by ``t >= 0``."""
    return np.sign(u) * np.maximum(np.abs(u) - t, 0.0)


def prox_block(phi: SeparablePhi, xbar, y, gamma):
    """Composite block proximal map.

    Solves, coordinate by coordinate,

        argmin_x  <y, x> + phi(x) + (gamma / 2) * ||xbar - x||^2.

    ``gamma`` may be a positive scalar or a per-coordinate array; ``xbar``
    and ``y`` may be a single block or the full vector (the penalty is
    separable, so the map factors).
    """
    xbar = np.asarray(xbar, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    gamma = np.asarray(gamma, dtype=np.float64)
    if np.any(gamma <= 0) or not np.all(np.isfinite(gamma)):
        raise InvalidStepError("prox weight gamma must be positive and finite")
    if phi.kind == "zero":
        return xbar - y / gamma
    if phi.kind == "l1":
        u = xbar - y / gamma
        return soft_threshold(u, phi.l1_weight / gamma)
    # elastic net: the quadratic term shifts the effective prox weight
    denom = gamma + phi.quad_weight
    u = (gamma * xbar - y) / denom
    return soft_threshold(u, phi.l1_weight / denom)


# ---------------------------------------------------------------------------
# SCAD concave part
# ---------------------------------------------------------------------------

def _check_scad(lam: float, theta: float):
    if lam <= 0:
        raise InvalidParameterError("scad weight lam must be positive")
    if theta <= 1:
        raise InvalidParameterError("scad shape theta must exceed 1")


def scad_h_value(lam: float, theta: float, x) -> float:
    """Concave-part value of the SCAD penalty, summed over coordinates.

    Piecewise:  0 on |x| <= lam;  (x^2 - 2*lam*|x| + lam^2) / (2*(theta-1))
    on lam < |x| <= theta*lam;  lam*|x| - (theta+1)*lam^2/2 beyond.  The
    function is convex and continuously differentiable with a
    1/(theta-1)-Lipschitz derivative.
    """
    _check_scad(lam, theta)
    a = np.abs(np.asarray(x, dtype=np.float64))
    mid = (a * a - 2.0 * lam * a + lam * lam) / (2.0 * (theta - 1.0))
    outer = lam * a - 0.5 * (theta + 1.0) * lam * lam
    vals = np.where(a <= lam, 0.0, np.where(a <= theta * lam, mid, outer))
    return float(vals.sum())


def scad_h_subgrad(lam: float, theta: float, x) -> np.ndarray:
    """Derivative of :func:`scad_h_value`, componentwise."""
    _check_scad(lam, theta)
    x = np.asarray(x, dtype=np.float64)
    a = np.abs(x)
    sgn = np.where(x >= 0, 1.0, -1.0)
    mid = (a - lam) / (theta - 1.0)
    grad = np.where(a <= lam, 0.0, np.where(a <= theta * lam, mid, lam)) * sgn
    return grad


# ---------------------------------------------------------------------------
# largest-k concave part
# ---------------------------------------------------------------------------

def largest_k_value(lam: float, k: int, x) -> float:
    """``lam`` times the sum of the ``k`` largest coordinate magnitudes."""
    x = np.asarray(x, dtype=np.float64)
    if not 1 <= k <= x.size:
        raise InvalidParameterError(f"need 1 <= k <= d, got k={k}, d={x.size}")
    idx = topk_indices(x, k)
    return lam * float(np.abs(x[idx]).sum())


def largest_k_subgrad(lam: float, k: int, x, tracker: TopKTracker | None = None) -> np.ndarray:
    """Canonical subgradient of the largest-k norm times ``lam``.

    Coordinates in the top-k set get ``lam * sign(x_j)`` with sign(0) = +1;
    all others get 0.  Ties in magnitude resolve toward the lower index, the
    same total order the tracker maintains, so the incremental and
    from-scratch paths always agree.
    """
    x = np.asarray(x, dtype=np.float64)
    if not 1 <= k <= x.size:
        raise InvalidParameterError(f"need 1 <= k <= d, got k={k}, d={x.size}")
    v = np.zeros(x.size)
    if tracker is not None:
        if tracker.k != k or tracker.d != x.size:
            raise InvalidParameterError("tracker shape does not match the query")
        mask = tracker.in_top
    else:
        mask = np.zeros(x.size, dtype=bool)
        mask[topk_indices(x, k)] = True
    v[mask] = lam * np.where(x[mask] >= 0, 1.0, -1.0)
    return v


# ---------------------------------------------------------------------------
# concave part wrapper
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConcaveH:
    """Convex continuous function subtracted from the objective.

    kind is ``"zero"``, ``"scad"`` (parameters ``lam``, ``theta``) or
    ``"largest_k"`` (parameters ``lam``, ``k``).  ``scale`` multiplies the
    base value; ``shift_mu`` adds ``(shift_mu / 2) * ||x||^2`` on top of any
    kind, which is how a quadratic shift moves curvature between the two
    sides of a difference-of-convex split.
    """

    kind: str = "zero"
    lam: float = 0.0
    theta: float = 0.0
    k: int = 0
    scale: float = 1.0
    shift_mu: float = 0.0

    def __post_init__(self):
        if self.kind not in _H_KINDS:
            raise InvalidParameterError(f"unknown concave-part kind {self.kind!r}")
        if self.scale < 0 or self.shift_mu < 0:
            raise InvalidParameterError("scale and shift_mu must be nonnegative")
        if self.kind == "scad":
            _check_scad(self.lam, self.theta)
        if self.kind == "largest_k" and (self.lam < 0 or self.k < 1):
            raise InvalidParameterError("largest_k needs lam >= 0 and k >= 1")

    def is_zero(self) -> bool:
        if self.shift_mu != 0.0:
            return False
        return self.kind == "zero" or self.scale == 0.0 or self.lam == 0.0

    def is_smooth(self) -> bool:
        """True when a gradient (not just a subgradient) exists everywhere."""
        return self.kind != "largest_k" or self.scale == 0.0 or self.lam == 0.0

    def gradient_lipschitz(self) -> float:
        """Lipschitz constant of the gradient; raises for nonsmooth kinds."""
        if not self.is_smooth():
            raise InvalidParameterError("largest_k has no Lipschitz gradient")
        lip = self.shift_mu
        if self.kind == "scad" and self.scale > 0:
            lip += self.scale / (self.theta - 1.0)
        return lip


def h_zero() -> ConcaveH:
    return ConcaveH("zero")


def h_scad(lam: float, theta: float, scale: float = 1.0) -> ConcaveH:
    return ConcaveH("scad", lam=lam, theta=theta, scale=scale)


def h_largest_k(lam: float, k: int, scale: float = 1.0) -> ConcaveH:
    return ConcaveH("largest_k", lam=lam, k=k, scale=scale)


def h_quadratic(mu: float) -> ConcaveH:
    """Pure quadratic shift h(x) = (mu / 2) * ||x||^2."""
    return ConcaveH("zero", shift_mu=mu)


def h_value(h: ConcaveH, x) -> float:
    x = np.asarray(x, dtype=np.float64)
    v = 0.0
    if h.kind == "scad" and h.scale > 0:
        v = h.scale * scad_h_value(h.lam, h.theta, x)
    elif h.kind == "largest_k" and h.scale > 0:
        v = h.scale * largest_k_value(h.lam, h.k, x)
    if h.shift_mu > 0:
        v += 0.5 * h.shift_mu * float(np.dot(x, x))
    return v


def h_subgrad(h: ConcaveH, x, tracker: TopKTracker | None = None) -> np.ndarray:
    """Canonical subgradient of ``h`` at ``x`` (deterministic selection)."""
    x = np.asarray(x, dtype=np.float64)
    if h.kind == "scad" and h.scale > 0:
        v = h.scale * scad_h_subgrad(h.lam, h.theta, x)
    elif h.kind == "largest_k" and h.scale > 0:
        v = h.scale * largest_k_subgrad(h.lam, h.k, x, tracker=tracker)
    else:
        v = np.zeros(x.size)
    if h.shift_mu > 0:
        v = v + h.shift_mu * x
    return v
