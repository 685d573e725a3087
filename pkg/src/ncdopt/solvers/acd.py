"""Non-uniform accelerated coordinate descent for smooth strongly convex f.

Blocks are sampled with probability proportional to L_i^((1-s)/2); the
iterate pair (y, z) mixes through fixed coefficients

    alpha = sqrt(mu_s) / (sqrt(mu_s) + T),   T = sum_i L_i^((1-s)/2),
    beta  = sqrt(mu_s) * T,                  gamma = mu_s,

where mu_s in (0, 1] is the strong convexity modulus relative to the norm at
exponent s.  The z-subproblem has a closed form: every block moves to the
convex combination (gamma y + beta z) / (gamma + beta) and the sampled block
additionally absorbs its gradient.  Option I finishes each iteration with an
exact block gradient step; Option II (default) keeps the combination point.

Blocks whose constants sit at the zero-column floor are excluded from
sampling so the probability weights never divide by a floored value.
"""

from __future__ import annotations

import numpy as np

from ..errors import InvalidParameterError
from ..oracles import LIPSCHITZ_FLOOR
from .config import AliasSampler, PassCounter
from .surrogate import SubProblem


def acd_schedule(part, mu_s: float, s: float):
    """Sampling weights and mixing coefficients for the given constants."""
    L = part.L
    active = L > LIPSCHITZ_FLOOR
    if not np.any(active):
        raise InvalidParameterError("every block has floored curvature")
    weights = np.where(active, L ** ((1.0 - s) / 2.0), 0.0)
    T = float(weights.sum())
    root = np.sqrt(mu_s)
    alpha = root / (root + T)
    beta = root * T
    gamma = mu_s
    return weights, alpha, beta, gamma


def acd_nonuniform(
    sub: SubProblem,
    x0: np.ndarray,
    K: int,
    rng: np.random.Generator,
    *,
    s: float = 1.0,
    option: str = "II",
    Ax0: np.ndarray | None = None,
    counter: PassCounter | None = None,
):
    """Run ``K`` iterations from ``x0`` (z starts at x0); returns (x, A x)."""
    if option not in ("I", "II"):
        raise InvalidParameterError("option must be 'I' or 'II'")
    if not 0.0 <= s <= 1.0:
        raise InvalidParameterError("s must lie in [0, 1]")
    part = sub.part
    smooth = sub.smooth
    mu_s = sub.mu_tilde
    A = smooth.oracle.A
    fwd = smooth.oracle.blocks.fwd
    weights, alpha, beta, gamma = acd_schedule(part, mu_s, s)
    probs = weights / weights.sum()
    sampler = AliasSampler(weights)
    Ls = part.L ** s
    x = np.array(x0, dtype=np.float64, copy=True)
    Ax = A.matvec(x) if Ax0 is None else np.array(Ax0, dtype=np.float64, copy=True)
    z = x.copy()
    Az = Ax.copy()
    gb = gamma + beta
    for k in range(K):
        y = (1.0 - alpha) * x + alpha * z
        Ay = (1.0 - alpha) * Ax + alpha * Az
        i = sampler.draw(rng)
        sl = part.block(i)
        g_i = smooth.block_grad(i, y, Ay)
        if counter is not None:
            counter.add_block(i)
        cmb = (gamma * y + beta * z) / gb
        z_new_i = cmb[sl] - g_i / (probs[i] * Ls[i] * gb)
        Az_new = (gamma * Ay + beta * Az) / gb + fwd[i] @ (z_new_i - cmb[sl])
        step_i = (alpha / probs[i]) * (z_new_i - z[sl])
        x_bar = y
        x_bar[sl] = y[sl] + step_i
        Ax_bar = Ay + fwd[i] @ step_i
        cmb[sl] = z_new_i            # cmb now holds z_{k+1}
        z = cmb
        Az = Az_new
        if option == "I":
            g_bar = smooth.block_grad(i, x_bar, Ax_bar)
            if counter is not None:
                counter.add_block(i)
            corr = -g_bar / part.L[i]
            x_bar[sl] += corr
            Ax_bar = Ax_bar + fwd[i] @ corr
        x = x_bar
        Ax = Ax_bar
        if (k + 1) % 4096 == 0:
            Ax = A.matvec(x)
            Az = A.matvec(z)
    return x, Ax
