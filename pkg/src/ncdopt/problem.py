"""The three-term composite problem and its assembly helpers.

A problem minimizes F(x) = f(x) + phi(x) - h(x) where

    f(x) = loss(x) + (quad / 2) * ||x||^2 - smooth_h(x)

is the differentiable part (a data-backed loss, an optional convex quadratic
shift, and an optional *smooth* concave term folded in with a minus sign),
``phi`` is the separable convex penalty, and ``h`` the remaining concave
part linearized by the solvers.  The partition's block constants always
describe f as a whole, so the weighted norms, step sizes, and sampling
probabilities downstream stay consistent.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .blocks import BlockPartition
from .errors import InvalidParameterError
from .oracles import SmoothOracle
from .penalties import ConcaveH, SeparablePhi, h_subgrad, h_value


@dataclass
class CompositeProblem:
    oracle: SmoothOracle
    phi: SeparablePhi
    h: ConcaveH
    part: BlockPartition
    weak_convexity_mu: float = 0.0
    quad: float = 0.0
    smooth_h: ConcaveH | None = None
    _global_lip: float | None = field(default=None, repr=False, compare=False)

    @classmethod
    def build(
        cls,
        oracle: SmoothOracle,
        phi: SeparablePhi,
        h: ConcaveH,
        *,
        quad: float = 0.0,
        smooth_h: ConcaveH | None = None,
        weak_convexity_mu: float | None = None,
    ) -> "CompositeProblem":
        """Assemble a problem, estimating the block constants of f.

        The loss oracle's curvature estimates are raised by the quadratic
        shift and by the folded smooth term's gradient Lipschitz constant
        (both act blockwise since they are coordinate-separable), and the
        resulting constants are stored in the partition.  When
        ``weak_convexity_mu`` is not given it defaults to the folded term's
        curvature net of the convex shift.
        """
        if quad < 0:
            raise InvalidParameterError("quad shift must be nonnegative")
        extra = quad
        if smooth_h is not None:
            if not smooth_h.is_smooth():
                raise InvalidParameterError("smooth_h must be differentiable")
            extra += smooth_h.gradient_lipschitz()
        L = oracle.block_lipschitz() + extra
        part = oracle.part.with_L(L)
        if weak_convexity_mu is None:
            lip_h = smooth_h.gradient_lipschitz() if smooth_h is not None else 0.0
            weak_convexity_mu = max(0.0, lip_h - quad)
        elif weak_convexity_mu < 0:
            raise InvalidParameterError("weak_convexity_mu must be nonnegative")
        return cls(
            oracle=oracle,
            phi=phi,
            h=h,
            part=part,
            weak_convexity_mu=weak_convexity_mu,
            quad=quad,
            smooth_h=smooth_h,
        )

    # -- smooth part f ----------------------------------------------
    def f_value(self, x, Ax=None) -> float:
        x = np.asarray(x, dtype=np.float64)
        v = (
            self.oracle.value_from_product(Ax)
            if Ax is not None
            else self.oracle.value_at(x)
        )
        if self.quad:
            v += 0.5 * self.quad * float(np.dot(x, x))
        if self.smooth_h is not None:
            v -= h_value(self.smooth_h, x)
        return v

    def f_extra_grad(self, x) -> np.ndarray | None:
        """Gradient of the non-loss part of f, or None when there is none."""
        if not self.quad and self.smooth_h is None:
            return None
        x = np.asarray(x, dtype=np.float64)
        g = self.quad * x if self.quad else np.zeros(x.size)
        if self.smooth_h is not None:
            g -= h_subgrad(self.smooth_h, x)
        return g

    def f_grad(self, x, Ax=None) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        g = (
            self.oracle.full_gradient_from_product(Ax)
            if Ax is not None
            else self.oracle.full_gradient_at(x)
        )
        extra = self.f_extra_grad(x)
        return g if extra is None else g + extra

    def f_block_grad(self, state, i: int) -> np.ndarray:
        g = self.oracle.block_gradient(state, i)
        if not self.quad and self.smooth_h is None:
            return g
        blk = self.part.block(i)
        xi = state.x[blk]
        if self.quad:
            g = g + self.quad * xi
        if self.smooth_h is not None:
            g = g - h_subgrad(self.smooth_h, xi)
        return g

    def global_smooth_lipschitz(self) -> float:
        """Cached upper bound on the Lipschitz constant of grad f."""
        if self._global_lip is None:
            lip = self.oracle.global_lipschitz() + self.quad
            if self.smooth_h is not None:
                lip += self.smooth_h.gradient_lipschitz()
            self._global_lip = lip
        return self._global_lip

    # -- full objective ----------------------------------------------
    def phi_value(self, x) -> float:
        return self.phi.value(x)

    def h_value(self, x) -> float:
        return h_value(self.h, x)

    def h_subgradient(self, x, tracker=None) -> np.ndarray:
        return h_subgrad(self.h, x, tracker=tracker)

    def objective(self, x, Ax=None) -> float:
        return self.f_value(x, Ax=Ax) + self.phi.value(x) - h_value(self.h, x)

    # -- transforms ----------------------------------------------------
    def dc_shift(self, mu: float) -> "CompositeProblem":
        """Move ``(mu/2)||x||^2`` onto both sides of the split.

        Returns an equivalent problem whose smooth part is ``f + (mu/2)||x||^2``
        (convex once ``mu`` covers the weak convexity) and whose concave part
        gains the same quadratic.  Block constants grow by ``mu``.
        """
        if mu <= 0:
            raise InvalidParameterError("dc shift needs mu > 0")
        from dataclasses import replace

        new_h = replace(self.h, shift_mu=self.h.shift_mu + mu)
        return CompositeProblem(
            oracle=self.oracle,
            phi=self.phi,
            h=new_h,
            part=self.part.with_L(self.part.L + mu),
            weak_convexity_mu=max(0.0, self.weak_convexity_mu - mu),
            quad=self.quad + mu,
            smooth_h=self.smooth_h,
        )
