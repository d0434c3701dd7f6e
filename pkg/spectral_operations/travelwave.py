# spectral_operations/travelwave.py
"""
Even traveling-wave profiles v(x - c t) of the Benjamin equation.

The discrete profile equation, with q = gamma/(alpha - c),

    v + 2 sigma sqrt(q) H J v - q J^2 v + delta/(alpha - c) I_n[v^2] = 0,

is solved by continuation in sigma = beta / (2 sqrt(gamma (alpha - c))),
starting from the explicit sech^2 wave at sigma = 0. Each continuation stage
runs simplified Newton with the Jacobian frozen at the stage start.
"""

import logging
import math
from typing import List, Optional

import attrs
import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.linalg import LinAlgError, lu_factor, lu_solve

from spectral_operations.basis import BasisGrid, basis_matrix
from spectral_operations.errors import ConfigurationError, ContinuationError
from spectral_operations.operators import ModelParams, apply_H, apply_J, h_matrix, j_matrix, nonlinearity
from spectral_operations.oracles import sech2_seed
from spectral_operations.transform import SpectralField, interpolate, inverse
from spectral_operations.validators import finite, positive, positive_int

logger = logging.getLogger(__name__)

STAGNATION_WINDOW = 5


def _sigma_range(instance, attribute, value):
    if not (0.0 <= value < 1.0):
        raise ConfigurationError(f"{attribute.name} must lie in [0, 1), got {value!r}")


@attrs.frozen(eq=False)
class WaveProblem:
    alpha: float = attrs.field(converter=float, validator=finite)
    gamma: float = attrs.field(converter=float, validator=positive)
    delta: float = attrs.field(converter=float, validator=positive)
    c: float = attrs.field(converter=float, validator=finite)
    sigma: float = attrs.field(converter=float, validator=_sigma_range)
    grid: BasisGrid
    n_stages: int = attrs.field(default=20, validator=positive_int)
    newton_max_iters: int = attrs.field(default=50, validator=positive_int)
    max_refinements: int = attrs.field(default=6)
    tol_scale: float = attrs.field(default=1e-12, converter=float, validator=positive)

    def __attrs_post_init__(self):
        if not self.c < self.alpha:
            raise ConfigurationError(f"wave speed c must be below alpha (c={self.c}, alpha={self.alpha})")

    @property
    def speed_gap(self) -> float:
        return self.alpha - self.c

    @property
    def beta(self) -> float:
        return 2.0 * self.sigma * math.sqrt(self.gamma * self.speed_gap)

    @property
    def params(self) -> ModelParams:
        """Equation coefficients whose traveling wave at speed c this profile is."""
        return ModelParams(alpha=self.alpha, beta=self.beta, gamma=self.gamma, delta=self.delta)

    def continuation_grid(self) -> List[float]:
        if self.sigma == 0.0:
            return [0.0]
        return [self.sigma * j / self.n_stages for j in range(1, self.n_stages + 1)]


def eps_n(sigma: float, n: int, scale: float = 1e-12) -> float:
    return scale * math.sqrt(2.0 * (1.0 - sigma) / n)


def even_project(a: ArrayLike) -> SpectralField:
    out = np.array(a, dtype=float)
    out[1::2] = 0.0
    return out


def wave_residual(v: ArrayLike, sigma: float, prob: WaveProblem) -> SpectralField:
    grid = prob.grid
    v = np.asarray(v, dtype=float)
    q = prob.gamma / prob.speed_gap
    Jv = apply_J(v, grid)
    return (
        v
        + 2.0 * sigma * math.sqrt(q) * apply_H(Jv)
        - q * apply_J(Jv, grid)
        + nonlinearity(v, prob.delta / prob.speed_gap, grid)
    )


def wave_jacobian(v: ArrayLike, sigma: float, prob: WaveProblem) -> NDArray[np.float64]:
    """Dense Jacobian of wave_residual restricted to the even coefficients."""
    grid = prob.grid
    q = prob.gamma / prob.speed_gap
    J = j_matrix(grid)
    linear = 2.0 * sigma * math.sqrt(q) * (h_matrix(grid) @ J) - q * (J @ J)
    L = linear.toarray()[0::2, 0::2]
    L[np.diag_indices_from(L)] += 1.0

    # I_n[2 v w] on even w: Phi_e^T diag(weights * v(x_m)) Phi_e
    phi_even = basis_matrix(grid.size, grid.nodes, grid.ell)[:, 0::2]
    u = inverse(np.asarray(v, dtype=float), grid)
    L += (2.0 * prob.delta / prob.speed_gap) * (phi_even.T @ ((grid.weights * u)[:, None] * phi_even))
    return L


class WaveSolver:
    """Sigma continuation with per-stage simplified Newton and bisection on failure."""

    def __init__(self, prob: WaveProblem):
        self.prob = prob
        self.stats = {
            "stages": 0,
            "newton_iterations": 0,
            "refinements": 0,
            "final_residual": float("nan"),
            "tolerance": float("nan"),
        }

    def seed(self) -> SpectralField:
        prob = self.prob
        return even_project(
            interpolate(lambda x: sech2_seed(prob.alpha, prob.c, prob.gamma, prob.delta, x), prob.grid)
        )

    def newton(self, v: SpectralField, sigma: float, stage: int) -> SpectralField:
        prob = self.prob
        tol = eps_n(sigma, prob.grid.n, prob.tol_scale)
        try:
            lu = lu_factor(wave_jacobian(v, sigma, prob))
        except (LinAlgError, ValueError) as exc:
            raise ContinuationError(stage, sigma, [], f"Jacobian factorization failed: {exc}") from exc

        v = v.copy()
        history: List[float] = []
        for _ in range(prob.newton_max_iters + 1):
            R = even_project(wave_residual(v, sigma, prob))
            norm = float(np.linalg.norm(R))
            history.append(norm)
            if norm <= tol:
                self.stats["final_residual"] = norm
                self.stats["tolerance"] = tol
                logger.debug("stage %d sigma=%.6g converged in %d iterations: %s", stage, sigma, len(history) - 1, history)
                return v
            if not math.isfinite(norm):
                raise ContinuationError(stage, sigma, history, "residual is not finite")
            if len(history) > STAGNATION_WINDOW and norm >= history[-1 - STAGNATION_WINDOW]:
                raise ContinuationError(stage, sigma, history, "stagnation")
            v[0::2] -= lu_solve(lu, R[0::2])
            self.stats["newton_iterations"] += 1
        raise ContinuationError(stage, sigma, history, f"no convergence in {prob.newton_max_iters} iterations")

    def solve(self, v0: Optional[SpectralField] = None) -> SpectralField:
        prob = self.prob
        v = self.seed() if v0 is None else even_project(v0)
        pending = prob.continuation_grid()
        sigma_prev = 0.0
        stage = 0
        while pending:
            target = pending[0]
            stage += 1
            logger.info("continuation stage %d: sigma=%.6g", stage, target)
            try:
                v = self.newton(v, target, stage)
            except ContinuationError as exc:
                if self.stats["refinements"] >= prob.max_refinements or target == sigma_prev:
                    raise
                self.stats["refinements"] += 1
                midpoint = 0.5 * (sigma_prev + target)
                logger.warning("stage %d failed (%s); refining to sigma=%.6g", stage, exc.reason, midpoint)
                pending.insert(0, midpoint)
                continue
            pending.pop(0)
            sigma_prev = target
            self.stats["stages"] += 1
        logger.info(
            "profile converged: residual %.3e after %d Newton iterations",
            self.stats["final_residual"],
            self.stats["newton_iterations"],
        )
        return v


def solve_wave(prob: WaveProblem) -> SpectralField:
    return WaveSolver(prob).solve()
