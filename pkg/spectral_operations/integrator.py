# spectral_operations/integrator.py
"""
4-stage Gauss (order 8) implicit Runge-Kutta for Y' = D Y + N(Y) + S(t).

Stage equations (I - tau A (x) D) Z = 1 (x) Y + tau (A (x) I)(N(Z) + S) are
solved by fixed-point iteration. The linear part is inverted by diagonalizing
A = S Lambda S^-1, which leaves four complex banded systems (I - tau lambda_i D).
"""

import functools
import logging
import math
from typing import Callable, Dict, List, Optional, Protocol

import attrs
import numpy as np
from numpy.polynomial import Polynomial
from numpy.typing import NDArray
from scipy import sparse
from scipy.sparse.linalg import splu
from scipy.special import roots_legendre

from spectral_operations.basis import BasisGrid
from spectral_operations.errors import ConfigurationError, StepFailureError
from spectral_operations.validators import nonnegative, positive, positive_int

logger = logging.getLogger(__name__)

Observer = Callable[[float, NDArray[np.float64]], None]


class SemiLinearSystem(Protocol):
    """What the stepper needs: the stiff linear part and the nonlinear term."""

    D: sparse.spmatrix

    def nonlinear(self, Y: NDArray[np.float64]) -> NDArray[np.float64]: ...

    def source_coeffs(self, t: float) -> Optional[NDArray[np.float64]]: ...


@attrs.frozen(eq=False)
class IRKTableau:
    A: NDArray[np.float64]
    b: NDArray[np.float64]
    c: NDArray[np.float64]

    @property
    def stages(self) -> int:
        return self.b.size


@functools.lru_cache(maxsize=1)
def gauss4_tableau() -> IRKTableau:
    """Collocation tableau on the Gauss-Legendre nodes of (0, 1)."""
    x, w = roots_legendre(4)
    x = 0.5 * (x - x[::-1])
    c = 0.5 * (1.0 + x)
    b = 0.25 * (w + w[::-1])

    A = np.empty((4, 4))
    for j in range(4):
        others = np.delete(c, j)
        lagrange = Polynomial.fromroots(others) / np.prod(c[j] - others)
        A[:, j] = lagrange.integ(lbnd=0.0)(c)

    for arr in (A, b, c):
        arr.setflags(write=False)
    return IRKTableau(A=A, b=b, c=c)


@attrs.frozen
class StepperConfig:
    tau: float = attrs.field(converter=float, validator=positive)
    T: float = attrs.field(converter=float, validator=nonnegative)
    fp_tol: float = attrs.field(default=1e-13, converter=float, validator=positive)
    fp_max_iters: int = attrs.field(default=50, validator=positive_int)
    snapshot_stride: int = attrs.field(default=1, validator=positive_int)

    def __attrs_post_init__(self):
        if self.T > 0 and self.tau > self.T:
            raise ConfigurationError(f"tau must not exceed T (tau={self.tau}, T={self.T})")


class StageSolver:
    """Applies (I - tau [A (x) D])^-1 to stage arrays of shape (stages, N)."""

    def __init__(self, tau: float, A: NDArray[np.float64], D: sparse.spmatrix):
        self.tau = float(tau)
        self.A = np.asarray(A, dtype=float)
        self.D = sparse.csc_matrix(D)
        eigvals, self._S = np.linalg.eig(self.A)
        self._S_inv = np.linalg.inv(self._S)
        self.eigenvalues = eigvals

        identity = sparse.identity(self.D.shape[0], dtype=complex, format="csc")
        self._factors = []
        for lam in eigvals:
            shifted = sparse.csc_matrix(identity - (self.tau * lam) * self.D)
            try:
                self._factors.append(splu(shifted, permc_spec="NATURAL"))
            except RuntimeError as exc:
                raise np.linalg.LinAlgError(
                    f"stage matrix I - tau*lambda*D is singular (tau={tau}, lambda={lam})"
                ) from exc

    def solve(self, rhs: NDArray[np.float64]) -> NDArray[np.float64]:
        rotated = self._S_inv @ rhs
        decoupled = np.stack([lu.solve(rotated[i]) for i, lu in enumerate(self._factors)])
        return (self._S @ decoupled).real

    def apply(self, Z: NDArray[np.float64]) -> NDArray[np.float64]:
        """(I - tau [A (x) D]) Z, the operator solve() inverts."""
        DZ = (self.D @ Z.T).T
        return Z - self.tau * (self.A @ DZ)


def build_stage_solver(tau: float, A: NDArray[np.float64], D: sparse.spmatrix) -> StageSolver:
    if not tau > 0:
        raise ConfigurationError(f"tau must be positive, got {tau!r}")
    return StageSolver(tau, A, D)


def _stage_terms(system: SemiLinearSystem, Z: NDArray[np.float64]) -> NDArray[np.float64]:
    return np.stack([system.nonlinear(z) for z in Z])


def irk8_step(
    Y: NDArray[np.float64],
    t: float,
    tau: float,
    system: SemiLinearSystem,
    solver: StageSolver,
    cfg: StepperConfig,
    stats: Optional[Dict[str, int]] = None,
) -> NDArray[np.float64]:
    """One Gauss step; the update uses the full stage derivative D Z_i + N(Z_i) + S_i."""
    tab = gauss4_tableau()
    Y = np.asarray(Y, dtype=float)
    base = np.tile(Y, (tab.stages, 1))

    sources = [system.source_coeffs(t + ci * tau) for ci in tab.c]
    S = None if sources[0] is None else np.stack(sources)
    forcing = base if S is None else base + tau * (tab.A @ S)

    Z = base
    increments: List[float] = []
    for iteration in range(1, cfg.fp_max_iters + 1):
        Z_new = solver.solve(forcing + tau * (tab.A @ _stage_terms(system, Z)))
        increment = float(np.linalg.norm(Z_new - Z))
        Z = Z_new
        increments.append(increment)
        if increment <= cfg.fp_tol * (1.0 + float(np.linalg.norm(Z))):
            break
    else:
        raise StepFailureError(t, tau, cfg.fp_max_iters, increments)

    K = (system.D @ Z.T).T + _stage_terms(system, Z)
    if S is not None:
        K = K + S

    if stats is not None:
        stats["steps"] = stats.get("steps", 0) + 1
        stats["fp_iterations_total"] = stats.get("fp_iterations_total", 0) + iteration
        stats["fp_iterations_max"] = max(stats.get("fp_iterations_max", 0), iteration)
    logger.debug("t=%.6g: %d fixed-point iterations, last increment %.3e", t, iteration, increments[-1])
    return Y + tau * (tab.b @ K)


class GaussStepper:
    """Time loop around irk8_step with one cached stage solver per step size."""

    def __init__(self, system: SemiLinearSystem, cfg: StepperConfig):
        self.system = system
        self.cfg = cfg
        self.tableau = gauss4_tableau()
        self._solvers: Dict[float, StageSolver] = {}
        self.stats = {
            "steps": 0,
            "fp_iterations_total": 0,
            "fp_iterations_max": 0,
        }

    def solver_for(self, tau: float) -> StageSolver:
        if tau not in self._solvers:
            self._solvers[tau] = build_stage_solver(tau, self.tableau.A, self.system.D)
        return self._solvers[tau]

    def step(self, Y: NDArray[np.float64], t: float, tau: float) -> NDArray[np.float64]:
        return irk8_step(Y, t, tau, self.system, self.solver_for(tau), self.cfg, self.stats)

    def run(self, Y0: NDArray[np.float64], observer: Optional[Observer] = None) -> NDArray[np.float64]:
        cfg = self.cfg
        Y = np.array(Y0, dtype=float)
        _notify(observer, 0.0, Y)
        if cfg.T == 0:
            return Y

        ratio = cfg.T / cfg.tau
        n_steps = int(round(ratio))
        if abs(ratio - n_steps) > 1e-9 * max(1.0, ratio):
            n_steps = int(math.floor(ratio))
        remainder = cfg.T - n_steps * cfg.tau
        if remainder <= 1e-12 * cfg.T:
            remainder = 0.0

        for k in range(n_steps):
            Y = self.step(Y, k * cfg.tau, cfg.tau)
            if (k + 1) % cfg.snapshot_stride == 0 or (k + 1 == n_steps and remainder == 0.0):
                _notify(observer, cfg.T if (k + 1 == n_steps and remainder == 0.0) else (k + 1) * cfg.tau, Y)

        if remainder > 0.0:
            Y = self.step(Y, n_steps * cfg.tau, remainder)
            _notify(observer, cfg.T, Y)
        return Y


def _notify(observer: Optional[Observer], t: float, Y: NDArray[np.float64]) -> None:
    if observer is None:
        return
    view = Y.copy()
    view.setflags(write=False)
    observer(t, view)


def integrate(
    Y0: NDArray[np.float64],
    params,
    grid: BasisGrid,
    source,
    cfg: StepperConfig,
    observer: Optional[Observer] = None,
) -> NDArray[np.float64]:
    """Advance Y0 from t=0 to t=cfg.T for the Benjamin system of (params, grid)."""
    from spectral_operations.model import BenjaminSystem

    system = BenjaminSystem.build(params, grid, source)
    return GaussStepper(system, cfg).run(Y0, observer)
