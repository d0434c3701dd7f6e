# spectral_operations/model.py
"""
Semi-discrete Benjamin system Y' = D Y + J F(Y) + S(t) in MTC coefficients.

Its Hamiltonian is

    G(Y) = 1/2 (alpha <Y,Y> + beta <Y, HJ Y> + gamma <JY, JY> + (2 delta/3) <Y, I_n[u^2]>)

so that D Y + J F(Y) = J grad G(Y). HJ is symmetric and commutes with J, which
fixes the sign in front of beta once D carries +beta H J^2.
"""

import logging
from typing import Callable, Optional, Protocol

import attrs
import numpy as np
from numpy.typing import ArrayLike, NDArray

from spectral_operations.basis import BasisGrid
from spectral_operations.errors import CapabilityError
from spectral_operations.operators import (
    ModelParams,
    OperatorBundle,
    apply_H,
    apply_J,
    build_D,
    nonlinearity,
)
from spectral_operations.transform import SpectralField, forward

logger = logging.getLogger(__name__)

SourceFunction = Callable[[NDArray[np.float64], float], NDArray[np.float64]]


class ExactSolution(Protocol):
    has_hilbert: bool

    def u(self, x: ArrayLike, t: float) -> NDArray[np.float64]: ...

    def derivative(self, x: ArrayLike, t: float, order: int) -> NDArray[np.float64]: ...

    def time_derivative(self, x: ArrayLike, t: float) -> NDArray[np.float64]: ...

    def hilbert(self, x: ArrayLike, t: float, order: int) -> NDArray[np.float64]: ...


@attrs.frozen(eq=False)
class BenjaminSystem:
    params: ModelParams
    grid: BasisGrid
    bundle: OperatorBundle
    source: Optional[SourceFunction] = None

    @classmethod
    def build(cls, params: ModelParams, grid: BasisGrid, source: Optional[SourceFunction] = None) -> "BenjaminSystem":
        return cls(params=params, grid=grid, bundle=build_D(params, grid), source=source)

    @property
    def D(self):
        return self.bundle.D

    def nonlinear(self, Y: ArrayLike) -> SpectralField:
        """J F(Y)."""
        return apply_J(nonlinearity(Y, self.params.delta, self.grid), self.grid)

    def source_coeffs(self, t: float) -> Optional[SpectralField]:
        if self.source is None:
            return None
        return forward(self.source(self.grid.nodes, t), self.grid)


def rhs(Y: ArrayLike, t: float, sys: BenjaminSystem) -> SpectralField:
    Y = np.asarray(Y, dtype=float)
    out = sys.D @ Y + sys.nonlinear(Y)
    S = sys.source_coeffs(t)
    return out if S is None else out + S


def hamiltonian(Y: ArrayLike, sys: BenjaminSystem) -> float:
    Y = np.asarray(Y, dtype=float)
    p = sys.params
    JY = apply_J(Y, sys.grid)
    cubic = nonlinearity(Y, 1.0, sys.grid)
    value = (
        p.alpha * np.dot(Y, Y)
        + p.beta * np.dot(Y, apply_H(JY))
        + p.gamma * np.dot(JY, JY)
        + (2.0 * p.delta / 3.0) * np.dot(Y, cubic)
    )
    return 0.5 * float(value)


def hamiltonian_gradient(Y: ArrayLike, sys: BenjaminSystem) -> SpectralField:
    """alpha Y + beta HJ Y - gamma J^2 Y + F(Y)."""
    Y = np.asarray(Y, dtype=float)
    p = sys.params
    JY = apply_J(Y, sys.grid)
    return (
        p.alpha * Y
        + p.beta * apply_H(JY)
        - p.gamma * apply_J(JY, sys.grid)
        + nonlinearity(Y, p.delta, sys.grid)
    )


def l2_norm(Y: ArrayLike) -> float:
    """||u||_{L^2} of the expansion, by orthonormality."""
    return float(np.linalg.norm(np.asarray(Y, dtype=float)))


def make_source(exact: ExactSolution, params: ModelParams) -> SourceFunction:
    """Forcing f = u_t + alpha u_x - beta H[u_xx] - gamma u_xxx + delta (u^2)_x for which exact solves the PDE."""
    if params.beta != 0 and not exact.has_hilbert:
        raise CapabilityError(
            f"{type(exact).__name__} has no closed-form Hilbert transform, needed for beta={params.beta}"
        )

    def source(x: NDArray[np.float64], t: float) -> NDArray[np.float64]:
        u = exact.u(x, t)
        u_x = exact.derivative(x, t, 1)
        f = exact.time_derivative(x, t) + params.alpha * u_x - params.gamma * exact.derivative(x, t, 3)
        f = f + 2.0 * params.delta * u * u_x
        if params.beta != 0:
            f = f - params.beta * exact.hilbert(x, t, 2)
        return f

    logger.debug("manufactured source for %s with %s", type(exact).__name__, params)
    return source
