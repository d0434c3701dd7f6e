# spectral_operations/oracles.py
"""
Closed-form reference solutions used to drive and verify the solver.

Lorentzian families (even r/(a^2+s^2) or odd r*s/(a^2+s^2), s = x - x0 - c*t)
are written through g = 1/(s - i*a):

    r/(a^2+s^2)   = (r/a) Im g
    r*s/(a^2+s^2) = r Re g

so every x-derivative and Hilbert transform reduces to g^(n) = (-1)^n n! (s - i*a)^(-n-1).
g extends analytically to the lower half plane, so its spectrum lives on xi < 0
and the multiplier -i*sgn(xi) of H gives H[g] = i*g.

KdV N-solitons u = -2 d^2/dx^2 ln det(I + A(x, t)) are differentiated exactly by
expanding ln det in a truncated power series in the (x, t) offsets.
"""

import logging
import math
from typing import Dict, Tuple

import attrs
import numpy as np
from numpy.typing import ArrayLike, NDArray

from spectral_operations.errors import CapabilityError, ConfigurationError, DomainError

logger = logging.getLogger(__name__)

# Sign s in H[1/(s - i a)] = s * i/(s - i a); fixed against a discrete FFT
# Hilbert transform and pinned by tests/test_oracles.py.
HILBERT_SIGN = 1.0

EVEN = "even"
ODD = "odd"


def _as_tuple(values) -> Tuple[float, ...]:
    return tuple(float(v) for v in np.atleast_1d(np.asarray(values, dtype=float)))


@attrs.frozen
class LorentzianFamily:
    r: Tuple[float, ...] = attrs.field(converter=_as_tuple)
    a: Tuple[float, ...] = attrs.field(converter=_as_tuple)
    x0: Tuple[float, ...] = attrs.field(converter=_as_tuple)
    c: Tuple[float, ...] = attrs.field(converter=_as_tuple)
    parity: str = attrs.field(default=EVEN, validator=attrs.validators.in_((EVEN, ODD)))

    has_hilbert = True

    def __attrs_post_init__(self):
        if not len(self.r) == len(self.a) == len(self.x0) == len(self.c):
            raise ConfigurationError("Lorentzian bump parameters must have equal lengths")
        if any(not (a > 0) for a in self.a):
            raise ConfigurationError(f"Lorentzian widths must be positive, got {self.a}")

    @property
    def bumps(self) -> int:
        return len(self.r)

    def u(self, x: ArrayLike, t: float) -> NDArray[np.float64]:
        return lorentzian_eval(self, x, t, 0)

    def derivative(self, x: ArrayLike, t: float, order: int) -> NDArray[np.float64]:
        return lorentzian_eval(self, x, t, order)

    def time_derivative(self, x: ArrayLike, t: float) -> NDArray[np.float64]:
        return _lorentzian_sum(self, x, t, 1, hilbert=False, speed_weighted=True)

    def hilbert(self, x: ArrayLike, t: float, order: int) -> NDArray[np.float64]:
        return lorentzian_hilbert(self, x, t, order)


def _lorentzian_sum(
    fam: LorentzianFamily, x: ArrayLike, t: float, order: int, hilbert: bool, speed_weighted: bool = False
) -> NDArray[np.float64]:
    x = np.asarray(x, dtype=float)
    total = np.zeros(x.shape)
    prefactor = (-1.0) ** order * math.factorial(order)
    for r, a, x0, c in zip(fam.r, fam.a, fam.x0, fam.c):
        s = x - x0 - c * t
        g = prefactor * (s - 1j * a) ** (-(order + 1))
        if hilbert:
            g = HILBERT_SIGN * 1j * g
        term = (r / a) * g.imag if fam.parity == EVEN else r * g.real
        # u_t = -c u_x for a bump moving at speed c
        total += -c * term if speed_weighted else term
    return total


def lorentzian_eval(fam: LorentzianFamily, x: ArrayLike, t: float, derivative_order: int = 0) -> NDArray[np.float64]:
    """d^order u / dx^order for order 0..3."""
    if derivative_order not in (0, 1, 2, 3):
        raise DomainError(f"derivative_order must be 0..3, got {derivative_order!r}")
    return _lorentzian_sum(fam, x, t, derivative_order, hilbert=False)


def lorentzian_hilbert(fam: LorentzianFamily, x: ArrayLike, t: float, derivative_order: int = 0) -> NDArray[np.float64]:
    """H[d^order u / dx^order] for order 0..2."""
    if derivative_order not in (0, 1, 2):
        raise DomainError(f"derivative_order must be 0..2, got {derivative_order!r}")
    return _lorentzian_sum(fam, x, t, derivative_order, hilbert=True)


# ---------------------------------------------------------------------------
# KdV N-solitons

X_ORDER = 5
T_ORDER = 1
_BATCH = 2048


@attrs.frozen
class SolitonFamily:
    velocities: Tuple[float, ...] = attrs.field(converter=_as_tuple)
    phases: Tuple[float, ...] = attrs.field(converter=_as_tuple)

    has_hilbert = False

    def __attrs_post_init__(self):
        if len(self.velocities) != len(self.phases) or not self.velocities:
            raise ConfigurationError("soliton velocities and phases must be non-empty and of equal length")
        if any(not (v > 0) for v in self.velocities):
            raise ConfigurationError(f"soliton velocities must be positive, got {self.velocities}")

    @property
    def N(self) -> int:
        return len(self.velocities)

    @property
    def lam(self) -> NDArray[np.float64]:
        return 0.5 * np.sqrt(np.asarray(self.velocities))

    @property
    def b(self) -> NDArray[np.float64]:
        lam = self.lam
        return 2.0 * lam * np.exp(2.0 * np.asarray(self.phases) * lam)

    def merged(self) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
        """Distinct lambdas with the b of equal lambdas summed; det(I + A) is unchanged."""
        lam_unique, inverse_idx = np.unique(self.lam, return_inverse=True)
        b_sum = np.zeros(lam_unique.size)
        np.add.at(b_sum, inverse_idx, self.b)
        return lam_unique, b_sum

    def u(self, x: ArrayLike, t: float) -> NDArray[np.float64]:
        return kdv_nsoliton(self, x, t)

    def derivative(self, x: ArrayLike, t: float, order: int) -> NDArray[np.float64]:
        if order not in (0, 1, 2, 3):
            raise DomainError(f"derivative_order must be 0..3, got {order!r}")
        return kdv_derivatives(self, x, t)[("u", "u_x", "u_xx", "u_xxx")[order]]

    def time_derivative(self, x: ArrayLike, t: float) -> NDArray[np.float64]:
        return kdv_derivatives(self, x, t)["u_t"]

    def hilbert(self, x: ArrayLike, t: float, order: int) -> NDArray[np.float64]:
        raise CapabilityError("KdV solitons carry no closed-form Hilbert transform")


def _series_mul(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Truncated product of matrix-valued series indexed [..., x_order, t_order, :, :]."""
    out = np.zeros_like(X)
    for i1 in range(X_ORDER + 1):
        for j1 in range(T_ORDER + 1):
            for i2 in range(X_ORDER + 1 - i1):
                for j2 in range(T_ORDER + 1 - j1):
                    out[..., i1 + i2, j1 + j2, :, :] += X[..., i1, j1, :, :] @ Y[..., i2, j2, :, :]
    return out


def _exp_coeffs(rate: np.ndarray, order: int) -> np.ndarray:
    """Taylor coefficients rate^m / m! for m = 0..order, stacked on a new axis after the leading ones."""
    m = np.arange(order + 1)
    fact = np.array([math.factorial(k) for k in m], dtype=float)
    return rate[..., None] ** m / fact


def _matrix_series(fam: SolitonFamily, x: np.ndarray, t: float) -> np.ndarray:
    """Series of a matrix with the same determinant (up to a factor linear in x) as I + A."""
    lam, b = fam.merged()
    N = lam.size
    beta_t = b * np.exp(8.0 * lam**3 * t)
    cauchy = 1.0 / (lam[:, None] + lam[None, :])
    dt_rate = 8.0 * lam**3

    M = np.zeros((x.size, X_ORDER + 1, T_ORDER + 1, N, N))
    right = x >= 0
    left = ~right

    if right.any():
        xr = x[right]
        e = np.exp(-np.outer(xr, lam))
        A0 = (beta_t * e)[:, :, None] * cauchy[None] * e[:, None, :]
        x_coeffs = _exp_coeffs(-(lam[:, None] + lam[None, :]), X_ORDER)  # (N, N, X)
        t_coeffs = _exp_coeffs(dt_rate, T_ORDER)  # (N, T)
        block = (
            A0[:, None, None, :, :]
            * np.moveaxis(x_coeffs, -1, 0)[None, :, None, :, :]
            * t_coeffs.T[None, None, :, :, None]
        )
        block[:, 0, 0] += np.eye(N)
        M[right] = block

    if left.any():
        # det(I + A) = exp(-2 x sum(lam)) det(diag(exp(2 lam x)) + diag(beta) C)
        xl = x[left]
        diag_vals = np.exp(2.0 * np.outer(xl, lam))
        x_coeffs = _exp_coeffs(2.0 * lam, X_ORDER)  # (N, X)
        block = np.zeros((xl.size, X_ORDER + 1, T_ORDER + 1, N, N))
        idx = np.arange(N)
        block[:, :, 0, idx, idx] = diag_vals[:, None, :] * x_coeffs.T[None]
        t_coeffs = _exp_coeffs(dt_rate, T_ORDER)
        for n in range(T_ORDER + 1):
            block[:, 0, n] += (beta_t * t_coeffs[:, n])[:, None] * cauchy
        M[left] = block
    return M


def _logdet_series(fam: SolitonFamily, x: np.ndarray, t: float) -> np.ndarray:
    M = _matrix_series(fam, x, t)
    if x.size == 0:
        return np.zeros((0, X_ORDER + 1, T_ORDER + 1))
    M0 = M[:, 0, 0]
    sign, _ = np.linalg.slogdet(M0)
    if np.any(sign <= 0):
        bad = x[sign <= 0][0]
        raise DomainError(f"soliton determinant is not positive at x={bad:.6g}, t={t:.6g}")

    M0_inv = np.linalg.inv(M0)
    B = M0_inv[:, None, None] @ M
    B[:, 0, 0] = 0.0

    coeffs = np.zeros((x.size, X_ORDER + 1, T_ORDER + 1))
    power = B
    for m in range(1, X_ORDER + T_ORDER + 1):
        coeffs += (-1.0) ** (m + 1) / m * np.trace(power, axis1=-2, axis2=-1)
        power = _series_mul(power, B)
    return coeffs


def kdv_derivatives(fam: SolitonFamily, x: ArrayLike, t: float) -> Dict[str, NDArray[np.float64]]:
    """u, u_x, u_xx, u_xxx and u_t of the N-soliton at (x, t)."""
    x = np.asarray(x, dtype=float)
    flat = x.ravel()
    coeffs = np.empty((flat.size, X_ORDER + 1, T_ORDER + 1))
    for start in range(0, flat.size, _BATCH):
        coeffs[start:start + _BATCH] = _logdet_series(fam, flat[start:start + _BATCH], t)

    # d^i/dx^i d^j/dt^j ln det = i! j! coeffs[i, j]; u = -2 d^2/dx^2 ln det
    out = {
        "u": -4.0 * coeffs[:, 2, 0],
        "u_x": -12.0 * coeffs[:, 3, 0],
        "u_xx": -48.0 * coeffs[:, 4, 0],
        "u_xxx": -240.0 * coeffs[:, 5, 0],
        "u_t": -4.0 * coeffs[:, 2, 1],
    }
    return {key: value.reshape(x.shape) for key, value in out.items()}


def kdv_nsoliton(fam: SolitonFamily, x: ArrayLike, t: float) -> NDArray[np.float64]:
    return kdv_derivatives(fam, x, t)["u"]


def sech2_seed(alpha: float, c: float, gamma: float, delta: float, x: ArrayLike) -> NDArray[np.float64]:
    """Explicit solitary wave of the sigma = 0 profile equation."""
    if not gamma > 0:
        raise DomainError(f"sech^2 seed needs gamma > 0, got {gamma!r}")
    if not alpha - c > 0:
        raise DomainError(f"sech^2 seed needs c < alpha, got alpha={alpha!r}, c={c!r}")
    if delta == 0:
        raise DomainError("sech^2 seed needs delta != 0")
    k = math.sqrt((alpha - c) / (4.0 * gamma))
    # sech^2(y) = 4 e^{-2|y|} / (1 + e^{-2|y|})^2 stays finite on far nodes
    decay = np.exp(-2.0 * k * np.abs(np.asarray(x, dtype=float)))
    return -3.0 * (alpha - c) / (2.0 * delta) * 4.0 * decay / (1.0 + decay) ** 2
