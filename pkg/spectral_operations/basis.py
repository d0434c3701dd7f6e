# spectral_operations/basis.py
"""
Malmquist-Takenaka-Christov (MTC) basis on the real line.

With x = (ell/2) cot(theta/2), theta in (0, 2*pi), the basis functions are

    phi_{2k}(x)   = 2/sqrt(pi*ell) * sin((2k+1) theta/2) * sin(theta/2)
    phi_{2k+1}(x) = 2/sqrt(pi*ell) * cos((2k+1) theta/2) * sin(theta/2)

Coefficient vectors are interleaved: slot k holds the coefficient of phi_k.
"""

import logging
import math

import attrs
import numpy as np
from numpy.polynomial import polynomial as P
from numpy.typing import ArrayLike, NDArray
from scipy.special import eval_laguerre

from spectral_operations.errors import ConfigurationError

logger = logging.getLogger(__name__)


@attrs.frozen(eq=False)
class BasisGrid:
    """Collocation geometry for p coefficient pairs (truncation n = 2p - 1)."""

    p: int
    ell: float
    theta: NDArray[np.float64]
    nodes: NDArray[np.float64]
    weights: NDArray[np.float64]

    @property
    def size(self) -> int:
        return 2 * self.p

    @property
    def n(self) -> int:
        return 2 * self.p - 1


def make_grid(p: int, ell: float) -> BasisGrid:
    if isinstance(p, bool) or int(p) != p or p < 1:
        raise ConfigurationError(f"grid.p must be a positive integer, got {p!r}")
    if not (ell > 0 and math.isfinite(ell)):
        raise ConfigurationError(f"grid.ell must be positive, got {ell!r}")
    p = int(p)
    ell = float(ell)

    m = np.arange(2 * p)
    theta = (2 * m + 1) * np.pi / (2 * p)

    # mirrored halves keep x_m = -x_{2p-1-m} bit-exact
    half = 0.5 * ell / np.tan(0.5 * theta[:p])
    nodes = np.concatenate([half, -half[::-1]])
    weights = np.pi / (4.0 * ell * p) * (ell**2 + 4.0 * nodes**2)

    for arr in (theta, nodes, weights):
        arr.setflags(write=False)
    return BasisGrid(p=p, ell=ell, theta=theta, nodes=nodes, weights=weights)


def half_angle(x: ArrayLike, ell: float) -> NDArray[np.float64]:
    """theta(x) = 2 arccot(2x/ell), always inside (0, 2*pi)."""
    return 2.0 * np.arctan2(ell, 2.0 * np.asarray(x, dtype=float))


def eval_phi(k: int, x: ArrayLike, ell: float) -> NDArray[np.float64]:
    """Evaluate phi_k at x. Negative k follows the same closed form, so that
    phi_{-2k-2} = -phi_{2k} and phi_{-2k-1} = phi_{2k+1}."""
    theta = half_angle(x, ell)
    freq = 2 * (k // 2) + 1
    scale = 2.0 / math.sqrt(math.pi * ell)
    if k % 2 == 0:
        return scale * np.sin(0.5 * freq * theta) * np.sin(0.5 * theta)
    return scale * np.cos(0.5 * freq * theta) * np.sin(0.5 * theta)


def basis_matrix(size: int, x: ArrayLike, ell: float) -> NDArray[np.float64]:
    """Dense matrix B[m, k] = phi_k(x_m) for k < size."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    theta = half_angle(x, ell)
    freq = 2 * (np.arange(size) // 2) + 1
    arg = 0.5 * np.outer(theta, freq)
    trig = np.where(np.arange(size) % 2 == 0, np.sin(arg), np.cos(arg))
    return 2.0 / math.sqrt(math.pi * ell) * np.sin(0.5 * theta)[:, None] * trig


def eval_expansion(coeffs: ArrayLike, x: ArrayLike, ell: float) -> NDArray[np.float64]:
    """Sum a_k phi_k(x) by Horner's rule in w = exp(i theta)."""
    a = np.asarray(coeffs, dtype=float)
    if a.ndim != 1 or a.size % 2:
        raise ConfigurationError(f"coefficient vector must have even length, got shape {a.shape}")
    theta = half_angle(x, ell)
    q = a[1::2] - 1j * a[0::2]
    total = np.exp(0.5j * theta) * P.polyval(np.exp(1j * theta), q)
    return 2.0 / math.sqrt(math.pi * ell) * np.sin(0.5 * theta) * total.real


def fourier_image(k: int, xi: ArrayLike, ell: float) -> NDArray[np.complex128]:
    """Unitary Fourier transform of phi_k (Laguerre functions in ell*|xi|)."""
    xi = np.asarray(xi, dtype=float)
    s = ell * np.abs(xi)
    laguerre = math.sqrt(ell / 2.0) * np.exp(-0.5 * s) * eval_laguerre(k // 2, s)
    if k % 2 == 0:
        return laguerre.astype(complex)
    return -1j * np.sign(xi) * laguerre
