# spectral_operations/transform.py
"""
Discrete MTC transforms between nodal values and interleaved coefficients.

The fast paths rely on

    w_m phi_{2k}(x_m) f_m   = sqrt(pi*ell)/(2p) * sin((2k+1) theta_m/2) * g_m
    w_m phi_{2k+1}(x_m) f_m = sqrt(pi*ell)/(2p) * cos((2k+1) theta_m/2) * g_m

with g_m = f_m / sin(theta_m/2). Odd-harmonic sums on the midpoint grid reduce
to one complex FFT of length 2p after pre- and post-twiddles. sin(theta_m/2)
never vanishes because theta_m stays pi/(2p) away from 0 and 2*pi. scipy.fft
is O(p log p) for every length, so no size falls back to the naive sums.
"""

import functools
import logging
import math
from typing import Callable, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import fft

from spectral_operations.basis import BasisGrid, eval_phi
from spectral_operations.errors import DimensionError

logger = logging.getLogger(__name__)

SpectralField = NDArray[np.float64]
NodalField = NDArray[np.float64]


def _as_vector(v: ArrayLike, grid: BasisGrid, what: str) -> NDArray[np.float64]:
    arr = np.asarray(v, dtype=float)
    if arr.shape != (grid.size,):
        raise DimensionError(f"{what} has shape {arr.shape}, grid expects ({grid.size},)")
    return arr


@functools.lru_cache(maxsize=64)
def _twiddles(p: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    m = np.arange(2 * p)
    k = np.arange(p)
    pre = np.exp(1j * np.pi * m / (2 * p))
    post = np.exp(1j * np.pi * (2 * k + 1) / (4 * p))
    node_phase = np.exp(1j * np.pi * (2 * m + 1) / (4 * p))
    for arr in (pre, post, node_phase):
        arr.setflags(write=False)
    return pre, post, node_phase


def forward_naive(v: ArrayLike, grid: BasisGrid) -> SpectralField:
    values = _as_vector(v, grid, "nodal vector")
    weighted = grid.weights * values
    out = np.empty(grid.size)
    for k in range(grid.size):
        out[k] = np.dot(weighted, eval_phi(k, grid.nodes, grid.ell))
    return out


def inverse_naive(a: ArrayLike, grid: BasisGrid) -> NodalField:
    coeffs = _as_vector(a, grid, "coefficient vector")
    out = np.zeros(grid.size)
    for k in range(grid.size):
        out += coeffs[k] * eval_phi(k, grid.nodes, grid.ell)
    return out


def forward(v: ArrayLike, grid: BasisGrid) -> SpectralField:
    values = _as_vector(v, grid, "nodal vector")
    p = grid.p
    pre, post, _ = _twiddles(p)
    g = values / np.sin(0.5 * grid.theta)
    sums = (2 * p) * fft.ifft(g * pre)[:p] * post

    scale = math.sqrt(math.pi * grid.ell) / (2 * p)
    out = np.empty(grid.size)
    out[0::2] = scale * sums.imag
    out[1::2] = scale * sums.real
    return out


def inverse(a: ArrayLike, grid: BasisGrid) -> NodalField:
    coeffs = _as_vector(a, grid, "coefficient vector")
    p = grid.p
    _, post, node_phase = _twiddles(p)
    padded = np.zeros(2 * p, dtype=complex)
    # post[k] * exp(-i pi/(4p)) = exp(i pi k/(2p))
    padded[:p] = (coeffs[1::2] - 1j * coeffs[0::2]) * post * np.conj(post[0])
    sums = (2 * p) * fft.ifft(padded) * node_phase
    return 2.0 / math.sqrt(math.pi * grid.ell) * np.sin(0.5 * grid.theta) * sums.real


def interpolate(f: Callable[[NDArray[np.float64]], ArrayLike], grid: BasisGrid) -> SpectralField:
    """Coefficients of I_n[f]; f is called once on the node array."""
    return forward(np.broadcast_to(np.asarray(f(grid.nodes), dtype=float), (grid.size,)), grid)
