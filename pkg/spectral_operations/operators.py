# spectral_operations/operators.py
"""
Coefficient-space operators of the semi-discrete Benjamin equation

    u_t = -alpha u_x + beta H[u_xx] + gamma u_xxx - delta (u^2)_x

J = -P_n d/dx P_n couples phi_{2k} with phi_{2k+/-1}, phi_{2k+3}, and phi_{2k+1}
with phi_{2k}, phi_{2k+2}, phi_{2k-2}. In (even, odd) block form
J = [[0, -T], [T, 0]] / ell with T the Jacobi matrix of the Laguerre recurrence
(diag 2j+1, off-diagonal -(j+1)); H = [[0, -I], [I, 0]].
"""

import logging
from typing import List

import attrs
import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import sparse
from scipy.special import roots_laguerre

from spectral_operations.basis import BasisGrid
from spectral_operations.errors import DimensionError
from spectral_operations.transform import SpectralField, forward, inverse
from spectral_operations.validators import finite

logger = logging.getLogger(__name__)


@attrs.frozen
class ModelParams:
    """Benjamin coefficients; gamma may take either sign (KdV uses gamma=-1)."""

    alpha: float = attrs.field(converter=float, validator=finite)
    beta: float = attrs.field(converter=float, validator=finite)
    gamma: float = attrs.field(converter=float, validator=finite)
    delta: float = attrs.field(converter=float, validator=finite)


def bandwidth(matrix: sparse.spmatrix) -> int:
    coo = sparse.coo_matrix(matrix)
    mask = coo.data != 0
    if not mask.any():
        return 0
    return int(np.max(np.abs(coo.row[mask] - coo.col[mask])))


@attrs.frozen(eq=False)
class OperatorBundle:
    p: int
    ell: float
    J: sparse.csr_matrix
    H: sparse.csr_matrix
    D: sparse.csr_matrix

    @property
    def size(self) -> int:
        return 2 * self.p

    @property
    def bandwidths(self) -> dict:
        return {"J": bandwidth(self.J), "H": bandwidth(self.H), "D": bandwidth(self.D)}


def _check(a: ArrayLike, size: int) -> NDArray[np.float64]:
    arr = np.asarray(a, dtype=float)
    if arr.shape != (size,):
        raise DimensionError(f"coefficient vector has shape {arr.shape}, expected ({size},)")
    return arr


def _laguerre_jacobi(v: NDArray[np.float64]) -> NDArray[np.float64]:
    j = np.arange(v.size)
    out = (2 * j + 1) * v
    out[1:] -= j[1:] * v[:-1]
    out[:-1] -= (j[:-1] + 1) * v[1:]
    return out


def apply_J(a: ArrayLike, grid: BasisGrid) -> SpectralField:
    a = _check(a, grid.size)
    out = np.empty_like(a)
    out[1::2] = _laguerre_jacobi(a[0::2]) / grid.ell
    out[0::2] = -_laguerre_jacobi(a[1::2]) / grid.ell
    return out


def apply_H(a: ArrayLike) -> SpectralField:
    a = np.asarray(a, dtype=float)
    if a.ndim != 1 or a.size % 2:
        raise DimensionError(f"coefficient vector must have even length, got shape {a.shape}")
    out = np.empty_like(a)
    out[1::2] = a[0::2]
    out[0::2] = -a[1::2]
    return out


def j_matrix(grid: BasisGrid) -> sparse.csr_matrix:
    p, ell = grid.p, grid.ell
    rows: List[np.ndarray] = []
    cols: List[np.ndarray] = []
    vals: List[np.ndarray] = []

    def add(r, c, v):
        rows.append(r)
        cols.append(c)
        vals.append(v)

    k = np.arange(p)
    inner = k[:-1]
    upper = k[1:]
    # -d/dx phi_{2k}
    add(2 * k + 1, 2 * k, (2 * k + 1) / ell)
    add(2 * inner + 3, 2 * inner, -(inner + 1) / ell)
    add(2 * upper - 1, 2 * upper, -upper / ell)
    # -d/dx phi_{2k+1}
    add(2 * k, 2 * k + 1, -(2 * k + 1) / ell)
    add(2 * inner + 2, 2 * inner + 1, (inner + 1) / ell)
    add(2 * upper - 2, 2 * upper + 1, upper / ell)

    size = 2 * p
    return sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(size, size),
    ).tocsr()


def h_matrix(grid: BasisGrid) -> sparse.csr_matrix:
    k = np.arange(grid.p)
    size = grid.size
    rows = np.concatenate([2 * k + 1, 2 * k])
    cols = np.concatenate([2 * k, 2 * k + 1])
    vals = np.concatenate([np.ones(grid.p), -np.ones(grid.p)])
    return sparse.coo_matrix((vals, (rows, cols)), shape=(size, size)).tocsr()


def build_D(params: ModelParams, grid: BasisGrid) -> OperatorBundle:
    """Assemble D = alpha J + beta H J^2 - gamma J^3 by sparse products."""
    J = j_matrix(grid)
    H = h_matrix(grid)
    J2 = J @ J
    D = params.alpha * J + params.beta * (H @ J2) - params.gamma * (J2 @ J)
    D = sparse.csr_matrix(D)
    D.eliminate_zeros()
    bundle = OperatorBundle(p=grid.p, ell=grid.ell, J=J, H=H, D=D)
    logger.debug("assembled D for p=%d, ell=%g, bandwidths %s", grid.p, grid.ell, bundle.bandwidths)
    return bundle


def nonlinearity(a: ArrayLike, delta: float, grid: BasisGrid) -> SpectralField:
    """Coefficients of delta * I_n[u^2]."""
    values = inverse(a, grid)
    return forward(delta * values * values, grid)


def j_spectrum(p: int, ell: float) -> NDArray[np.complex128]:
    """Eigenvalues +/- i xi_k / ell of J, xi_k the roots of the Laguerre polynomial L_p."""
    roots, _ = roots_laguerre(p)
    roots = np.sort(roots)
    return np.concatenate([1j * roots / ell, -1j * roots / ell])
