"""Affine-invariant geometry on symmetric positive-definite (SPD) matrices.

Eigendecomposition-based matrix functions, the affine-invariant geodesic
distance, the Karcher (geometric) mean, and tangent-space projection with
the sqrt(2) off-diagonal weighting that makes the vectorized tangent inner
product match the Riemannian one at the base point.

Functions accept a single ``(d, d)`` matrix or a stack ``(..., d, d)`` and
operate on the last two axes, like ``numpy.linalg`` routines.
"""
from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import (
    DimMismatch,
    EmptyInput,
    InvalidMatrix,
    NonConvergence,
    NotPositiveDefinite,
    NumericalFailure,
)

SYMMETRY_ATOL = 1e-12

_SPECTRAL_FUNCS = {
    "log": np.log,
    "exp": np.exp,
    "sqrt": np.sqrt,
    "invsqrt": lambda w: 1.0 / np.sqrt(w),
}


def _as_square(m) -> np.ndarray:
    a = np.asarray(m, dtype=np.float64)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise InvalidMatrix(f"expected square matrices, got shape {a.shape}")
    return a


def check_symmetric(m, atol: float = SYMMETRY_ATOL) -> np.ndarray:
    """Validate symmetry (absolute tolerance) and finiteness; return float64 array."""
    a = _as_square(m)
    if not np.all(np.isfinite(a)):
        raise InvalidMatrix("matrix contains non-finite entries")
    skew = np.abs(a - a.swapaxes(-1, -2)).max() if a.size else 0.0
    if skew > atol:
        raise InvalidMatrix(f"matrix is not symmetric: max |m - m.T| = {skew:.3e} > {atol}")
    return a


def check_spd(m) -> np.ndarray:
    """Validate symmetry and strictly positive eigenvalues."""
    a = check_symmetric(m)
    w = np.linalg.eigvalsh(a)
    wmin = w.min()
    if wmin <= 0.0:
        raise NotPositiveDefinite(f"smallest eigenvalue {wmin:.3e} is not positive")
    return a


def _symmetrize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.swapaxes(-1, -2))


def sym_eig(m):
    """Eigendecomposition of a symmetric matrix.

    Returns ``(w, v)`` with eigenvalues ``w`` ascending and orthonormal
    eigenvectors in the columns of ``v``, so ``m == v @ diag(w) @ v.T``.
    """
    a = check_symmetric(m)
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"symmetric eigendecomposition failed: {exc}") from exc
    return w, v


def _spectral_apply(w: np.ndarray, v: np.ndarray, fn) -> np.ndarray:
    out = (v * fn(w)[..., None, :]) @ v.swapaxes(-1, -2)
    return _symmetrize(out)


def mat_fn(m, fn: str) -> np.ndarray:
    """Spectral calculus: apply a scalar function to the eigenvalues.

    ``fn`` is one of ``log``, ``exp``, ``sqrt``, ``invsqrt``.  All but
    ``exp`` require a positive-definite input.
    """
    if fn not in _SPECTRAL_FUNCS:
        raise ValueError(f"unknown matrix function {fn!r}; expected one of {sorted(_SPECTRAL_FUNCS)}")
    w, v = sym_eig(m)
    if fn != "exp" and w.min() <= 0.0:
        raise NotPositiveDefinite(
            f"matrix {fn} requires positive eigenvalues; smallest is {w.min():.3e}"
        )
    return _spectral_apply(w, v, _SPECTRAL_FUNCS[fn])


def mat_log(m) -> np.ndarray:
    return mat_fn(m, "log")


def mat_exp(m) -> np.ndarray:
    return mat_fn(m, "exp")


def mat_sqrt(m) -> np.ndarray:
    return mat_fn(m, "sqrt")


def mat_invsqrt(m) -> np.ndarray:
    return mat_fn(m, "invsqrt")


def airm_distance(a, b) -> float:
    """Affine-invariant geodesic distance between two SPD matrices.

    Computed from the generalized eigenvalues of the pencil ``(b, a)``,
    which is an independent route from the whitening used by
    :func:`tangent_project`; the two must agree, and tests rely on that.
    """
    a = check_symmetric(a)
    b = check_symmetric(b)
    if a.shape != b.shape or a.ndim != 2:
        raise _dim_mismatch(a, b)
    try:
        w = scipy.linalg.eigvalsh(b, a)
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise NotPositiveDefinite(f"generalized eigenproblem failed: {exc}") from exc
    if w.min() <= 0.0:
        raise NotPositiveDefinite("second argument is not positive definite")
    return float(np.sqrt(np.sum(np.log(w) ** 2)))


def _dim_mismatch(a, b):
    return DimMismatch(f"incompatible matrix shapes {a.shape} and {b.shape}")


def canonical_mean(stack: np.ndarray) -> np.ndarray:
    """Arithmetic mean along axis 0, summed in a canonical (sorted) order.

    Sorting each entry's addends first makes the result bit-identical under
    any permutation of the inputs.
    """
    stack = np.asarray(stack, dtype=np.float64)
    return np.sum(np.sort(stack, axis=0), axis=0) / stack.shape[0]


def geometric_mean(mats, tol: float = 1e-8, max_iter: int = 50) -> np.ndarray:
    """Karcher mean of a set of SPD matrices under the affine-invariant metric.

    Fixed-point iteration initialized at the arithmetic mean:
    ``G <- G^1/2 exp(s * mean_i log(G^-1/2 C_i G^-1/2)) G^1/2``.
    The step ``s`` starts at 1 and is halved (with a backtrack) whenever
    the mean squared distance to the set stops decreasing, which keeps the
    iteration convergent on widely spread sets.  Stops when the Frobenius
    norm of the mean log falls below ``tol``.

    Parameters
    ----------
    mats : array-like, shape (n, d, d)
        SPD matrices (a list of ``(d, d)`` arrays also works).
    tol : float
        Frobenius-norm tolerance on the mean tangent residual.
    max_iter : int
        Iteration budget; exceeded -> :class:`NonConvergence`.
    """
    stack = np.asarray(mats, dtype=np.float64)
    if stack.ndim == 2:
        stack = stack[None]
    if stack.ndim != 3 or stack.shape[-1] != stack.shape[-2]:
        raise InvalidMatrix(f"expected a stack of square matrices, got shape {stack.shape}")
    if stack.shape[0] == 0:
        raise EmptyInput("geometric_mean of an empty set")
    if tol <= 0:
        raise ValueError("tol must be positive")
    check_symmetric(stack)

    g = canonical_mean(stack)
    resid = np.inf
    step = 1.0
    best_g = g
    best_cost = np.inf
    for it in range(max_iter + 1):
        w, v = np.linalg.eigh(g)
        if w.min() <= 0.0:
            raise NotPositiveDefinite("iterate lost positive definiteness")
        sq = (v * np.sqrt(w)) @ v.T
        isq = (v / np.sqrt(w)) @ v.T
        whitened = _symmetrize(isq @ stack @ isq)
        lw, lv = np.linalg.eigh(whitened)
        if lw.min() <= 0.0:
            raise NotPositiveDefinite("input matrix is not positive definite")
        logs = _spectral_apply(lw, lv, np.log)
        t = canonical_mean(logs)
        resid = float(np.linalg.norm(t, ord="fro"))
        if resid <= tol:
            return _symmetrize(g)
        if it == max_iter:
            break
        # mean squared distance to the set; the unit step can overshoot on
        # widely spread sets, so backtrack whenever it stops decreasing
        cost = float(np.mean(np.log(lw) ** 2))
        if cost > best_cost * (1.0 + 1e-12):
            g = best_g
            step *= 0.5
            continue
        best_g, best_cost = g, cost
        ew, ev = np.linalg.eigh(_symmetrize(step * t))
        g = _symmetrize(sq @ _spectral_apply(ew, ev, np.exp) @ sq)
    raise NonConvergence(
        f"Karcher mean residual {resid:.3e} > tol {tol:.1e} after {max_iter} iterations"
    )


def tangent_dim(d: int) -> int:
    """Length of the vectorized tangent space at dimension ``d``: d(d+1)/2."""
    return d * (d + 1) // 2


def vectorize_sym(m: np.ndarray) -> np.ndarray:
    """Upper-triangle vectorization with off-diagonals weighted by sqrt(2).

    The Euclidean norm of the result equals the Frobenius norm of ``m``.
    """
    m = _as_square(m)
    d = m.shape[-1]
    rows, cols = np.triu_indices(d)
    coeff = np.where(rows == cols, 1.0, np.sqrt(2.0))
    return m[..., rows, cols] * coeff


def unvectorize_sym(v: np.ndarray, d: int) -> np.ndarray:
    """Inverse of :func:`vectorize_sym`."""
    v = np.asarray(v, dtype=np.float64)
    rows, cols = np.triu_indices(d)
    coeff = np.where(rows == cols, 1.0, np.sqrt(2.0))
    out = np.zeros(v.shape[:-1] + (d, d))
    out[..., rows, cols] = v / coeff
    lower = out.swapaxes(-1, -2).copy()
    lower[..., rows, cols] = 0.0  # keep the diagonal single-counted
    return out + lower


def tangent_project(c, base) -> np.ndarray:
    """Project SPD matrices onto the tangent space at ``base`` and vectorize.

    ``c`` may be ``(d, d)`` or a stack ``(n, d, d)``; the result is a vector
    of length ``d(d+1)/2`` (or a stack of them).  The vector's Euclidean
    norm equals ``airm_distance(base, c)``.
    """
    c = check_symmetric(c)
    base = check_symmetric(base)
    if c.shape[-1] != base.shape[-1] or base.ndim != 2:
        raise _dim_mismatch(c, base)
    isq = mat_invsqrt(base)
    whitened = _symmetrize(isq @ c @ isq)
    lw, lv = np.linalg.eigh(whitened)
    if lw.min() <= 0.0:
        raise NotPositiveDefinite("matrix to project is not positive definite")
    logs = _spectral_apply(lw, lv, np.log)
    return vectorize_sym(logs)
