"""Small dense linear-algebra helpers shared by the filters.

Everything here operates on plain ``numpy.ndarray`` matrices and is a thin,
contract-enforcing layer over LAPACK: factorization failures surface as
:class:`~cdfilt.errors.NotPositiveDefinite` instead of generic
``LinAlgError``, and symmetry is restored explicitly rather than assumed.
"""

import numpy as np
import scipy.linalg

from .errors import NotPositiveDefinite

__all__ = [
    "symmetrize",
    "cholesky",
    "solve_spd",
    "psd_sqrt",
    "min_eig_ratio",
]

# Relative asymmetry accepted before we refuse to treat a matrix as symmetric.
_SYM_RTOL = 1e-9


def symmetrize(m):
    """Return ``(m + m.T) / 2``.

    Used after every covariance propagation/update step so floating-point
    drift cannot accumulate into visible asymmetry.
    """
    return 0.5 * (m + m.T)


def _check_square_symmetric(m, name):
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {m.shape}")
    scale = max(1.0, float(np.max(np.abs(m))) if m.size else 1.0)
    if float(np.max(np.abs(m - m.T))) > _SYM_RTOL * scale:
        raise ValueError(f"{name} is not symmetric within tolerance {_SYM_RTOL:g} (relative)")
    return m


def cholesky(m, jitter=0.0):
    """Lower-triangular Cholesky factor ``L`` with ``L @ L.T == m``.

    Parameters
    ----------
    m : ndarray, shape (n, n)
        Symmetric positive definite matrix.  Symmetry within a relative
        tolerance of 1e-9 is required; the matrix is re-symmetrized before
        factorization so the factor never sees the asymmetric residual.
    jitter : float, optional
        Added to the diagonal *before* factorization.  Intended for callers
        that knowingly operate near the PSD boundary; the default of zero
        means a failed pivot raises instead of being papered over.

    Raises
    ------
    NotPositiveDefinite
        If any pivot is non-positive.
    """
    m = _check_square_symmetric(m, "m")
    a = symmetrize(m)
    if jitter:
        a = a + jitter * np.eye(a.shape[0])
    try:
        return np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(
            f"Cholesky factorization failed for {a.shape[0]}x{a.shape[0]} matrix "
            f"(jitter={jitter:g}): {exc}"
        ) from None


def solve_spd(m, b):
    """Solve ``m @ x = b`` for symmetric positive definite ``m``.

    Goes through a Cholesky factorization (``cho_factor``/``cho_solve``), so
    the solution inherits the factorization's stability and a non-SPD ``m``
    raises :class:`NotPositiveDefinite` rather than returning garbage.
    ``b`` may be a vector or a matrix of right-hand sides.
    """
    m = _check_square_symmetric(m, "m")
    b = np.asarray(b, dtype=float)
    try:
        c, low = scipy.linalg.cho_factor(symmetrize(m), lower=True, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(
            f"SPD solve failed for {m.shape[0]}x{m.shape[0]} matrix: {exc}"
        ) from None
    return scipy.linalg.cho_solve((c, low), b, check_finite=False)


def _solve_spd_fast(m, b, context):
    # Internal variant of solve_spd for filter hot paths: callers have just
    # symmetrized m, so the public wrapper's asymmetry audit is skipped and
    # the error message carries filter context instead.
    try:
        c, low = scipy.linalg.cho_factor(m, lower=True, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(f"{context}: {exc}") from None
    return scipy.linalg.cho_solve((c, low), b, check_finite=False)


def psd_sqrt(m, tol_scale=1e-9):
    """Symmetric square root of a positive *semi*definite matrix.

    ``cholesky`` rejects singular matrices by design; initial-covariance
    sampling, however, legitimately feeds rank-deficient (even all-zero)
    covariances.  This routine eigendecomposes, clips eigenvalues that are
    negative within ``-tol_scale * trace`` to zero, and raises on anything
    more negative than that.

    Returns ``S`` with ``S @ S.T == m`` (symmetric ``S``).
    """
    m = _check_square_symmetric(m, "m")
    a = symmetrize(m)
    w, v = np.linalg.eigh(a)
    floor = -tol_scale * max(float(np.trace(a)), 0.0)
    if w.min(initial=0.0) < floor:
        raise NotPositiveDefinite(
            f"matrix has eigenvalue {w.min():.3e} below PSD tolerance {floor:.3e}"
        )
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.T


def min_eig_ratio(m):
    """Smallest eigenvalue divided by ``max(trace, tiny)``; sign check helper."""
    a = symmetrize(np.asarray(m, dtype=float))
    w = np.linalg.eigvalsh(a)
    denom = max(float(np.trace(a)), np.finfo(float).tiny)
    return float(w[0]) / denom
