"""Complex linear algebra helpers and brute-force oracles.

Dense Hermitian eigendecomposition, compact SVD, orthonormalization and the
principal-angle subspace distance. The iterative trackers in
`outer_beamformer` and `receive_tracker` are verified against these.

Use
---

    from robustia.linalg_helpers import minor_subspace, subspace_distance
    F_oracle = minor_subspace(Phi, 4)
    print(subspace_distance(F, F_oracle))

"""

from collections import namedtuple

import numpy as np
from scipy import linalg, special

from .exceptions import DimensionError, NonFiniteError, NotHermitianError, RankDeficientError

__all__ = ['EigenDecomposition', 'CompactSVD', 'hermitian_eig', 'minor_subspace',
           'orthonormalize', 'subspace_distance', 'compact_svd', 'bessel_j0',
           'hermitian_part', 'random_orthonormal', 'complex_normal']

EigenDecomposition = namedtuple('EigenDecomposition', ['values', 'vectors'])

CompactSVD = namedtuple('CompactSVD', ['left', 'singulars', 'right'])

HERMITIAN_TOLERANCE = 1e-10


def _check_finite(A, name='matrix'):
    if not np.all(np.isfinite(A)):
        raise NonFiniteError('{} contains NaN or Inf entries'.format(name))


def hermitian_part(A):
    """Return (A + A^H)/2."""
    A = np.asarray(A)
    return 0.5 * (A + A.conj().T)


def hermitian_eig(A):
    """Eigendecomposition of a Hermitian matrix.

    Parameters
    ----------
    A : ndarray (n, n)
        Hermitian within 1e-10 (relative to max(1, ||A||_F)).

    Returns
    -------
    EigenDecomposition
        values ascending, vectors with orthonormal columns.

    """
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError('expected a square matrix, got shape {}'.format(A.shape))
    _check_finite(A)
    asymmetry = np.linalg.norm(A - A.conj().T)
    if asymmetry > HERMITIAN_TOLERANCE * max(1., np.linalg.norm(A)):
        raise NotHermitianError('matrix is not Hermitian (||A - A^H||_F = {:.3e})'.format(asymmetry))
    values, vectors = linalg.eigh(hermitian_part(A))
    return EigenDecomposition(values, vectors)


def minor_subspace(A, m):
    """Orthonormal basis of the eigenvectors belonging to the m smallest eigenvalues."""
    A = np.asarray(A)
    if not 1 <= m <= A.shape[0]:
        raise DimensionError('subspace dimension m={} out of range [1, {}]'.format(m, A.shape[0]))
    return hermitian_eig(A).vectors[:, :m]


def orthonormalize(T):
    """Orthonormal basis of the column span of T (Gram-Schmidt via QR).

    Parameters
    ----------
    T : ndarray (n, m)
        Full column rank.

    Returns
    -------
    Q : ndarray (n, m)

    Raises
    ------
    RankDeficientError
        When a pivot norm falls below 1e-12 ||T||_F.

    """
    T = np.asarray(T, dtype=complex)
    _check_finite(T)
    Q, R = linalg.qr(T, mode='economic')
    pivots = np.abs(np.diag(R))
    scale = np.linalg.norm(T)
    if scale == 0 or np.any(pivots < 1e-12 * scale):
        raise RankDeficientError('columns are linearly dependent (min pivot {:.3e})'.format(
            pivots.min() if pivots.size else 0.))
    # Gram-Schmidt convention: positive real diagonal of R
    phases = np.diag(R) / pivots
    return Q * phases


def subspace_distance(U1, U2):
    """Return ||U1 U1^H - U2 U2^H||_F / sqrt(2)."""
    U1 = np.asarray(U1)
    U2 = np.asarray(U2)
    if U1.shape != U2.shape:
        raise DimensionError('shape mismatch: {} vs {}'.format(U1.shape, U2.shape))
    P1 = U1 @ U1.conj().T
    P2 = U2 @ U2.conj().T
    return np.linalg.norm(P1 - P2) / np.sqrt(2.)


def compact_svd(T):
    """Thin SVD T = left diag(singulars) right^H."""
    T = np.asarray(T, dtype=complex)
    _check_finite(T)
    left, singulars, right_h = np.linalg.svd(T, full_matrices=False)
    return CompactSVD(left, singulars, right_h.conj().T)


def bessel_j0(x):
    """Zero-order Bessel function of the first kind."""
    if not np.all(np.isfinite(x)):
        raise NonFiniteError('bessel_j0 argument is not finite: {}'.format(x))
    return special.j0(x)


def complex_normal(rng, shape, variance=1.):
    """Draw circularly-symmetric complex Gaussian entries CN(0, variance)."""
    scale = np.sqrt(variance / 2.)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def random_orthonormal(rng, n, m):
    """Random n x m matrix with orthonormal columns (QR of a Gaussian draw)."""
    return orthonormalize(complex_normal(rng, (n, m)))
