"""Dense complex 2x2 / 4x4 matrix kernel.

Matrices are plain ``numpy`` complex128 arrays.  Every function validates the
shape, refuses non-finite entries and returns a fresh read-only array, so
results can be shared between threads freely.
"""
import numpy as np

from .errors import DimensionMismatch, NonFinite, SingularMatrix

DIMS = (2, 4)
SINGULAR_RTOL = 1e-13


def cmat(a):
    """Validate and freeze ``a`` as a square complex matrix of dim 2 or 4."""
    if isinstance(a, np.ndarray) and a.dtype == np.complex128 and not a.flags.writeable:
        if a.shape in ((2, 2), (4, 4)):
            return a
    m = np.array(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] not in DIMS:
        raise DimensionMismatch(f"expected a 2x2 or 4x4 matrix, got shape {m.shape}")
    if not np.isfinite(m).all():
        raise NonFinite("matrix has non-finite entries")
    m.flags.writeable = False
    return m


def identity(dim):
    return cmat(np.eye(dim))


def diag(*values):
    return cmat(np.diag(np.asarray(values, dtype=np.complex128)))


def mul(a, b):
    a, b = cmat(a), cmat(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"cannot multiply {a.shape} by {b.shape}")
    return cmat(a @ b)


def adjoint(a):
    return cmat(cmat(a).conj().T)


def transpose(a):
    return cmat(cmat(a).T)


def det2(a):
    a = cmat(a)
    if a.shape != (2, 2):
        raise DimensionMismatch("det2 needs a 2x2 matrix")
    return complex(a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0])


def inverse(a):
    """Gauss-Jordan inverse with partial pivoting.

    Raises SingularMatrix when the best available pivot falls below
    ``SINGULAR_RTOL`` times the largest entry of ``a``; no regularisation.
    """
    a = cmat(a)
    n = a.shape[0]
    scale = np.abs(a).max()
    if scale == 0.0:
        raise SingularMatrix("zero matrix")
    work = np.hstack([a, np.eye(n, dtype=np.complex128)])
    for col in range(n):
        piv = col + int(np.argmax(np.abs(work[col:, col])))
        if abs(work[piv, col]) < SINGULAR_RTOL * scale:
            raise SingularMatrix(f"pivot {abs(work[piv, col]):.3g} in column {col}")
        if piv != col:
            work[[col, piv]] = work[[piv, col]]
        work[col] /= work[col, col]
        for row in range(n):
            if row != col and work[row, col] != 0:
                work[row] -= work[row, col] * work[col]
    return cmat(work[:, n:])


def max_abs(a):
    """Largest entry magnitude; the norm used by every tolerance in the package."""
    return float(np.abs(np.asarray(a)).max())


SIGMA_Y = cmat([[0, -1j], [1j, 0]])
