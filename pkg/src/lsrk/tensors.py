"""Dense high-order tensor values and basic operations.

Tensors of order m >= 3 are plain numpy arrays: float64 for spatial-domain
values, complex128 for transform-domain values, always C-contiguous
(row-major, last index fastest).  ``dense_tensor`` / ``complex_tensor`` are
the validating constructors; arrays returned by them are marked read-only so
values can be shared freely between threads.

Row indices at the API surface are 1-based, matching the usual mathematical
convention for horizontal slices A(i).
"""

import struct

import numpy as np

from .errors import DimensionMismatchError, FileFormatError

__all__ = [
    "dense_tensor",
    "complex_tensor",
    "frobenius_norm",
    "inner_product",
    "horizontal_slice",
    "horizontal_subtensor",
    "bdiag",
    "trailing_shape",
    "save_tns",
    "load_tns",
]


def dense_tensor(data):
    """Validate and freeze a real tensor of order >= 3.

    Rejects NaN/Inf up front so that a diverging iterative solve fails
    loudly at the point of construction instead of propagating junk.
    """
    t = np.ascontiguousarray(data, dtype=np.float64)
    if t.ndim < 3:
        raise DimensionMismatchError(
            f"tensor order must be >= 3, got order {t.ndim}")
    if not np.all(np.isfinite(t)):
        raise ValueError("tensor entries must be finite (no NaN/Inf)")
    t.flags.writeable = False
    return t


def complex_tensor(data):
    """Validate and freeze a complex tensor of order >= 3."""
    t = np.ascontiguousarray(data, dtype=np.complex128)
    if t.ndim < 3:
        raise DimensionMismatchError(
            f"tensor order must be >= 3, got order {t.ndim}")
    t.flags.writeable = False
    return t


def trailing_shape(t):
    """Extents of modes 3..m, i.e. everything past the first two axes."""
    return tuple(t.shape[2:])


def frobenius_norm(t):
    """Square root of the sum of squared entries."""
    t = np.asarray(t)
    return float(np.linalg.norm(t.reshape(-1)))


def inner_product(a, b):
    """Euclidean inner product; for complex operands, sum of conj(a)*b."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise DimensionMismatchError(
            f"inner product needs equal shapes, got {a.shape} and {b.shape}")
    return complex(np.vdot(a, b)).real if np.iscomplexobj(a) or np.iscomplexobj(b) \
        else float(np.vdot(a, b))


def _check_row_indices(idxs, n1):
    idxs = np.atleast_1d(np.asarray(idxs, dtype=np.int64))
    if idxs.size == 0:
        raise IndexError("empty row index set")
    if np.any(idxs < 1) or np.any(idxs > n1):
        bad = idxs[(idxs < 1) | (idxs > n1)][0]
        raise IndexError(f"row index {bad} out of range 1..{n1}")
    return idxs - 1


def horizontal_slice(a, i):
    """Return the i-th horizontal slice a(i,:,...,:) as a 1 x n2 x ... tensor.

    ``i`` is 1-based.  The result is a copy, never a view.
    """
    a = np.asarray(a)
    i0 = _check_row_indices(i, a.shape[0])
    return a[i0[:1]].copy()


def horizontal_subtensor(a, idxs):
    """Stack the horizontal slices for the given 1-based indices, in order."""
    a = np.asarray(a)
    rows = _check_row_indices(idxs, a.shape[0])
    return a[rows].copy()


def bdiag(a):
    """Block-diagonal matricization used by the test oracles.

    Face (:,:,i3,...,im) lands at diagonal block j with
    j-1 = (i3-1) + (i4-1)*n3 + ... + (im-1)*n3*...*n_{m-1},
    i.e. faces are enumerated with i3 varying fastest.  Materializes a dense
    (n1*J) x (n2*J) matrix, so this is for desk-scale verification only.
    """
    a = np.asarray(a)
    if a.ndim < 3:
        raise DimensionMismatchError("bdiag needs order >= 3")
    n1, n2 = a.shape[:2]
    rest = a.shape[2:]
    j_total = int(np.prod(rest))
    out = np.zeros((n1 * j_total, n2 * j_total), dtype=a.dtype)
    for j, rev_idx in enumerate(np.ndindex(*rest[::-1])):
        face = a[(slice(None), slice(None)) + rev_idx[::-1]]
        out[j * n1:(j + 1) * n1, j * n2:(j + 1) * n2] = face
    return out


# ---------------------------------------------------------------------------
# TNS1 binary tensor file format
#
# magic "TNS1" | u64-le order m | m x u64-le extents | float64-le payload
# (row-major). Order must be >= 3 and the payload length must match exactly.
# ---------------------------------------------------------------------------

_MAGIC = b"TNS1"


def save_tns(path, t):
    """Write a real tensor to a TNS1 file."""
    t = np.ascontiguousarray(t, dtype=np.float64)
    if t.ndim < 3:
        raise DimensionMismatchError("TNS1 stores tensors of order >= 3")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<Q", t.ndim))
        fh.write(struct.pack(f"<{t.ndim}Q", *t.shape))
        fh.write(t.astype("<f8").tobytes(order="C"))


def load_tns(path):
    """Read a TNS1 file, validating magic, order, and payload length."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:4] != _MAGIC:
        raise FileFormatError(f"{path}: bad magic {raw[:4]!r}, expected TNS1")
    if len(raw) < 12:
        raise FileFormatError(f"{path}: truncated header")
    (m,) = struct.unpack_from("<Q", raw, 4)
    if m < 3:
        raise FileFormatError(f"{path}: tensor order {m} < 3")
    header_end = 12 + 8 * m
    if len(raw) < header_end:
        raise FileFormatError(f"{path}: truncated extent list")
    dims = struct.unpack_from(f"<{m}Q", raw, 12)
    count = int(np.prod(dims, dtype=np.uint64))
    expected = 12 + 8 * m + 8 * count
    if len(raw) != expected:
        raise FileFormatError(
            f"{path}: payload length {len(raw)} != expected {expected}")
    data = np.frombuffer(raw, dtype="<f8", offset=12 + 8 * m, count=count)
    return dense_tensor(data.reshape(dims))
