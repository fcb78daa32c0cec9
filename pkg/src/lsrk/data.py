"""Synthetic problem generation and the destriping operator."""

import numpy as np

from .errors import DimensionMismatchError, ParameterError
from .tensors import dense_tensor
from .tlinalg import t_product
from .transforms import inverse

__all__ = [
    "gen_synthetic_sparse",
    "gen_synthetic_lowrank",
    "build_destripe_operator",
    "stripe_rows_periodic",
    "stripe_rows_sampled",
    "smooth_image_stack",
]


def _check_conformable(shape_a, shape_x):
    shape_a = tuple(int(n) for n in shape_a)
    shape_x = tuple(int(n) for n in shape_x)
    if len(shape_a) < 3 or len(shape_a) != len(shape_x):
        raise DimensionMismatchError(
            f"shapes must share order >= 3, got {shape_a} and {shape_x}")
    if shape_a[1] != shape_x[0] or shape_a[2:] != shape_x[2:]:
        raise DimensionMismatchError(
            f"shapes {shape_a} and {shape_x} are not conformable")
    return shape_a, shape_x


def gen_synthetic_sparse(shape_a, shape_x, sparsity, seed, spec):
    """Gaussian operator and sparse Gaussian ground truth; B is consistent.

    Exactly round(sparsity * numel) uniformly chosen entries of the truth are
    set to zero.  The same seed reproduces the triple bitwise.
    """
    shape_a, shape_x = _check_conformable(shape_a, shape_x)
    if not 0.0 <= sparsity < 1.0:
        raise ParameterError(f"sparsity must be in [0, 1), got {sparsity}")
    rng = np.random.default_rng(seed)
    a = rng.standard_normal(shape_a)
    x = rng.standard_normal(shape_x)
    n_zero = int(round(sparsity * x.size))
    if n_zero:
        flat = rng.choice(x.size, size=n_zero, replace=False)
        x.reshape(-1)[flat] = 0.0
    b = t_product(a, x, spec)
    return dense_tensor(a), dense_tensor(x), dense_tensor(b)


def gen_synthetic_lowrank(shape_a, shape_x, tubal_rank, seed, spec):
    """Gaussian operator and (optionally low-tubal-rank) truth; B consistent.

    With ``tubal_rank`` r the truth is a product of two Gaussian factors of
    inner extent r, so every transform-domain face has rank <= r.  Without it
    the truth is dense Gaussian.
    """
    shape_a, shape_x = _check_conformable(shape_a, shape_x)
    rng = np.random.default_rng(seed)
    a = rng.standard_normal(shape_a)
    if tubal_rank is None:
        x = rng.standard_normal(shape_x)
    else:
        r = int(tubal_rank)
        if not 1 <= r <= min(shape_x[0], shape_x[1]):
            raise ParameterError(
                f"tubal rank {r} out of range for shape {shape_x}")
        p = rng.standard_normal((shape_x[0], r) + shape_x[2:])
        q = rng.standard_normal((r, shape_x[1]) + shape_x[2:])
        x = t_product(p, q, spec)
    b = t_product(a, x, spec)
    return dense_tensor(a), dense_tensor(x), dense_tensor(b)


def stripe_rows_periodic(n1, period):
    """Every ``period``-th row (1-based): period, 2*period, ..."""
    if period < 1:
        raise ParameterError(f"stripe period must be >= 1, got {period}")
    return tuple(range(period, n1 + 1, period))


def stripe_rows_sampled(n1, sampling_rate, seed):
    """Rows NOT kept under random row sampling at the given rate.

    round((1 - rate) * n1) rows drawn uniformly without replacement.
    """
    if not 0.0 < sampling_rate <= 1.0:
        raise ParameterError(
            f"sampling rate must be in (0, 1], got {sampling_rate}")
    n_drop = int(round((1.0 - sampling_rate) * n1))
    rng = np.random.default_rng(seed)
    rows = rng.choice(n1, size=n_drop, replace=False)
    return tuple(sorted(int(r) + 1 for r in rows))


def build_destripe_operator(shape, stripe_rows, attenuation, spec):
    """Row-scaling operator: unit gain except ``attenuation`` on stripe rows.

    Every transform-domain face is the same diagonal matrix, so the product
    with any conformable X scales X's stripe rows by the attenuation; the
    operator tensor itself is the inverse transform of those faces.  With
    attenuation 1 this is the identity tensor.
    """
    shape = tuple(int(n) for n in shape)
    if len(shape) < 3:
        raise DimensionMismatchError(f"need order >= 3, got shape {shape}")
    n1 = shape[0]
    rows = np.atleast_1d(np.asarray(stripe_rows, dtype=np.int64))
    if rows.size and (rows.min() < 1 or rows.max() > n1):
        raise IndexError(f"stripe rows must lie in 1..{n1}")
    if attenuation <= 0:
        raise ParameterError(f"attenuation must be > 0, got {attenuation}")
    gains = np.ones(n1)
    if rows.size:
        gains[rows - 1] = attenuation
    faces = np.zeros((n1, n1) + shape[2:], dtype=np.complex128)
    faces[np.arange(n1), np.arange(n1)] = gains.reshape(
        (n1,) + (1,) * len(shape[2:]))
    return dense_tensor(inverse(faces, spec))


def smooth_image_stack(shape, rank=4, seed=0, peak=255.0):
    """Smooth synthetic image stack in [0, peak] with per-face rank <= rank.

    Each frontal slice is a mixture of a few separable sinusoidal modes whose
    weights drift slowly across the trailing modes, mimicking a stack of
    photographs of one subject under varying conditions.  The default peak
    matches 8-bit image data; shrinkage-based solvers behave relative to the
    data scale, so stand-in data should live on the scale of the data it
    replaces.
    """
    shape = tuple(int(n) for n in shape)
    if len(shape) < 3:
        raise DimensionMismatchError(f"need order >= 3, got shape {shape}")
    n1, n2 = shape[:2]
    rest = shape[2:]
    rng = np.random.default_rng(seed)
    rows = np.arange(n1) / n1
    cols = np.arange(n2) / n2
    x = np.zeros(shape)
    for _ in range(rank):
        u = np.cos(2.0 * np.pi * (rng.uniform(0.5, 2.0) * rows
                                  + rng.uniform(0, 1)))
        v = np.cos(2.0 * np.pi * (rng.uniform(0.5, 2.0) * cols
                                  + rng.uniform(0, 1)))
        w = np.ones(rest)
        for ax, n in enumerate(rest):
            phase = np.cos(2.0 * np.pi * (rng.uniform(0.2, 1.0)
                                          * np.arange(n) / n
                                          + rng.uniform(0, 1)))
            w = w * phase.reshape((n,) + (1,) * (len(rest) - ax - 1))
        x += np.einsum("i,j,...->ij...", u, v, w)
    lo, hi = x.min(), x.max()
    if hi > lo:
        x = (x - lo) / (hi - lo)
    return dense_tensor(peak * x)
