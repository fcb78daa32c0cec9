"""Tensor-tensor algebra induced by a trailing-mode transform.

All products work facewise in the transform domain: transform both operands
along modes 3..m, multiply corresponding frontal faces as matrices, invert.
The tensor SVD factors every transform-domain face with a deterministic
phase convention so factorizations are reproducible across runs.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, ParameterError
from .tensors import horizontal_subtensor, trailing_shape
from .transforms import forward, inverse

__all__ = [
    "TSVDFactors",
    "facewise_product",
    "t_product",
    "t_product_slices",
    "conj_transpose",
    "identity_tensor",
    "t_svd",
]

# Singular values below this fraction of a face's largest are clamped to 0,
# which stabilizes the shrinkage operators on near-rank-deficient faces.
_SV_CLAMP = 1e-13


def facewise_product(a, b):
    """Multiply corresponding frontal faces of two transform-domain tensors."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim < 3 or b.ndim < 3:
        raise DimensionMismatchError("facewise product needs order >= 3")
    if a.shape[1] != b.shape[0] or a.shape[2:] != b.shape[2:]:
        raise DimensionMismatchError(
            f"faces {a.shape} x {b.shape} are not conformable")
    return np.einsum("ij...,jk...->ik...", a, b)


def t_product(a, x, spec):
    """Transform-based tensor-tensor product of a (n1 x n2 x rest) with
    x (n2 x k x rest)."""
    return inverse(facewise_product(forward(a, spec), forward(x, spec)), spec)


def t_product_slices(a, idxs, x, spec):
    """Rows ``idxs`` (1-based) of ``t_product(a, x, spec)``.

    The trailing-mode transform does not mix rows, so the product separates
    in the first dimension and only the selected slices of ``a`` are touched.
    """
    return t_product(horizontal_subtensor(a, idxs), x, spec)


def conj_transpose(a, spec):
    """Tensor whose transform-domain faces are the conjugate transposes of
    the transform-domain faces of ``a``."""
    al = forward(a, spec)
    return inverse(np.conj(np.swapaxes(al, 0, 1)), spec)


def identity_tensor(n, rest, spec):
    """The multiplicative identity for the product: every transform-domain
    face is the n x n identity matrix."""
    if n < 1:
        raise DimensionMismatchError(f"identity extent must be >= 1, got {n}")
    rest = tuple(rest)
    if rest != spec.trailing:
        raise DimensionMismatchError(
            f"trailing extents {rest} do not match transform {spec.trailing}")
    jl = np.zeros((n, n) + rest, dtype=np.complex128)
    jl[np.arange(n), np.arange(n)] = 1.0
    return inverse(jl, spec)


@dataclass(frozen=True, eq=False)
class TSVDFactors:
    """Orthogonal u, f-diagonal core s, orthogonal v with x = u * s * v^*."""

    u: np.ndarray
    s: np.ndarray
    v: np.ndarray


def _fix_phases(u, vh):
    # Deterministic convention: the largest-magnitude entry of each left
    # singular vector is made real-positive.
    for j in range(u.shape[1]):
        col = u[:, j]
        i = int(np.argmax(np.abs(col)))
        p = col[i]
        mag = abs(p)
        if mag > 0:
            c = np.conj(p) / mag
            u[:, j] *= c
            if j < vh.shape[0]:
                vh[j, :] *= np.conj(c)
    return u, vh


def _face_svd(face):
    im_max = np.max(np.abs(face.imag)) if face.size else 0.0
    re_max = np.max(np.abs(face.real)) if face.size else 0.0
    if im_max <= 1e-12 * (1.0 + re_max):
        u, s, vh = np.linalg.svd(face.real, full_matrices=True)
        u = u.astype(np.complex128)
        vh = vh.astype(np.complex128)
    else:
        u, s, vh = np.linalg.svd(face, full_matrices=True)
        u = u.copy()
        vh = vh.copy()
    if s.size and s[0] > 0:
        s = np.where(s < _SV_CLAMP * s[0], 0.0, s)
    return _fix_phases(u, vh) + (s,)


def t_svd(x, spec):
    """Tensor SVD via a full SVD of every transform-domain face.

    Factors are assembled in the transform domain and inverse-transformed;
    for the DFT, conjugate-symmetric faces share one SVD so the factors stay
    exactly real for real input.  Requires a transform whose matrices satisfy
    the rho scaling condition (the factor orthogonality depends on it).
    """
    if not spec.rho_ok:
        raise ParameterError(
            "tensor SVD requires a transform satisfying the rho condition; "
            "run verify_transform for details")
    x = np.asarray(x)
    xl = forward(x, spec)
    n1, n2 = xl.shape[:2]
    rest = xl.shape[2:]
    ul = np.empty((n1, n1) + rest, dtype=np.complex128)
    sl = np.zeros((n1, n2) + rest, dtype=np.complex128)
    vl = np.empty((n2, n2) + rest, dtype=np.complex128)
    k = min(n1, n2)
    pair_conjugates = spec.kind == "fft"
    done = {}
    for idx in np.ndindex(*rest):
        if pair_conjugates:
            partner = tuple((-i) % n for i, n in zip(idx, rest))
            if partner in done:
                src = (slice(None), slice(None)) + partner
                dst = (slice(None), slice(None)) + idx
                ul[dst] = np.conj(ul[src])
                sl[dst] = np.conj(sl[src])
                vl[dst] = np.conj(vl[src])
                continue
            done[idx] = True
        face = xl[(slice(None), slice(None)) + idx]
        try:
            u, vh, s = _face_svd(face)
        except np.linalg.LinAlgError as exc:
            raise np.linalg.LinAlgError(
                f"SVD failed on face {tuple(i + 1 for i in idx)}: {exc}")
        sel = (slice(None), slice(None)) + idx
        ul[sel] = u
        sl[(np.arange(k), np.arange(k)) + idx] = s[:k]
        vl[sel] = np.conj(vh).T
    return TSVDFactors(u=inverse(ul, spec), s=inverse(sl, spec),
                       v=inverse(vl, spec))
