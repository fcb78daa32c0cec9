"""Invertible linear transforms applied along tensor modes 3..m.

A transform is one square invertible matrix per trailing mode.  Supported
families: unnormalized DFT ("fft"), orthogonal DCT-II ("dct"), a one-level
periodized Daubechies-5 wavelet matrix ("dwt:db5"), and arbitrary explicit
matrices.  Each family comes with its scaling constant rho, defined by
(U_m (x) ... (x) U_3)(U_m (x) ... (x) U_3)^* = rho I; rho is the product of
the per-mode constants (n_i for the DFT, 1 for unitary matrices).

The transform domain is always complex128 storage, even for real-valued
transforms, so downstream facewise algebra has a single code path.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.fft

from .errors import DimensionMismatchError, NonRealResultError, ParameterError
from .tensors import load_tns, trailing_shape

__all__ = [
    "TransformSpec",
    "TransformCheck",
    "make_transform",
    "explicit_transform",
    "parse_transform",
    "forward",
    "inverse",
    "mode_product",
    "verify_transform",
]

# Daubechies-5 decomposition low-pass filter (10 taps, full double precision).
_DB5_DEC_LO = np.array([
    0.003335725285001549, -0.012580751999015526, -0.006241490213011705,
    0.07757149384006515, -0.03224486958502952, -0.24229488706619015,
    0.13842814590110342, 0.7243085284385744, 0.6038292697974729,
    0.160102397974125,
])

_RHO_TOL = 1e-8


def dft_matrix(n):
    """Unnormalized DFT matrix, F[j,k] = exp(-2*pi*i*j*k/n)."""
    j, k = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    return np.exp(-2j * np.pi * j * k / n)


def dct_matrix(n):
    """Orthogonal DCT-II matrix."""
    return scipy.fft.dct(np.eye(n), type=2, norm="ortho", axis=0)


def dwt_matrix(n, filt=_DB5_DEC_LO):
    """One-level periodized orthogonal wavelet analysis matrix.

    Rows 0..n/2-1 carry the low-pass filter shifted by 2, rows n/2..n-1 the
    quadrature-mirror high-pass.  Periodization keeps the matrix orthogonal
    for any even n, including n shorter than the filter.
    """
    if n % 2 != 0:
        raise ParameterError(
            f"wavelet transform needs an even extent, got {n}")
    taps = len(filt)
    high = np.array([(-1) ** k * filt[taps - 1 - k] for k in range(taps)])
    w = np.zeros((n, n))
    for j in range(n // 2):
        for k in range(taps):
            w[j, (2 * j + k) % n] += filt[k]
            w[n // 2 + j, (2 * j + k) % n] += high[k]
    return w


def _mode_rho(u):
    """Best-fit per-mode rho and the worst deviation of U U* from rho*I."""
    p = u @ u.conj().T
    rho_i = float(np.trace(p).real) / p.shape[0]
    dev = float(np.max(np.abs(p - rho_i * np.eye(p.shape[0]))))
    return rho_i, dev


@dataclass(frozen=True, eq=False)
class TransformSpec:
    """An invertible transform bound to the trailing extents of a shape.

    ``rho_ok`` records whether the matrices satisfied the rho scaling
    condition at construction; the tensor SVD requires it.
    """

    kind: str
    trailing: tuple
    mats: tuple = field(repr=False)
    rho: float
    rho_ok: bool

    @property
    def order(self):
        return len(self.trailing) + 2


def make_transform(kind, trailing):
    """Build a named transform ("fft", "dct", "dwt:db5") for given extents."""
    trailing = tuple(int(n) for n in trailing)
    if len(trailing) < 1 or any(n < 1 for n in trailing):
        raise DimensionMismatchError(
            f"need at least one trailing mode with positive extent, got {trailing}")
    if kind == "fft":
        mats = tuple(dft_matrix(n) for n in trailing)
        rho = float(np.prod(trailing))
    elif kind == "dct":
        mats = tuple(dct_matrix(n) for n in trailing)
        rho = 1.0
    elif kind == "dwt:db5":
        mats = tuple(dwt_matrix(n) for n in trailing)
        rho = 1.0
    else:
        raise ParameterError(f"unknown transform kind {kind!r}")
    return TransformSpec(kind=kind, trailing=trailing, mats=mats,
                         rho=rho, rho_ok=True)


def explicit_transform(mats, strict=True):
    """Wrap explicit per-mode matrices (one per mode 3..m).

    With ``strict`` each matrix is checked for invertibility by solving
    against the identity; the rho condition is measured either way and
    recorded in ``rho_ok``.
    """
    mats = tuple(np.ascontiguousarray(m) for m in mats)
    rho = 1.0
    ok = True
    for u in mats:
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise DimensionMismatchError(
                f"transform matrices must be square, got {u.shape}")
        if strict:
            try:
                sol = np.linalg.solve(u, np.eye(u.shape[0]))
            except np.linalg.LinAlgError as exc:
                raise ParameterError(f"transform matrix is singular: {exc}")
            if not np.all(np.isfinite(sol)):
                raise ParameterError("transform matrix is not invertible")
        rho_i, dev = _mode_rho(u)
        rho *= rho_i
        if dev > _RHO_TOL * max(1.0, abs(rho_i)):
            ok = False
    trailing = tuple(u.shape[0] for u in mats)
    return TransformSpec(kind="explicit", trailing=trailing, mats=mats,
                         rho=float(rho), rho_ok=ok)


def parse_transform(name, trailing):
    """Parse a CLI/config transform name into a TransformSpec.

    Accepted: "fft", "dct", "dwt:db5", and "explicit:<file>[,<file>...]"
    where each file is a TNS1 tensor of shape n x n x 1 holding one
    transform matrix for modes 3..m in order.
    """
    if name in ("fft", "dct", "dwt:db5"):
        return make_transform(name, trailing)
    if name.startswith("explicit:"):
        paths = [p for p in name[len("explicit:"):].split(",") if p]
        if len(paths) != len(trailing):
            raise ParameterError(
                f"explicit transform needs {len(trailing)} matrix files, got {len(paths)}")
        mats = []
        for p, n in zip(paths, trailing):
            t = load_tns(p)
            if t.shape != (n, n, 1):
                raise ParameterError(
                    f"{p}: expected a {n}x{n}x1 matrix tensor, got {t.shape}")
            mats.append(np.array(t[:, :, 0]))
        return explicit_transform(mats)
    raise ParameterError(f"unknown transform name {name!r}")


def mode_product(t, u, mode):
    """Multiply the mode-``mode`` unfolding of ``t`` by the matrix ``u``.

    ``mode`` is 1-based.  The output's mode unfolding equals u @ unfolding(t).
    """
    t = np.asarray(t)
    u = np.asarray(u)
    if not 1 <= mode <= t.ndim:
        raise DimensionMismatchError(
            f"mode {mode} out of range for order-{t.ndim} tensor")
    ax = mode - 1
    if u.ndim != 2 or u.shape[1] != t.shape[ax]:
        raise DimensionMismatchError(
            f"matrix {u.shape} does not act on extent {t.shape[ax]} at mode {mode}")
    out = np.tensordot(u, t, axes=(1, ax))
    return np.moveaxis(out, 0, ax)


def _check_trailing(t, spec):
    if trailing_shape(t) != spec.trailing:
        raise DimensionMismatchError(
            f"tensor trailing extents {trailing_shape(t)} do not match "
            f"transform extents {spec.trailing}")


def forward(t, spec):
    """Apply the transform along modes 3..m; returns complex128 storage."""
    t = np.asarray(t)
    if t.ndim < 3:
        raise DimensionMismatchError("transform needs tensor order >= 3")
    _check_trailing(t, spec)
    axes = tuple(range(2, t.ndim))
    if spec.kind == "fft":
        return np.fft.fftn(t, axes=axes)
    if spec.kind == "dct":
        out = scipy.fft.dctn(t, type=2, norm="ortho", axes=axes)
        return np.asarray(out, dtype=np.complex128)
    out = t.astype(np.complex128, copy=True) if np.iscomplexobj(t) \
        else t.astype(np.complex128)
    for ax, u in zip(axes, spec.mats):
        out = mode_product(out, u, ax + 1)
    return np.ascontiguousarray(out, dtype=np.complex128)


def _imag_residue_ok(c):
    re_max = np.max(np.abs(c.real)) if c.size else 0.0
    im_max = np.max(np.abs(c.imag)) if c.size else 0.0
    return im_max <= 1e-8 * (1.0 + re_max), im_max


def inverse(t, spec):
    """Invert the transform; the result must be real up to round-off.

    Imaginary residue with max|Im| <= 1e-8*(1+max|Re|) is discarded, a
    larger residue raises NonRealResultError since it signals a transform
    mismatch rather than round-off.
    """
    t = np.asarray(t, dtype=np.complex128)
    if t.ndim < 3:
        raise DimensionMismatchError("transform needs tensor order >= 3")
    _check_trailing(t, spec)
    axes = tuple(range(2, t.ndim))
    if spec.kind == "fft":
        out = np.fft.ifftn(t, axes=axes)
    elif spec.kind == "dct":
        out = scipy.fft.idctn(t, type=2, norm="ortho", axes=axes)
    else:
        out = t
        for ax, u in zip(axes, spec.mats):
            if spec.kind == "dwt:db5":
                uinv = u.T
            else:
                uinv = np.linalg.inv(u)
            out = mode_product(out, uinv, ax + 1)
    out = np.asarray(out, dtype=np.complex128)
    ok, residue = _imag_residue_ok(out)
    if not ok:
        raise NonRealResultError(
            f"inverse transform left imaginary residue {residue:.3e}")
    return np.ascontiguousarray(out.real)


@dataclass(frozen=True)
class TransformCheck:
    """Result of auditing the rho condition at a concrete shape."""

    passed: bool
    rho: float
    expected_rho: float
    worst_deviation: float
    per_mode_rho: tuple


def verify_transform(spec, shape):
    """Audit U_i U_i* == rho_i I per mode and prod(rho_i) == spec.rho.

    Returns a TransformCheck rather than raising, so a failing transform can
    be reported.  Intended for desk-scale shapes where the per-mode products
    are cheap to materialize.
    """
    shape = tuple(shape)
    if len(shape) >= 3 and tuple(shape[2:]) != spec.trailing:
        raise DimensionMismatchError(
            f"shape {shape} trailing extents do not match transform "
            f"extents {spec.trailing}")
    worst = 0.0
    rho = 1.0
    per_mode = []
    for u in spec.mats:
        rho_i, dev = _mode_rho(u)
        per_mode.append(rho_i)
        rho *= rho_i
        worst = max(worst, dev)
    passed = worst <= _RHO_TOL and abs(rho - spec.rho) <= _RHO_TOL * max(1.0, spec.rho)
    return TransformCheck(passed=passed, rho=float(rho),
                          expected_rho=float(spec.rho),
                          worst_deviation=float(worst),
                          per_mode_rho=tuple(per_mode))
