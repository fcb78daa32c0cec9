"""Log-sum penalty, its proximity operator, and the nuclear variant.

The penalty sum(log(1 + |x|/epsilon)) is a nonconvex surrogate for the l0
pseudo-norm; composed with the diagonal tubes of the tensor SVD core it
becomes a surrogate for tubal rank.  The prox is elementwise: for each entry
the minimizer of 0.5*(x - |z|)^2 + lam*log(1 + x/epsilon) over x >= 0 is one
of three candidates (zero and the two clamped roots of the stationarity
quadratic), then the input's sign is restored.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .tensors import frobenius_norm
from .tlinalg import conj_transpose, t_product, t_svd
from .transforms import forward, inverse

__all__ = [
    "LogSumParams",
    "CriterionReport",
    "log_sum_value",
    "log_sum_prox_scalar",
    "log_sum_prox",
    "check_prox_criterion",
    "nuclear_log_sum_value",
    "nuclear_log_sum_prox",
]


@dataclass(frozen=True)
class LogSumParams:
    """Regularization weight ``lam`` and cusp-slope parameter ``epsilon``.

    ``lam`` may be zero (the prox degenerates to the identity), ``epsilon``
    must be positive.  Strong convexity of the penalty-plus-quadratic
    objective additionally needs sqrt(lam) < epsilon; solvers check that.
    """

    lam: float
    epsilon: float

    def __post_init__(self):
        if self.lam < 0:
            raise ParameterError(f"lam must be >= 0, got {self.lam}")
        if self.epsilon <= 0:
            raise ParameterError(f"epsilon must be > 0, got {self.epsilon}")

    @property
    def strong_convexity(self):
        """alpha = 1 - lam/epsilon^2, positive iff sqrt(lam) < epsilon."""
        return 1.0 - self.lam / self.epsilon ** 2


def log_sum_value(x, epsilon):
    """sum(log(1 + |x_i|/epsilon)) over all entries."""
    if epsilon <= 0:
        raise ParameterError(f"epsilon must be > 0, got {epsilon}")
    return float(np.sum(np.log1p(np.abs(np.asarray(x)) / epsilon)))


def _prox_magnitudes(mag, lam, epsilon):
    # Minimize g(x) = 0.5*(x - m)^2 + lam*log(1 + x/eps) over x >= 0 for each
    # magnitude m.  Stationary points solve x^2 + (eps - m)x + (lam - m*eps)
    # = 0; with a negative discriminant g is increasing on x >= 0 and the
    # minimizer is 0.  Ties go to the smallest magnitude.
    #
    # Magnitudes beyond 1e100 would overflow the squared terms; there the
    # interior stationary point always wins and equals m - lam/(eps + m) up
    # to O(lam^2/m^3), so divergence in a solver stays visible instead of
    # being masked by an overflow artifact.
    huge = mag > 1e100
    m = np.where(huge, 1.0, mag)
    disc = (m + epsilon) ** 2 - 4.0 * lam
    root = np.sqrt(np.maximum(disc, 0.0))
    lo = np.maximum(0.0, 0.5 * ((m - epsilon) - root))
    hi = np.maximum(0.0, 0.5 * ((m - epsilon) + root))
    cands = np.stack([np.zeros_like(m), lo, hi])
    obj = 0.5 * (cands - m) ** 2 + lam * np.log1p(cands / epsilon)
    best = np.take_along_axis(cands, np.argmin(obj, axis=0)[None], 0)[0]
    best = np.where(disc < 0.0, 0.0, best)
    return np.where(huge, mag - lam / (epsilon + mag), best)


def log_sum_prox_scalar(z, params):
    """Scalar proximity operator of ``lam * log(1 + |.|/epsilon)``."""
    mag = _prox_magnitudes(np.abs(np.float64(z)), params.lam, params.epsilon)
    return float(np.sign(z) * mag)


def log_sum_prox(z, params):
    """Elementwise proximity operator; shrinks every entry toward zero."""
    z = np.asarray(z, dtype=np.float64)
    return np.sign(z) * _prox_magnitudes(np.abs(z), params.lam, params.epsilon)


@dataclass(frozen=True)
class CriterionReport:
    """Outcome of the shrinkage parameter criterion (|z|+eps)^2 >= 4*lam."""

    passed: bool
    min_margin: float
    worst_index: tuple
    violations: int


def check_prox_criterion(z, params):
    """Check (|z| + epsilon)^2 >= 4*lam for every entry of ``z``.

    The boundary case counts as a pass.  Returns the minimal margin and the
    (1-based) index attaining it.
    """
    z = np.asarray(z)
    # overflow to +inf on astronomically large entries is a correct margin
    with np.errstate(over="ignore"):
        margin = (np.abs(z) + params.epsilon) ** 2 - 4.0 * params.lam
    flat = int(np.argmin(margin))
    worst = tuple(int(i) + 1 for i in np.unravel_index(flat, z.shape))
    violations = int(np.count_nonzero(margin < 0.0))
    return CriterionReport(passed=violations == 0,
                           min_margin=float(margin.reshape(-1)[flat]),
                           worst_index=worst,
                           violations=violations)


def _diag_tubes(s):
    k = min(s.shape[0], s.shape[1])
    return s[np.arange(k), np.arange(k)]


def nuclear_log_sum_value(x, epsilon, spec):
    """Log-sum penalty of the diagonal tubes of the tensor SVD core of x."""
    fac = t_svd(x, spec)
    return log_sum_value(_diag_tubes(fac.s), epsilon)


def nuclear_log_sum_prox(z, params, spec, transform_domain=False):
    """Proximity operator of the nuclear log-sum penalty.

    Factors z, applies the elementwise log-sum prox to the diagonal tubes of
    the core tensor, and recomposes.  The parameter criterion must hold on
    the core's diagonal entries.

    With ``transform_domain`` the shrinkage is applied to the per-face
    singular values instead of the spatial-domain tubes; this variant is
    experimental and not covered by the acceptance suite.
    """
    fac = t_svd(z, spec)
    k = min(fac.s.shape[0], fac.s.shape[1])
    d = np.zeros_like(fac.s)
    if transform_domain:
        sl = forward(fac.s, spec)
        diag = sl[np.arange(k), np.arange(k)].real
        dl = np.zeros_like(sl)
        dl[np.arange(k), np.arange(k)] = log_sum_prox(diag, params)
        d = inverse(dl, spec)
    else:
        diag = _diag_tubes(fac.s)
        report = check_prox_criterion(diag, params)
        if not report.passed:
            raise ParameterError(
                "shrinkage criterion (|z|+epsilon)^2 >= 4*lam fails on the "
                f"core tensor (lam={params.lam}, epsilon={params.epsilon}, "
                f"margin={report.min_margin:.3e})")
        d[np.arange(k), np.arange(k)] = log_sum_prox(diag, params)
    out = t_product(t_product(fac.u, d, spec), conj_transpose(fac.v, spec),
                    spec)
    return out


def penalty_objective(x, params):
    """f(x) = lam * log-sum(x) + 0.5*||x||_F^2, the solver's mirror map."""
    return params.lam * log_sum_value(x, params.epsilon) \
        + 0.5 * frobenius_norm(x) ** 2
