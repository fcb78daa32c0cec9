"""Row-action solvers for the linear tensor constraint A * X = B.

Both solvers alternate a Kaczmarz-style correction of a dual iterate Z with
a proximal mapping back to the primal: the sparse variant applies the
elementwise log-sum prox, the low-rank variant the nuclear log-sum prox.
Rows of A are visited one at a time or in blocks, cyclically or by
norm-weighted random sampling.

Per-iteration wall times cover the algorithmic work only (index selection,
dual update, prox); residual/error bookkeeping is measured outside so that
recorded timings reflect the cost of the update itself.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import (DegenerateRowError, DimensionMismatchError,
                     DivergenceError, ParameterError)
from .regularizers import (LogSumParams, check_prox_criterion, log_sum_prox,
                           nuclear_log_sum_prox, penalty_objective)
from .tensors import frobenius_norm, inner_product, trailing_shape
from .tlinalg import facewise_product
from .transforms import forward, inverse

__all__ = [
    "IndexSchedule",
    "BlockStrategy",
    "SolverConfig",
    "SolveReport",
    "step_bound",
    "kaczmarz_z_update",
    "make_schedule",
    "bregman_distance",
    "solve_sparse",
    "solve_lowrank",
]


@dataclass(frozen=True)
class IndexSchedule:
    """How row indices are drawn: in order, or with probability proportional
    to the squared row norms."""

    mode: str = "cyclic"  # "cyclic" | "random"
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("cyclic", "random"):
            raise ParameterError(f"unknown schedule mode {self.mode!r}")


@dataclass(frozen=True)
class BlockStrategy:
    """Row selection granularity.

    "single" visits one row at a time.  "ol" draws a block of ``size``
    distinct rows each iteration (cyclic: a window sliding by ``size``;
    random: norm-weighted sampling without replacement), so blocks from
    different iterations may overlap.  "nol" fixes a contiguous near-equal
    partition into ``count`` blocks for the whole solve and visits blocks
    cyclically or uniformly at random; ``weight_blocks_by_norm`` switches the
    random choice to norm-weighted block sampling.
    """

    mode: str = "single"  # "single" | "ol" | "nol"
    size: int = None
    count: int = None
    selection: IndexSchedule = field(default_factory=IndexSchedule)
    weight_blocks_by_norm: bool = False

    def __post_init__(self):
        if self.mode not in ("single", "ol", "nol"):
            raise ParameterError(f"unknown block mode {self.mode!r}")
        if self.mode == "ol" and (self.size is None or self.size < 1):
            raise ParameterError("ol blocks need size >= 1")
        if self.mode == "nol" and (self.count is None or self.count < 1):
            raise ParameterError("nol blocks need count >= 1")


@dataclass
class SolverConfig:
    """Everything a solve needs besides the data tensors."""

    params: LogSumParams
    transform: object
    step: float = 1.0
    max_iters: int = 2000
    tol: float = 1e-10
    blocks: BlockStrategy = field(default_factory=BlockStrategy)
    record_bregman: bool = False
    strict_step: bool = False

    def validate(self):
        """Check parameter conditions; returns warnings for soft violations.

        The z-independent sufficient shrinkage condition epsilon^2 >= 4*lam
        and strong convexity sqrt(lam) < epsilon are hard requirements.  The
        step bound is enforced only with ``strict_step``; otherwise exceeding
        it is recorded as a warning, since useful configurations (e.g. unit
        step under the DFT) violate it in practice.
        """
        p = self.params
        if p.lam >= p.epsilon ** 2:
            raise ParameterError(
                f"strong convexity needs sqrt(lam) < epsilon, got lam={p.lam}, "
                f"epsilon={p.epsilon}")
        if p.epsilon ** 2 < 4.0 * p.lam:
            raise ParameterError(
                f"shrinkage criterion needs epsilon^2 >= 4*lam, got "
                f"lam={p.lam}, epsilon={p.epsilon}")
        if self.step <= 0:
            raise ParameterError(f"step must be > 0, got {self.step}")
        if self.max_iters < 1:
            raise ParameterError("max_iters must be >= 1")
        if self.tol <= 0:
            raise ParameterError("tol must be > 0")
        warnings = []
        bound = step_bound(p, self.transform.rho)
        if self.step >= bound:
            msg = (f"step {self.step} exceeds the guaranteed-decay bound "
                   f"{bound:.6g} = (2 - 2*lam/epsilon^2)/rho")
            if self.strict_step:
                raise ParameterError(msg)
            warnings.append(msg)
        return warnings


@dataclass(eq=False)
class SolveReport:
    """Per-iteration diagnostics and the final iterate of one solve."""

    iterations_run: int
    termination: str  # "tolerance" | "max_iters"
    final_x: np.ndarray
    residual_history: np.ndarray
    wall_times: np.ndarray
    re_history: np.ndarray = None
    bregman_history: np.ndarray = None
    criterion_violations: np.ndarray = None
    warnings: tuple = ()


def step_bound(params, rho):
    """Largest step with guaranteed distance decay, (2 - 2*lam/eps^2)/rho."""
    if params.lam >= params.epsilon ** 2:
        raise ParameterError(
            f"bound needs sqrt(lam) < epsilon, got lam={params.lam}, "
            f"epsilon={params.epsilon}")
    if rho <= 0:
        raise ParameterError(f"rho must be > 0, got {rho}")
    return (2.0 - 2.0 * params.lam / params.epsilon ** 2) / rho


def kaczmarz_z_update(z, x, a, b, idxs, t, spec, block_norm_sq=None):
    """One dual correction from the rows ``idxs`` (1-based) of A and B:

        z + t * A(idxs)^* * (B(idxs) - (A * X)(idxs)) / ||A(idxs)||_F^2

    computed touching only the selected horizontal slices of A.  If the
    residual on those rows is zero the iterate is returned unchanged.
    """
    rows = np.atleast_1d(np.asarray(idxs, dtype=np.int64))
    n1 = a.shape[0]
    if rows.size == 0:
        raise IndexError("empty row index set")
    if np.any(rows < 1) or np.any(rows > n1):
        raise IndexError(f"row index out of range 1..{n1}")
    sub = a[rows - 1]
    if block_norm_sq is None:
        block_norm_sq = float(np.sum(sub * sub))
    if block_norm_sq <= 0.0:
        raise DegenerateRowError(
            f"rows {tuple(int(r) for r in rows)} of A have zero norm")
    sub_l = forward(sub, spec)
    resid = b[rows - 1] - inverse(facewise_product(sub_l, forward(x, spec)),
                                  spec)
    # A(idxs)^* * resid without materializing the conjugate transpose: the
    # transform-domain faces of A^* are the conjugate-transposed faces of A.
    upd_l = np.einsum("ji...,jk...->ik...", np.conj(sub_l),
                      forward(resid, spec))
    return z + (t / block_norm_sq) * inverse(upd_l, spec)


def _contiguous_partition(n1, count):
    # Near-equal contiguous blocks; the first n1 % count blocks get the
    # extra row. 1-based indices.
    if count > n1:
        raise ParameterError(f"cannot split {n1} rows into {count} blocks")
    q, r = divmod(n1, count)
    blocks = []
    start = 1
    for j in range(count):
        size = q + 1 if j < r else q
        blocks.append(tuple(range(start, start + size)))
        start += size
    flat = [i for blk in blocks for i in blk]
    assert sorted(flat) == list(range(1, n1 + 1)), "partition must cover rows"
    return blocks


def make_schedule(strategy, a):
    """Infinite iterator of 1-based row index blocks for the given strategy."""
    a = np.asarray(a)
    n1 = a.shape[0]
    sel = strategy.selection
    row_norms_sq = np.sum(a.reshape(n1, -1) ** 2, axis=1)
    total = float(row_norms_sq.sum())
    if strategy.mode == "single":
        if sel.mode == "cyclic":
            def gen():
                k = 0
                while True:
                    yield ((k % n1) + 1,)
                    k += 1
        else:
            if total <= 0.0:
                raise DegenerateRowError("operator has zero Frobenius norm")
            probs = row_norms_sq / total
            rng = np.random.default_rng(sel.seed)

            def gen():
                while True:
                    yield (int(rng.choice(n1, p=probs)) + 1,)
        return gen()
    if strategy.mode == "nol":
        blocks = _contiguous_partition(n1, strategy.count)
        if sel.mode == "cyclic":
            def gen():
                k = 0
                while True:
                    yield blocks[k % len(blocks)]
                    k += 1
        else:
            rng = np.random.default_rng(sel.seed)
            if strategy.weight_blocks_by_norm:
                w = np.array([row_norms_sq[np.array(blk) - 1].sum()
                              for blk in blocks])
                if w.sum() <= 0.0:
                    raise DegenerateRowError(
                        "operator has zero Frobenius norm")
                probs = w / w.sum()

                def gen():
                    while True:
                        yield blocks[int(rng.choice(len(blocks), p=probs))]
            else:
                def gen():
                    while True:
                        yield blocks[int(rng.integers(len(blocks)))]
        return gen()
    # overlapping blocks, resampled every iteration
    beta = strategy.size
    if beta > n1:
        raise ParameterError(f"block size {beta} exceeds row count {n1}")
    if sel.mode == "cyclic":
        def gen():
            k = 0
            while True:
                start = (k * beta) % n1
                yield tuple((start + j) % n1 + 1 for j in range(beta))
                k += 1
    else:
        if total <= 0.0:
            raise DegenerateRowError("operator has zero Frobenius norm")
        probs = row_norms_sq / total
        rng = np.random.default_rng(sel.seed)

        def gen():
            while True:
                pick = rng.choice(n1, size=beta, replace=False, p=probs)
                yield tuple(int(i) + 1 for i in pick)
    return gen()


def bregman_distance(x, y, z_sub, params):
    """f(y) - f(x) - <z_sub, y - x> for f = lam*log-sum + 0.5*||.||_F^2.

    ``z_sub`` must be a subgradient of f at x; inside the solvers the dual
    iterate Z plays that role because X = prox(Z).  When the subgradient
    relation holds the value dominates (alpha/2)*||x - y||_F^2 with
    alpha = 1 - lam/epsilon^2.
    """
    return penalty_objective(y, params) - penalty_objective(x, params) \
        - inner_product(z_sub, np.asarray(y) - np.asarray(x))


def _check_solve_shapes(a, b, spec):
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim < 3 or b.ndim != a.ndim:
        raise DimensionMismatchError(
            f"A and B must share order >= 3, got {a.ndim} and {b.ndim}")
    if a.shape[0] != b.shape[0] or a.shape[2:] != b.shape[2:]:
        raise DimensionMismatchError(
            f"A {a.shape} and B {b.shape} are not conformable")
    if trailing_shape(a) != spec.trailing:
        raise DimensionMismatchError(
            f"transform extents {spec.trailing} do not match data "
            f"{trailing_shape(a)}")
    return a, b


def _solve(a, b, config, ground_truth, lowrank, z0):
    a, b = _check_solve_shapes(a, b, config.transform)
    warnings = list(config.validate())
    params = config.params
    spec = config.transform
    n2 = a.shape[1]
    x_shape = (n2, b.shape[1]) + a.shape[2:]
    truth = None if ground_truth is None else np.asarray(ground_truth)
    if truth is not None and truth.shape != x_shape:
        raise DimensionMismatchError(
            f"ground truth shape {truth.shape} does not match {x_shape}")

    def prox(zz):
        if lowrank:
            return nuclear_log_sum_prox(zz, params, spec)
        return log_sum_prox(zz, params)

    if z0 is None:
        z = np.zeros(x_shape)
    else:
        z = np.array(z0, dtype=np.float64)
        if z.shape != x_shape:
            raise DimensionMismatchError(
                f"initial dual iterate shape {z.shape} does not match "
                f"{x_shape}")
    x = prox(z)
    schedule = make_schedule(config.blocks, a)
    row_norms_sq = np.sum(a.reshape(a.shape[0], -1) ** 2, axis=1)

    residual_hist = []
    wall_times = []
    re_hist = [] if truth is not None else None
    breg_hist = [] if (config.record_bregman and truth is not None) else None
    crit_hist = []
    truth_norm = frobenius_norm(truth) if truth is not None else 0.0

    iterations = 0
    termination = "max_iters"
    for k in range(config.max_iters):
        tic = time.perf_counter()
        idxs = next(schedule)
        bn = float(row_norms_sq[np.asarray(idxs) - 1].sum())
        z = kaczmarz_z_update(z, x, a, b, idxs, config.step, spec,
                              block_norm_sq=bn)
        x_new = prox(z)
        wall_times.append(time.perf_counter() - tic)

        if not (np.all(np.isfinite(z)) and np.all(np.isfinite(x_new))):
            raise DivergenceError(
                f"iterate became non-finite at iteration {k + 1}")
        crit_hist.append(check_prox_criterion(z, params).violations)
        residual_hist.append(frobenius_norm(
            b - inverse(facewise_product(forward(a, spec),
                                         forward(x_new, spec)), spec)))
        if truth is not None:
            re_hist.append(frobenius_norm(truth - x_new) / truth_norm)
        if breg_hist is not None:
            breg_hist.append(bregman_distance(x_new, truth, z, params))

        dx = frobenius_norm(x_new - x)
        xn = frobenius_norm(x)
        x = x_new
        iterations = k + 1
        if (dx / xn if xn > 0 else dx) < config.tol:
            termination = "tolerance"
            break

    if breg_hist is not None and breg_hist and min(breg_hist) < -1e-9:
        warnings.append(
            f"Bregman diagnostic went negative ({min(breg_hist):.3e}); the "
            "dual iterate stopped being a valid subgradient")
    return SolveReport(
        iterations_run=iterations,
        termination=termination,
        final_x=x,
        residual_history=np.asarray(residual_hist),
        wall_times=np.asarray(wall_times),
        re_history=None if re_hist is None else np.asarray(re_hist),
        bregman_history=None if breg_hist is None else np.asarray(breg_hist),
        criterion_violations=np.asarray(crit_hist, dtype=np.int64),
        warnings=tuple(warnings),
    )


def solve_sparse(a, b, config, ground_truth=None, z0=None):
    """Recover a sparse X with A * X = B by log-sum regularized row action.

    Alternates the Kaczmarz dual correction with the elementwise log-sum
    prox.  The dual iterate starts at ``z0`` (default: the zero tensor,
    which always lies in the row space of A; a caller-supplied z0 must lie
    there too for the convergence guarantees to apply).  Stops when the
    relative change of X drops below ``config.tol`` or after
    ``config.max_iters`` iterations.
    """
    return _solve(a, b, config, ground_truth, lowrank=False, z0=z0)


def solve_lowrank(a, b, config, ground_truth=None, z0=None):
    """Recover a low-tubal-rank X with A * X = B.

    Same dual iteration as ``solve_sparse`` but the primal is produced by the
    nuclear log-sum prox (shrinkage of the tensor SVD core tubes), including
    at initialization.
    """
    return _solve(a, b, config, ground_truth, lowrank=True, z0=z0)
