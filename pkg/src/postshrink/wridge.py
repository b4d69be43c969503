"""Step 2: the post-selection weighted ridge estimator.

Given a selected index set s1, the estimator minimizes

    ||y - X b||^2 + r_n * ||b restricted to the complement of s1||^2,

so the selected coordinates stay unpenalized while everything else is
ridge-stabilized. The solution splits into two block solves through the
projection complements of each block, which is how ``wr_solve`` computes
it. Coordinates outside s1 are then hard-thresholded at a_n, which
partitions the complement into weak survivors (s2) and the discarded
remainder (s3).

Tuning schedules: a_n = c1 * n**(-alpha) and
r_n = c2 * a_n**(-2) * (log log n)**3 * log(max(n, p)); natural logs.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .selection import SubsetPartition, restricted_ls

__all__ = [
    "TuningConfig",
    "WrFit",
    "DEFAULT_C1_GRID",
    "DEFAULT_C2_GRID",
    "compute_an",
    "compute_rn",
    "wr_solve",
    "threshold_wr",
    "cv_tune",
]

DEFAULT_C1_GRID = (0.5, 1.0, 2.0)
DEFAULT_C2_GRID = (0.01, 0.1, 1.0, 10.0)


@dataclass(frozen=True)
class TuningConfig:
    """Threshold and ridge schedule constants plus selection-grid settings.

    alpha is the threshold decay exponent in (0, 1/2]; c1 and c2 are the
    positive scales of a_n and r_n. The lambda-grid fields control the
    Step 1 path that feeds the pipeline.
    """

    alpha: float = 0.125
    c1: float = 1.0
    c2: float = 1.0
    cv_folds: int = 5
    seed: int = 0
    n_lambdas: int = 100
    lambda_min_ratio: float = 1e-4

    def __post_init__(self):
        if not 0 < self.alpha <= 0.5:
            raise ValueError("alpha must be in (0, 1/2]")
        if self.c1 <= 0 or self.c2 <= 0:
            raise ValueError("c1 and c2 must be positive")
        if self.cv_folds < 2:
            raise ValueError("cv_folds must be at least 2")
        if self.n_lambdas < 1 or not 0 < self.lambda_min_ratio <= 1:
            raise ValueError("bad lambda grid settings")

    def a_n(self, n):
        return compute_an(n, self.c1, self.alpha)

    def r_n(self, n, p):
        return compute_rn(n, p, self.a_n(n), self.c2)


@dataclass(frozen=True)
class WrFit:
    """Weighted ridge solution before and after thresholding.

    ``beta_wr`` agrees with ``beta_tilde`` on s1, is exactly zero on s3,
    and exceeds a_n in absolute value on s2.
    """

    beta_tilde: np.ndarray
    beta_wr: np.ndarray
    partition: SubsetPartition
    r_n: float
    a_n: float

    def __post_init__(self):
        part = self.partition
        if not np.array_equal(self.beta_wr[part.s1], self.beta_tilde[part.s1]):
            raise ValueError("beta_wr must agree with beta_tilde on s1")
        if part.s3.size and np.any(self.beta_wr[part.s3] != 0.0):
            raise ValueError("beta_wr must vanish on s3")
        if part.s2.size and not np.all(np.abs(self.beta_tilde[part.s2]) > self.a_n):
            raise ValueError("|beta_tilde| must exceed a_n on s2")


def compute_an(n, c1, alpha=0.125):
    """Threshold schedule c1 * n**(-alpha)."""
    if n < 2:
        raise ValueError("n must be at least 2")
    if c1 <= 0:
        raise ValueError("c1 must be positive")
    if not 0 < alpha <= 0.5:
        raise ValueError("alpha must be in (0, 1/2]")
    return c1 * n ** (-alpha)


def compute_rn(n, p, an, c2):
    """Ridge schedule c2 * an**(-2) * (log log n)**3 * log(max(n, p))."""
    if n < 16:
        raise ValueError("n must be at least 16 for the iterated logarithm")
    if an <= 0:
        raise ValueError("an must be positive")
    if c2 <= 0:
        raise ValueError("c2 must be positive")
    return c2 * an ** (-2.0) * math.log(math.log(n)) ** 3 * math.log(max(n, p))


def _complement(p, s1):
    mask = np.ones(p, dtype=bool)
    mask[s1] = False
    return np.where(mask)[0]


def wr_solve(data, s1, r_n):
    """Minimize ||y - X b||^2 + r_n ||b_{s1 complement}||^2.

    The two blocks come from the closed forms: with X1 the s1 columns, X2
    the rest, and M1 the projection complement of X1,

        b2 = (r_n I + X2' M1 X2)^{-1} X2' M1 y,

    evaluated through the dual n x n system when the complement is wider
    than n; b1 then solves the unpenalized block given X2 b2 (a generalized
    inverse handles rank-deficient X1). The pair jointly minimizes the
    objective.

    Parameters
    ----------
    data : Dataset
    s1 : integer index array (may be empty: plain ridge on all coordinates)
    r_n : positive ridge penalty

    Returns
    -------
    (p,) ndarray
    """
    if r_n <= 0:
        raise ValueError("r_n must be positive")
    s1 = np.asarray(s1, dtype=int)
    n, p = data.n, data.p
    if s1.size and (s1.min() < 0 or s1.max() >= p):
        raise ValueError("s1 contains indices outside range(p)")
    if len(np.unique(s1)) != s1.size:
        raise ValueError("s1 contains duplicates")
    comp = _complement(p, s1)
    if comp.size == 0:
        warnings.warn("wr_solve: empty penalized block; returning the restricted fit")
        return restricted_ls(data, s1)
    X2 = data.X[:, comp]
    if s1.size:
        X1 = data.X[:, s1]
        # M1 applied through a generalized inverse of the X1 block
        proj = np.linalg.lstsq(X1, np.hstack([X2, data.y[:, None]]), rcond=None)[0]
        A = X2 - X1 @ proj[:, :-1]          # M1 X2
        My = data.y - X1 @ proj[:, -1]      # M1 y
    else:
        A = X2
        My = data.y
    p2 = comp.size
    if p2 <= n:
        G = X2.T @ A                        # X2' M1 X2 (symmetric up to roundoff)
        G = 0.5 * (G + G.T)
        b2 = np.linalg.solve(G + r_n * np.eye(p2), X2.T @ My)
    else:
        K = A @ A.T                         # M1 X2 X2' M1
        K = 0.5 * (K + K.T)
        b2 = A.T @ np.linalg.solve(K + r_n * np.eye(n), My)
    beta = np.zeros(p)
    beta[comp] = b2
    if s1.size:
        beta[s1] = np.linalg.lstsq(X1, data.y - X2 @ b2, rcond=None)[0]
    return beta


def threshold_wr(beta_tilde, s1, a_n, r_n=math.nan):
    """Hard-threshold the penalized block at a_n and record the partition.

    Coordinates in s1 pass through; outside s1 a coordinate survives only
    when its absolute value strictly exceeds a_n. Survivors form s2 and
    the rest form s3. The absolute value is deliberate: weak signals carry
    arbitrary signs. ``a_n = inf`` empties s2; ``a_n = 0`` keeps every
    nonzero coordinate.
    """
    if a_n < 0:
        raise ValueError("a_n must be nonnegative")
    beta_tilde = np.asarray(beta_tilde, dtype=float)
    p = beta_tilde.shape[0]
    s1 = np.asarray(s1, dtype=int)
    comp = _complement(p, s1)
    beta_wr = beta_tilde.copy()
    kill = comp[np.abs(beta_tilde[comp]) <= a_n]
    beta_wr[kill] = 0.0
    s2 = comp[beta_wr[comp] != 0.0]
    s3 = np.setdiff1d(comp, s2)
    part = SubsetPartition(s1=s1, s2=s2, s3=s3, p=p)
    return WrFit(beta_tilde=beta_tilde, beta_wr=beta_wr, partition=part,
                 r_n=float(r_n), a_n=float(a_n))


def _pse_for_fold(train_X, train_y, s1, c1, c2, alpha, sigma2_support):
    """Fit steps 2 and 3 on a training fold; return (coef on s1, guard flag)."""
    from .shrinkage import shrink_from_wr  # deferred: shrinkage imports wridge

    n, p = train_X.shape
    an = compute_an(n, c1, alpha)
    rn = compute_rn(n, p, an, c2)
    from .data import Dataset
    from .data import center
    fold = center(train_X, train_y)
    bt = wr_solve(fold, s1, rn)
    fit = threshold_wr(bt, s1, an, r_n=rn)
    re_full = restricted_ls(fold, s1)
    return shrink_from_wr(fold, fit, re_full[s1], sigma2_support=sigma2_support)


def cv_tune(data, s1, c1_grid=None, c2_grid=None, folds=5, seed=0,
            alpha=0.125, sigma2_support="s2"):
    """Pick (c1, c2) by K-fold prediction error of the shrinkage pipeline.

    Each fold refits the weighted ridge and shrinkage steps on the training
    part (s1 held fixed) and scores the held-out squared prediction error
    of the positive-shrinkage coefficients on the s1 columns. A training
    fold that trips the applicability guard falls back to the restricted
    fit and is still scored. Ties break toward the smaller full-sample
    ridge penalty, then lexicographically on (c1, c2), so duplicated grid
    entries and grid order cannot change the answer.

    Returns
    -------
    TuningConfig
    """
    if folds < 2:
        raise ValueError("folds must be at least 2")
    c1_grid = DEFAULT_C1_GRID if c1_grid is None else tuple(c1_grid)
    c2_grid = DEFAULT_C2_GRID if c2_grid is None else tuple(c2_grid)
    if not c1_grid or not c2_grid:
        raise ValueError("grids must be nonempty")
    s1 = np.asarray(s1, dtype=int)
    n = data.n
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0xCF,)))
    perm = rng.permutation(n)
    fold_ids = np.array_split(perm, folds)
    best = None
    for c1 in c1_grid:
        for c2 in c2_grid:
            errs = []
            for k in range(folds):
                test = fold_ids[k]
                train = np.concatenate([fold_ids[g] for g in range(folds) if g != k])
                coef_s1, _ = _pse_for_fold(
                    data.X[train], data.y[train], s1, c1, c2, alpha, sigma2_support
                )
                pred = data.X[test][:, s1] @ coef_s1
                errs.append(float(np.mean((data.y[test] - pred) ** 2)))
            score = float(np.mean(errs))
            rn_full = compute_rn(n, data.p, compute_an(n, c1, alpha), c2)
            key = (score, rn_full, c1, c2)
            if best is None or key < best:
                best = key
    return TuningConfig(alpha=alpha, c1=best[2], c2=best[3],
                        cv_folds=folds, seed=seed)
