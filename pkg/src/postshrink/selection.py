"""Step 1: penalized least squares selection and the restricted refit.

The penalized objective throughout is the unscaled residual sum of squares
plus an L1 term,

    sum_i (y_i - x_i' b)^2 + lambda * sum_j |b_j| / w_j,

with unit weights for the plain lasso. Under this scaling the orthonormal
soft-threshold constant is lambda / (2 n) on the correlations X'y / n, and
the all-zero solution appears at lambda >= 2 * max_j |x_j' y|. Libraries
differ from each other by factors of 2 and n here, so the convention is
spelled out once and tested against closed forms.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from ._cd import cd_solve

__all__ = [
    "LassoPath",
    "SubsetPartition",
    "lambda_max",
    "lambda_grid",
    "lasso_fit",
    "adaptive_lasso_fit",
    "adaptive_init",
    "lasso_path",
    "bic_select",
    "active_set",
    "restricted_ls",
    "kkt_violation",
]

DEFAULT_TOL = 1e-7
DEFAULT_MAX_ITER = 100_000
DEFAULT_ZERO_TOL = 1e-10
DEFAULT_N_LAMBDAS = 100
DEFAULT_LAMBDA_MIN_RATIO = 1e-4


@dataclass(frozen=True)
class SubsetPartition:
    """Disjoint index sets over coefficient positions.

    s1 holds the selected strong set; s2 and s3 are filled in by the
    threshold step (weak survivors and the discarded remainder) and may be
    empty before then.
    """

    s1: np.ndarray
    s2: np.ndarray
    s3: np.ndarray
    p: int

    def __post_init__(self):
        for name in ("s1", "s2", "s3"):
            idx = np.asarray(getattr(self, name), dtype=int)
            object.__setattr__(self, name, idx)
            if idx.size and (idx.min() < 0 or idx.max() >= self.p):
                raise ValueError(f"{name} contains indices outside range(p)")
        allidx = np.concatenate([self.s1, self.s2, self.s3])
        if len(np.unique(allidx)) != len(allidx):
            raise ValueError("s1, s2, s3 must be pairwise disjoint")


@dataclass(frozen=True)
class LassoPath:
    """Solutions along a descending penalty grid.

    Attributes
    ----------
    lambdas : (m,) ndarray, strictly descending positive grid
    betas : (m, p) ndarray, one coefficient vector per penalty
    n_iter : (m,) ndarray of sweep counts
    converged : (m,) boolean ndarray
    """

    lambdas: np.ndarray
    betas: np.ndarray
    n_iter: np.ndarray
    converged: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float)
        object.__setattr__(self, "lambdas", lam)
        if lam.ndim != 1 or lam.size == 0:
            raise ValueError("lambdas must be a nonempty 1-d array")
        if np.any(lam <= 0):
            raise ValueError("lambdas must be positive")
        if lam.size > 1 and np.any(np.diff(lam) >= 0):
            raise ValueError("lambdas must be strictly descending")
        if self.betas.shape[0] != lam.size:
            raise ValueError("betas must have one row per lambda")


def lambda_max(data):
    """Smallest penalty at which the lasso solution is exactly zero.

    Under this objective scaling that is 2 * max_j |x_j' y|.
    """
    return 2.0 * float(np.max(np.abs(data.X.T @ data.y)))


def lambda_grid(data, num=DEFAULT_N_LAMBDAS, min_ratio=DEFAULT_LAMBDA_MIN_RATIO):
    """Log-spaced descending grid from lambda_max down to min_ratio * lambda_max."""
    lmax = lambda_max(data)
    if lmax <= 0:
        raise ValueError("X'y is identically zero; no meaningful grid")
    if num < 1:
        raise ValueError("num must be >= 1")
    if num == 1:
        return np.array([lmax])
    return np.geomspace(lmax, lmax * min_ratio, num)


def _solve(X, y, thresholds, beta0, tol, max_iter, trace=None):
    p = X.shape[1]
    col_ss = np.einsum("ij,ij->j", X, X)
    beta = np.zeros(p) if beta0 is None else np.array(beta0, dtype=float)
    if trace is None:
        trace = np.empty(max_iter)
    sweeps, ok = cd_solve(
        np.ascontiguousarray(X), np.ascontiguousarray(y, dtype=float),
        thresholds, beta, col_ss, tol, max_iter, trace,
    )
    return beta, int(sweeps), bool(ok)


def lasso_fit(data, lam, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, beta0=None):
    """Cyclic coordinate descent for the L1 penalized objective.

    Parameters
    ----------
    data : Dataset
    lam : float
        Positive penalty on sum |b_j|.
    tol : float
        Converged when the largest coefficient change in a sweep is below tol.
    max_iter : int
        Sweep budget; on exhaustion the best iterate is returned with a warning.
    beta0 : (p,) array, optional
        Warm start.

    Returns
    -------
    (p,) ndarray
    """
    if lam <= 0:
        raise ValueError("lam must be positive")
    if tol <= 0:
        raise ValueError("tol must be positive")
    thresholds = np.full(data.p, lam / 2.0)
    beta, _, ok = _solve(data.X, data.y, thresholds, beta0, tol, max_iter)
    if not ok:
        warnings.warn(f"lasso_fit: no convergence after {max_iter} sweeps")
    return beta


def adaptive_lasso_fit(data, lam, init, gamma=1.0, tol=DEFAULT_TOL,
                       max_iter=DEFAULT_MAX_ITER, eps_w=0.0, beta0=None):
    """L1 fit with per-coordinate penalties lam / max(|init_j|**gamma, eps_w).

    With eps_w = 0 a coordinate whose initial estimate is exactly zero gets
    an infinite penalty and is excluded from the model. Unit weights (all
    |init_j|**gamma == 1) reproduce ``lasso_fit`` exactly.
    """
    if lam <= 0:
        raise ValueError("lam must be positive")
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    init = np.asarray(init, dtype=float)
    if init.shape != (data.p,):
        raise ValueError("init must have one entry per coefficient")
    if not np.isfinite(init).all():
        raise ValueError("init must be finite")
    w = np.maximum(np.abs(init) ** gamma, eps_w)
    with np.errstate(divide="ignore"):
        thresholds = np.where(w > 0, lam / (2.0 * w), np.inf)
    beta, _, ok = _solve(data.X, data.y, thresholds, beta0, tol, max_iter)
    if not ok:
        warnings.warn(f"adaptive_lasso_fit: no convergence after {max_iter} sweeps")
    return beta


def adaptive_init(data, ridge=None):
    """Initial estimator feeding the adaptive weights.

    Least squares when p < n; otherwise a ridge fit whose penalty defaults
    to 1e-3 times lambda_max, small enough to barely bias the large
    coefficients but keep the system well posed.
    """
    X, y = data.X, data.y
    if data.p < data.n and ridge is None:
        return np.linalg.lstsq(X, y, rcond=None)[0]
    r = 1e-3 * lambda_max(data) if ridge is None else ridge
    G = X.T @ X + r * np.eye(data.p)
    return np.linalg.solve(G, X.T @ y)


def lasso_path(data, lambdas=None, weights=None, tol=DEFAULT_TOL,
               max_iter=DEFAULT_MAX_ITER):
    """Warm-started fits along a descending penalty grid.

    Parameters
    ----------
    data : Dataset
    lambdas : descending positive grid, optional
        Defaults to ``lambda_grid(data)``.
    weights : (p,) array, optional
        Per-coordinate penalty divisors (adaptive path); entries equal to
        zero exclude the coordinate.

    Returns
    -------
    LassoPath
    """
    if lambdas is None:
        lambdas = lambda_grid(data)
    lambdas = np.asarray(lambdas, dtype=float)
    m, p = lambdas.size, data.p
    if weights is None:
        w = np.ones(p)
    else:
        w = np.asarray(weights, dtype=float)
        if w.shape != (p,) or np.any(w < 0) or not np.isfinite(w).all():
            raise ValueError("weights must be finite, nonnegative, length p")
    betas = np.zeros((m, p))
    n_iter = np.zeros(m, dtype=int)
    converged = np.zeros(m, dtype=bool)
    beta = np.zeros(p)
    trace = np.empty(max_iter)
    X = np.ascontiguousarray(data.X)
    y = np.ascontiguousarray(data.y, dtype=float)
    col_ss = np.einsum("ij,ij->j", X, X)
    for k, lam in enumerate(lambdas):
        with np.errstate(divide="ignore"):
            thresholds = np.where(w > 0, lam / (2.0 * w), np.inf)
        sweeps, ok = cd_solve(X, y, thresholds, beta, col_ss, tol, max_iter, trace)
        betas[k] = beta
        n_iter[k] = sweeps
        converged[k] = ok
    if not converged.all():
        bad = int(np.sum(~converged))
        warnings.warn(f"lasso_path: {bad} of {m} grid points did not converge")
    return LassoPath(lambdas=lambdas, betas=betas, n_iter=n_iter, converged=converged)


def bic_select(data, path, zero_tol=DEFAULT_ZERO_TOL):
    """Pick the penalty minimizing n*log(RSS/n) + |active| * log(n).

    Ties go to the larger penalty (sparser model). A residual sum that is
    zero to machine precision counts as a perfect fit: such entries beat
    every imperfect fit and compete among themselves on sparsity, then
    penalty size.

    Returns
    -------
    (lambda_star, beta_star)
    """
    lambdas = path.lambdas
    if lambdas.size == 0:
        raise ValueError("empty path")
    n = data.n
    yss = float(data.y @ data.y)
    perfect_cut = 1e-24 * max(1.0, yss)
    best_key = None
    best_k = None
    for k in range(lambdas.size):
        resid = data.y - data.X @ path.betas[k]
        rss = float(resid @ resid)
        df = int(np.sum(np.abs(path.betas[k]) > zero_tol))
        if rss <= perfect_cut:
            key = (0, df, k)  # perfect fits first, sparsest wins, then larger lambda
        else:
            bic = n * np.log(rss / n) + df * np.log(n)
            key = (1, bic, k)  # grid order breaks exact ties toward larger lambda
        if best_key is None or key < best_key:
            best_key, best_k = key, k
    return float(lambdas[best_k]), path.betas[best_k].copy()


def active_set(beta, zero_tol=DEFAULT_ZERO_TOL):
    """Indices j with |beta_j| strictly above zero_tol."""
    if zero_tol < 0:
        raise ValueError("zero_tol must be nonnegative")
    return np.where(np.abs(np.asarray(beta)) > zero_tol)[0]


def restricted_ls(data, s):
    """Least squares refit on the columns in s, zero elsewhere.

    Uses the minimum-norm solution when the submatrix is rank deficient,
    which coincides with applying a generalized inverse to the normal
    equations.

    Returns
    -------
    (p,) ndarray supported on s
    """
    s = np.asarray(s, dtype=int)
    if s.size == 0:
        raise ValueError("s must be nonempty")
    if s.size and (s.min() < 0 or s.max() >= data.p):
        raise ValueError("s contains indices outside range(p)")
    if s.size > data.n:
        raise ValueError(f"|s|={s.size} exceeds the sample count n={data.n}")
    coef = np.linalg.lstsq(data.X[:, s], data.y, rcond=None)[0]
    beta = np.zeros(data.p)
    beta[s] = coef
    return beta


def kkt_violation(data, beta, lam, weights=None, zero_tol=DEFAULT_ZERO_TOL):
    """Worst stationarity violation of a candidate L1 solution.

    For active coordinates the gradient condition is
    x_j'(y - X b) = (lam / (2 w_j)) * sign(b_j); for inactive ones
    |x_j'(y - X b)| <= lam / (2 w_j). Returns the largest violation over
    all coordinates, scaled by the column norms. A correct solution gives
    a value near zero.
    """
    X, y = data.X, data.y
    w = np.ones(data.p) if weights is None else np.asarray(weights, dtype=float)
    grad = X.T @ (y - X @ beta)
    with np.errstate(divide="ignore"):
        t = np.where(w > 0, lam / (2.0 * w), np.inf)
    col_norm = np.sqrt(np.einsum("ij,ij->j", X, X))
    scale = np.maximum(col_norm, 1.0)
    active = np.abs(beta) > zero_tol
    viol = np.zeros(data.p)
    act = active & np.isfinite(t)
    viol[act] = np.abs(grad[act] - t[act] * np.sign(beta[act]))
    inact = ~active & np.isfinite(t)
    viol[inact] = np.maximum(np.abs(grad[inact]) - t[inact], 0.0)
    return float(np.max(viol / scale))
