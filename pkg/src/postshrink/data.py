"""Data containers, CSV ingestion, and synthetic designs.

Everything downstream assumes centered data: each covariate column and the
response have mean zero, so no intercept appears in any model. The three
synthetic coefficient layouts mix a handful of strong signals with a block
of weak but nonzero signals and a sparse remainder; they are the standard
stress cases for post-selection shrinkage.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DataError",
    "Dataset",
    "TrueModel",
    "ThresholdSpec",
    "center",
    "load_csv",
    "simulate_case",
    "expand_threshold_design",
    "spawn_rng",
]

CASE_MINIMUM_P = {1: 13, 2: 53, 3: 24}


class DataError(ValueError):
    """Raised for unusable input data (missing files, bad cells, bad columns)."""


def spawn_rng(seed, *key):
    """Generator derived from a base seed and an integer key path.

    Distinct key paths give statistically independent streams, so parallel
    callers can derive per-replication generators without coordination.
    """
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


@dataclass(frozen=True)
class Dataset:
    """Centered regression data.

    Attributes
    ----------
    X : (n, p) ndarray
        Design matrix with column means zero.
    y : (n,) ndarray
        Response with mean zero.
    column_names : list of str, optional
        Length-p labels for the columns of X.
    """

    X: np.ndarray
    y: np.ndarray
    column_names: list = None

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float).ravel()
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        if X.ndim != 2:
            raise ValueError("X must be a 2-d array")
        n, p = X.shape
        if n < 2 or p < 1:
            raise ValueError(f"need n >= 2 and p >= 1, got n={n}, p={p}")
        if y.shape[0] != n:
            raise ValueError(f"X has {n} rows but y has {y.shape[0]} entries")
        if not (np.isfinite(X).all() and np.isfinite(y).all()):
            raise ValueError("non-finite entries in X or y")
        scale = 1.0 + max(np.abs(X).max(initial=0.0), np.abs(y).max(initial=0.0))
        if np.abs(X.mean(axis=0)).max() > 1e-10 * scale:
            raise ValueError("columns of X are not centered")
        if abs(y.mean()) > 1e-10 * scale:
            raise ValueError("y is not centered")
        if self.column_names is not None and len(self.column_names) != p:
            raise ValueError("column_names length does not match p")

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def p(self):
        return self.X.shape[1]


@dataclass(frozen=True)
class TrueModel:
    """Ground truth for synthetic data: coefficients, partition, noise level.

    The index sets split the coefficient positions into strong signals (s1),
    weak nonzero signals (s2), and exact zeros (s3); they are disjoint and
    cover ``range(p)``.
    """

    beta_star: np.ndarray
    s1: np.ndarray
    s2: np.ndarray
    s3: np.ndarray
    sigma: float

    def __post_init__(self):
        beta = np.asarray(self.beta_star, dtype=float)
        object.__setattr__(self, "beta_star", beta)
        for name in ("s1", "s2", "s3"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=int))
        p = beta.shape[0]
        parts = [self.s1, self.s2, self.s3]
        allidx = np.concatenate(parts)
        if len(np.unique(allidx)) != len(allidx):
            raise ValueError("s1, s2, s3 must be disjoint")
        if sorted(allidx.tolist()) != list(range(p)):
            raise ValueError("s1, s2, s3 must cover all coefficient positions")
        if self.s3.size and np.any(beta[self.s3] != 0.0):
            raise ValueError("beta_star must vanish on s3")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")


@dataclass(frozen=True)
class ThresholdSpec:
    """Threshold variable q and cutpoint tau for regime expansion."""

    q: np.ndarray
    tau: float

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float).ravel()
        object.__setattr__(self, "q", q)
        if not np.isfinite(q).all() or not math.isfinite(self.tau):
            raise ValueError("threshold variable and tau must be finite")


def center(raw_X, raw_y, column_names=None):
    """Subtract column means from X and the mean from y.

    Parameters
    ----------
    raw_X : (n, p) array_like
    raw_y : (n,) array_like
    column_names : list of str, optional

    Returns
    -------
    Dataset

    Centering is idempotent: applying it to already-centered data returns
    the same values up to roundoff. A constant column maps to all zeros.
    """
    X = np.asarray(raw_X, dtype=float)
    y = np.asarray(raw_y, dtype=float).ravel()
    if X.ndim != 2:
        raise ValueError("raw_X must be a 2-d array")
    if X.shape[0] != y.shape[0]:
        raise ValueError(
            f"raw_X has {X.shape[0]} rows but raw_y has {y.shape[0]} entries"
        )
    if not (np.isfinite(X).all() and np.isfinite(y).all()):
        raise ValueError("non-finite entries in raw input")
    Xc = X - X.mean(axis=0)
    Xc -= Xc.mean(axis=0)  # second pass keeps means at roundoff for any scale
    yc = y - y.mean()
    yc -= yc.mean()
    return Dataset(Xc, yc, column_names=column_names)


def load_csv(path, response_column):
    """Read a comma-separated file and return centered data.

    The file must have a header row; every retained cell must parse as a
    decimal number (scientific notation allowed). Rows containing an empty
    cell are dropped (listwise deletion) and counted.

    Parameters
    ----------
    path : str or Path
    response_column : str
        Header name of the response; all other columns become covariates.

    Returns
    -------
    (Dataset, int)
        The centered data and the number of dropped rows.
    """
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path} is empty") from None
        header = [h.strip() for h in header]
        if response_column not in header:
            raise DataError(
                f"response column {response_column!r} not found; "
                f"available columns: {', '.join(header)}"
            )
        y_col = header.index(response_column)
        rows = []
        dropped = 0
        for lineno, cells in enumerate(reader, start=2):
            if len(cells) != len(header):
                raise DataError(
                    f"{path}:{lineno}: expected {len(header)} cells, got {len(cells)}"
                )
            if any(c.strip() == "" for c in cells):
                dropped += 1
                continue
            parsed = []
            for j, cell in enumerate(cells):
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise DataError(
                        f"{path}:{lineno}: column {header[j]!r}: "
                        f"cannot parse {cell.strip()!r} as a number"
                    ) from None
            rows.append(parsed)
    if len(rows) < 2:
        raise DataError(f"{path}: fewer than 2 usable rows")
    arr = np.asarray(rows, dtype=float)
    y = arr[:, y_col]
    X = np.delete(arr, y_col, axis=1)
    names = [h for i, h in enumerate(header) if i != y_col]
    return center(X, y, column_names=names), dropped


def _case_layout(case_id, p):
    """Coefficient magnitudes and partition for one synthetic case."""
    if case_id == 1:
        mags = np.concatenate([np.full(3, 5.0), np.full(10, 0.5)])
        p2 = 10
    elif case_id == 2:
        mags = np.concatenate([np.full(3, 10.0), np.full(50, 0.1)])
        p2 = 50
    elif case_id == 3:
        p2 = p - 23
        mags = np.concatenate([np.full(3, 10.0), np.full(p2, 0.1)])
    else:
        raise ValueError(f"case_id must be 1, 2 or 3, got {case_id!r}")
    s1 = np.arange(3)
    s2 = np.arange(3, 3 + p2)
    s3 = np.arange(3 + p2, p)
    return mags, s1, s2, s3


def simulate_case(case_id, n, p, sigma=1.0, seed=0):
    """Generate one synthetic replication.

    Covariates are independent draws of (squared standard normal) plus an
    independent standard normal, so each raw column has mean 1 and variance
    3. The response is the linear signal plus ``sigma`` times standard
    normal noise; covariates and response are then centered. Nonzero
    coefficients get an independent random sign each call.

    Case layouts (before signs):

    * case 1: three coefficients of 5, ten of 0.5, zeros elsewhere
    * case 2: three of 10, fifty of 0.1, zeros elsewhere
    * case 3: three of 10, zeros on the last twenty positions, 0.1 on the rest

    Parameters
    ----------
    case_id : {1, 2, 3}
    n, p : int
    sigma : float
        Noise standard deviation (must be positive).
    seed : int
        Identical (case_id, n, p, sigma, seed) gives identical output.

    Returns
    -------
    (Dataset, TrueModel)
    """
    if case_id not in CASE_MINIMUM_P:
        raise ValueError(f"case_id must be 1, 2 or 3, got {case_id!r}")
    if p < CASE_MINIMUM_P[case_id]:
        raise ValueError(
            f"case {case_id} needs p >= {CASE_MINIMUM_P[case_id]}, got p={p}"
        )
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    mags, s1, s2, s3 = _case_layout(case_id, p)
    rng = spawn_rng(seed)
    X = rng.standard_normal((n, p)) ** 2 + rng.standard_normal((n, p))
    beta = np.zeros(p)
    k = mags.shape[0]
    signs = rng.integers(0, 2, size=k) * 2.0 - 1.0
    beta[:k] = mags * signs
    y = X @ beta + sigma * rng.standard_normal(n)
    data = center(X, y)
    truth = TrueModel(beta_star=beta, s1=s1, s2=s2, s3=s3, sigma=float(sigma))
    return data, truth


def expand_threshold_design(base_X, spec):
    """Augment a design with a regime intercept and regime interactions.

    Returns the n x (2k + 2) matrix ``[1, base_X, I, I * base_X]`` where
    ``I`` is the column of strict indicators ``q_i < tau``. Row i of the
    output depends only on row i of the inputs. The two intercept-like
    columns become zero or mean-free after centering, which is how the
    regime offsets are absorbed downstream.
    """
    X = np.asarray(base_X, dtype=float)
    if X.ndim != 2:
        raise ValueError("base_X must be a 2-d array")
    n, k = X.shape
    if spec.q.shape[0] != n:
        raise ValueError(
            f"threshold variable has {spec.q.shape[0]} entries but base_X has {n} rows"
        )
    if not np.isfinite(X).all():
        raise ValueError("non-finite entries in base_X")
    ind = (spec.q < spec.tau).astype(float)
    ones = np.ones((n, 1))
    return np.hstack([ones, X, ind[:, None], ind[:, None] * X])
