"""Classifiers, linear estimators and shot-count sweeps."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import isotonic_regression

MAX_SHOTS = 2 ** 30
MAX_TRIALS = 10 ** 6


def stream(seed: int, *keys: int) -> np.random.Generator:
    """Independent PCG64 stream for (seed, keys...).

    Streams come from ``SeedSequence(seed, spawn_key=keys)``, so the result
    depends only on the master seed and the stream index, never on the order
    in which streams are requested or on the number of workers.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in keys))))


def shots_grid(min_exp: int = 1, max_exp: int = 22, per_octave: int = 1) -> np.ndarray:
    """Log2-spaced integer shot counts from 2**min_exp to 2**max_exp."""
    exps = np.arange(min_exp * per_octave, max_exp * per_octave + 1) / per_octave
    return np.unique(np.round(2.0 ** exps).astype(np.int64))


@dataclass(frozen=True)
class ClassModel:
    """Per-class outcome tables; row 0 is class A."""

    tables: np.ndarray
    labels: tuple[str, ...] = ("A", "B")

    def __post_init__(self):
        tables = np.atleast_2d(np.asarray(self.tables, dtype=float))
        if np.any(np.abs(tables.sum(axis=1) - 1) > 1e-10):
            raise ValueError("each class table must sum to 1")
        if len(self.labels) != len(tables):
            raise ValueError("one label per class table")
        object.__setattr__(self, "tables", tables)


def fisher_discriminant(mean_a: float, mean_b: float, var_a: float, var_b: float) -> float:
    pooled = 0.5 * (var_a + var_b)
    if pooled <= 0:
        raise ValueError("pooled variance must be positive")
    return (mean_a - mean_b) ** 2 / pooled


def _nearest(distances: np.ndarray) -> np.ndarray:
    # class B only when strictly closer, so exact ties go to A
    d = np.atleast_2d(distances)
    scale = np.maximum(np.abs(d).max(axis=-1), 1e-300)
    return np.where(d[..., 1] < d[..., 0] - 1e-12 * scale, 1, 0)


def mle_distances(observed: np.ndarray, model: ClassModel) -> np.ndarray:
    diff = np.asarray(observed, dtype=float)[..., None, :] - model.tables
    return np.sum(diff ** 2, axis=-1)


def tvd(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    return 0.5 * np.sum(np.abs(np.asarray(p) - np.asarray(q)), axis=-1)


def tvd_distances(observed: np.ndarray, model: ClassModel) -> np.ndarray:
    return tvd(np.asarray(observed, dtype=float)[..., None, :], model.tables)


def mle_classify(observed, model: ClassModel):
    """Nearest class centroid in Euclidean distance; ties go to class A.

    Returns a label for one observation or an index array for a batch.
    """
    idx = _nearest(mle_distances(observed, model))
    return model.labels[int(idx[0])] if np.ndim(observed) == 1 else idx


def tvd_classify(observed, model: ClassModel):
    """Class with the smaller total variation distance; ties go to class A."""
    idx = _nearest(tvd_distances(observed, model))
    return model.labels[int(idx[0])] if np.ndim(observed) == 1 else idx


CLASSIFIERS: dict[str, Callable] = {"mle": mle_distances, "tvd": tvd_distances}


@dataclass(frozen=True)
class LinearEstimator:
    weights: np.ndarray
    bias: float
    rank: int = 0
    degenerate: bool = False

    def predict(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float) @ self.weights + self.bias


def train_linear_estimator(features, targets, rcond: float = 1e-10) -> LinearEstimator:
    """Least-squares fit of targets on features plus an unpenalised bias.

    Features are centred before solving, so a rank-deficient design gets the
    minimum-norm weight vector; such fits are flagged ``degenerate``.
    Singular values below ``rcond`` times the largest count as zero, which
    keeps rounding noise in exact outcome tables out of the weights.
    """
    x = np.atleast_2d(np.asarray(features, dtype=float))
    y = np.asarray(targets, dtype=float)
    if len(x) != len(y):
        raise ValueError("features and targets differ in length")
    if len(y) < 2:
        raise ValueError("need at least two training pairs")
    x_mean, y_mean = x.mean(axis=0), y.mean()
    w, _, rank, _ = np.linalg.lstsq(x - x_mean, y - y_mean, rcond=rcond)
    return LinearEstimator(w, float(y_mean - x_mean @ w), int(rank), bool(rank < x.shape[1]))


@dataclass
class SweepResult:
    """Metric per shot count for one configuration (accuracy or MSE)."""

    shots: np.ndarray
    metric: np.ndarray
    stderr: np.ndarray
    trials: int
    kind: str = "accuracy"
    meta: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ShotsEstimate:
    shots: float
    low: float
    high: float
    censored: bool

    def as_dict(self) -> dict:
        return {"shots": self.shots, "low": self.low, "high": self.high, "censored": self.censored}


def _sample_freqs(table: np.ndarray, shots: int, n: int, rng: np.random.Generator) -> np.ndarray:
    return rng.multinomial(shots, table, size=n) / shots


def accuracy_sweep(true_tables: np.ndarray, model: ClassModel, shots: Sequence[int], trials: int,
                   seed: int, key: Sequence[int] = (), classifier: str = "mle") -> SweepResult:
    """Classification accuracy against shot count with balanced trials.

    Each trial draws multinomial counts from one class's true outcome table;
    the stream for grid point ``i`` and class ``c`` is ``stream(seed, *key, i, c)``.
    """
    _check_sweep(shots, trials)
    dist_fn = CLASSIFIERS[classifier]
    true_tables = np.asarray(true_tables, dtype=float)
    half = trials // 2
    acc, se = [], []
    for i, s in enumerate(shots):
        correct = 0
        for c in range(2):
            freqs = _sample_freqs(true_tables[c], int(s), half, stream(seed, *key, i, c))
            correct += int(np.sum(_nearest(dist_fn(freqs, model)) == c))
        a = correct / (2 * half)
        acc.append(a)
        se.append(np.sqrt(max(a * (1 - a), 0.25 / (2 * half)) / (2 * half)))
    return SweepResult(np.asarray(shots), np.array(acc), np.array(se), 2 * half, "accuracy")


def mse_sweep(tables: np.ndarray, targets: np.ndarray, estimator: LinearEstimator, shots: Sequence[int],
              trials: int, seed: int, key: Sequence[int] = ()) -> SweepResult:
    """Mean squared error of a linear estimator against shot count.

    Each trial picks a target uniformly from ``targets`` and draws counts from
    its outcome table in ``tables``.
    """
    _check_sweep(shots, trials)
    tables = np.asarray(tables, dtype=float)
    targets = np.asarray(targets, dtype=float)
    mse, se = [], []
    for i, s in enumerate(shots):
        rng = stream(seed, *key, i)
        pick = rng.integers(len(targets), size=trials)
        # group by target so each multinomial call uses one table
        order = np.argsort(pick, kind="stable")
        sq = np.empty(trials)
        bounds = np.searchsorted(pick[order], np.arange(len(targets) + 1))
        for t in range(len(targets)):
            lo, hi = bounds[t], bounds[t + 1]
            if hi > lo:
                freqs = _sample_freqs(tables[t], int(s), hi - lo, rng)
                sq[lo:hi] = (estimator.predict(freqs) - targets[t]) ** 2
        mse.append(sq.mean())
        se.append(sq.std(ddof=1) / np.sqrt(trials))
    return SweepResult(np.asarray(shots), np.array(mse), np.array(se), trials, "mse")


def _check_sweep(shots, trials):
    if len(shots) == 0:
        raise ValueError("shots grid is empty")
    if trials < 100:
        raise ValueError("need at least 100 trials per point")
    if trials > MAX_TRIALS or max(shots) > MAX_SHOTS:
        from .qsim import ResourceCapError
        raise ResourceCapError(f"trials <= {MAX_TRIALS} and shots <= {MAX_SHOTS} required")


def _crossing(shots: np.ndarray, metric: np.ndarray, target: float) -> float | None:
    above = np.nonzero(metric >= target)[0]
    if above.size == 0:
        return None
    i = int(above[0])
    if i == 0:
        return float(shots[0])
    m0, m1 = metric[i - 1], metric[i]
    l0, l1 = np.log(shots[i - 1]), np.log(shots[i])
    frac = 1.0 if m1 == m0 else (target - m0) / (m1 - m0)
    return float(np.exp(l0 + frac * (l1 - l0)))


def shots_to_target(sweep: SweepResult, target: float, mode: str | None = None) -> ShotsEstimate:
    """Shots at which the metric first reaches ``target``.

    The metric is made monotone in shots by isotonic regression, then
    interpolated linearly in log(shots). ``mode`` is ``accuracy`` (metric >=
    target) or ``mse`` (metric <= target). The low/high band repeats the
    crossing with the metric shifted by one standard error. A target that is
    never reached is censored at the largest grid point.
    """
    mode = mode or sweep.kind
    shots = np.asarray(sweep.shots, dtype=float)
    sign = 1.0 if mode == "accuracy" else -1.0
    weights = 1.0 / np.maximum(sweep.stderr, 1e-12) ** 2
    fitted = isotonic_regression(sign * sweep.metric, weights=weights, increasing=True).x
    se = np.asarray(sweep.stderr)
    central = _crossing(shots, fitted, sign * target)
    if central is None:
        return ShotsEstimate(float("nan"), float(shots[-1]), float("inf"), True)
    low = _crossing(shots, fitted + se, sign * target)
    high = _crossing(shots, fitted - se, sign * target)
    return ShotsEstimate(central, low if low is not None else central,
                         high if high is not None else float("inf"), False)
