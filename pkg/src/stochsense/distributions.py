"""Distributions of the stochastic sensing parameters.

Every family samples parameter vectors ``theta`` from an explicit
``numpy.random.Generator``. Families with a closed form also expose the
characteristic function

    chi(k) = E[exp(-i k . theta)]

which is the sign used throughout the package.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2 * np.pi


class NoAnalyticForm(TypeError):
    """The distribution has no closed-form characteristic function."""


def _sinc(x: np.ndarray) -> np.ndarray:
    """sin(x)/x with the removable singularity filled in."""
    x = np.asarray(x, dtype=float)
    out = np.ones_like(x)
    nz = x != 0
    out[nz] = np.sin(x[nz]) / x[nz]
    return out


def _uniform_factor(m: np.ndarray, start: float, width: float) -> np.ndarray:
    """E[exp(-i m t)] for t ~ U[start, start + width].

    Integer multiples of a full period give exact zeros so that sparsity
    patterns survive floating point.
    """
    m = np.asarray(m, dtype=float)
    half = 0.5 * m * width
    val = np.exp(-1j * m * (start + 0.5 * width)) * _sinc(half)
    cycles = m * width / TWO_PI
    exact_zero = (np.abs(cycles - np.round(cycles)) < 1e-12) & (np.round(cycles) != 0)
    return np.where(exact_zero, 0.0, val)


@dataclass(frozen=True)
class PointMass:
    theta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "theta", np.atleast_1d(np.asarray(self.theta, dtype=float)))

    @property
    def n(self) -> int:
        return self.theta.size

    def sample(self, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
        if size is None:
            return self.theta.copy()
        return np.broadcast_to(self.theta, (size, self.n)).copy()

    def chi(self, k) -> np.ndarray:
        k = np.asarray(k, dtype=float)
        return np.exp(-1j * (k @ self.theta))


@dataclass(frozen=True)
class Gaussian:
    """Multivariate normal parameters with mean ``mean`` and covariance ``cov``."""

    mean: np.ndarray
    cov: np.ndarray
    _chol: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        cov = np.atleast_2d(np.asarray(self.cov, dtype=float))
        if cov.shape != (mean.size, mean.size):
            raise ValueError(f"covariance shape {cov.shape} does not match mean length {mean.size}")
        if not np.allclose(cov, cov.T, atol=1e-12):
            raise ValueError("covariance must be symmetric")
        evals, evecs = np.linalg.eigh(cov)
        if evals.min() < -1e-12:
            raise ValueError(f"covariance is not positive semidefinite (min eigenvalue {evals.min():.3g})")
        # eigen-factor instead of Cholesky so singular covariances still sample
        chol = evecs * np.sqrt(np.clip(evals, 0.0, None))
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "_chol", chol)

    @classmethod
    def correlated(cls, mean, sigma2: float, sigma_corr2: float) -> "Gaussian":
        """Two parameters with equal variances ``sigma2`` and covariance ``sigma_corr2``."""
        if sigma2 < 0:
            raise ValueError("sigma2 must be nonnegative")
        if abs(sigma_corr2) > sigma2:
            raise ValueError(f"|sigma_corr2| = {abs(sigma_corr2)} exceeds sigma2 = {sigma2}")
        return cls(mean, [[sigma2, sigma_corr2], [sigma_corr2, sigma2]])

    @property
    def n(self) -> int:
        return self.mean.size

    @property
    def sigma_plus2(self) -> float:
        return float(self.cov[0, 0] + self.cov[0, 1])

    @property
    def sigma_minus2(self) -> float:
        return float(self.cov[0, 0] - self.cov[0, 1])

    def sample(self, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
        shape = (self.n,) if size is None else (size, self.n)
        z = rng.standard_normal(shape)
        return self.mean + z @ self._chol.T

    def chi(self, k) -> np.ndarray:
        k = np.asarray(k, dtype=float)
        quad = np.einsum("...i,ij,...j->...", k, self.cov, k)
        return np.exp(-1j * (k @ self.mean) - 0.5 * quad)


@dataclass(frozen=True)
class ConstrainedUniform:
    """Free uniform parameters with the last one fixed by a linear constraint.

    The first ``n - 1`` parameters are uniform on ``[start, start + width]`` and

        theta_n = (C + eta - sum_{j<n} alpha_j theta_j) / alpha_n,

    with ``eta ~ N(0, noise_sigma**2)``. ``theta_n`` is not wrapped.
    """

    n: int
    c: float
    alpha: np.ndarray | None = None
    noise_sigma: float = 0.0
    start: float = 0.0
    width: float = TWO_PI

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one parameter")
        alpha = np.ones(self.n) if self.alpha is None else np.asarray(self.alpha, dtype=float)
        if alpha.shape != (self.n,):
            raise ValueError(f"alpha must have length {self.n}")
        if np.any(np.abs(alpha) > 1) or alpha[-1] == 0:
            raise ValueError("weights must lie in [-1, 1] with a nonzero last weight")
        if self.noise_sigma < 0 or self.width <= 0:
            raise ValueError("noise_sigma must be >= 0 and width > 0")
        object.__setattr__(self, "alpha", alpha)

    def sample(self, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
        m = 1 if size is None else size
        free = rng.uniform(self.start, self.start + self.width, size=(m, self.n - 1))
        eta = rng.normal(0.0, self.noise_sigma, size=m) if self.noise_sigma > 0 else 0.0
        last = (self.c + eta - free @ self.alpha[:-1]) / self.alpha[-1]
        out = np.column_stack([free, last])
        return out[0] if size is None else out

    def chi(self, k) -> np.ndarray:
        k = np.asarray(k, dtype=float)
        ratio = k[..., -1] / self.alpha[-1]
        m = k[..., :-1] - ratio[..., None] * self.alpha[:-1]
        val = np.exp(-1j * ratio * self.c - 0.5 * (ratio * self.noise_sigma) ** 2)
        return val * np.prod(_uniform_factor(m, self.start, self.width), axis=-1)


@dataclass(frozen=True)
class PhaseLine:
    """theta = offset + t * direction with t uniform over one full period.

    Supports deterministic grid averaging, which is exact for integer
    frequencies along ``direction``.
    """

    offset: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "offset", np.asarray(self.offset, dtype=float))
        object.__setattr__(self, "direction", np.asarray(self.direction, dtype=float))

    @property
    def n(self) -> int:
        return self.offset.size

    def sample(self, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
        t = rng.uniform(0.0, TWO_PI, size=size)
        return self.offset + np.multiply.outer(t, self.direction)

    def grid(self, n_grid: int) -> np.ndarray:
        t = TWO_PI * np.arange(n_grid) / n_grid
        return self.offset + np.multiply.outer(t, self.direction)

    def chi(self, k) -> np.ndarray:
        k = np.asarray(k, dtype=float)
        return np.exp(-1j * (k @ self.offset)) * _uniform_factor(k @ self.direction, 0.0, TWO_PI)


@dataclass(frozen=True)
class PhaseEnsemble:
    """Empirical distribution over a fixed set of parameter vectors (resampled uniformly)."""

    thetas: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "thetas", np.atleast_2d(np.asarray(self.thetas, dtype=float)))

    @property
    def n(self) -> int:
        return self.thetas.shape[1]

    def sample(self, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
        idx = rng.integers(len(self.thetas), size=size)
        return self.thetas[idx]


def sample(dist, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    return dist.sample(rng, size)


def characteristic_function(dist, k) -> np.ndarray:
    """Closed-form chi(k) = E[exp(-i k . theta)] for families that have one."""
    fn = getattr(dist, "chi", None)
    if fn is None:
        raise NoAnalyticForm(f"{type(dist).__name__} has no closed-form characteristic function")
    return fn(k)


def characteristic_function_mc(dist, k, n_samples: int, rng: np.random.Generator,
                               batch: int = 200_000, return_stderr: bool = False):
    """Monte Carlo estimate of chi(k), optionally with its standard error (per real/imag part)."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    k = np.asarray(k, dtype=float)
    if isinstance(dist, PhaseEnsemble) and n_samples >= len(dist.thetas):
        vals = np.exp(-1j * (dist.thetas @ k))
        est = vals.mean()
        se = np.std(vals.real) / np.sqrt(len(vals)) + 1j * np.std(vals.imag) / np.sqrt(len(vals))
        return (est, se) if return_stderr else est
    s1 = 0.0 + 0.0j
    s_re2 = s_im2 = 0.0
    done = 0
    while done < n_samples:
        m = min(batch, n_samples - done)
        vals = np.exp(-1j * (dist.sample(rng, m) @ k))
        s1 += vals.sum()
        s_re2 += np.sum(vals.real ** 2)
        s_im2 += np.sum(vals.imag ** 2)
        done += m
    est = s1 / n_samples
    if not return_stderr:
        return est
    var_re = max(s_re2 / n_samples - est.real ** 2, 0.0)
    var_im = max(s_im2 / n_samples - est.imag ** 2, 0.0)
    se = np.sqrt(var_re / n_samples) + 1j * np.sqrt(var_im / n_samples)
    return est, se


def gaussian_class_pair(sigma: float, sigma_corr2: float, c: float) -> tuple[Gaussian, Gaussian]:
    """Two-parameter classes with means (+-c/2, -+c/2), so theta_1 - theta_2 has mean +-c."""
    a = Gaussian.correlated([c / 2, -c / 2], sigma ** 2, sigma_corr2)
    b = Gaussian.correlated([-c / 2, c / 2], sigma ** 2, sigma_corr2)
    return a, b


def constrained_class_pair(n: int, c: float, **kwargs) -> tuple[ConstrainedUniform, ConstrainedUniform]:
    """Constrained-uniform classes with constraint values +c and -c."""
    return ConstrainedUniform(n, c, **kwargs), ConstrainedUniform(n, -c, **kwargs)
