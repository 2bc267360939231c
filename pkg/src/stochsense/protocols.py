"""Sensing protocols: per-shot outcome probabilities, averages over the
parameter distribution, and shot simulation.

Closed forms follow the halved phase convention exp(-i theta sigma_z / 2).
A protocol declared with the integer convention (|1> picks up exp(-i theta))
sees the same physics with theta negated, which is how it is evaluated.

Outcome ``1`` of the Bell and GHZ readout qubit is the cos^2 branch, and bit 1
of a product-protocol qubit has probability cos^2((theta + nu)/2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import qsim
from .qsim import EigenvalueMap

KINDS = ("product", "bell", "ghz", "multicopy-spatial", "multicopy-sequential")
CONVENTIONS = ("halved", "integer")


class ConvergenceError(RuntimeError):
    """Monte Carlo averaging did not meet its stopping rule."""


@dataclass(frozen=True)
class Protocol:
    kind: str
    n_qubits: int
    nu: np.ndarray = None
    decode_offset: float = np.pi / 2
    phase_convention: str = "halved"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown protocol kind {self.kind!r}; expected one of {KINDS}")
        if self.phase_convention not in CONVENTIONS:
            raise ValueError(f"unknown phase convention {self.phase_convention!r}")
        if self.kind == "bell" and self.n_qubits != 2:
            raise ValueError("the Bell protocol needs exactly two qubits")
        if self.kind.startswith("multicopy") and self.n_qubits != 2:
            raise ValueError("multicopy protocols sense two parameters")
        if self.kind in ("product", "multicopy-spatial", "multicopy-sequential"):
            qsim.check_qubits(self.n_qubits)
        nu = np.zeros(self.n_qubits) if self.nu is None else np.asarray(self.nu, dtype=float)
        if nu.shape != (self.n_qubits,):
            raise ValueError(f"nu must have length {self.n_qubits}")
        object.__setattr__(self, "nu", nu)

    @property
    def n_params(self) -> int:
        return self.n_qubits

    @property
    def measured_qubits(self) -> tuple[int, ...]:
        if self.kind == "product":
            return tuple(range(self.n_qubits))
        return (0,)

    @property
    def n_outcomes(self) -> int:
        return 2 ** len(self.measured_qubits)

    def outcome_labels(self) -> list[str]:
        return qsim.bit_labels(len(self.measured_qubits))


def product_protocol(n: int, nu=None, phase_convention: str = "halved") -> Protocol:
    return Protocol("product", n, nu, phase_convention=phase_convention)


def bell_protocol(nu=(0.0, np.pi / 2), phase_convention: str = "halved") -> Protocol:
    return Protocol("bell", 2, nu, phase_convention=phase_convention)


def ghz_protocol(n: int, nu=None, decode_offset: float = np.pi / 2, phase_convention: str = "halved") -> Protocol:
    return Protocol("ghz", n, nu, decode_offset, phase_convention)


def _two_outcome(p1: np.ndarray) -> np.ndarray:
    return np.stack([1.0 - p1, p1], axis=-1)


def _halved_theta(protocol: Protocol, theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if theta.shape[-1] != protocol.n_params:
        raise ValueError(f"theta has {theta.shape[-1]} entries, protocol senses {protocol.n_params}")
    return -theta if protocol.phase_convention == "integer" else theta


def per_shot_probs(protocol: Protocol, theta) -> np.ndarray:
    """Outcome distribution for one parameter vector, or a batch of shape (m, n)."""
    t = _halved_theta(protocol, theta)
    x = t + protocol.nu
    if protocol.kind == "ghz":
        return _two_outcome(0.5 * (1.0 + np.cos(x.sum(axis=-1) - protocol.decode_offset)))
    if protocol.kind == "bell":
        return _two_outcome(np.cos(0.5 * (x[..., 0] - x[..., 1])) ** 2)
    if protocol.kind == "product":
        c2 = np.cos(0.5 * x) ** 2
        bits = qsim.all_bitstrings(protocol.n_qubits)
        # p(b) = prod_j (c2_j if b_j else 1 - c2_j)
        factors = np.where(bits, c2[..., None, :], 1.0 - c2[..., None, :])
        return np.prod(factors, axis=-1)
    return _multicopy_probs(protocol.kind, t, protocol.nu)


# Dense equivalents of the closed forms, used for validation and for exact averages.

def dense_form(protocol: Protocol) -> tuple[np.ndarray, EigenvalueMap, np.ndarray, tuple[int, ...]]:
    """(probe, halved eigenvalue map, decoder, measured qubits) reproducing ``per_shot_probs``.

    The decoder includes the offsets ``nu`` as z-rotations, then the inverse
    encoder, then an X relabel so that outcome 1 is the cos^2 branch.
    """
    n = protocol.n_qubits
    if protocol.kind not in ("product", "bell", "ghz"):
        raise ValueError(f"no dense form for {protocol.kind}")
    offsets = qsim.kron_all([qsim.rz(v) for v in protocol.nu])
    if protocol.kind == "product":
        probe = qsim.plus_state(n)
        decoder = qsim.kron_all([qsim.X @ qsim.H] * n) @ offsets
    elif protocol.kind == "bell":
        probe = qsim.bell_state()
        decoder = qsim.embed(qsim.X, 0, 2) @ qsim.bell_encoder().conj().T @ offsets
    else:
        probe = qsim.ghz_state(n)
        readout = qsim.embed(qsim.X @ qsim.H @ qsim.rz(-protocol.decode_offset), 0, n)
        decoder = readout @ qsim.cnot_chain(n).conj().T @ offsets
    eigmap = qsim.halved_map(n)
    if protocol.phase_convention == "integer":
        eigmap = qsim.local_map(n)
    return probe, eigmap, decoder, protocol.measured_qubits


def dense_per_shot_probs(protocol: Protocol, theta) -> np.ndarray:
    probe, eigmap, decoder, measured = dense_form(protocol)
    state = qsim.apply_phase(probe, np.asarray(theta, dtype=float), eigmap)
    return qsim.decode_probs(state, decoder, measured)


def exact_averaged_probs(protocol: Protocol, dist) -> np.ndarray:
    """Averaged outcome distribution from the closed-form characteristic function."""
    if protocol.kind == "ghz" and protocol.n_qubits > 12:
        raise qsim.ResourceCapError("exact GHZ averaging is limited to 12 qubits")
    probe, eigmap, decoder, measured = dense_form(protocol)
    rho = qsim.averaged_density(probe, dist, eigmap, method="exact")
    out = decoder @ rho @ decoder.conj().T
    probs = np.clip(np.real(np.diag(out)), 0.0, None)
    return qsim.marginalize(probs / probs.sum(), measured)


def averaged_probs(protocol: Protocol, dist, rng: np.random.Generator, convergence_ratio: float = 5000.0,
                   batch: int = 10_000, max_batches: int = 2000, return_stderr: bool = False):
    """Batch Monte Carlo average of ``per_shot_probs`` over the distribution.

    Stops once (smallest probability) / (largest change of the running mean
    between consecutive batches) exceeds ``convergence_ratio``. Raises
    :class:`ConvergenceError` after ``max_batches`` batches.
    """
    if convergence_ratio <= 1:
        raise ValueError("convergence_ratio must exceed 1")
    total = np.zeros(protocol.n_outcomes)
    total_sq = np.zeros(protocol.n_outcomes)
    prev = None
    count = 0
    for _ in range(max_batches):
        p = per_shot_probs(protocol, dist.sample(rng, batch))
        total += p.sum(axis=0)
        total_sq += (p ** 2).sum(axis=0)
        count += batch
        mean = total / count
        if prev is not None:
            change = np.max(np.abs(mean - prev))
            positive = mean[mean > 0]
            floor = positive.min() if positive.size else 0.0
            if change == 0.0 or floor / change > convergence_ratio:
                break
        prev = mean
    else:
        raise ConvergenceError(
            f"averaged_probs did not converge after {max_batches} batches of {batch} samples")
    if not return_stderr:
        return mean
    var = np.clip(total_sq / count - mean ** 2, 0.0, None)
    return mean, np.sqrt(var / count)


def sample_outcomes(probs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One categorical draw per row of ``probs``."""
    cdf = np.cumsum(probs, axis=-1)
    u = rng.random(probs.shape[:-1]) * cdf[..., -1]
    return np.minimum((u[..., None] >= cdf).sum(axis=-1), probs.shape[-1] - 1)


def simulate_shots(protocol: Protocol, dist, shots: int, rng: np.random.Generator,
                   n_runs: int | None = None) -> np.ndarray:
    """Outcome counts where every shot senses a fresh parameter draw.

    Returns a count vector, or an (n_runs, n_outcomes) array of counts.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    runs = 1 if n_runs is None else n_runs
    theta = dist.sample(rng, runs * shots)
    outcomes = sample_outcomes(per_shot_probs(protocol, theta), rng).reshape(runs, shots)
    counts = np.zeros((runs, protocol.n_outcomes), dtype=np.int64)
    for k in range(protocol.n_outcomes):
        counts[:, k] = (outcomes == k).sum(axis=1)
    return counts[0] if n_runs is None else counts


# Offsets

def sensitivity_at_zero(protocol: Protocol, n: int, step: float = 1e-4) -> float:
    """max_b |d p_b / dC| at C = 0 for the constrained-uniform family, by central difference."""
    from .distributions import ConstrainedUniform
    hi = exact_averaged_probs(protocol, ConstrainedUniform(n, step))
    lo = exact_averaged_probs(protocol, ConstrainedUniform(n, -step))
    return float(np.max(np.abs(hi - lo)) / (2 * step))


def ghz_offset_and_product_offsets(n: int, task: str = "classify", tol: float = 1e-8) -> tuple[float, np.ndarray]:
    """GHZ decode offset and product-protocol offsets for sensing near C = 0.

    Every product qubit is read out at -pi/2, giving (1 + sin theta)/2. An
    extra pi/2 is added on the last qubit when, without it, the averaged
    outcome table has no first-order dependence on C.
    """
    if task not in ("classify", "estimate"):
        raise ValueError(f"unknown task {task!r}")
    nu = np.full(n, -np.pi / 2)
    if n <= 10 and sensitivity_at_zero(product_protocol(n, nu), n) < tol:
        nu[-1] += np.pi / 2
    elif n > 10 and n % 2 == 0:
        # beyond dense averaging the closed form cos(C + sum nu) decides
        nu[-1] += np.pi / 2
    return np.pi / 2, nu


# Two-qubit Gaussian closed forms

def _gauss_parts(mean, sigma2, sigma_corr2):
    t1, t2 = float(mean[0]), float(mean[1])
    sp2, sm2 = sigma2 + sigma_corr2, sigma2 - sigma_corr2
    return t1, t2, sp2, sm2


def gaussian_product_probs(mean, sigma2: float, sigma_corr2: float, nu=(0.0, 0.0)) -> np.ndarray:
    """Averaged two-qubit product-protocol probabilities in index order (00, 01, 10, 11)."""
    t1, t2, sp2, sm2 = _gauss_parts(mean, sigma2, sigma_corr2)
    n1, n2 = nu

    def p11(a, b):
        return (0.25 + 0.25 * np.exp(-sigma2 / 2) * (np.cos(t1 + a) + np.cos(t2 + b))
                + 0.125 * np.exp(-sp2) * np.cos(t1 + t2 + a + b)
                + 0.125 * np.exp(-sm2) * np.cos(t1 - t2 + a - b))

    return np.array([p11(n1 + np.pi, n2 + np.pi), p11(n1 + np.pi, n2), p11(n1, n2 + np.pi), p11(n1, n2)])


def gaussian_local_marginals(mean, sigma2: float, nu=(0.0, 0.0)) -> np.ndarray:
    """Single-qubit excited probabilities of the product protocol."""
    return np.array([0.5 + 0.5 * np.exp(-sigma2 / 2) * np.cos(mean[j] + nu[j]) for j in range(2)])


def gaussian_bell_prob(mean, sigma2: float, sigma_corr2: float, nu=(0.0, np.pi / 2)) -> float:
    """Averaged excited probability of the Bell readout qubit."""
    t1, t2, _, sm2 = _gauss_parts(mean, sigma2, sigma_corr2)
    return float(0.5 + 0.5 * np.exp(-sm2) * np.cos(t1 - t2 + nu[0] - nu[1]))


@dataclass(frozen=True)
class EstimatorMoments:
    mean: float
    var: float


def estimator_moments(name: str, mean, sigma2: float, sigma_corr2: float, shots: int) -> EstimatorMoments:
    """Mean and variance of the linear estimators at their operating points.

    ``entangled``: y = x_1 of the Bell readout with nu = (0, pi/2).
    ``unentangled-2q``: y = x_11 + x_00 of the product protocol with nu = (0, pi/2).
    ``unentangled-1q``: y = x_1 - x_2 from local marginals with nu = (-pi/2, -pi/2).
    Variances are exact multinomial values for ``shots`` shots.
    """
    if name == "entangled":
        p = gaussian_bell_prob(mean, sigma2, sigma_corr2, (0.0, np.pi / 2))
        return EstimatorMoments(p, p * (1 - p) / shots)
    if name == "unentangled-2q":
        probs = gaussian_product_probs(mean, sigma2, sigma_corr2, (0.0, np.pi / 2))
        p = probs[0] + probs[3]
        return EstimatorMoments(p, p * (1 - p) / shots)
    if name == "unentangled-1q":
        probs = gaussian_product_probs(mean, sigma2, sigma_corr2, (-np.pi / 2, -np.pi / 2))
        w = np.array([0.0, -1.0, 1.0, 0.0])  # x_1 - x_2 = x_10 - x_01
        m = float(w @ probs)
        return EstimatorMoments(m, float((w ** 2 @ probs) - m ** 2) / shots)
    raise ValueError(f"unknown estimator {name!r}")


# Multi-copy protocols

def _multicopy_probs(kind: str, theta: np.ndarray, nu: np.ndarray) -> np.ndarray:
    theta = np.asarray(theta, dtype=float) + nu
    single = theta.ndim == 1
    t = np.atleast_2d(theta)
    if kind == "multicopy-spatial":
        probe = (qsim.basis_state([1, 0, 0, 0]) + qsim.basis_state([0, 1, 0, 1])) / np.sqrt(2)
        target = (qsim.basis_state([1, 0, 0, 0]) + 1j * qsim.basis_state([0, 1, 0, 1])) / np.sqrt(2)
        state = qsim.apply_phase(probe, t, _SPATIAL_MAP)
    else:
        probe = (qsim.basis_state([1, 0]) + qsim.basis_state([0, 1])) / np.sqrt(2)
        target = (qsim.basis_state([0, 0]) + 1j * qsim.basis_state([0, 1])) / np.sqrt(2)
        halved = qsim.halved_map(2)
        state = qsim.apply_phase(probe, t, halved)
        state = state @ _SWAP_00_10.T
        state = qsim.apply_phase(state, t, halved)
    p = np.abs(state @ target.conj()) ** 2
    out = _two_outcome(p)
    return out[0] if single else out


_SPATIAL_MAP = EigenvalueMap(
    4, np.stack([0.5 - qsim.all_bitstrings(4)[:, 0] + 0.5 - qsim.all_bitstrings(4)[:, 2],
                 0.5 - qsim.all_bitstrings(4)[:, 1] + 0.5 - qsim.all_bitstrings(4)[:, 3]], axis=1),
    "multicopy")

# |00><10| + |10><00| plus identity on |01>, |11>
_SWAP_00_10 = np.eye(4, dtype=complex)[[2, 1, 0, 3]]


def multicopy_theta(theta, phi):
    """Single-copy parameters (2 theta, theta + phi)."""
    theta = np.asarray(theta, dtype=float)
    return np.stack([2 * theta, theta + phi], axis=-1)


def multicopy_protocols(phi: float, n_grid: int = 16) -> dict[str, float]:
    """Excited probability of the two-copy protocols, averaged over a uniform theta grid."""
    from .distributions import PhaseLine
    line = PhaseLine([0.0, phi], [2.0, 1.0])
    thetas = line.grid(n_grid)
    return {kind: float(per_shot_probs(Protocol(kind, 2), thetas)[:, 1].mean())
            for kind in ("multicopy-spatial", "multicopy-sequential")}


def single_copy_density(probe: np.ndarray, phi: float, n_grid: int = 16) -> np.ndarray:
    """Averaged two-qubit density for one copy of (2 theta, theta + phi), theta uniform."""
    from .distributions import PhaseLine
    return qsim.averaged_density(probe, PhaseLine([0.0, phi], [2.0, 1.0]), qsim.halved_map(2),
                                 n_grid=n_grid, method="grid")
