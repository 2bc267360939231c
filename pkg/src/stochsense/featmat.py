"""Characteristic feature matrices and separation values.

For two parameter distributions A and B and a sensing map q, the feature
matrix is

    F[a, b] = chi_A(q(a) - q(b)) - chi_B(q(a) - q(b)),

and a probe ``rho`` measured with projector ``O`` separates the classes by

    Delta = Tr(O avg_A(rho)) - Tr(O avg_B(rho)) = sum_{a,b} rho[a, b] F[a, b] O[b, a].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.special import comb
from scipy.stats import norm

from . import qsim
from .qsim import EigenvalueMap, ResourceCapError

MAX_FEATURE_QUBITS = 10
MAX_SEARCH_QUBITS = 6


@dataclass(frozen=True)
class FeatureMatrix:
    entries: np.ndarray
    eigmap: EigenvalueMap

    @property
    def n_qubits(self) -> int:
        return self.eigmap.n_qubits

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


@dataclass(frozen=True)
class ProbeObservablePair:
    rho: np.ndarray
    projector: np.ndarray

    def __post_init__(self):
        o = self.projector
        if not np.allclose(o @ o, o, atol=1e-10) or not np.allclose(o, o.conj().T, atol=1e-10):
            raise ValueError("observable must be a Hermitian projector")


def build_feature_matrix(dist_a, dist_b, eigmap: EigenvalueMap) -> FeatureMatrix:
    if eigmap.n_qubits > MAX_FEATURE_QUBITS:
        raise ResourceCapError(f"feature matrices are limited to {MAX_FEATURE_QUBITS} qubits")
    k = eigmap.differences()
    return FeatureMatrix(dist_a.chi(k) - dist_b.chi(k), eigmap)


def empirical_feature_matrix(thetas_a: np.ndarray, thetas_b: np.ndarray, eigmap: EigenvalueMap) -> FeatureMatrix:
    """Feature matrix from two sample sets (e.g. Gibbs ensembles)."""
    if eigmap.n_qubits > MAX_FEATURE_QUBITS:
        raise ResourceCapError(f"feature matrices are limited to {MAX_FEATURE_QUBITS} qubits")

    def chi_matrix(thetas):
        ph = np.exp(-1j * (np.asarray(thetas) @ eigmap.table.T))
        return ph.T @ ph.conj() / len(ph)

    return FeatureMatrix(chi_matrix(thetas_a) - chi_matrix(thetas_b), eigmap)


def _as_density(probe: np.ndarray) -> np.ndarray:
    probe = np.asarray(probe, dtype=complex)
    return np.outer(probe, probe.conj()) if probe.ndim == 1 else probe


def separation_value(rho, feature, projector, tol: float = 1e-10) -> float:
    """Difference of the projector's expectation between the two classes."""
    f = np.asarray(feature)
    val = np.sum(_as_density(rho) * f * np.asarray(projector).T)
    if abs(val.imag) > tol * max(1.0, abs(val.real)):
        raise ValueError(f"separation value has imaginary part {val.imag:.3g}; check phase conventions")
    return float(val.real)


def pair_separation(pair: ProbeObservablePair, feature) -> float:
    return separation_value(pair.rho, feature, pair.projector)


def optimal_sparse_pair(feature, rel_tol: float = 1e-9) -> tuple[ProbeObservablePair, float]:
    """Two-state probe and projector built on the largest feature-matrix entry.

    For the dominant pair (a, b) with phase phi = arg F[a, b], the probe is
    (|a> + e^{i phi}|b>)/sqrt(2) and the projector is onto (|a> + |b>)/sqrt(2),
    giving Delta = |F[a, b]| / 2, the largest value any state supported on
    the two levels can reach.
    """
    f = np.asarray(feature)
    mags = np.abs(np.triu(f, k=1))
    flat = np.argsort(mags, axis=None)[::-1]
    a, b = np.unravel_index(flat[0], mags.shape)
    top = mags[a, b]
    if top == 0:
        raise ValueError("feature matrix is zero; no dominant pair")
    if len(flat) > 1:
        a2, b2 = np.unravel_index(flat[1], mags.shape)
        if mags[a2, b2] > top * (1 - rel_tol):
            raise ValueError("feature matrix has no single dominant entry pair")
    phi = np.angle(f[a, b])
    dim = f.shape[0]
    probe = np.zeros(dim, dtype=complex)
    probe[a], probe[b] = 1, np.exp(1j * phi)
    probe /= np.sqrt(2)
    meas = np.zeros(dim, dtype=complex)
    meas[a], meas[b] = 1, 1
    meas /= np.sqrt(2)
    pair = ProbeObservablePair(np.outer(probe, probe.conj()), np.outer(meas, meas.conj()))
    return pair, pair_separation(pair, f)


def _qubit_basis(polar: float, azimuth: float) -> np.ndarray:
    """Unitary whose columns are an orthonormal single-qubit basis."""
    c, s = np.cos(polar / 2), np.sin(polar / 2)
    e = np.exp(1j * azimuth)
    return np.array([[c, -s * np.conj(e)], [s * e, c]])


@dataclass(frozen=True)
class ProductSearchResult:
    value: float
    pair: ProbeObservablePair
    params: np.ndarray
    lower_bound_only: bool = True


def _product_objective(params: np.ndarray, f: np.ndarray, n: int):
    probe_angles = params[: 2 * n].reshape(n, 2)
    basis_angles = params[2 * n:].reshape(n, 2)
    psi = qsim.product_state(probe_angles[:, 0], probe_angles[:, 1])
    w = qsim.kron_all([_qubit_basis(*ang) for ang in basis_angles])
    m = np.outer(psi, psi.conj()) * f
    contrib = np.real(np.einsum("ak,ab,bk->k", w.conj(), m, w))
    return contrib, psi, w


def best_product_separation(feature, n_starts: int = 24, seed: int = 0, grid_points: int = 4) -> ProductSearchResult:
    """Largest |Delta| found over product probes and product-basis projectors.

    For a fixed product basis the best projector keeps every outcome whose
    contribution has the majority sign, so the objective is
    (1/2) sum_k |contribution_k|. Starts are the best points of a coarse grid
    over equatorial settings plus random angles, refined by Nelder-Mead.
    The result is a lower bound on the true optimum.
    """
    f = np.asarray(feature)
    n = int(np.log2(f.shape[0]))
    if n > MAX_SEARCH_QUBITS:
        raise ResourceCapError(f"product search is limited to {MAX_SEARCH_QUBITS} qubits")
    if not np.any(f):
        zero = np.zeros((2 ** n, 2 ** n), dtype=complex)
        zero[0, 0] = 1
        return ProductSearchResult(0.0, ProbeObservablePair(zero, zero), np.zeros(4 * n))

    def score(x):
        return -0.5 * np.sum(np.abs(_product_objective(x, f, n)[0]))

    rng = np.random.default_rng(seed)
    az = 2 * np.pi * np.arange(grid_points) / grid_points
    starts = []
    # equatorial probes and bases with azimuths shared across qubits except the first
    for a0 in az:
        for a1 in az:
            for b0 in az:
                x = np.zeros(4 * n)
                x[0:2 * n:2] = np.pi / 2
                x[1:2 * n:2] = a1
                x[1] = a0
                x[2 * n::2] = np.pi / 2
                x[2 * n + 1::2] = b0
                starts.append(x)
    starts.sort(key=score)
    starts = starts[: max(1, n_starts // 2)]
    starts += [rng.uniform(0, 2 * np.pi, 4 * n) for _ in range(n_starts - len(starts))]

    best_x, best_val = None, 0.0
    for x0 in starts:
        res = minimize(score, x0, method="Nelder-Mead",
                       options={"maxiter": 4000 * n, "xatol": 1e-9, "fatol": 1e-13})
        if -res.fun > best_val:
            best_val, best_x = -res.fun, res.x
    contrib, psi, w = _product_objective(best_x, f, n)
    keep = contrib > 0
    if contrib[keep].sum() < -contrib[~keep].sum():
        keep = ~keep
    proj = (w[:, keep] @ w[:, keep].conj().T)
    pair = ProbeObservablePair(np.outer(psi, psi.conj()), proj)
    return ProductSearchResult(abs(pair_separation(pair, f)), pair, best_x)


def hamming_distances(n: int) -> np.ndarray:
    bits = qsim.all_bitstrings(n)
    return (bits[:, None, :] != bits[None, :, :]).sum(axis=-1)


def shot_lower_bound(delta: float, confidence: float = 0.9) -> float:
    """Shots needed to reach the given confidence: z^2 / (4 Delta^2)."""
    z = norm.ppf(confidence)
    return float(z ** 2 / (4 * delta ** 2)) if delta != 0 else float("inf")


def theorem_bound_report(feature, delta: float | None = None) -> dict:
    """Per-Hamming-distance statistics of |F| and the product-state bounds built from them."""
    f = np.asarray(feature)
    n = int(np.log2(f.shape[0]))
    d = hamming_distances(n)
    rows = []
    for dist in range(1, n + 1):
        mags = np.abs(f[d == dist])
        rms = float(np.sqrt(np.mean(mags ** 2)))
        mean = float(np.mean(mags))
        binom = float(comb(n, dist, exact=True))
        rows.append({"d": dist, "pairs": int(mags.size), "f_rms": rms, "f_mean_abs": mean,
                     "rms_bound": rms * np.sqrt(binom), "mean_bound": binom * mean})
    report = {
        "n_qubits": n,
        "by_distance": rows,
        "rms_bound_total": float(sum(r["rms_bound"] for r in rows)),
        "mean_bound_total": float(sum(r["mean_bound"] for r in rows)),
    }
    if delta is not None:
        report["delta"] = float(delta)
        report["shots_90"] = shot_lower_bound(delta)
    return report


def parity_product_pair(n: int, phase: float = 0.0) -> ProbeObservablePair:
    """|+>^n probe with an even-parity projector in a rotated product basis.

    Every qubit is read in the basis (|0> +- |1>)/sqrt(2) except the first,
    whose basis carries the azimuth ``phase``. Against a feature matrix whose
    only entries sit at (0^n, 1^n) this gives 2^{-n} Re(F[0^n, 1^n] e^{i phase}).
    """
    qsim.check_qubits(n)
    basis = [_qubit_basis(np.pi / 2, phase)] + [_qubit_basis(np.pi / 2, 0.0)] * (n - 1)
    w = qsim.kron_all(basis)
    even = qsim.all_bitstrings(n).sum(axis=1) % 2 == 0
    proj = w[:, even] @ w[:, even].conj().T
    probe = qsim.plus_state(n)
    return ProbeObservablePair(np.outer(probe, probe.conj()), proj)


def export_rows(feature) -> list[list]:
    """(a, b, Re F, Im F) rows in index order."""
    f = np.asarray(feature)
    dim = f.shape[0]
    return [[a, b, float(f[a, b].real), float(f[a, b].imag)] for a in range(dim) for b in range(dim)]
