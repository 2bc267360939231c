"""Classical XXZ ring sampled at fixed total magnetisation.

Spins are unit vectors written as (f(s) cos phi, f(s) sin phi, s) with
f(s) = sqrt(1 - s^2). The energy of a periodic ring is

    E = -J sum_j [ f(s_j) f(s_{j+1}) cos(phi_{j+1} - phi_j) + anisotropy * s_j s_{j+1} ].

The Metropolis move picks two distinct spins, jitters both azimuths and
transfers ``ds`` of z-magnetisation from one to the other, so sum_j s_j is
conserved exactly (up to rounding).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numba
import numpy as np

from .distributions import PhaseEnsemble


@dataclass(frozen=True)
class XXZParams:
    n: int
    magnetization: float
    beta: float
    coupling: float = 1.0
    anisotropy: float = 0.75

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("the ring needs at least two spins")
        if abs(self.magnetization) > self.n:
            raise ValueError(f"|magnetization| = {abs(self.magnetization)} exceeds n = {self.n}")
        if self.beta < 0:
            raise ValueError("beta must be nonnegative")


@dataclass(frozen=True)
class MetropolisSettings:
    n_samples: int = 1000
    tau_therm: int = 10_000
    tau_sweep: int = 500
    delta_s: float = 0.2
    delta_phi: float = np.pi / 4

    def __post_init__(self):
        if min(self.n_samples, self.tau_sweep, self.delta_s, self.delta_phi) <= 0 or self.tau_therm < 0:
            raise ValueError("Metropolis settings must be positive")


@dataclass
class Chain:
    """Emitted configurations of one Metropolis run."""

    steps: np.ndarray
    s: np.ndarray
    phi: np.ndarray
    energy: np.ndarray
    accepted: int
    proposed: int

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / max(self.proposed, 1)

    def thetas(self, scale: float = np.pi) -> np.ndarray:
        return spins_to_phases(self.s, scale)

    def to_csv(self, path) -> None:
        n = self.s.shape[1]
        header = (["step"] + [f"s_{j + 1}" for j in range(n)]
                  + [f"phi_{j + 1} [rad]" for j in range(n)] + ["energy [J]"])
        with open(Path(path), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for i in range(len(self.steps)):
                w.writerow([int(self.steps[i])] + [repr(float(v)) for v in self.s[i]]
                           + [repr(float(v)) for v in self.phi[i]] + [repr(float(self.energy[i]))])


def energy(s, phi, params: XXZParams) -> float:
    s = np.asarray(s, dtype=float)
    phi = np.asarray(phi, dtype=float)
    f = np.sqrt(np.clip(1.0 - s ** 2, 0.0, None))
    s_next, f_next, phi_next = np.roll(s, -1), np.roll(f, -1), np.roll(phi, -1)
    bonds = f * f_next * np.cos(phi_next - phi) + params.anisotropy * s * s_next
    return float(-params.coupling * bonds.sum())


def spins_to_phases(s, scale: float = np.pi) -> np.ndarray:
    return scale * np.asarray(s, dtype=float)


@numba.njit(cache=True)
def _bond(s, phi, b, n, anisotropy):
    c = (b + 1) % n
    fb = np.sqrt(max(1.0 - s[b] * s[b], 0.0))
    fc = np.sqrt(max(1.0 - s[c] * s[c], 0.0))
    return fb * fc * np.cos(phi[c] - phi[b]) + anisotropy * s[b] * s[c]


@numba.njit(cache=True)
def _local(s, phi, bonds, n, anisotropy):
    total = 0.0
    for b in bonds:
        total += _bond(s, phi, b, n, anisotropy)
    return total


@numba.njit(cache=True, nogil=True)
def _run_block(s, phi, js, ks, dphi_j, dphi_k, ds, r, beta, coupling, anisotropy,
               offset, tau_sweep, out_s, out_phi):
    """Advance the chain over one block of proposals.

    Step ``offset + t + 1`` that is a multiple of ``tau_sweep`` copies the
    state into row ``(offset + t + 1) // tau_sweep - 1`` of the outputs.
    """
    n = s.shape[0]
    accepted = 0
    bonds = np.empty(4, dtype=np.int64)
    for t in range(js.shape[0]):
        j = js[t]
        k = ks[t]
        new_sj = s[j] + ds[t]
        new_sk = s[k] - ds[t]
        if -1.0 <= new_sj <= 1.0 and -1.0 <= new_sk <= 1.0:
            # bonds touching j or k, each counted once
            cand = ((j - 1) % n, j, (k - 1) % n, k)
            m = 0
            for b in cand:
                seen = False
                for q in range(m):
                    if bonds[q] == b:
                        seen = True
                if not seen:
                    bonds[m] = b
                    m += 1
            used = bonds[:m]
            before = _local(s, phi, used, n, anisotropy)
            old_sj, old_sk, old_pj, old_pk = s[j], s[k], phi[j], phi[k]
            s[j] = new_sj
            s[k] = new_sk
            phi[j] = (old_pj + dphi_j[t]) % (2 * np.pi)
            phi[k] = (old_pk + dphi_k[t]) % (2 * np.pi)
            delta_e = -coupling * (_local(s, phi, used, n, anisotropy) - before)
            if delta_e < 0 or r[t] <= np.exp(-beta * delta_e):
                accepted += 1
            else:
                s[j], s[k], phi[j], phi[k] = old_sj, old_sk, old_pj, old_pk
        step = offset + t + 1
        if tau_sweep > 0 and step % tau_sweep == 0:
            row = step // tau_sweep - 1
            out_s[row, :] = s
            out_phi[row, :] = phi
    return accepted


_CHUNK = 1 << 18


def _advance(s, phi, steps: int, params: XXZParams, settings: MetropolisSettings, rng: np.random.Generator,
             out_s=None, out_phi=None) -> int:
    """Run ``steps`` proposals in chunks; record every ``tau_sweep`` steps when outputs are given."""
    n = params.n
    record = out_s is not None
    if not record:
        out_s = out_phi = np.empty((0, n))
    accepted = 0
    done = 0
    while done < steps:
        m = min(_CHUNK, steps - done)
        js = rng.integers(n, size=m)
        ks = (js + 1 + rng.integers(n - 1, size=m)) % n
        dphi_j = rng.uniform(-settings.delta_phi, settings.delta_phi, size=m)
        dphi_k = rng.uniform(-settings.delta_phi, settings.delta_phi, size=m)
        ds = rng.uniform(-settings.delta_s, settings.delta_s, size=m)
        r = rng.random(m)
        accepted += int(_run_block(s, phi, js, ks, dphi_j, dphi_k, ds, r,
                                   float(params.beta), float(params.coupling), float(params.anisotropy),
                                   done, settings.tau_sweep if record else 0, out_s, out_phi))
        done += m
    return accepted


def metropolis_sample(params: XXZParams, settings: MetropolisSettings, rng: np.random.Generator) -> Chain:
    """Run one constrained Metropolis chain.

    Starts from s_j = M/n with uniform azimuths, thermalises for
    ``tau_therm`` steps, then emits a configuration every ``tau_sweep`` steps.
    Proposals that would push any s outside [-1, 1] are rejected.
    """
    n = params.n
    s = np.full(n, params.magnetization / n)
    phi = rng.uniform(0.0, 2 * np.pi, size=n)
    accepted = _advance(s, phi, settings.tau_therm, params, settings, rng)
    m = settings.n_samples
    out_s = np.empty((m, n))
    out_phi = np.empty((m, n))
    accepted += _advance(s, phi, settings.tau_sweep * m, params, settings, rng, out_s, out_phi)
    energies = np.array([energy(a, b, params) for a, b in zip(out_s, out_phi)])
    steps = settings.tau_therm + settings.tau_sweep * np.arange(1, m + 1)
    proposed = settings.tau_therm + settings.tau_sweep * m
    return Chain(steps, out_s, out_phi, energies, accepted, proposed)


@dataclass(frozen=True)
class XXZGibbs:
    """Parameter distribution of phases coupling * s_j from a Gibbs ensemble."""

    params: XXZParams
    settings: MetropolisSettings
    coupling: float = np.pi

    @property
    def n(self) -> int:
        return self.params.n

    def sample(self, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
        m = 1 if size is None else size
        chain = metropolis_sample(self.params, MetropolisSettings(
            m, self.settings.tau_therm, self.settings.tau_sweep, self.settings.delta_s, self.settings.delta_phi), rng)
        thetas = chain.thetas(self.coupling)
        return thetas[0] if size is None else thetas

    def ensemble(self, rng: np.random.Generator) -> PhaseEnsemble:
        return PhaseEnsemble(metropolis_sample(self.params, self.settings, rng).thetas(self.coupling))
