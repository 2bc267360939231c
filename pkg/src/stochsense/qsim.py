"""Dense state-vector simulation for small qubit registers.

Basis convention: qubit 1 is the most significant bit, so the bitstring
``b_1 b_2 ... b_n`` has index ``sum_j b_j 2**(n - j)``.

Sensing unitaries are diagonal and parameterised by an :class:`EigenvalueMap`:
the basis state ``|a>`` picks up the phase ``exp(-i q(a) . theta)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Callable, Sequence

import numpy as np

MAX_QUBITS = 14


class ResourceCapError(ValueError):
    """Raised when a request exceeds a hard size limit."""


def check_qubits(n: int, cap: int = MAX_QUBITS) -> int:
    n = int(n)
    if n < 1:
        raise ValueError(f"need at least one qubit, got {n}")
    if n > cap:
        raise ResourceCapError(f"{n} qubits exceeds the dense-simulation cap of {cap}")
    return n


def basis_index(bits: Sequence[int]) -> int:
    """Index of a bitstring, first bit most significant."""
    idx = 0
    for b in bits:
        idx = (idx << 1) | (int(b) & 1)
    return idx


def index_bits(index: int, n: int) -> np.ndarray:
    """Bit vector of ``index`` on ``n`` qubits, first bit most significant."""
    return np.array([(index >> (n - 1 - j)) & 1 for j in range(n)], dtype=np.int64)


def all_bitstrings(n: int) -> np.ndarray:
    """Array of shape (2**n, n) whose row ``i`` is ``index_bits(i, n)``."""
    idx = np.arange(2 ** n)[:, None]
    shifts = np.arange(n - 1, -1, -1)[None, :]
    return (idx >> shifts) & 1


def bit_labels(n: int) -> list[str]:
    return ["".join(str(b) for b in row) for row in all_bitstrings(n)]


@dataclass(frozen=True)
class EigenvalueMap:
    """Eigenvalue vectors q(a) of the commuting sensing generators.

    ``table[a]`` is q(a), one entry per sensed parameter.
    """

    n_qubits: int
    table: np.ndarray = field(repr=False)
    name: str = "custom"

    def __post_init__(self):
        table = np.asarray(self.table, dtype=float)
        if table.ndim != 2 or table.shape[0] != 2 ** self.n_qubits:
            raise ValueError(f"eigenvalue table must have shape (2**n, p), got {table.shape}")
        object.__setattr__(self, "table", table)

    @property
    def n_params(self) -> int:
        return self.table.shape[1]

    def __call__(self, a: int) -> np.ndarray:
        return self.table[a]

    def differences(self) -> np.ndarray:
        """Array k[a, b] = q(a) - q(b) of shape (2**n, 2**n, p)."""
        return self.table[:, None, :] - self.table[None, :, :]

    @classmethod
    def from_function(cls, n: int, fn: Callable[[np.ndarray], Sequence[float]], name: str = "custom"):
        bits = all_bitstrings(n)
        return cls(n, np.array([fn(row) for row in bits], dtype=float), name)


def local_map(n: int) -> EigenvalueMap:
    """Integer convention: q(a) is the bit vector, so |1> on qubit j gets exp(-i theta_j)."""
    check_qubits(n)
    return EigenvalueMap(n, all_bitstrings(n).astype(float), "local")


def halved_map(n: int) -> EigenvalueMap:
    """Convention of exp(-i theta sigma_z / 2) per qubit: q_j(a) = 1/2 - a_j."""
    check_qubits(n)
    return EigenvalueMap(n, 0.5 - all_bitstrings(n), "halved")


def entangling_zz_map() -> EigenvalueMap:
    """Two parameters on two qubits: q(a) = (a_1 a_2, a_2)."""
    return EigenvalueMap.from_function(2, lambda b: (b[0] * b[1], b[1]), "entangling-zz")


def apply_phase(state: np.ndarray, theta: np.ndarray, eigmap: EigenvalueMap) -> np.ndarray:
    """Apply the diagonal sensing unitary to a state vector.

    ``theta`` may be a single parameter vector or a batch of shape (m, p); a
    batch returns an (m, 2**n) array of states.
    """
    theta = np.asarray(theta, dtype=float)
    phases = np.exp(-1j * (theta @ eigmap.table.T))
    return phases * state


def apply_phase_density(rho: np.ndarray, theta: np.ndarray, eigmap: EigenvalueMap) -> np.ndarray:
    phases = np.exp(-1j * (eigmap.table @ np.asarray(theta, dtype=float)))
    return phases[:, None] * rho * phases.conj()[None, :]


# Gates and states

H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)


def rz(angle: float) -> np.ndarray:
    """exp(-i angle sigma_z / 2)."""
    return np.diag([np.exp(-0.5j * angle), np.exp(0.5j * angle)])


def phase_gate(angle: float) -> np.ndarray:
    return np.diag([1.0, np.exp(1j * angle)])


def kron_all(mats: Sequence[np.ndarray]) -> np.ndarray:
    return reduce(np.kron, mats)


def embed(gate: np.ndarray, qubit: int, n: int) -> np.ndarray:
    """Single-qubit ``gate`` acting on ``qubit`` (0-based, 0 is most significant)."""
    mats = [I2] * n
    mats[qubit] = gate
    return kron_all(mats)


def cnot(control: int, target: int, n: int) -> np.ndarray:
    dim = 2 ** n
    bits = all_bitstrings(n)
    flipped = bits.copy()
    flipped[:, target] ^= bits[:, control]
    cols = np.arange(dim)
    rows = flipped @ (1 << np.arange(n - 1, -1, -1))
    u = np.zeros((dim, dim), dtype=complex)
    u[rows, cols] = 1.0
    return u


def basis_state(bits: Sequence[int]) -> np.ndarray:
    n = len(bits)
    psi = np.zeros(2 ** n, dtype=complex)
    psi[basis_index(bits)] = 1.0
    return psi


def ghz_state(n: int) -> np.ndarray:
    check_qubits(n)
    psi = np.zeros(2 ** n, dtype=complex)
    psi[0] = psi[-1] = 1 / np.sqrt(2)
    return psi


def cnot_chain(n: int) -> np.ndarray:
    """CNOTs from each qubit onto the next, first pair applied first."""
    check_qubits(n)
    u = np.eye(2 ** n, dtype=complex)
    for j in range(n - 1):
        u = cnot(j, j + 1, n) @ u
    return u


def ghz_encoder(n: int) -> np.ndarray:
    """Unitary taking |0...0> to the GHZ state: Hadamard on qubit 1, then a CNOT chain."""
    return cnot_chain(n) @ embed(H, 0, n)


def bell_state() -> np.ndarray:
    """(|01> + |10>) / sqrt(2)."""
    return (basis_state([0, 1]) + basis_state([1, 0])) / np.sqrt(2)


def bell_encoder() -> np.ndarray:
    """Unitary taking |00> to (|01> + |10>)/sqrt(2)."""
    return embed(X, 1, 2) @ cnot(0, 1, 2) @ embed(H, 0, 2)


def qubit_state(polar: float, azimuth: float) -> np.ndarray:
    return np.array([np.cos(polar / 2), np.exp(1j * azimuth) * np.sin(polar / 2)])


def product_state(polars: Sequence[float], azimuths: Sequence[float]) -> np.ndarray:
    return kron_all([qubit_state(t, p) for t, p in zip(polars, azimuths)])


def plus_state(n: int) -> np.ndarray:
    check_qubits(n)
    return np.full(2 ** n, 2 ** (-n / 2), dtype=complex)


def decode_probs(state: np.ndarray, decoder: np.ndarray, measured: Sequence[int] | None = None) -> np.ndarray:
    """Outcome distribution after applying ``decoder`` and measuring in the computational basis.

    ``state`` is a vector or a batch (m, 2**n). Unmeasured qubits are traced out;
    outcomes of the measured qubits are ordered as bitstrings in the given order.
    """
    out = np.asarray(state) @ decoder.T
    return marginalize(np.abs(out) ** 2, measured)


def marginalize(probs: np.ndarray, measured: Sequence[int] | None) -> np.ndarray:
    """Marginal distribution of the ``measured`` qubits, in the given order."""
    n = int(np.log2(probs.shape[-1]))
    if measured is None or list(measured) == list(range(n)):
        return probs
    measured = list(measured)
    if not measured or min(measured) < 0 or max(measured) >= n:
        raise ValueError(f"measured qubits {measured} out of range for {n} qubits")
    lead = probs.ndim - 1
    shaped = probs.reshape(probs.shape[:-1] + (2,) * n)
    others = tuple(lead + q for q in range(n) if q not in measured)
    marg = shaped.sum(axis=others)
    # remaining axes are in increasing qubit order; permute to the requested order
    kept = sorted(measured)
    perm = tuple(range(lead)) + tuple(lead + kept.index(q) for q in measured)
    return np.transpose(marg, perm).reshape(probs.shape[:-1] + (2 ** len(measured),))


def expectation(rho: np.ndarray, op: np.ndarray) -> float:
    return float(np.real(np.trace(op @ rho)))


def prepare_probe(kind: str, n: int | None = None, polars=None, azimuths=None, amplitudes=None) -> np.ndarray:
    """Probe state by name: ``product``, ``bell``, ``ghz`` or ``custom``."""
    if kind == "ghz":
        return ghz_state(n)
    if kind == "bell":
        return bell_state()
    if kind == "product":
        if polars is None:
            raise ValueError("product probe needs per-qubit Bloch angles")
        azimuths = np.zeros(len(polars)) if azimuths is None else azimuths
        check_qubits(len(polars))
        return product_state(polars, azimuths).astype(complex)
    if kind == "custom":
        amp = np.asarray(amplitudes, dtype=complex)
        norm = np.linalg.norm(amp)
        if norm == 0 or amp.size & (amp.size - 1) or amp.size < 2:
            raise ValueError("custom amplitudes must be nonzero with length 2**n")
        if abs(norm - 1) > 1e-9:
            raise ValueError(f"custom amplitudes are not normalized (norm {norm:.6g})")
        return amp / norm
    raise ValueError(f"unknown probe kind {kind!r}")


def averaged_density(probe: np.ndarray, dist, eigmap: EigenvalueMap, n_grid: int | None = None,
                     n_samples: int = 100_000, rng: np.random.Generator | None = None,
                     method: str = "auto") -> np.ndarray:
    """Average of U(theta) rho U(theta)^dagger over the parameter distribution.

    ``method`` is ``exact`` (Schur product with the characteristic function),
    ``grid`` (equally spaced points of a one-parameter uniform family) or
    ``mc``. ``auto`` prefers grid, then exact, then Monte Carlo.
    """
    probe = np.asarray(probe, dtype=complex)
    rho = np.outer(probe, probe.conj()) if probe.ndim == 1 else probe
    if method == "auto":
        if n_grid is not None and hasattr(dist, "grid"):
            method = "grid"
        elif hasattr(dist, "chi"):
            method = "exact"
        else:
            method = "mc"
    if method == "exact":
        return rho * dist.chi(eigmap.differences())
    if method == "grid":
        if n_grid is None or n_grid < 1:
            raise ValueError("grid averaging needs n_grid >= 1")
        thetas = dist.grid(n_grid)
    elif method == "mc":
        if rng is None:
            raise ValueError("Monte Carlo averaging needs a random generator")
        thetas = dist.sample(rng, n_samples)
    else:
        raise ValueError(f"unknown averaging method {method!r}")
    phases = np.exp(-1j * (thetas @ eigmap.table.T))
    # mean over samples of diag(u) rho diag(u)^*
    return rho * (phases.T @ phases.conj()) / len(thetas)


# Sum-of-squares constraints via Pauli strings

@dataclass(frozen=True)
class PauliStringAssignment:
    """Signed X/Y Pauli strings for ``n_var`` parameters.

    The first half of the parameters get strings with an even number of Y
    factors, the second half odd. Strings in the same half commute and
    strings in different halves anticommute.

    Two same-half strings with Y counts y_j and y_k multiply to a Z string
    times (-1)^((y_k - y_j)/2) on |1...1>, so bare strings square to a
    constraint with mixed signs. Each string therefore carries the sign
    (-1)^floor(y/2), which makes |1...1> an eigenstate of the squared
    generator with eigenvalue (sum of first half)^2 + (sum of second half)^2.
    ``signed=False`` keeps the bare strings.
    """

    n_var: int
    strings: tuple[str, ...]
    signs: tuple[int, ...] = ()

    def __post_init__(self):
        if not self.signs:
            object.__setattr__(self, "signs", (1,) * len(self.strings))
        if len(self.signs) != len(self.strings) or len(self.strings) != self.n_var:
            raise ValueError("one string and one sign per parameter")

    @property
    def n_qubits(self) -> int:
        return len(self.strings[0])

    @classmethod
    def build(cls, n_var: int, signed: bool = True) -> "PauliStringAssignment":
        if n_var < 2 or n_var % 2:
            raise ValueError(f"n_var must be a positive even integer, got {n_var}")
        n = max(1, int(np.ceil(np.log2(n_var))))
        even, odd = [], []
        for idx in range(2 ** n):
            s = "".join("Y" if (idx >> (n - 1 - j)) & 1 else "X" for j in range(n))
            (even if s.count("Y") % 2 == 0 else odd).append(s)
        half = n_var // 2
        if half > len(even):
            raise ValueError(f"not enough Pauli strings for n_var={n_var}")
        strings = tuple(even[:half] + odd[:half])
        signs = tuple((-1) ** (s.count("Y") // 2) if signed else 1 for s in strings)
        return cls(n_var, strings, signs)

    def matrices(self) -> list[np.ndarray]:
        table = {"X": X, "Y": Y}
        return [sign * kron_all([table[c] for c in s]) for s, sign in zip(self.strings, self.signs)]


def pauli_generator(theta, assign: PauliStringAssignment) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (assign.n_var,):
        raise ValueError(f"theta must have length {assign.n_var}")
    return sum(t * p for t, p in zip(theta, assign.matrices()))


def quadratic_constraint_overlap(theta, assign: PauliStringAssignment) -> complex:
    """<1...1| exp(-i sum_j theta_j P_j) |1...1> via Hermitian eigendecomposition."""
    gen = pauli_generator(theta, assign)
    evals, evecs = np.linalg.eigh(gen)
    row = evecs[-1]  # components of |1...1>, the last basis state
    return complex(np.sum(np.abs(row) ** 2 * np.exp(-1j * evals)))


def split_square_sums(theta, n_var: int) -> float:
    """(sum of first half)^2 + (sum of second half)^2."""
    theta = np.asarray(theta, dtype=float)
    h = n_var // 2
    return float(theta[:h].sum() ** 2 + theta[h:].sum() ** 2)
