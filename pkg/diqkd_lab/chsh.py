"""CHSH — correlators, maximal-violation criteria and correlation-table analytics."""

from __future__ import annotations

import csv
import itertools
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import Mapping, Optional, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from diqkd_lab import qmath
from diqkd_lab.common.config import Config
from diqkd_lab.common.errors import DomainError
from diqkd_lab.common.formatting import format_sig, write_csv

logger = logging.getLogger(__name__)

OUTCOMES = (1, -1)          # row/column order of every 2×2 outcome table
KEY_PAIR = (0, 1)
CHSH_PAIRS = ((1, 1), (1, 2), (2, 1), (2, 2))
PROTOCOL_PAIRS = (KEY_PAIR,) + CHSH_PAIRS
TABLE_CSV_HEADER = ("X", "Y", "a", "b", "p", "count")

SettingPair = tuple[int, int]


def _outcome_index(value: int) -> int:
    if value == 1:
        return 0
    if value == -1:
        return 1
    raise DomainError(f"outcome must be +1 or -1, got {value!r}")


# ─── Measurements ────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class XZMeasurement:
    """Binary observable cos φ·σz + sin φ·σx."""

    phi: float

    @property
    def matrix(self) -> qmath.ComplexMatrix:
        return math.cos(self.phi) * qmath.SIGMA_Z + math.sin(self.phi) * qmath.SIGMA_X


Observable = Union[XZMeasurement, ArrayLike]


def _observable(obs: Observable) -> qmath.ComplexMatrix:
    if isinstance(obs, XZMeasurement):
        obs = obs.matrix
    return qmath.as_observable(obs)


@dataclass(frozen=True, eq=False)
class MeasurementSet:
    """Alice's and Bob's ±1 observables keyed by setting label.

    ``a0_random_prob`` is the probability that Alice's setting-0 output is
    replaced by a uniformly random bit after measurement.
    """

    alice: Mapping[int, Observable]
    bob: Mapping[int, Observable]
    a0_random_prob: float = 0.0

    def __post_init__(self):
        alice = {int(k): _observable(v) for k, v in self.alice.items()}
        bob = {int(k): _observable(v) for k, v in self.bob.items()}
        if not alice or not bob:
            raise DomainError("measurement set needs at least one setting per side")
        if not 0.0 <= self.a0_random_prob <= 1.0:
            raise DomainError(f"a0_random_prob must lie in [0, 1], got {self.a0_random_prob}")
        object.__setattr__(self, "alice", MappingProxyType(alice))
        object.__setattr__(self, "bob", MappingProxyType(bob))

    @classmethod
    def protocol(
        cls,
        a0: Optional[Observable] = None,
        a1: Optional[Observable] = None,
        a2: Optional[Observable] = None,
        b1: Optional[Observable] = None,
        b2: Optional[Observable] = None,
        a0_random_prob: float = 0.0,
    ) -> "MeasurementSet":
        """Protocol layout X∈{0,1,2}, Y∈{1,2}; omitted observables take the ideal choice."""
        root = math.sqrt(2.0)
        return cls(
            alice={
                0: qmath.SIGMA_Z if a0 is None else a0,
                1: (qmath.SIGMA_Z + qmath.SIGMA_X) / root if a1 is None else a1,
                2: (qmath.SIGMA_Z - qmath.SIGMA_X) / root if a2 is None else a2,
            },
            bob={
                1: qmath.SIGMA_Z if b1 is None else b1,
                2: qmath.SIGMA_X if b2 is None else b2,
            },
            a0_random_prob=a0_random_prob,
        )

    def alice_observable(self, x: int) -> qmath.ComplexMatrix:
        if x not in self.alice:
            raise DomainError(f"measurement set has no Alice setting {x}")
        return self.alice[x]

    def bob_observable(self, y: int) -> qmath.ComplexMatrix:
        if y not in self.bob:
            raise DomainError(f"measurement set has no Bob setting {y}")
        return self.bob[y]


# ─── Bell-diagonal states ────────────────────────────────────────────────────

def ordered_rows(lam: NDArray[np.float64]) -> NDArray[np.float64]:
    """Swap within the (Φ+,Ψ−) and (Φ−,Ψ+) sectors so both are ordered."""
    out = np.array(lam, dtype=float, copy=True)
    flat = out.reshape(-1, 4)
    swap = flat[:, 0] < flat[:, 1]
    flat[swap] = flat[swap][:, [1, 0, 2, 3]]
    swap = flat[:, 2] < flat[:, 3]
    flat[swap] = flat[swap][:, [0, 1, 3, 2]]
    return out


@dataclass(frozen=True, eq=False)
class BellDiagonalState:
    """Weights over the Bell basis in the order (Φ+, Ψ−, Φ−, Ψ+)."""

    lam: NDArray[np.float64]
    ordered: bool = False

    def __post_init__(self):
        lam = qmath.as_probability_vector(self.lam)
        if lam.size != 4:
            raise DomainError(f"Bell-diagonal state needs 4 weights, got {lam.size}")
        object.__setattr__(self, "lam", lam)
        if self.ordered and not self.is_ordered():
            raise DomainError(
                "Bell-diagonal weights violate the sector ordering "
                f"λΦ+ ≥ λΨ− and λΦ− ≥ λΨ+: {lam.tolist()}"
            )

    @property
    def phi_plus(self) -> float:
        return float(self.lam[0])

    @property
    def psi_minus(self) -> float:
        return float(self.lam[1])

    @property
    def phi_minus(self) -> float:
        return float(self.lam[2])

    @property
    def psi_plus(self) -> float:
        return float(self.lam[3])

    def is_ordered(self, tol: float = 1e-12) -> bool:
        return self.lam[0] >= self.lam[1] - tol and self.lam[2] >= self.lam[3] - tol

    def sorted(self) -> "BellDiagonalState":
        return BellDiagonalState(ordered_rows(self.lam), ordered=True)

    def matrix(self) -> qmath.DensityMatrix:
        basis = qmath.BELL_BASIS
        return qmath.DensityMatrix((basis * self.lam) @ basis.conj().T)

    @classmethod
    def from_density(cls, rho: qmath.StateLike) -> "BellDiagonalState":
        """Bell-basis diagonal of a two-qubit state (off-diagonal weight is discarded)."""
        state = qmath.as_density_matrix(rho)
        if state.dim != 4:
            raise DomainError(f"expected a two-qubit state, got dimension {state.dim}")
        diag = np.real(np.diag(qmath.BELL_BASIS.conj().T @ state.mat @ qmath.BELL_BASIS))
        return cls(diag / diag.sum())


def werner_state(p: float) -> qmath.DensityMatrix:
    """p·|Φ+⟩⟨Φ+| + (1−p)·I/4."""
    if not -1.0 / 3.0 <= p <= 1.0:
        raise DomainError(f"Werner visibility must lie in [-1/3, 1], got {p}")
    return qmath.DensityMatrix(p * qmath.bell_projector(0) + (1.0 - p) * qmath.DensityMatrix.maximally_mixed(4).mat)


# ─── Correlators ─────────────────────────────────────────────────────────────

def _check_dims(state: qmath.DensityMatrix, a: np.ndarray, b: np.ndarray) -> None:
    if a.shape[0] * b.shape[0] != state.dim:
        raise DomainError(
            f"observable dimensions {a.shape[0]}×{b.shape[0]} do not match state dimension {state.dim}"
        )


def correlator(rho: qmath.StateLike, a: Observable, b: Observable) -> float:
    state = qmath.as_density_matrix(rho)
    a_mat, b_mat = _observable(a), _observable(b)
    _check_dims(state, a_mat, b_mat)
    return float(np.real(np.trace(state.mat @ np.kron(a_mat, b_mat))))


def born_probabilities(rho: qmath.StateLike, a: Observable, b: Observable) -> NDArray[np.float64]:
    """Joint outcome distribution P[i, j] for outcomes (OUTCOMES[i], OUTCOMES[j])."""
    state = qmath.as_density_matrix(rho)
    a_mat, b_mat = _observable(a), _observable(b)
    _check_dims(state, a_mat, b_mat)
    probs = np.empty((2, 2))
    for i, pa in enumerate(qmath.observable_projectors(a_mat)):
        for j, pb in enumerate(qmath.observable_projectors(b_mat)):
            probs[i, j] = np.real(np.trace(state.mat @ np.kron(pa, pb)))
    probs = np.clip(probs, 0.0, None)
    return probs / probs.sum()


def chsh_value(rho: qmath.StateLike, m: MeasurementSet) -> float:
    a1, a2 = m.alice_observable(1), m.alice_observable(2)
    b1, b2 = m.bob_observable(1), m.bob_observable(2)
    return (
        correlator(rho, a1, b1)
        + correlator(rho, a1, b2)
        + correlator(rho, a2, b1)
        - correlator(rho, a2, b2)
    )


def correlation_matrix(rho: qmath.StateLike) -> NDArray[np.float64]:
    """T with t_ij = Tr[ρ σi⊗σj] for i, j ∈ {x, y, z}."""
    state = qmath.as_density_matrix(rho)
    if state.dim != 4:
        raise DomainError(f"expected a two-qubit state, got dimension {state.dim}")
    t = np.empty((3, 3))
    for i, si in enumerate(qmath.PAULIS):
        for j, sj in enumerate(qmath.PAULIS):
            t[i, j] = np.real(np.trace(state.mat @ np.kron(si, sj)))
    return t


@dataclass(frozen=True, eq=False)
class HorodeckiResult:
    s_max: float
    t_matrix: NDArray[np.float64]
    tau: NDArray[np.float64]            # two largest eigenvalues of TᵀT
    bob_axes: NDArray[np.float64]       # corresponding eigenvectors (rows)
    measurements: MeasurementSet        # Bloch-vector observables reaching s_max


def _unit(v: np.ndarray, fallback: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(v))
    return v / norm if norm > 1e-12 else fallback


def chsh_max_horodecki(rho: qmath.StateLike) -> HorodeckiResult:
    t = correlation_matrix(rho)
    vals, vecs = np.linalg.eigh(t.T @ t)
    order = np.argsort(vals)[::-1]
    tau = np.clip(vals[order][:2], 0.0, None)
    c1, c2 = vecs[:, order[0]], vecs[:, order[1]]
    s_max = 2.0 * math.sqrt(tau[0] + tau[1])

    theta = math.atan2(math.sqrt(tau[1]), math.sqrt(tau[0]))
    b1 = math.cos(theta) * c1 + math.sin(theta) * c2
    b2 = math.cos(theta) * c1 - math.sin(theta) * c2
    a1 = _unit(t @ c1, c1)
    a2 = _unit(t @ c2, c2)
    measurements = MeasurementSet(
        alice={1: qmath.bloch_observable(a1), 2: qmath.bloch_observable(a2)},
        bob={1: qmath.bloch_observable(b1), 2: qmath.bloch_observable(b2)},
    )
    return HorodeckiResult(s_max, t, tau, np.vstack([c1, c2]), measurements)


def chsh_max_belldiag_rows(lam: ArrayLike) -> NDArray[np.float64]:
    """Closed-form CHSH maximum for a stack of ordered Bell-diagonal weight rows."""
    arr = np.asarray(lam, dtype=float)
    first = (arr[..., 0] - arr[..., 1]) ** 2 + (arr[..., 2] - arr[..., 3]) ** 2
    second = (arr[..., 0] - arr[..., 3]) ** 2 + (arr[..., 2] - arr[..., 1]) ** 2
    return Config.tsirelson * np.sqrt(np.maximum(first, second))


def chsh_max_belldiag(s: BellDiagonalState) -> float:
    if not s.is_ordered():
        raise DomainError(f"closed-form CHSH maximum needs ordered weights, got {s.lam.tolist()}")
    return float(chsh_max_belldiag_rows(s.lam))


# ─── Correlation tables ──────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class CorrelationTable:
    """P(a,b|X,Y) per setting pair as 2×2 arrays indexed by OUTCOMES, plus sample counts.

    Exact tables carry zero counts.
    """

    probabilities: Mapping[SettingPair, NDArray[np.float64]]
    counts: Optional[Mapping[SettingPair, NDArray[np.int64]]] = None

    def __post_init__(self):
        probs = {}
        for pair, p in self.probabilities.items():
            arr = np.asarray(p, dtype=float)
            if arr.shape != (2, 2):
                raise DomainError(f"setting pair {pair}: expected a 2×2 table, got shape {arr.shape}")
            if np.any(arr < -Config.table_tol) or abs(arr.sum() - 1.0) > Config.table_tol:
                raise DomainError(f"setting pair {pair}: conditional distribution is not normalized")
            probs[(int(pair[0]), int(pair[1]))] = arr
        counts = {}
        for pair in probs:
            raw = None if self.counts is None else self.counts.get(pair)
            counts[pair] = np.zeros((2, 2), dtype=np.int64) if raw is None else np.asarray(raw, dtype=np.int64)
        object.__setattr__(self, "probabilities", MappingProxyType(probs))
        object.__setattr__(self, "counts", MappingProxyType(counts))

    @classmethod
    def from_counts(cls, counts: Mapping[SettingPair, ArrayLike]) -> "CorrelationTable":
        probs, kept = {}, {}
        for pair, c in counts.items():
            arr = np.asarray(c, dtype=np.int64)
            total = int(arr.sum())
            if total == 0:
                continue
            probs[pair] = arr / total
            kept[pair] = arr
        return cls(probs, kept)

    @property
    def pairs(self) -> tuple[SettingPair, ...]:
        return tuple(sorted(self.probabilities))

    @property
    def is_exact(self) -> bool:
        return all(int(c.sum()) == 0 for c in self.counts.values())

    def n_rounds(self, pair: SettingPair) -> int:
        return int(self.counts[pair].sum()) if pair in self.counts else 0

    def table(self, pair: SettingPair) -> NDArray[np.float64]:
        if pair not in self.probabilities:
            raise DomainError(f"correlation table is missing setting pair (X={pair[0]}, Y={pair[1]})")
        return self.probabilities[pair]

    def prob(self, x: int, y: int, a: int, b: int) -> float:
        return float(self.table((x, y))[_outcome_index(a), _outcome_index(b)])

    def correlator(self, x: int, y: int) -> float:
        p = self.table((x, y))
        return float(p[0, 0] + p[1, 1] - p[0, 1] - p[1, 0])

    def _weighted_marginal(self, pairs: list[SettingPair], axis: int) -> float:
        values, weights = [], []
        for pair in pairs:
            p = self.probabilities[pair]
            marg = p.sum(axis=axis)
            values.append(float(marg[0] - marg[1]))
            weights.append(self.n_rounds(pair) if not self.is_exact else 1)
        return float(np.average(values, weights=weights))

    def alice_marginal(self, x: int) -> float:
        """⟨a_x⟩ averaged over the Bob settings paired with x."""
        pairs = [p for p in self.pairs if p[0] == x]
        if not pairs:
            raise DomainError(f"correlation table has no pair with Alice setting {x}")
        return self._weighted_marginal(pairs, axis=1)

    def bob_marginal(self, y: int) -> float:
        pairs = [p for p in self.pairs if p[1] == y]
        if not pairs:
            raise DomainError(f"correlation table has no pair with Bob setting {y}")
        return self._weighted_marginal(pairs, axis=0)

    def rows(self) -> list[tuple]:
        out = []
        for x, y in self.pairs:
            p = self.probabilities[(x, y)]
            c = self.counts[(x, y)]
            for i, a in enumerate(OUTCOMES):
                for j, b in enumerate(OUTCOMES):
                    out.append((x, y, a, b, format_sig(p[i, j]), int(c[i, j])))
        return out

    def to_csv(self, path: Union[Path, str]) -> Path:
        return write_csv(path, TABLE_CSV_HEADER, self.rows())

    @classmethod
    def from_csv(cls, path: Union[Path, str]) -> "CorrelationTable":
        probs: dict[SettingPair, np.ndarray] = {}
        counts: dict[SettingPair, np.ndarray] = {}
        with open(path, newline="") as f:
            for row in csv.DictReader(f):
                pair = (int(row["X"]), int(row["Y"]))
                i, j = _outcome_index(int(row["a"])), _outcome_index(int(row["b"]))
                probs.setdefault(pair, np.zeros((2, 2)))[i, j] = float(row["p"])
                counts.setdefault(pair, np.zeros((2, 2), dtype=np.int64))[i, j] = int(row["count"])
        return cls(probs, counts)


@dataclass(frozen=True)
class TableStatistics:
    qber: float
    chsh: float
    correlators: Mapping[SettingPair, float]
    alice_marginals: Mapping[int, float]
    bob_marginals: Mapping[int, float]


def table_from_state(rho: qmath.StateLike, m: MeasurementSet) -> CorrelationTable:
    state = qmath.as_density_matrix(rho)
    probs = {}
    for x, a in m.alice.items():
        for y, b in m.bob.items():
            p = born_probabilities(state, a, b)
            if x == 0 and m.a0_random_prob > 0.0:
                random_bit = 0.5 * np.vstack([p.sum(axis=0), p.sum(axis=0)])
                p = (1.0 - m.a0_random_prob) * p + m.a0_random_prob * random_bit
            probs[(x, y)] = p
    return CorrelationTable(probs)


def table_statistics(t: CorrelationTable) -> TableStatistics:
    for pair in PROTOCOL_PAIRS:
        if pair not in t.probabilities:
            raise DomainError(f"correlation table is missing setting pair (X={pair[0]}, Y={pair[1]})")
    key = t.table(KEY_PAIR)
    qber = float(key[0, 1] + key[1, 0])
    correlators = {pair: t.correlator(*pair) for pair in CHSH_PAIRS}
    chsh = correlators[(1, 1)] + correlators[(1, 2)] + correlators[(2, 1)] - correlators[(2, 2)]
    alice = {x: t.alice_marginal(x) for x in sorted({p[0] for p in t.pairs})}
    bob = {y: t.bob_marginal(y) for y in sorted({p[1] for p in t.pairs})}
    return TableStatistics(qber, chsh, correlators, alice, bob)


def table_standard_errors(t: CorrelationTable) -> tuple[float, float]:
    """Binomial standard errors of (Q̂, Ŝ) from an empirical table."""
    for pair in PROTOCOL_PAIRS:
        if t.n_rounds(pair) == 0:
            raise DomainError(f"no rounds recorded for setting pair (X={pair[0]}, Y={pair[1]})")
    key = t.table(KEY_PAIR)
    q = float(key[0, 1] + key[1, 0])
    q_err = math.sqrt(q * (1.0 - q) / t.n_rounds(KEY_PAIR))
    var_s = 0.0
    for pair in CHSH_PAIRS:
        p = t.table(pair)
        agree = float(p[0, 0] + p[1, 1])
        var_s += 4.0 * agree * (1.0 - agree) / t.n_rounds(pair)
    return q_err, math.sqrt(var_s)


def chsh_role_assignments(t: CorrelationTable) -> dict[tuple[int, int, int, int], float]:
    """|S| for every assignment of two Alice and two Bob settings to the CHSH roles.

    Keys are (x1, x2, y1, y2); the minus sign sits on (x2, y2). Together with
    the absolute value this covers all eight CHSH facets.
    """
    alice = sorted({p[0] for p in t.pairs})
    bob = sorted({p[1] for p in t.pairs})
    present = set(t.pairs)
    result = {}
    for x1, x2 in itertools.permutations(alice, 2):
        for y1, y2 in itertools.permutations(bob, 2):
            needed = {(x1, y1), (x1, y2), (x2, y1), (x2, y2)}
            if not needed <= present:
                continue
            s = t.correlator(x1, y1) + t.correlator(x1, y2) + t.correlator(x2, y1) - t.correlator(x2, y2)
            result[(x1, x2, y1, y2)] = abs(s)
    return result


# ─── BB84 device-independent counterexample ──────────────────────────────────

@dataclass(frozen=True, eq=False)
class BB84Counterexample:
    rho_abe: qmath.DensityMatrix
    rho_ab: qmath.DensityMatrix
    measurements: MeasurementSet
    table: CorrelationTable
    eve_conditional_entropy: Mapping[str, float]
    role_assignments: Mapping[tuple[int, int, int, int], float]
    qubit_pair_chsh: Mapping[tuple[int, int], float]

    @property
    def max_chsh(self) -> float:
        return max(self.role_assignments.values())


def _conditional_entropy_given_eve(
    rho_pe: qmath.DensityMatrix, observables: Mapping[int, np.ndarray], eve_dim: int
) -> float:
    """H(output | setting, Eve's register), settings uniform, Eve measuring her computational basis."""
    total = 0.0
    for obs in observables.values():
        joint = np.empty((2, eve_dim))
        for i, proj in enumerate(qmath.observable_projectors(obs)):
            for e in range(eve_dim):
                ket = qmath.basis_vector(e, eve_dim)
                joint[i, e] = np.real(np.trace(rho_pe.mat @ np.kron(proj, np.outer(ket, ket))))
        joint = np.clip(joint, 0.0, None)
        joint /= joint.sum()
        total += qmath.shannon_entropy(joint.ravel()) - qmath.shannon_entropy(joint.sum(axis=0))
    return total / len(observables)


def bb84_counterexample() -> BB84Counterexample:
    """Separable state ¼Σ|z0z1⟩⟨z0z1|^⊗3 reproducing ideal BB84 statistics with Eve holding a copy."""
    rho = np.zeros((64, 64), dtype=complex)
    for z0, z1 in itertools.product((0, 1), repeat=2):
        local = qmath.basis_vector(2 * z0 + z1, 4)
        ket = np.kron(np.kron(local, local), local)
        rho += 0.25 * np.outer(ket, ket.conj())
    rho_abe = qmath.DensityMatrix(rho)
    rho_ab = qmath.partial_trace(rho_abe, 2, (4, 4, 4))

    first = np.kron(qmath.SIGMA_Z, qmath.SIGMA_I)
    second = np.kron(qmath.SIGMA_I, qmath.SIGMA_Z)
    measurements = MeasurementSet(alice={0: first, 1: second}, bob={0: first, 1: second})
    table = table_from_state(rho_ab, measurements)

    eve_entropy = {
        "alice": _conditional_entropy_given_eve(
            qmath.partial_trace(rho_abe, 1, (4, 4, 4)), measurements.alice, 4
        ),
        "bob": _conditional_entropy_given_eve(
            qmath.partial_trace(rho_abe, 0, (4, 4, 4)), measurements.bob, 4
        ),
    }

    qubit_chsh = {}
    for i, j in itertools.product((0, 1), repeat=2):
        traced = {0, 1, 2, 3} - {i, 2 + j}
        pair_state = qmath.partial_trace(rho_ab, traced, (2, 2, 2, 2))
        qubit_chsh[(i, j)] = chsh_max_horodecki(pair_state).s_max

    result = BB84Counterexample(
        rho_abe=rho_abe,
        rho_ab=rho_ab,
        measurements=measurements,
        table=table,
        eve_conditional_entropy=MappingProxyType(eve_entropy),
        role_assignments=MappingProxyType(chsh_role_assignments(table)),
        qubit_pair_chsh=MappingProxyType(qubit_chsh),
    )
    logger.debug("BB84 counterexample: max CHSH %.12f", result.max_chsh)
    return result
