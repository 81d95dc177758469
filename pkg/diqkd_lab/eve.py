"""Eve — conditional states, Holevo quantities and the optimal collective attack.

Eve holds the purification of a Bell-diagonal state ρ_λ. After Bob measures
B1 = cos φ σz + sin φ σx her conditional state has spectrum (Λ+, Λ−),
independent of Bob's outcome, and her Holevo information about B1 is
χ_λ(φ) = H(λ) − h(Λ+).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from diqkd_lab import qmath
from diqkd_lab.bounds import holevo_bound_di
from diqkd_lab.chsh import (
    BellDiagonalState,
    MeasurementSet,
    XZMeasurement,
    chsh_value,
    table_from_state,
    table_statistics,
)
from diqkd_lab.common.config import Config
from diqkd_lab.common.errors import DomainError, NumericFailure
from diqkd_lab.common.formatting import format_key_value

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class EveView:
    """An ordered Bell-diagonal state together with Bob's key-measurement angle φ ∈ [0, π]."""

    state: BellDiagonalState
    phi: float = 0.0

    def __post_init__(self):
        if not self.state.is_ordered():
            raise DomainError(f"Eve's view needs ordered Bell-diagonal weights, got {self.state.lam.tolist()}")
        if not -1e-12 <= self.phi <= math.pi + 1e-12:
            raise DomainError(f"Bob's angle must lie in [0, π], got {self.phi}")


# ─── Conditional spectrum and χ ──────────────────────────────────────────────

def lambda_plus_rows(lam: ArrayLike, phi: ArrayLike) -> NDArray[np.float64]:
    """Λ+ for weight rows ``lam[..., 4]`` broadcast against angles ``phi``."""
    arr = np.asarray(lam, dtype=float)
    d1 = arr[..., 0] - arr[..., 1]
    d2 = arr[..., 2] - arr[..., 3]
    cos2 = np.cos(2.0 * np.asarray(phi, dtype=float))
    radicand = np.maximum(d1**2 + d2**2 + 2.0 * cos2 * d1 * d2, 0.0)
    return 0.5 * (1.0 + np.sqrt(radicand))


def chi_rows(lam: ArrayLike, phi: ArrayLike) -> NDArray[np.float64]:
    """χ_λ(φ) for ``lam`` of shape (n, 4) and ``phi`` of shape (g,), giving (n, g)."""
    arr = np.asarray(lam, dtype=float)
    angles = np.atleast_1d(np.asarray(phi, dtype=float))
    lp = lambda_plus_rows(arr[:, None, :], angles[None, :])
    return qmath.shannon_entropy_rows(arr)[:, None] - qmath.binary_entropy(np.clip(lp, 0.0, 1.0))


def eve_conditional_spectrum(v: EveView) -> tuple[float, float]:
    lam_plus = float(lambda_plus_rows(v.state.lam, v.phi))
    return lam_plus, 1.0 - lam_plus


def chi_lambda(v: EveView) -> float:
    lam_plus, _ = eve_conditional_spectrum(v)
    return qmath.shannon_entropy(v.state.lam) - qmath.binary_entropy(min(lam_plus, 1.0))


@dataclass(frozen=True)
class PhiScan:
    phi_star: float
    chi_at_star: float
    chi_at_zero: float


def optimal_phi_check(state: BellDiagonalState, grid: int = Config.phi_scan_grid) -> PhiScan:
    """Scan χ_λ over φ ∈ [0, π]; ties go to the smallest angle."""
    EveView(state, 0.0)
    if grid < 2:
        raise DomainError(f"φ grid needs at least 2 points, got {grid}")
    phis = np.linspace(0.0, math.pi, grid)
    chis = chi_rows(state.lam[None, :], phis)[0]
    best = float(chis.max())
    idx = int(np.argmax(chis >= best - 1e-12))
    return PhiScan(float(phis[idx]), float(chis[idx]), float(chis[0]))


# ─── Constructive side: purification and Bob's projection ────────────────────

def bell_purification(state: BellDiagonalState) -> NDArray[np.complex128]:
    """Σ_k √λ_k |Bell_k⟩|e_k⟩ on (A ⊗ B) ⊗ E, E four-dimensional."""
    return (qmath.BELL_BASIS * np.sqrt(state.lam)).reshape(-1)


def conditional_eve_state(state: BellDiagonalState, phi: float, outcome: int) -> qmath.DensityMatrix:
    """ρ_{E|b}: purify ρ_λ, project Bob's qubit on the ``outcome`` eigenspace of B1(φ), trace out A and B."""
    if outcome not in (1, -1):
        raise DomainError(f"Bob's outcome must be +1 or -1, got {outcome}")
    psi = qmath.purify(state.matrix(), full_rank=True)
    plus, minus = qmath.observable_projectors(XZMeasurement(phi).matrix)
    projector = np.kron(np.kron(qmath.SIGMA_I, plus if outcome == 1 else minus), np.eye(4))
    projected = projector @ psi
    weight = float(np.vdot(projected, projected).real)
    if weight < 1e-14:
        raise NumericFailure(f"Bob's outcome {outcome} has vanishing probability")
    joint = np.outer(projected, projected.conj()) / weight
    return qmath.partial_trace(joint, (0, 1), (2, 2, 4))


# ─── Concurrence ─────────────────────────────────────────────────────────────

def concurrence_belldiag(state: BellDiagonalState) -> float:
    return max(0.0, 2.0 * float(state.lam.max()) - 1.0)


def concurrence(rho: qmath.StateLike) -> float:
    """Wootters concurrence of a two-qubit state via √ρ ρ̃ √ρ."""
    state = qmath.as_density_matrix(rho)
    if state.dim != 4:
        raise DomainError(f"concurrence needs a two-qubit state, got dimension {state.dim}")
    yy = np.kron(qmath.SIGMA_Y, qmath.SIGMA_Y)
    flipped = yy @ state.mat.conj() @ yy
    vals, vecs = np.linalg.eigh(state.mat)
    root = (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.conj().T
    spectrum = np.linalg.eigvalsh(root @ flipped @ root)
    singular = np.sort(np.sqrt(np.clip(spectrum, 0.0, None)))[::-1]
    return max(0.0, float(singular[0] - singular[1:].sum()))


# ─── Optimal collective attack ───────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class AttackSpec:
    """Bell-diagonal attack reaching a target CHSH value with minimal entanglement."""

    s_target: float
    c: float
    q_target: float
    state: BellDiagonalState
    measurements: MeasurementSet

    @property
    def density(self) -> qmath.DensityMatrix:
        return self.state.matrix()

    @property
    def prob_sigma_z(self) -> float:
        return 1.0 - 2.0 * self.q_target

    @property
    def prob_random(self) -> float:
        return 2.0 * self.q_target

    def measurement_angles(self) -> dict[str, float]:
        tilt = math.atan(self.c)
        return {"A0": 0.0, "A1": tilt, "A2": -tilt, "B1": 0.0, "B2": math.pi / 2.0}

    def to_text(self) -> str:
        lines = [
            format_key_value("S", self.s_target),
            format_key_value("C", self.c),
            format_key_value("Q", self.q_target),
            format_key_value("A0_prob_sigma_z", self.prob_sigma_z),
            format_key_value("A0_prob_random", self.prob_random),
        ]
        for label, weight in zip(qmath.BELL_LABELS, self.state.lam):
            lines.append(format_key_value(f"lambda_{label}", float(weight)))
        for name, angle in self.measurement_angles().items():
            lines.append(format_key_value(f"angle_{name}", angle))
        return "\n".join(lines)


def build_attack(s_target: float, q_target: float = 0.0) -> AttackSpec:
    if not math.isfinite(s_target) or s_target <= Config.local_bound:
        raise DomainError(f"attack needs S > 2 (quantum regime), got {s_target}")
    if s_target > Config.tsirelson + Config.tsirelson_slack:
        raise DomainError(f"attack target S={s_target} exceeds 2√2")
    if not 0.0 <= q_target <= 0.5:
        raise DomainError(f"target QBER must lie in [0, 1/2], got {q_target}")

    if s_target >= Config.tsirelson:
        s_target, c = Config.tsirelson, 1.0
    else:
        c = min(1.0, math.sqrt(max(0.0, (s_target / 2.0) ** 2 - 1.0)))
    state = BellDiagonalState(np.array([(1.0 + c) / 2.0, 0.0, (1.0 - c) / 2.0, 0.0]), ordered=True)
    tilt = math.atan(c)
    measurements = MeasurementSet.protocol(
        a0=XZMeasurement(0.0),
        a1=XZMeasurement(tilt),
        a2=XZMeasurement(-tilt),
        b1=XZMeasurement(0.0),
        b2=XZMeasurement(math.pi / 2.0),
        a0_random_prob=2.0 * q_target,
    )
    return AttackSpec(s_target, c, q_target, state, measurements)


def attack_saturation(spec: AttackSpec) -> dict:
    """Check that the attack reproduces (S, Q) and that Eve's χ meets the bound F(S).

    Returns {chsh, chi, bound, qber, *_error, saturated}.
    """
    rho = spec.density
    s = chsh_value(rho, spec.measurements)
    chi = chi_lambda(EveView(spec.state, 0.0))
    bound = holevo_bound_di(spec.s_target)
    qber = table_statistics(table_from_state(rho, spec.measurements)).qber
    result = {
        "chsh": s,
        "chi": chi,
        "bound": bound,
        "qber": qber,
        "chsh_error": abs(s - spec.s_target),
        "chi_error": abs(chi - bound),
        "qber_error": abs(qber - spec.q_target),
    }
    result["saturated"] = max(result["chsh_error"], result["chi_error"], result["qber_error"]) <= Config.bound_slack
    return result
