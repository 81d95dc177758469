"""Verify — numerical checks of every step of the collective-attack security proof.

Each check returns a report dict::

    {"check", "samples", "seed", "checked", "violations", "total_issues", "success", ...}

where ``violations`` holds {check, params, value, bound, margin} entries with
margin = bound − value. Sweeps draw sample ``i`` (or block ``i``) from its own
counter-based stream, so the sampled points depend only on the seed, the sample
count and the block size.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.linalg import schur
from scipy.stats import unitary_group

from diqkd_lab import qmath
from diqkd_lab.bounds import holevo_bound_di
from diqkd_lab.chsh import BellDiagonalState, chsh_max_belldiag_rows, ordered_rows
from diqkd_lab.common.config import Config
from diqkd_lab.common.errors import DomainError, NumericFailure
from diqkd_lab.common.formatting import format_sig, write_csv
from diqkd_lab.common.rng import block_generator, block_sizes
from diqkd_lab.eve import chi_rows, conditional_eve_state, lambda_plus_rows

logger = logging.getLogger(__name__)

REPORT_CSV_HEADER = ("check", "param_json", "value", "bound", "margin")
SUITES = ("lemma5", "delta_star", "theorem1", "blocks", "reduction", "spectrum")

_MIXTURE_STREAM = 1 << 40
_MAX_COMPONENTS = 5


# ─── Report helpers ──────────────────────────────────────────────────────────

def _violation(check: str, params: dict, value: float, bound: float) -> dict:
    return {
        "check": check,
        "params": params,
        "value": float(value),
        "bound": float(bound),
        "margin": float(bound) - float(value),
    }


def _report(check: str, samples: int, seed: Optional[int], checked: int, violations: list[dict], **extra) -> dict:
    total = len(violations)
    report = {
        "check": check,
        "samples": samples,
        "seed": seed,
        "checked": checked,
        "violations": violations[: Config.max_reported_violations],
        "total_issues": total,
        "success": total == 0,
    }
    report.update(extra)
    logger.info("%s: %d checked, %d issues", check, checked, total)
    return report


def write_report_csv(reports: list[dict], path: Union[Path, str]) -> Path:
    """Failure CSV; only the header is written when every report succeeded."""
    rows = []
    for report in reports:
        for v in report["violations"]:
            rows.append([
                v["check"],
                json.dumps(v["params"], sort_keys=True),
                format_sig(v["value"]),
                format_sig(v["bound"]),
                format_sig(v["margin"]),
            ])
    return write_csv(path, REPORT_CSV_HEADER, rows)


def sample_ordered_lambdas(rng: np.random.Generator, count: int) -> NDArray[np.float64]:
    """Exponential variates normalized onto the simplex, then sector-ordered."""
    raw = rng.exponential(size=(count, 4))
    return ordered_rows(raw / raw.sum(axis=1, keepdims=True))


# ─── Block decomposition of observable pairs ─────────────────────────────────

@dataclass(frozen=True, eq=False)
class ObservablePair:
    a1: qmath.ComplexMatrix
    a2: qmath.ComplexMatrix

    def __post_init__(self):
        a1 = qmath.as_observable(self.a1)
        a2 = qmath.as_observable(self.a2)
        if a1.shape != a2.shape:
            raise DomainError(f"observables have different dimensions: {a1.shape} vs {a2.shape}")
        object.__setattr__(self, "a1", a1)
        object.__setattr__(self, "a2", a2)

    @property
    def dim(self) -> int:
        return self.a1.shape[0]


@dataclass(frozen=True, eq=False)
class Block:
    basis: qmath.ComplexMatrix      # dim × rank, orthonormal columns
    reduced1: qmath.ComplexMatrix   # A1 restricted to the block
    reduced2: qmath.ComplexMatrix
    omega: complex                  # eigenvalue of A2·A1 carried by the block

    @property
    def rank(self) -> int:
        return self.basis.shape[1]

    @property
    def projector(self) -> qmath.ComplexMatrix:
        return self.basis @ self.basis.conj().T

    def bloch_vectors(self) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        """Bloch vectors of the two reduced qubit observables (rank-2 blocks only)."""
        if self.rank != 2:
            raise DomainError("Bloch vectors are defined for rank-2 blocks only")
        def bloch(m):
            return np.array([0.5 * np.real(np.trace(m @ s)) for s in qmath.PAULIS])
        return bloch(self.reduced1), bloch(self.reduced2)


@dataclass(frozen=True, eq=False)
class BlockDecomposition:
    pair: ObservablePair
    blocks: tuple[Block, ...]

    @property
    def ranks(self) -> list[int]:
        return [b.rank for b in self.blocks]

    def reconstruct(self, which: int) -> qmath.ComplexMatrix:
        return sum(b.basis @ (b.reduced1 if which == 1 else b.reduced2) @ b.basis.conj().T for b in self.blocks)

    def residuals(self) -> dict:
        dim = self.pair.dim
        projectors = [b.projector for b in self.blocks]
        completeness = float(np.max(np.abs(sum(projectors) - np.eye(dim))))
        overlap = 0.0
        for i, p in enumerate(projectors):
            for q in projectors[i + 1:]:
                overlap = max(overlap, float(np.max(np.abs(p @ q))))
        return {
            "completeness": completeness,
            "orthogonality": overlap,
            "a1": float(np.max(np.abs(self.reconstruct(1) - self.pair.a1))),
            "a2": float(np.max(np.abs(self.reconstruct(2) - self.pair.a2))),
        }


def _match_conjugates(upper: np.ndarray, lower: np.ndarray) -> None:
    if upper.size != lower.size:
        raise NumericFailure(
            f"A2·A1 has {upper.size} eigenvalues in the upper half-plane but {lower.size} in the lower"
        )
    remaining = list(lower)
    for w in upper:
        gaps = [abs(v - np.conj(w)) for v in remaining]
        k = int(np.argmin(gaps))
        if gaps[k] > 1e-6:
            raise NumericFailure(f"eigenvalue {w} of A2·A1 has no conjugate partner (closest gap {gaps[k]:.3e})")
        remaining.pop(k)


def decompose_observable_pair(p: ObservablePair) -> BlockDecomposition:
    """Split the space into blocks of rank ≤ 2 invariant under both observables.

    Each eigenvector |α⟩ of the unitary A2·A1 with non-real eigenvalue ω pairs
    with A2|α⟩ (eigenvalue ω̄); eigenvalues ±1 give rank-1 blocks on which
    A1 = ±A2.
    """
    unitary = p.a2 @ p.a1
    try:
        triangular, vectors = schur(unitary, output="complex")
    except np.linalg.LinAlgError as e:
        raise NumericFailure(f"Schur decomposition of A2·A1 failed: {e}") from e
    omegas = np.diag(triangular)
    tol = Config.unit_eigenvalue_tol

    plus = [k for k, w in enumerate(omegas) if abs(w - 1.0) <= tol]
    minus = [k for k, w in enumerate(omegas) if abs(w + 1.0) <= tol]
    degenerate = set(plus) | set(minus)
    upper = [k for k, w in enumerate(omegas) if k not in degenerate and w.imag > 0]
    lower = [k for k, w in enumerate(omegas) if k not in degenerate and w.imag <= 0]
    _match_conjugates(omegas[upper], omegas[lower])

    blocks = []
    for indices, omega in ((plus, 1.0), (minus, -1.0)):
        if not indices:
            continue
        sub = vectors[:, indices]
        restricted = sub.conj().T @ p.a2 @ sub
        _, local = qmath.hermitian_eigensystem(0.5 * (restricted + restricted.conj().T))
        for k in range(local.shape[1]):
            vec = (sub @ local[:, k])[:, None]
            blocks.append(Block(vec, vec.conj().T @ p.a1 @ vec, vec.conj().T @ p.a2 @ vec, complex(omega)))

    for k in upper:
        alpha = vectors[:, k]
        partner = p.a2 @ alpha
        partner = partner - alpha * np.vdot(alpha, partner)
        partner = partner / np.linalg.norm(partner)
        basis = np.column_stack([alpha, partner])
        blocks.append(Block(
            basis,
            basis.conj().T @ p.a1 @ basis,
            basis.conj().T @ p.a2 @ basis,
            complex(omegas[k]),
        ))

    if sum(b.rank for b in blocks) != p.dim:
        raise NumericFailure(f"blocks cover {sum(b.rank for b in blocks)} dimensions of {p.dim}")
    return BlockDecomposition(p, tuple(blocks))


def random_block_pair(rng: np.random.Generator, n_blocks: int) -> ObservablePair:
    """U(⊕ᵢ aᵢ·σ, ⊕ᵢ bᵢ·σ)U† from random unit Bloch vectors and a Haar unitary U."""
    dim = 2 * n_blocks
    a1 = np.zeros((dim, dim), dtype=complex)
    a2 = np.zeros((dim, dim), dtype=complex)
    for i in range(n_blocks):
        for target in (a1, a2):
            n = rng.normal(size=3)
            target[2 * i:2 * i + 2, 2 * i:2 * i + 2] = qmath.bloch_observable(n / np.linalg.norm(n))
    u = unitary_group.rvs(dim, random_state=rng)
    return ObservablePair(u @ a1 @ u.conj().T, u @ a2 @ u.conj().T)


def blocks_roundtrip_sweep(samples: int, seed: int, dim: int = 8) -> dict:
    if samples < 1:
        raise DomainError(f"samples must be positive, got {samples}")
    if dim < 2 or dim % 2:
        raise DomainError(f"round-trip dimension must be even and ≥ 2, got {dim}")
    n_blocks = dim // 2
    violations = []
    for i in range(samples):
        pair = random_block_pair(block_generator(seed, i), n_blocks)
        decomposition = decompose_observable_pair(pair)
        res = decomposition.residuals()
        worst = max(res.values())
        if worst > Config.reconstruction_tol:
            violations.append(_violation("blocks_reconstruction", {"index": i, **res}, worst, Config.reconstruction_tol))
        if len(decomposition.blocks) != n_blocks:
            violations.append(_violation(
                "blocks_count", {"index": i, "ranks": decomposition.ranks}, len(decomposition.blocks), n_blocks
            ))
    return _report("blocks", samples, seed, samples, violations, dim=dim)


# ─── Bell-diagonal reduction ─────────────────────────────────────────────────

_YY = np.kron(qmath.SIGMA_Y, qmath.SIGMA_Y)
_NEGLIGIBLE = 1e-13

RELABELS = {
    "none": (0.0, 0.0),
    "phi_plus<->psi_minus": (math.pi / 2.0, -math.pi / 2.0),
    "phi_minus<->psi_plus": (math.pi / 2.0, math.pi / 2.0),
    "both": (math.pi, 0.0),
}


def ry(theta: float) -> qmath.ComplexMatrix:
    """cos(θ/2)·I + i·sin(θ/2)·σy."""
    return math.cos(theta / 2.0) * qmath.SIGMA_I + 1j * math.sin(theta / 2.0) * qmath.SIGMA_Y


def _rotate(rho: np.ndarray, alpha: float, beta: float) -> np.ndarray:
    u = np.kron(ry(alpha), ry(beta))
    return u @ rho @ u.conj().T


def bell_matrix(rho: qmath.StateLike) -> qmath.ComplexMatrix:
    """Matrix elements in the Bell basis (Φ+, Ψ−, Φ−, Ψ+)."""
    mat = np.asarray(rho, dtype=complex)
    return qmath.BELL_BASIS.conj().T @ mat @ qmath.BELL_BASIS


def _sector_angle(upper: float, lower: float, coherence: float) -> float:
    gap = upper - lower
    if abs(coherence) <= _NEGLIGIBLE:
        return 0.0
    if abs(gap) <= _NEGLIGIBLE:
        return math.copysign(math.pi / 2.0, coherence)
    return math.atan(2.0 * coherence / gap)


@dataclass(frozen=True, eq=False)
class ReductionTrace:
    input_state: qmath.DensityMatrix
    symmetrized: qmath.DensityMatrix
    alpha: float
    beta: float
    rotated: qmath.DensityMatrix
    conjugated: qmath.DensityMatrix
    relabel: str
    final: BellDiagonalState


def symmetrize_to_belldiag(rho: qmath.StateLike) -> ReductionTrace:
    """Reduce a two-qubit state to an ordered Bell-diagonal one by local symmetries.

    Steps: average with σy⊗σy, local Ry(α)⊗Ry(β) removing the real Bell-basis
    coherences inside both sectors, average with the complex conjugate, then a
    discrete relabel rotation enforcing λΦ+ ≥ λΨ− and λΦ− ≥ λΨ+.
    """
    state = qmath.as_density_matrix(rho)
    if state.dim != 4:
        raise DomainError(f"reduction needs a two-qubit state, got dimension {state.dim}")

    symmetrized = qmath.DensityMatrix(0.5 * (state.mat + _YY @ state.mat @ _YY))
    m = bell_matrix(symmetrized)
    first = _sector_angle(m[0, 0].real, m[1, 1].real, m[0, 1].real)
    second = _sector_angle(m[2, 2].real, m[3, 3].real, m[2, 3].real)
    alpha, beta = 0.5 * (second - first), 0.5 * (first + second)
    rotated = qmath.DensityMatrix(_rotate(symmetrized.mat, alpha, beta))
    conjugated = qmath.DensityMatrix(0.5 * (rotated.mat + rotated.mat.conj()))

    diag = np.real(np.diag(bell_matrix(conjugated)))
    swap_first, swap_second = diag[0] < diag[1], diag[2] < diag[3]
    relabel = {
        (False, False): "none",
        (True, False): "phi_plus<->psi_minus",
        (False, True): "phi_minus<->psi_plus",
        (True, True): "both",
    }[(bool(swap_first), bool(swap_second))]
    final_mat = _rotate(conjugated.mat, *RELABELS[relabel])

    in_bell = bell_matrix(final_mat)
    off_diagonal = float(np.max(np.abs(in_bell - np.diag(np.diag(in_bell)))))
    if off_diagonal > Config.reconstruction_tol:
        raise NumericFailure(f"reduced state keeps Bell-basis coherence {off_diagonal:.3e}")
    weights = np.real(np.diag(in_bell))
    final = BellDiagonalState(np.clip(weights, 0.0, None) / weights.sum(), ordered=True)

    return ReductionTrace(state, symmetrized, alpha, beta, rotated, conjugated, relabel, final)


def random_density_matrix(rng: np.random.Generator, dim: int = 4, rank: Optional[int] = None) -> np.ndarray:
    """Ginibre-ensemble state GG†/Tr(GG†) with G of shape dim × rank."""
    cols = dim if rank is None else rank
    g = rng.normal(size=(dim, cols)) + 1j * rng.normal(size=(dim, cols))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def reduction_sweep(samples: int, seed: int) -> dict:
    if samples < 1:
        raise DomainError(f"samples must be positive, got {samples}")
    violations = []
    for i in range(samples):
        rho = random_density_matrix(block_generator(seed, i))
        try:
            trace = symmetrize_to_belldiag(rho)
        except (DomainError, NumericFailure) as e:
            violations.append(_violation("reduction_pipeline", {"index": i, "error": str(e)}, 1.0, 0.0))
            continue
        before = np.real(np.diag(bell_matrix(trace.input_state)))
        after_yy = np.real(np.diag(bell_matrix(trace.symmetrized)))
        after_rot = np.real(np.diag(bell_matrix(trace.rotated)))
        after_conj = np.real(np.diag(bell_matrix(trace.conjugated)))
        for check, drift in (
            ("reduction_yy_fixed_diagonal", float(np.max(np.abs(after_yy - before)))),
            ("reduction_conjugation_fixed_diagonal", float(np.max(np.abs(after_conj - after_rot)))),
        ):
            if drift > 1e-12:
                violations.append(_violation(check, {"index": i}, drift, 1e-12))
        lam = trace.final.lam
        if not trace.final.is_ordered():
            violations.append(_violation("reduction_ordering", {"index": i, "lambda": lam.tolist()}, 1.0, 0.0))
    return _report("reduction", samples, seed, samples, violations)


# ─── Entropy inequality on ordered weights ───────────────────────────────────

def lemma5_value_rows(lam: ArrayLike) -> NDArray[np.float64]:
    """H(λ) − h(λΦ+ + λΦ−)."""
    arr = np.asarray(lam, dtype=float)
    return qmath.shannon_entropy_rows(arr) - qmath.binary_entropy(np.clip(arr[..., 0] + arr[..., 2], 0.0, 1.0))


def lemma5_radius_rows(lam: ArrayLike) -> NDArray[np.float64]:
    arr = np.asarray(lam, dtype=float)
    return (arr[..., 0] - arr[..., 1]) ** 2 + (arr[..., 2] - arr[..., 3]) ** 2


def lemma5_bound_rows(lam: ArrayLike) -> NDArray[np.float64]:
    """h((1 + √(2R² − 1))/2) when R² > ½, else 1."""
    r2 = lemma5_radius_rows(lam)
    root = np.sqrt(np.clip(2.0 * r2 - 1.0, 0.0, 1.0))
    return np.where(r2 > 0.5, qmath.binary_entropy((1.0 + root) / 2.0), 1.0)


def _equality_family(points: int = 101) -> NDArray[np.float64]:
    a = np.linspace(0.5, 1.0, points)
    zeros = np.zeros_like(a)
    psi_empty = np.column_stack([a, zeros, 1.0 - a, zeros])
    phi_empty = np.column_stack([zeros, a, zeros, 1.0 - a])
    return np.vstack([psi_empty, phi_empty])


def lemma5_inequality_sweep(samples: int, seed: int, block_size: int = Config.default_block_size) -> dict:
    if samples < 1:
        raise DomainError(f"samples must be positive, got {samples}")
    slack = Config.bound_slack
    violations = []
    strict_checked = 0
    for block, count in block_sizes(samples, block_size):
        lam = sample_ordered_lambdas(block_generator(seed, block), count)
        value = lemma5_value_rows(lam)
        bound = lemma5_bound_rows(lam)
        for k in np.flatnonzero(value > bound + slack):
            violations.append(_violation("lemma5_bound", {"lambda": lam[k].tolist()}, value[k], bound[k]))

        interior = (lemma5_radius_rows(lam) > 0.51) & (lam[:, 1] + lam[:, 3] >= 0.05)
        strict_checked += int(interior.sum())
        for k in np.flatnonzero(interior & (bound - value <= 1e-6)):
            violations.append(_violation("lemma5_strict", {"lambda": lam[k].tolist()}, value[k], bound[k]))
        logger.debug("lemma5 block %d: %d samples", block, count)

    family = _equality_family()
    gap = np.abs(lemma5_bound_rows(family) - lemma5_value_rows(family))
    for k in np.flatnonzero(gap > slack):
        violations.append(_violation(
            "lemma5_equality", {"lambda": family[k].tolist()}, lemma5_value_rows(family[k]), lemma5_bound_rows(family[k])
        ))
    return _report(
        "lemma5",
        samples,
        seed,
        samples + len(family),
        violations,
        strict_checked=strict_checked,
    )


def delta_star_maximality_check(r: float, theta: float) -> dict:
    """Check that δ*(θ) = (R²/4)(cos²θ − sin²θ) maximizes F along the δ direction.

    Weights: λΦ+ = ¼ + (R/2)cosθ + δ, λΨ− = ¼ − (R/2)cosθ + δ,
    λΦ− = ¼ + (R/2)sinθ − δ, λΨ+ = ¼ − (R/2)sinθ − δ.
    """
    if not math.isfinite(r) or r < 0.0 or not math.isfinite(theta):
        raise DomainError(f"invalid (R, θ) = ({r}, {theta})")
    c, s = math.cos(theta), math.sin(theta)
    if r * (abs(c) + abs(s)) > 1.0 + 1e-12:
        raise DomainError(f"(R, θ) = ({r}, {theta}) violates (|cos θ| + |sin θ|) ≤ 1/R")

    def weights(delta: float) -> np.ndarray:
        return np.array([
            0.25 + 0.5 * r * c + delta,
            0.25 - 0.5 * r * c + delta,
            0.25 + 0.5 * r * s - delta,
            0.25 - 0.5 * r * s - delta,
        ])

    def value(delta: float) -> float:
        return float(lemma5_value_rows(np.clip(weights(delta), 0.0, None)))

    delta_star = 0.25 * r**2 * (c**2 - s**2)
    lam = weights(delta_star)
    f_star = value(delta_star)
    smallest = float(lam.min())
    result = {
        "R": r,
        "theta": theta,
        "delta_star": delta_star,
        "lambda": np.clip(lam, 0.0, None).tolist(),
        "F": f_star,
    }
    if smallest <= 1e-12:
        result.update(edge=True, derivative=None, analytic_derivative=None, second_difference=None, success=True)
        return result

    h = 1e-3 * smallest
    derivative = (-value(delta_star + 2 * h) + 8 * value(delta_star + h)
                  - 8 * value(delta_star - h) + value(delta_star - 2 * h)) / (12 * h)
    second = value(delta_star + h) - 2 * f_star + value(delta_star - h)
    logs = np.log2(lam)
    analytic = float(-logs[0] - logs[1] + logs[2] + logs[3])
    result.update(
        edge=False,
        derivative=derivative,
        analytic_derivative=analytic,
        second_difference=second,
        success=abs(derivative) <= 1e-8 and second < 0.0,
    )
    return result


def delta_star_sweep(samples: int, seed: int, reach: float = 0.95) -> dict:
    """δ* maximality at random θ and R up to ``reach`` of the domain edge 1/(|cos θ| + |sin θ|)."""
    if samples < 1:
        raise DomainError(f"samples must be positive, got {samples}")
    rng = block_generator(seed, 0)
    thetas = rng.uniform(0.0, 2.0 * math.pi, size=samples)
    fractions = rng.uniform(0.0, reach, size=samples)
    violations = []
    for theta, frac in zip(thetas, fractions):
        r = float(frac / (abs(math.cos(theta)) + abs(math.sin(theta))))
        check = delta_star_maximality_check(r, float(theta))
        if check["success"]:
            continue
        params = {"R": r, "theta": float(theta)}
        if abs(check["derivative"]) > 1e-8:
            violations.append(_violation("delta_star_stationary", params, abs(check["derivative"]), 1e-8))
        if check["second_difference"] >= 0.0:
            violations.append(_violation("delta_star_concave", params, check["second_difference"], 0.0))
    return _report("delta_star", samples, seed, samples, violations, reach=reach)


# ─── χ ≤ F(S) end to end ─────────────────────────────────────────────────────

def theorem1_sweep(
    samples: int,
    phi_grid: int,
    seed: int,
    mixtures: int = 500,
    block_size: int = Config.default_block_size,
) -> dict:
    """χ_λ(φ) ≤ F(S_λ) on sampled ordered λ and a φ grid over [0, π], plus the convexity chain on mixtures."""
    if samples < 1 or phi_grid < 1:
        raise DomainError(f"samples and phi_grid must be positive, got {samples}, {phi_grid}")
    slack = Config.bound_slack
    phis = np.linspace(0.0, math.pi, phi_grid)
    rows_per_block = max(1, block_size // phi_grid)
    violations = []

    for block, count in block_sizes(samples, rows_per_block):
        lam = sample_ordered_lambdas(block_generator(seed, block), count)
        s = chsh_max_belldiag_rows(lam)
        bound = holevo_bound_di(s)
        chi = chi_rows(lam, phis)
        for k, j in zip(*np.nonzero(chi > bound[:, None] + slack)):
            violations.append(_violation(
                "theorem1_bound",
                {"lambda": lam[k].tolist(), "phi": float(phis[j]), "S": float(s[k])},
                chi[k, j],
                bound[k],
            ))
        for k in np.flatnonzero(chi.max(axis=1) > chi[:, 0] + 1e-12):
            violations.append(_violation(
                "theorem1_phi_zero_optimal", {"lambda": lam[k].tolist()}, chi[k].max(), chi[k, 0]
            ))

    for block, count in block_sizes(mixtures, block_size):
        rng = block_generator(seed, _MIXTURE_STREAM + block)
        components = sample_ordered_lambdas(rng, count * _MAX_COMPONENTS).reshape(count, _MAX_COMPONENTS, 4)
        sizes = rng.integers(1, _MAX_COMPONENTS + 1, size=count)
        weights = rng.exponential(size=(count, _MAX_COMPONENTS)) * (np.arange(_MAX_COMPONENTS) < sizes[:, None])
        weights /= weights.sum(axis=1, keepdims=True)

        flat = components.reshape(-1, 4)
        chi0 = chi_rows(flat, [0.0])[:, 0].reshape(count, _MAX_COMPONENTS)
        s = chsh_max_belldiag_rows(flat).reshape(count, _MAX_COMPONENTS)
        mixed_chi = np.sum(weights * chi0, axis=1)
        mixed_bound = np.sum(weights * holevo_bound_di(s), axis=1)
        bound_of_mean = holevo_bound_di(np.sum(weights * s, axis=1))
        for k in np.flatnonzero(mixed_chi > mixed_bound + slack):
            violations.append(_violation(
                "theorem1_mixture", {"weights": weights[k].tolist()}, mixed_chi[k], mixed_bound[k]
            ))
        for k in np.flatnonzero(mixed_bound > bound_of_mean + slack):
            violations.append(_violation(
                "theorem1_concavity", {"weights": weights[k].tolist()}, mixed_bound[k], bound_of_mean[k]
            ))

    return _report(
        "theorem1",
        samples,
        seed,
        samples * phi_grid + mixtures,
        violations,
        phi_grid=phi_grid,
        mixtures=mixtures,
    )


# ─── Closed-form vs constructive Eve spectrum ────────────────────────────────

def spectrum_sweep(samples: int, seed: int) -> dict:
    if samples < 1:
        raise DomainError(f"samples must be positive, got {samples}")
    tol = Config.reconstruction_tol
    violations = []
    for i in range(samples):
        rng = block_generator(seed, i)
        lam = sample_ordered_lambdas(rng, 1)[0]
        phi = float(rng.uniform(0.0, math.pi))
        state = BellDiagonalState(lam, ordered=True)
        lam_plus = float(lambda_plus_rows(lam, phi))
        expected = np.array([lam_plus, 1.0 - lam_plus, 0.0, 0.0])
        spectra = {}
        for outcome in (1, -1):
            vals, _ = qmath.hermitian_eigensystem(conditional_eve_state(state, phi, outcome).mat)
            spectra[outcome] = vals
            gap = float(np.max(np.abs(vals - expected)))
            if gap > tol:
                violations.append(_violation(
                    "spectrum_closed_form", {"lambda": lam.tolist(), "phi": phi, "outcome": outcome}, gap, tol
                ))
        gap = float(np.max(np.abs(spectra[1] - spectra[-1])))
        if gap > tol:
            violations.append(_violation("spectrum_outcome_independent", {"lambda": lam.tolist(), "phi": phi}, gap, tol))
    return _report("spectrum", samples, seed, samples, violations)


# ─── Suite dispatch ──────────────────────────────────────────────────────────

def run_suite(suite: str, samples: int, seed: int, phi_grid: int = Config.verify_phi_grid) -> list[dict]:
    """Run one named suite (or ``all``) and return its reports."""
    if suite == "all":
        return [report for name in SUITES for report in run_suite(name, samples, seed, phi_grid)]
    if suite == "lemma5":
        return [lemma5_inequality_sweep(samples, seed)]
    if suite == "delta_star":
        return [delta_star_sweep(samples, seed)]
    if suite == "theorem1":
        return [theorem1_sweep(samples, phi_grid, seed)]
    if suite == "blocks":
        return [blocks_roundtrip_sweep(samples, seed)]
    if suite == "reduction":
        return [reduction_sweep(samples, seed)]
    if suite == "spectrum":
        return [spectrum_sweep(samples, seed)]
    raise DomainError(f"unknown verification suite {suite!r}; choose from {', '.join(SUITES + ('all',))}")
