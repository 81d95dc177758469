"""Quantum math — small dense Hermitian linear algebra and entropy primitives.

Everything downstream (CHSH analytics, Eve's conditional states, the proof
checks) works on matrices of dimension 16 or less, so the routines here favour
exact validation over speed: every state is checked against the density-matrix
invariants on construction and every eigensystem is returned in a fixed,
reproducible order.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from diqkd_lab.common.config import Config
from diqkd_lab.common.errors import DomainError, NumericFailure, PreconditionError

logger = logging.getLogger(__name__)

ComplexMatrix = NDArray[np.complex128]


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


# ─── Constants ───────────────────────────────────────────────────────────────

SIGMA_I = _frozen(np.eye(2, dtype=complex))
SIGMA_X = _frozen(np.array([[0, 1], [1, 0]], dtype=complex))
SIGMA_Y = _frozen(np.array([[0, -1j], [1j, 0]], dtype=complex))
SIGMA_Z = _frozen(np.array([[1, 0], [0, -1]], dtype=complex))
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)

# Global Bell basis order: Φ+, Ψ−, Φ−, Ψ+ (columns, computational basis rows).
BELL_LABELS = ("phi_plus", "psi_minus", "phi_minus", "psi_plus")
_R = 1.0 / math.sqrt(2.0)
BELL_BASIS = _frozen(
    np.array(
        [
            [_R, 0, _R, 0],
            [0, _R, 0, _R],
            [0, -_R, 0, _R],
            [_R, 0, -_R, 0],
        ],
        dtype=complex,
    )
)

_TIE_TOL = 1e-12
_PHASE_TOL = 1e-8


# ─── Matrix helpers ──────────────────────────────────────────────────────────

def as_matrix(m: ArrayLike) -> ComplexMatrix:
    mat = np.asarray(m, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] == 0:
        raise PreconditionError(f"expected a non-empty square matrix, got shape {mat.shape}")
    if not np.all(np.isfinite(mat)):
        raise PreconditionError("matrix has non-finite entries")
    return mat


def hermiticity_error(m: ArrayLike) -> float:
    mat = as_matrix(m)
    return float(np.max(np.abs(mat - mat.conj().T)))


def is_hermitian(m: ArrayLike, tol: float = Config.hermitian_tol) -> bool:
    return hermiticity_error(m) <= tol


def basis_vector(index: int, dim: int) -> NDArray[np.complex128]:
    if not 0 <= index < dim:
        raise DomainError(f"basis index {index} outside dimension {dim}")
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def bell_state(k: int) -> NDArray[np.complex128]:
    return BELL_BASIS[:, k].copy()


def bell_projector(k: int) -> ComplexMatrix:
    v = BELL_BASIS[:, k]
    return np.outer(v, v.conj())


def bloch_observable(n: ArrayLike) -> ComplexMatrix:
    """Observable n·σ for a unit Bloch vector n."""
    vec = np.asarray(n, dtype=float)
    if vec.shape != (3,):
        raise PreconditionError(f"Bloch vector must have 3 components, got shape {vec.shape}")
    norm = float(np.linalg.norm(vec))
    if abs(norm - 1.0) > Config.observable_tol:
        raise PreconditionError(f"Bloch vector must be a unit vector, |n| = {norm}")
    return vec[0] * SIGMA_X + vec[1] * SIGMA_Y + vec[2] * SIGMA_Z


def as_observable(a: ArrayLike) -> ComplexMatrix:
    """Validate a ±1-valued observable (Hermitian, squares to identity)."""
    mat = as_matrix(a)
    if not is_hermitian(mat, Config.observable_tol):
        raise PreconditionError("observable is not Hermitian")
    residual = float(np.max(np.abs(mat @ mat - np.eye(mat.shape[0]))))
    if residual > Config.observable_tol:
        raise PreconditionError(f"observable does not square to identity (residual {residual:.3e})")
    out = 0.5 * (mat + mat.conj().T)
    return _frozen(out)


def observable_projectors(a: ArrayLike) -> tuple[ComplexMatrix, ComplexMatrix]:
    """Eigenprojectors (Π₊, Π₋) of a ±1 observable."""
    mat = as_observable(a)
    ident = np.eye(mat.shape[0], dtype=complex)
    return 0.5 * (ident + mat), 0.5 * (ident - mat)


# ─── Eigensystems ────────────────────────────────────────────────────────────

def _fix_phases(vecs: ComplexMatrix) -> ComplexMatrix:
    out = vecs.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        idx = int(np.argmax(np.abs(col) > _PHASE_TOL))
        pivot = col[idx]
        if abs(pivot) > 0:
            out[:, k] = col * (np.conj(pivot) / abs(pivot))
    return out


def _lex_key(v: np.ndarray) -> tuple:
    pairs = np.round(np.column_stack([v.real, v.imag]).ravel(), 12)
    return tuple(pairs.tolist())


def _descending_order(vals: np.ndarray, vecs: ComplexMatrix) -> np.ndarray:
    order = list(np.argsort(-vals, kind="stable"))
    result: list[int] = []
    i = 0
    while i < len(order):
        j = i + 1
        while j < len(order) and abs(vals[order[i]] - vals[order[j]]) <= _TIE_TOL:
            j += 1
        group = order[i:j]
        if len(group) > 1:
            group = sorted(group, key=lambda k: _lex_key(vecs[:, k]))
        result.extend(group)
        i = j
    return np.array(result, dtype=int)


def hermitian_eigensystem(m: ArrayLike) -> tuple[NDArray[np.float64], ComplexMatrix]:
    """Eigenvalues (descending) and orthonormal eigenvectors (columns) of a Hermitian matrix.

    Eigenvectors are phase-fixed so the first non-negligible component is real
    positive; degenerate eigenvalues are ordered by eigenvector lexicographic
    order, which makes the output reproducible for identical inputs.
    """
    mat = as_matrix(m)
    err = hermiticity_error(mat)
    if err > Config.hermitian_tol:
        raise PreconditionError(f"matrix is not Hermitian (max|M - M†| = {err:.3e})")
    try:
        vals, vecs = np.linalg.eigh(0.5 * (mat + mat.conj().T))
    except np.linalg.LinAlgError as e:
        raise NumericFailure(f"Hermitian eigensolver did not converge: {e}") from e
    vecs = _fix_phases(vecs)
    order = _descending_order(vals, vecs)
    return vals[order], vecs[:, order]


# ─── Density matrices and probability vectors ────────────────────────────────

def as_probability_vector(p: ArrayLike) -> NDArray[np.float64]:
    arr = np.asarray(p, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise DomainError(f"probability vector must be 1-D and non-empty, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError("probability vector has non-finite entries")
    if np.any(arr < -Config.probability_tol):
        raise DomainError(f"probability vector has negative entries: {arr.tolist()}")
    total = float(arr.sum())
    if abs(total - 1.0) > Config.probability_tol:
        raise DomainError(f"probability vector sums to {total!r}, not 1")
    return _frozen(np.clip(arr, 0.0, None))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace matrix (read-only buffer)."""

    mat: ComplexMatrix

    def __post_init__(self):
        mat = as_matrix(self.mat)
        err = hermiticity_error(mat)
        if err > Config.hermitian_tol:
            raise PreconditionError(f"density matrix is not Hermitian (max|M - M†| = {err:.3e})")
        herm = 0.5 * (mat + mat.conj().T)
        trace = float(np.trace(herm).real)
        if abs(trace - 1.0) > Config.trace_tol:
            raise DomainError(f"density matrix trace is {trace!r}, not 1")
        try:
            min_eig = float(np.linalg.eigvalsh(herm)[0])
        except np.linalg.LinAlgError as e:
            raise NumericFailure(f"eigenvalue check failed: {e}") from e
        if min_eig < -Config.psd_tol:
            raise DomainError(f"density matrix is not positive semidefinite (min eigenvalue {min_eig:.3e})")
        object.__setattr__(self, "mat", _frozen(herm))

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.mat, dtype=dtype)

    def eigenvalues(self) -> NDArray[np.float64]:
        return np.sort(np.linalg.eigvalsh(self.mat))[::-1]

    @classmethod
    def from_vector(cls, psi: ArrayLike) -> "DensityMatrix":
        vec = np.asarray(psi, dtype=complex).ravel()
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:
            raise DomainError("cannot build a state from the zero vector")
        vec = vec / norm
        return cls(np.outer(vec, vec.conj()))

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityMatrix":
        return cls(np.eye(dim, dtype=complex) / dim)


StateLike = Union[DensityMatrix, ArrayLike]


def as_density_matrix(rho: StateLike) -> DensityMatrix:
    if isinstance(rho, DensityMatrix):
        return rho
    return DensityMatrix(np.asarray(rho, dtype=complex))


# ─── Entropies ───────────────────────────────────────────────────────────────

def _neg_plogp(x: np.ndarray) -> np.ndarray:
    keep = x > Config.entropy_clamp
    safe = np.where(keep, x, 1.0)
    return np.where(keep, -x * np.log2(safe), 0.0)


def binary_entropy(p):
    """h(p) = −p log₂ p − (1−p) log₂(1−p); accepts a scalar or an array."""
    arr = np.asarray(p, dtype=float)
    slack = Config.binary_entropy_slack
    if not np.all(np.isfinite(arr)) or np.any(arr < -slack) or np.any(arr > 1.0 + slack):
        raise DomainError(f"binary entropy argument outside [0, 1]: {p!r}")
    arr = np.clip(arr, 0.0, 1.0)
    h = _neg_plogp(arr) + _neg_plogp(1.0 - arr)
    return float(h) if h.ndim == 0 else h


def shannon_entropy(p: ArrayLike) -> float:
    vec = as_probability_vector(p)
    return float(np.sum(_neg_plogp(vec)))


def shannon_entropy_rows(p: ArrayLike) -> NDArray[np.float64]:
    """Row-wise Shannon entropy of a stack of distributions along the last axis (unchecked)."""
    arr = np.clip(np.asarray(p, dtype=float), 0.0, None)
    return np.sum(_neg_plogp(arr), axis=-1)


def von_neumann_entropy(rho: StateLike) -> float:
    state = as_density_matrix(rho)
    vals = np.linalg.eigvalsh(state.mat)
    vals = np.clip(vals, 0.0, None)
    vals = vals / vals.sum()
    return float(np.sum(_neg_plogp(vals)))


def mutual_information(joint: ArrayLike) -> float:
    """I(A:B) = H(A) + H(B) − H(AB) for a 2-D joint distribution."""
    table = np.asarray(joint, dtype=float)
    if table.ndim != 2:
        raise DomainError(f"joint distribution must be 2-D, got shape {table.shape}")
    flat = as_probability_vector(table.ravel())
    table = flat.reshape(table.shape)
    return (
        shannon_entropy(table.sum(axis=1))
        + shannon_entropy(table.sum(axis=0))
        - shannon_entropy(flat)
    )


# ─── Partial trace and purification ──────────────────────────────────────────

def partial_trace(
    rho: StateLike,
    subsystem: Union[int, Iterable[int]],
    dims: Sequence[int],
) -> DensityMatrix:
    """Trace out one factor (or several) of a tensor-product state.

    ``dims`` lists the factor dimensions in tensor order; ``subsystem`` is the
    index (or indices) of the factors to remove.
    """
    state = as_density_matrix(rho)
    dims = tuple(int(d) for d in dims)
    if not dims or any(d <= 0 for d in dims):
        raise DomainError(f"invalid subsystem dimensions {dims}")
    if math.prod(dims) != state.dim:
        raise DomainError(f"dimensions {dims} do not match state dimension {state.dim}")
    traced = {int(subsystem)} if isinstance(subsystem, (int, np.integer)) else {int(k) for k in subsystem}
    if any(k < 0 or k >= len(dims) for k in traced):
        raise DomainError(f"subsystem index out of range for dims {dims}: {sorted(traced)}")

    t = state.mat.reshape(dims + dims)
    for k in sorted(traced, reverse=True):
        t = np.trace(t, axis1=k, axis2=k + t.ndim // 2)
    kept = math.prod(d for i, d in enumerate(dims) if i not in traced)
    return DensityMatrix(t.reshape(kept, kept))


def purify(rho: StateLike, full_rank: bool = False) -> NDArray[np.complex128]:
    """Purification |ψ⟩ = Σ_k √p_k |v_k⟩|k⟩ on system ⊗ ancilla.

    The ancilla dimension equals the rank of ``rho`` unless ``full_rank`` is
    set, in which case it equals the system dimension.
    """
    state = as_density_matrix(rho)
    vals, vecs = hermitian_eigensystem(state.mat)
    vals = np.clip(vals, 0.0, None)
    if full_rank:
        keep = np.ones(vals.size, dtype=bool)
    else:
        keep = vals > Config.psd_tol
        if not keep.any():
            raise NumericFailure("state has no eigenvalue above the PSD tolerance")
    psi = (vecs[:, keep] * np.sqrt(vals[keep])).reshape(-1)
    return psi / np.linalg.norm(psi)
