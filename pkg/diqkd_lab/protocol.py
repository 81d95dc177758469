"""Protocol — Monte-Carlo simulation of protocol rounds under a collective attack.

Every round uses the same source state and the same measurements. Rounds are
generated in fixed-size blocks, block ``k`` drawing from its own counter-based
stream, so a run is bit-identical for any number of worker threads.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import NamedTuple, Optional, Union

import numpy as np
from numpy.typing import NDArray

from diqkd_lab import qmath
from diqkd_lab.bounds import RateReport, Scenario, holevo_bound_di
from diqkd_lab.chsh import (
    PROTOCOL_PAIRS,
    CorrelationTable,
    MeasurementSet,
    born_probabilities,
    table_standard_errors,
    table_statistics,
)
from diqkd_lab.common.config import Config
from diqkd_lab.common.errors import DomainError, EstimationError
from diqkd_lab.common.formatting import write_csv
from diqkd_lab.common.rng import block_generator, block_sizes
from diqkd_lab.eve import build_attack

logger = logging.getLogger(__name__)

ROUND_LOG_CSV_HEADER = ("round", "X", "Y", "a_raw", "b_raw", "a", "b", "flip")
ROUND_LOG_FIELDS = ("x", "y", "a_raw", "b_raw", "a", "b", "flip")
NO_CLICK = 0


@dataclass(frozen=True)
class ProtocolConfig:
    """Round count, setting-pair fractions and device parameters of one run.

    ``chsh_fractions`` follows the pair order (1,1), (1,2), (2,1), (2,2) and
    defaults to an equal split of whatever ``key_fraction`` leaves.
    """

    n_rounds: int
    key_fraction: float = Config.default_key_fraction
    chsh_fractions: Optional[tuple[float, float, float, float]] = None
    eta: float = 1.0
    seed: int = 0
    symmetrize_marginals: bool = True
    workers: int = 1
    block_size: int = Config.default_block_size

    def __post_init__(self):
        if self.n_rounds < 1:
            raise DomainError(f"n_rounds must be positive, got {self.n_rounds}")
        if self.chsh_fractions is None:
            share = (1.0 - self.key_fraction) / 4.0
            object.__setattr__(self, "chsh_fractions", (share,) * 4)
        fractions = self.setting_fractions
        if fractions.size != 5 or np.any(fractions < 0.0):
            raise DomainError(f"setting fractions must be four non-negative CHSH shares plus the key share, got {fractions.tolist()}")
        if abs(float(fractions.sum()) - 1.0) > 1e-12:
            raise DomainError(f"setting fractions sum to {float(fractions.sum())!r}, not 1")
        if not 0.0 <= self.eta <= 1.0:
            raise DomainError(f"detection efficiency must lie in [0, 1], got {self.eta}")
        if not 0 <= self.seed < 1 << 64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.workers < 1:
            raise DomainError(f"workers must be positive, got {self.workers}")
        if self.block_size < 1:
            raise DomainError(f"block_size must be positive, got {self.block_size}")

    @property
    def setting_fractions(self) -> NDArray[np.float64]:
        """Probabilities of the setting pairs in PROTOCOL_PAIRS order."""
        return np.array((self.key_fraction,) + tuple(self.chsh_fractions), dtype=float)


@dataclass(frozen=True, eq=False)
class RoundLog:
    """Per-round record. Raw outcomes use 0 for a missing click; a, b are post-mapping and post-flip."""

    x: NDArray[np.int8]
    y: NDArray[np.int8]
    a_raw: NDArray[np.int8]
    b_raw: NDArray[np.int8]
    a: NDArray[np.int8]
    b: NDArray[np.int8]
    flip: NDArray[np.int8]

    def __len__(self) -> int:
        return int(self.x.size)

    @classmethod
    def concatenate(cls, parts: list["RoundLog"]) -> "RoundLog":
        return cls(*(np.concatenate([getattr(p, name) for p in parts]) for name in ROUND_LOG_FIELDS))

    def counts(self) -> dict[tuple[int, int], NDArray[np.int64]]:
        """2×2 outcome counts per setting pair, indexed like OUTCOMES."""
        out = {}
        a_idx = (self.a == -1).astype(np.int64)
        b_idx = (self.b == -1).astype(np.int64)
        for pair in PROTOCOL_PAIRS:
            mask = (self.x == pair[0]) & (self.y == pair[1])
            cells = np.bincount(2 * a_idx[mask] + b_idx[mask], minlength=4)
            out[pair] = cells.reshape(2, 2)
        return out

    def to_csv(self, path: Union[Path, str]) -> Path:
        rows = zip(
            range(len(self)),
            self.x.tolist(),
            self.y.tolist(),
            self.a_raw.tolist(),
            self.b_raw.tolist(),
            self.a.tolist(),
            self.b.tolist(),
            self.flip.tolist(),
        )
        return write_csv(path, ROUND_LOG_CSV_HEADER, rows)


class ProtocolRun(NamedTuple):
    log: RoundLog
    table: CorrelationTable
    report: RateReport


@dataclass(frozen=True, eq=False)
class _Sampler:
    """Everything a worker needs to generate one block of rounds."""

    cfg: ProtocolConfig
    cumulative_pairs: NDArray[np.float64]       # (5,)
    cumulative_cells: NDArray[np.float64]       # (5, 4) Born distributions, row-major over (a, b)
    a0_random_prob: float
    pair_x: NDArray[np.int8] = field(default_factory=lambda: np.array([p[0] for p in PROTOCOL_PAIRS], dtype=np.int8))
    pair_y: NDArray[np.int8] = field(default_factory=lambda: np.array([p[1] for p in PROTOCOL_PAIRS], dtype=np.int8))

    def block(self, block: int, count: int) -> RoundLog:
        rng = block_generator(self.cfg.seed, block)
        # Every stream is drawn whatever eta and symmetrize_marginals are.
        pair_u = rng.random(count)
        cell_u = rng.random(count)
        random_u = rng.random(count)
        random_bit = rng.integers(0, 2, size=count)
        click_a = rng.random(count)
        click_b = rng.random(count)
        flip = rng.integers(0, 2, size=count).astype(np.int8)

        pair = np.minimum(np.searchsorted(self.cumulative_pairs, pair_u, side="right"), len(PROTOCOL_PAIRS) - 1)
        cell = np.minimum((cell_u[:, None] >= self.cumulative_cells[pair]).sum(axis=1), 3)
        a = (1 - 2 * (cell // 2)).astype(np.int8)
        b = (1 - 2 * (cell % 2)).astype(np.int8)
        x = self.pair_x[pair]
        y = self.pair_y[pair]

        randomized = (x == 0) & (random_u < self.a0_random_prob)
        a = np.where(randomized, (1 - 2 * random_bit).astype(np.int8), a)

        a_raw = np.where(click_a < self.cfg.eta, a, NO_CLICK).astype(np.int8)
        b_raw = np.where(click_b < self.cfg.eta, b, NO_CLICK).astype(np.int8)
        a_mapped = np.where(a_raw == NO_CLICK, -1, a_raw).astype(np.int8)
        b_mapped = np.where(b_raw == NO_CLICK, -1, b_raw).astype(np.int8)
        if not self.cfg.symmetrize_marginals:
            flip = np.zeros(count, dtype=np.int8)
        sign = (1 - 2 * flip).astype(np.int8)
        logger.debug("protocol block %d: %d rounds", block, count)
        return RoundLog(x, y, a_raw, b_raw, a_mapped * sign, b_mapped * sign, flip)


def _pair_distributions(source: qmath.DensityMatrix, m: MeasurementSet) -> NDArray[np.float64]:
    return np.stack([
        born_probabilities(source, m.alice_observable(x), m.bob_observable(y)).ravel()
        for x, y in PROTOCOL_PAIRS
    ])


def expected_table(
    source: qmath.StateLike,
    m: MeasurementSet,
    eta: float = 1.0,
    symmetrize: bool = False,
) -> CorrelationTable:
    """Population table of the simulated devices: A0 randomization, no-click → −1, optional joint flip."""
    if not 0.0 <= eta <= 1.0:
        raise DomainError(f"detection efficiency must lie in [0, 1], got {eta}")
    state = qmath.as_density_matrix(source)
    down = np.array([0.0, 1.0])
    probs = {}
    for (x, y), flat in zip(PROTOCOL_PAIRS, _pair_distributions(state, m)):
        p = flat.reshape(2, 2)
        if x == 0 and m.a0_random_prob > 0.0:
            p = (1.0 - m.a0_random_prob) * p + m.a0_random_prob * 0.5 * np.vstack([p.sum(axis=0)] * 2)
        alice, bob = p.sum(axis=1), p.sum(axis=0)
        p = (
            eta**2 * p
            + eta * (1.0 - eta) * np.outer(alice, down)
            + (1.0 - eta) * eta * np.outer(down, bob)
            + (1.0 - eta) ** 2 * np.outer(down, down)
        )
        if symmetrize:
            p = 0.5 * (p + p[::-1, ::-1])
        probs[(x, y)] = p
    return CorrelationTable(probs)


def _key_mutual_information(table: CorrelationTable) -> float:
    return qmath.mutual_information(table.table(PROTOCOL_PAIRS[0]))


def run_protocol(source: qmath.StateLike, m: MeasurementSet, cfg: ProtocolConfig) -> ProtocolRun:
    state = qmath.as_density_matrix(source)
    fractions = cfg.setting_fractions
    cumulative_pairs = np.cumsum(fractions)
    cumulative_pairs[-1] = 1.0
    cumulative_cells = np.cumsum(_pair_distributions(state, m), axis=1)
    cumulative_cells[:, -1] = 1.0
    sampler = _Sampler(cfg, cumulative_pairs, cumulative_cells, m.a0_random_prob)

    blocks = list(block_sizes(cfg.n_rounds, cfg.block_size))
    if cfg.workers == 1:
        parts = [sampler.block(b, c) for b, c in blocks]
    else:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(lambda bc: sampler.block(*bc), blocks))
    log = RoundLog.concatenate(parts)

    counts = log.counts()
    for pair in PROTOCOL_PAIRS:
        if int(counts[pair].sum()) == 0:
            raise EstimationError(f"no rounds recorded for setting pair (X={pair[0]}, Y={pair[1]})")
    table = CorrelationTable.from_counts(counts)
    stats = table_statistics(table)
    q_err, s_err = table_standard_errors(table)

    s_for_bound = stats.chsh
    if s_for_bound > Config.tsirelson:
        logger.warning("estimated S=%.6f exceeds 2√2; bounding χ at 2√2", s_for_bound)
        s_for_bound = Config.tsirelson
    info = 1.0 - qmath.binary_entropy(stats.qber) if cfg.symmetrize_marginals else _key_mutual_information(table)
    chi = holevo_bound_di(s_for_bound)
    scenario = Scenario.detection_efficiency(cfg.eta) if cfg.eta < 1.0 else Scenario.device_independent()
    report = RateReport(
        qber=stats.qber,
        chsh=stats.chsh,
        mutual_information=info,
        chi_bound=chi,
        rate=info - chi,
        scenario=scenario,
        exact=False,
        n_rounds=cfg.n_rounds,
        qber_stderr=q_err,
        chsh_stderr=s_err,
        seed=cfg.seed,
    )
    logger.info("protocol run: n=%d Q=%.6f S=%.6f r=%.6f", cfg.n_rounds, stats.qber, stats.chsh, report.rate)
    return ProtocolRun(log, table, report)


def _marginal_bound(table: CorrelationTable, pairs: list[tuple[int, int]]) -> float:
    rounds = sum(table.n_rounds(p) for p in pairs)
    return Config.sigma_multiplier / math.sqrt(rounds)


def symmetrization_effect_check(source: qmath.StateLike, m: MeasurementSet, cfg: ProtocolConfig) -> dict:
    """Paired runs with symmetrization on and off from the same seed.

    Returns the two (Q̂, Ŝ) estimates, the key-setting marginals of both runs
    and whether the flipped run is unbiased while Q̂ and Ŝ agree.
    """
    on = run_protocol(source, m, replace(cfg, symmetrize_marginals=True))
    off = run_protocol(source, m, replace(cfg, symmetrize_marginals=False))
    k = Config.sigma_multiplier
    q_sigma = math.hypot(on.report.qber_stderr, off.report.qber_stderr)
    s_sigma = math.hypot(on.report.chsh_stderr, off.report.chsh_stderr)

    key_pairs = [p for p in PROTOCOL_PAIRS if p[0] == 0]
    b1_pairs = [p for p in PROTOCOL_PAIRS if p[1] == 1]
    result = {
        "qber_on": on.report.qber,
        "qber_off": off.report.qber,
        "chsh_on": on.report.chsh,
        "chsh_off": off.report.chsh,
        "qber_difference": abs(on.report.qber - off.report.qber),
        "chsh_difference": abs(on.report.chsh - off.report.chsh),
        "qber_tolerance": k * q_sigma,
        "chsh_tolerance": k * s_sigma,
        "alice_marginal_on": on.table.alice_marginal(0),
        "bob_marginal_on": on.table.bob_marginal(1),
        "alice_marginal_off": off.table.alice_marginal(0),
        "bob_marginal_off": off.table.bob_marginal(1),
        "alice_marginal_bound": _marginal_bound(on.table, key_pairs),
        "bob_marginal_bound": _marginal_bound(on.table, b1_pairs),
    }
    result["success"] = (
        result["qber_difference"] <= result["qber_tolerance"] + 1e-12
        and result["chsh_difference"] <= result["chsh_tolerance"] + 1e-12
        and abs(result["alice_marginal_on"]) <= result["alice_marginal_bound"]
        and abs(result["bob_marginal_on"]) <= result["bob_marginal_bound"]
    )
    return result


def attack_end_to_end(s_target: float, q_target: float, cfg: ProtocolConfig) -> dict:
    """Simulate the optimal attack and compare the estimates with the population values.

    σ is the binomial standard error at the population probabilities; χ is
    accepted inside [F(S + kσ), F(S − kσ)] since F is non-increasing.
    """
    spec = build_attack(s_target, q_target)
    run = run_protocol(spec.density, spec.measurements, cfg)
    population = expected_table(spec.density, spec.measurements, cfg.eta, cfg.symmetrize_marginals)
    expected = table_statistics(population)
    q_sigma, s_sigma = table_standard_errors(CorrelationTable(population.probabilities, run.table.counts))

    k = Config.sigma_multiplier
    s_exp = min(expected.chsh, Config.tsirelson)
    chi_low = holevo_bound_di(min(s_exp + k * s_sigma, Config.tsirelson))
    chi_high = holevo_bound_di(max(s_exp - k * s_sigma, 0.0))
    result = {
        "s_target": spec.s_target,
        "q_target": q_target,
        "qber": run.report.qber,
        "chsh": run.report.chsh,
        "qber_expected": expected.qber,
        "chsh_expected": expected.chsh,
        "qber_sigma": q_sigma,
        "chsh_sigma": s_sigma,
        "chi": run.report.chi_bound,
        "chi_expected": holevo_bound_di(s_exp),
        "chi_range": (chi_low, chi_high),
        "rate": run.report.rate,
        "report": run.report,
    }
    result["success"] = (
        abs(run.report.qber - expected.qber) <= k * q_sigma + 1e-12
        and abs(run.report.chsh - expected.chsh) <= k * s_sigma + 1e-12
        and chi_low - Config.bound_slack <= run.report.chi_bound <= chi_high + Config.bound_slack
    )
    return result
