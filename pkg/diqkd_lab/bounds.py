"""Bounds — Holevo-information bounds, Devetak-Winter key rates and threshold curves.

All rates are one-way Devetak-Winter rates r = I(A0:B1) − χ(B1:E) in bits per
raw-key bit, evaluated in the asymptotic limit. Negative rates are returned as
they are.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Optional, Union

import numpy as np
from scipy.optimize import bisect

from diqkd_lab.common.config import Config
from diqkd_lab.common.errors import DomainError, InconsistentParametersError
from diqkd_lab.common.formatting import format_key_value, format_sig, write_csv
from diqkd_lab.qmath import binary_entropy

logger = logging.getLogger(__name__)

CURVE_CSV_HEADER = ("x", "Q", "S", "chi", "rate")


# ─── Scenarios and reports ───────────────────────────────────────────────────

class ScenarioKind(str, Enum):
    DEVICE_INDEPENDENT = "device_independent"
    STANDARD = "standard"
    DETECTION_EFFICIENCY = "detection_efficiency"
    PARTIAL_KNOWLEDGE = "partial_knowledge"


@dataclass(frozen=True)
class Scenario:
    kind: ScenarioKind
    eta: Optional[float] = None
    q: Optional[float] = None

    def __post_init__(self):
        if self.eta is not None and not 0.0 <= self.eta <= 1.0:
            raise DomainError(f"detection efficiency must lie in [0, 1], got {self.eta}")
        if self.kind is ScenarioKind.PARTIAL_KNOWLEDGE:
            if self.q is None or not 0.0 <= self.q < 1.0:
                raise DomainError(f"setting-knowledge probability q must lie in [0, 1), got {self.q}")

    @classmethod
    def device_independent(cls) -> "Scenario":
        return cls(ScenarioKind.DEVICE_INDEPENDENT)

    @classmethod
    def standard(cls) -> "Scenario":
        return cls(ScenarioKind.STANDARD)

    @classmethod
    def detection_efficiency(cls, eta: Optional[float] = None) -> "Scenario":
        return cls(ScenarioKind.DETECTION_EFFICIENCY, eta=eta)

    @classmethod
    def partial_knowledge(cls, q: float) -> "Scenario":
        return cls(ScenarioKind.PARTIAL_KNOWLEDGE, q=q)

    @property
    def label(self) -> str:
        if self.kind is ScenarioKind.DETECTION_EFFICIENCY and self.eta is not None:
            return f"{self.kind.value}(eta={format_sig(self.eta)})"
        if self.kind is ScenarioKind.PARTIAL_KNOWLEDGE:
            return f"{self.kind.value}(q={format_sig(self.q)})"
        return self.kind.value


@dataclass(frozen=True)
class RateReport:
    qber: float
    chsh: float
    mutual_information: float
    chi_bound: float
    rate: float
    scenario: Scenario
    exact: bool = True
    n_rounds: Optional[int] = None
    qber_stderr: Optional[float] = None
    chsh_stderr: Optional[float] = None
    seed: Optional[int] = None

    @property
    def secure(self) -> bool:
        return self.rate > 0.0

    def to_text(self) -> str:
        lines = [
            format_key_value("scenario", self.scenario.label),
            format_key_value("provenance", "exact" if self.exact else "estimated"),
            format_key_value("Q", self.qber),
            format_key_value("S", self.chsh),
            format_key_value("I_AB", self.mutual_information),
            format_key_value("chi_bound", self.chi_bound),
            format_key_value("r_DW", self.rate),
        ]
        if not self.exact:
            lines += [
                format_key_value("n", self.n_rounds),
                format_key_value("Q_stderr", self.qber_stderr),
                format_key_value("S_stderr", self.chsh_stderr),
                format_key_value("seed", self.seed),
            ]
        return "\n".join(lines)


# ─── Holevo bounds ───────────────────────────────────────────────────────────

def _f_of_s(s: np.ndarray) -> np.ndarray:
    s = np.minimum(s, Config.tsirelson)
    radicand = np.clip((s / 2.0) ** 2 - 1.0, 0.0, 1.0)
    value = binary_entropy((1.0 + np.sqrt(radicand)) / 2.0)
    return np.where(s <= Config.local_bound, 1.0, value)


def holevo_bound_di(s):
    """F(S) = h((1 + √((S/2)² − 1))/2), with F := 1 for S ≤ 2.

    Accepts a scalar or an array. Values above 2√2 are clamped inside a 1e-9
    slack and rejected beyond it.
    """
    arr = np.asarray(s, dtype=float)
    if np.any(np.isnan(arr)):
        raise DomainError("CHSH value is NaN")
    if np.any(arr > Config.tsirelson + Config.tsirelson_slack):
        raise DomainError(f"CHSH value {s!r} exceeds the quantum maximum 2√2")
    out = _f_of_s(arr)
    return float(out) if out.ndim == 0 else out


def holevo_bound_standard(qber: float, s: float) -> float:
    """h(Q + S/2√2): the bound when Alice's and Bob's devices are trusted qubit measurements."""
    x = qber + s / Config.tsirelson
    if not -Config.binary_entropy_slack <= x <= 1.0 + Config.binary_entropy_slack:
        raise DomainError(f"Q + S/2√2 = {x!r} lies outside [0, 1]")
    return binary_entropy(x)


def partial_knowledge_bound(q: float, s_observed: float) -> float:
    """χ when Eve fixes both settings (and outcomes) with probability q."""
    if not 0.0 <= q < 1.0:
        raise DomainError(f"q must lie in [0, 1), got {q}")
    if s_observed > Config.algebraic_bound + Config.tsirelson_slack:
        raise DomainError(f"observed CHSH value {s_observed} exceeds the algebraic limit 4")
    s_prime = (s_observed - 4.0 * q) / (1.0 - q)
    if s_prime > Config.tsirelson + Config.tsirelson_slack:
        raise InconsistentParametersError(
            f"observed S={s_observed} is not achievable with q={q}: quantum part would need S'={s_prime:.12g}"
        )
    if s_prime <= Config.local_bound:
        return 1.0
    return q + (1.0 - q) * holevo_bound_di(s_prime)


def partial_knowledge_critical_q(s_observed: float) -> float:
    """Smallest q at which the quantum part S' drops to the local bound 2."""
    return max(0.0, (s_observed - Config.local_bound) / 2.0)


def chi_bound(qber: float, s: float, scenario: Scenario) -> float:
    if scenario.kind is ScenarioKind.STANDARD:
        return holevo_bound_standard(qber, s)
    if scenario.kind is ScenarioKind.PARTIAL_KNOWLEDGE:
        return partial_knowledge_bound(scenario.q, s)
    return holevo_bound_di(s)


# ─── Key rates ───────────────────────────────────────────────────────────────

def keyrate(
    qber: float,
    s: float,
    scenario: Optional[Scenario] = None,
    mutual_information: Optional[float] = None,
) -> RateReport:
    """Devetak-Winter rate for observed (Q, S).

    ``mutual_information`` defaults to 1 − h(Q), the value for symmetrized
    marginals.
    """
    if not -Config.binary_entropy_slack <= qber <= 0.5 + Config.binary_entropy_slack:
        raise DomainError(f"QBER must lie in [0, 1/2], got {qber}")
    scenario = scenario or Scenario.device_independent()
    info = 1.0 - binary_entropy(qber) if mutual_information is None else float(mutual_information)
    chi = chi_bound(qber, s, scenario)
    return RateReport(float(qber), float(s), info, chi, info - chi, scenario)


def werner_line(qber: float) -> float:
    """S on the Werner family for a given QBER: 2√2(1 − 2Q)."""
    return Config.tsirelson * (1.0 - 2.0 * qber)


def werner_correlations(p: float) -> tuple[float, float]:
    """(Q, S) of the Werner state with visibility p under the protocol measurements."""
    return (1.0 - p) / 2.0, Config.tsirelson * p


def detection_efficiency_statistics(eta: float) -> tuple[float, float]:
    """(Q, S) of ideal devices when no-clicks are mapped to −1."""
    if not 0.0 <= eta <= 1.0:
        raise DomainError(f"detection efficiency must lie in [0, 1], got {eta}")
    return eta * (1.0 - eta), Config.tsirelson * eta**2 + 2.0 * (1.0 - eta) ** 2


def detection_efficiency_rate(eta: float) -> RateReport:
    qber, s = detection_efficiency_statistics(eta)
    return keyrate(qber, s, Scenario.detection_efficiency(eta))


# ─── Thresholds ──────────────────────────────────────────────────────────────

def _zero_crossing(f: Callable[[float], float], lo: float, hi: float, label: str) -> float:
    f_lo, f_hi = f(lo), f(hi)
    if f_lo == 0.0:
        return lo
    if abs(f_hi) <= Config.binary_entropy_slack:
        return hi
    if math.copysign(1.0, f_lo) == math.copysign(1.0, f_hi):
        raise DomainError(f"key rate has no sign change for {label} in [{lo}, {hi}]")
    return float(bisect(f, lo, hi, xtol=Config.threshold_xtol))


def qber_threshold(
    scenario: Optional[Scenario] = None,
    relation: Callable[[float], float] = werner_line,
) -> float:
    """QBER at which the key rate crosses zero, with S = relation(Q)."""
    scenario = scenario or Scenario.device_independent()
    q_crit = _zero_crossing(lambda q: keyrate(q, relation(q), scenario).rate, 0.0, 0.5, "QBER")
    logger.info("QBER threshold for %s: %.6f", scenario.label, q_crit)
    return q_crit


def detection_efficiency_threshold(lo: float = 0.5, hi: float = 1.0) -> float:
    eta_crit = _zero_crossing(lambda eta: detection_efficiency_rate(eta).rate, lo, hi, "eta")
    logger.info("detection-efficiency threshold: %.6f", eta_crit)
    return eta_crit


# ─── Curves ──────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class CurveRow:
    x: float
    qber: float
    chsh: float
    chi: float
    rate: float


def curve(
    scenario: Scenario,
    start: float,
    stop: float,
    steps: int,
    relation: Callable[[float], float] = werner_line,
) -> list[CurveRow]:
    """Tabulate the key rate over a sweep.

    The swept variable is η for the detection-efficiency scenario and Q
    otherwise (with S = relation(Q)). A zero-width range yields one row.
    """
    if steps < 1:
        raise DomainError(f"steps must be positive, got {steps}")
    xs = [float(start)] if start == stop else np.linspace(start, stop, steps).tolist()
    rows = []
    for x in xs:
        if scenario.kind is ScenarioKind.DETECTION_EFFICIENCY:
            qber, s = detection_efficiency_statistics(x)
            report = keyrate(qber, s, Scenario.detection_efficiency(x))
        else:
            report = keyrate(x, relation(x), scenario)
        rows.append(CurveRow(x, report.qber, report.chsh, report.chi_bound, report.rate))
    return rows


def curve_zero_crossing(rows: list[CurveRow]) -> Optional[float]:
    """Linear interpolation of the first sign change of the rate, if any."""
    for prev, cur in zip(rows, rows[1:]):
        if prev.rate == 0.0:
            return prev.x
        if (prev.rate > 0.0) != (cur.rate > 0.0):
            frac = prev.rate / (prev.rate - cur.rate)
            return prev.x + frac * (cur.x - prev.x)
    return None


def write_curve_csv(rows: list[CurveRow], path: Union[Path, str]) -> Path:
    return write_csv(
        path,
        CURVE_CSV_HEADER,
        ([format_sig(r.x), format_sig(r.qber), format_sig(r.chsh), format_sig(r.chi), format_sig(r.rate)] for r in rows),
    )


def gnuplot_script(csv_path: Union[Path, str], xlabel: str, title: str) -> str:
    return "\n".join([
        "set datafile separator ','",
        f"set title '{title}'",
        f"set xlabel '{xlabel}'",
        "set ylabel 'key rate r (bits)'",
        "set grid",
        "set key off",
        "set yzeroaxis",
        f"plot '{Path(csv_path).name}' using 1:5 every ::1 with lines lw 2",
        "",
    ])
