from __future__ import annotations

import csv
from datetime import datetime
from pathlib import Path
from typing import Iterable, Optional, Sequence

import pytz

from .config import Config

_tz = pytz.timezone(Config.timezone)


def now_local() -> datetime:
    return datetime.now(_tz)


def format_timestamp(dt: Optional[datetime] = None, fmt: str = "%d %b %Y %H:%M %Z") -> str:
    if dt is None:
        dt = now_local()
    elif dt.tzinfo is None:
        dt = _tz.localize(dt)
    return dt.strftime(fmt)


def format_section_header(title: str) -> str:
    return f"== {title} =="


def format_bits(value: float, decimals: int = 6) -> str:
    """Format an information quantity in bits, keeping the sign of negative rates."""
    return f"{value:+.{decimals}f} bits" if value < 0 else f"{value:.{decimals}f} bits"


def format_sig(value: float, digits: int = Config.csv_sig_digits) -> str:
    """Decimal with a fixed number of significant digits, as used in CSV artifacts."""
    return f"{float(value):.{digits}g}"


def format_key_value(key: str, value) -> str:
    if isinstance(value, float):
        value = format_sig(value, 15)
    return f"{key}={value}"


def write_csv(path: Path | str, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)
    return path
