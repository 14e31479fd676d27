"""Switch-on/off detection on per-appliance power and segment extraction."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import EventSegment, SamplingContext
from .errors import FormatError, OutOfRange, UnknownAppliance
from .ingest import PowerSeries


class EventKind(str, enum.Enum):
    ON = "ON"
    OFF = "OFF"


@dataclass(frozen=True)
class EventThresholds:
    """Switch-on threshold ``on`` and switch-off threshold ``off`` in watts."""

    on: float
    off: float

    def __post_init__(self):
        if not (self.on > self.off >= 0):
            raise ValueError(f"thresholds must satisfy on > off >= 0, got {self.on}/{self.off}")


@dataclass(frozen=True)
class DetectedEvent:
    kind: EventKind
    timestamp: float


# UK-DALE house 1 thresholds (W), plus the single-threshold office setting
# whose off level is lowered to 20 W to keep a hysteresis band.
BUILTIN_THRESHOLDS: dict[str, tuple[float, float]] = {
    "boiler": (70, 20),
    "solar_thermal_pump": (40, 20),
    "laptop": (20, 2),
    "washing_machine": (1500, 1),
    "dishwasher": (100, 20),
    "tv": (70, 10),
    "kitchen_lights": (70, 20),
    "htpc": (70, 20),
    "kettle": (2000, 10),
    "toaster": (1000, 10),
    "fridge": (70, 10),
    "microwave": (500, 10),
    "lcd_office": (30, 4),
    "breadmaker": (400, 20),
    "amp_livingroom": (18, 10),
    "hoover": (400, 10),
    "coffee_machine": (1000, 10),
    "hair_dryer": (100, 20),
    "straightener": (300, 5),
    "iron": (1000, 10),
    "gas_oven": (35, 10),
    "office_fan": (20, 2),
    "led_printer": (800, 3),
    "blond_default": (25, 20),
}


def normalize_name(name: str) -> str:
    return re.sub(r"[\s\-]+", "_", name.strip().lower())


def load_threshold_table(path: str | Path) -> dict[str, EventThresholds]:
    """Parse ``name, on, off`` lines; blank lines and ``#`` comments are skipped."""
    table = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 3:
            raise FormatError(f"{path}:{lineno}: expected 'name, on, off'")
        try:
            table[normalize_name(parts[0])] = EventThresholds(float(parts[1]), float(parts[2]))
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: {exc}") from exc
    return table


def default_thresholds(appliance: str,
                       overrides: dict[str, EventThresholds] | None = None) -> EventThresholds:
    key = normalize_name(appliance)
    if overrides and key in overrides:
        return overrides[key]
    try:
        on, off = BUILTIN_THRESHOLDS[key]
    except KeyError:
        raise UnknownAppliance(appliance) from None
    return EventThresholds(float(on), float(off))


def detect_events(series: PowerSeries, thresholds: EventThresholds) -> list[DetectedEvent]:
    """Hysteresis detection of ON/OFF transitions.

    The appliance starts OFF.  It turns ON at the first sample with
    ``power >= on`` and OFF again at the first later sample with
    ``power <= off``.  Values between the thresholds keep the current state.
    """
    if len(series) == 0:
        raise ValueError("empty power series")
    power, ts = series.power, series.timestamps
    # candidate crossings; the state machine jumps between them
    up = np.flatnonzero(power >= thresholds.on)
    down = np.flatnonzero(power <= thresholds.off)
    events = []
    is_on = False
    pos = 0
    while True:
        cand = down if is_on else up
        j = np.searchsorted(cand, pos)
        if j == cand.size:
            break
        pos = int(cand[j])
        is_on = not is_on
        events.append(DetectedEvent(EventKind.ON if is_on else EventKind.OFF, float(ts[pos])))
        pos += 1
    return events


def extract_segment(aggregate_current, aggregate_voltage, context: SamplingContext,
                    event_time: float, stream_start: float = 0.0) -> EventSegment:
    """Cut the startup segment beginning at the sample nearest ``event_time``."""
    cur = np.asarray(aggregate_current, dtype=np.float64)
    vol = np.asarray(aggregate_voltage, dtype=np.float64)
    if cur.shape != vol.shape or cur.ndim != 1:
        raise ValueError("current and voltage streams must be 1-D and equally long")
    n = context.samples_per_segment
    start = int(np.floor((event_time - stream_start) * context.f_s + 0.5))
    if start < 0 or start + n > cur.size:
        raise OutOfRange(f"event at {event_time} s needs samples [{start}, {start + n}) "
                         f"but the stream has {cur.size}")
    return EventSegment(cur[start:start + n], vol[start:start + n], context,
                        None, float(event_time))
