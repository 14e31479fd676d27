"""Find switch-on events in a per-appliance power trace and cut startup segments.

A kettle is simulated as a 1 Hz power series alongside a 2 kHz aggregate
current/voltage stream.  The hysteresis detector marks ON/OFF transitions
and each ON timestamp selects a 0.5 s segment from the aggregate stream.
"""

import numpy as np

from nilmrec.core import make_context, make_rng
from nilmrec.events import default_thresholds, detect_events, extract_segment
from nilmrec.features import rms25
from nilmrec.ingest import ApplianceSignature, PowerSeries, mains_voltage, synthesize_current

rng = make_rng(2024, "demo-events")
ctx = make_context(2000, 50, 0.5)

# %% power trace: two kettle runs with sensor noise
seconds = 120
power = rng.normal(0, 2, seconds).clip(0)
for start, stop in ((20, 55), (80, 96)):
    power[start:stop] += 2200 + rng.normal(0, 30, stop - start)
series = PowerSeries(np.arange(seconds, dtype=float), power)

th = default_thresholds("kettle")
events = detect_events(series, th)
print(f"kettle thresholds: on {th.on:g} W, off {th.off:g} W")
for e in events:
    print(f"  {e.kind.value:3s} at t = {e.timestamp:5.1f} s")

# %% aggregate stream: background load plus the kettle after each ON event
n = seconds * ctx.f_s
t = np.arange(n) / ctx.f_s
voltage = 325.0 * np.sin(2 * np.pi * ctx.f_0 * t)
current = 0.4 * np.sin(2 * np.pi * ctx.f_0 * t - 0.3)
kettle = ApplianceSignature("kettle", steady_amplitude=13.5, inrush_ratio=1.05)
for e in events:
    if e.kind.value == "ON":
        i0 = int(e.timestamp * ctx.f_s)
        current[i0:i0 + ctx.samples_per_segment] += synthesize_current(kettle, ctx)

# %% one segment per switch-on
for e in events:
    if e.kind.value != "ON":
        continue
    seg = extract_segment(current, voltage, ctx, e.timestamp)
    r = rms25(seg).values
    print(f"segment at {e.timestamp:.0f} s: {seg.current.size} samples, "
          f"cycle RMS {r[0]:.2f} A -> {r[-1]:.2f} A")
assert mains_voltage(ctx).shape == (ctx.samples_per_segment,)
