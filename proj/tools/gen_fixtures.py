#!/usr/bin/env python3
"""Regenerates the synthetic fixtures under tests/data.

Every series uses a 5-minute interval starting 2014-02-14 00:00:00 and values
rounded to 4 decimals so the committed CSVs are stable byte-for-byte.
"""
import json
import math
import pathlib
from datetime import datetime, timedelta

import numpy as np

OUT = pathlib.Path(__file__).resolve().parent.parent / "tests" / "data"
START = datetime(2014, 2, 14)
STEP = timedelta(minutes=5)


def write_series(name, values):
    lines = ["timestamp,value"]
    for i, v in enumerate(values):
        ts = (START + i * STEP).strftime("%Y-%m-%d %H:%M:%S")
        lines.append(f"{ts},{round(float(v), 4)!r}")
    (OUT / f"{name}.csv").write_text("\n".join(lines) + "\n")


def write_labels(name, points, collectives, note):
    doc = {"points": points, "collectives": collectives, "provenance": note}
    (OUT / f"{name}.labels.json").write_text(json.dumps(doc, indent=2) + "\n")


def sine(n, period, offset, amplitude):
    i = np.arange(n)
    return offset + amplitude * np.sin(2.0 * math.pi * i / period)


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(20230510)

    # 100 points, 20 points per period, one spike of 10x the amplitude.
    v = sine(100, 20, 50.0, 10.0)
    v[60] = 50.0 + 10.0 * 10.0
    write_series("sine_spike_100", v)
    write_labels("sine_spike_100", [60], [], "synthetic: spike injected at index 60")

    # 2000 points, 20 points per period, light noise, three injected spikes.
    # The spikes are drops to a tenth of the baseline level: relative error is
    # bounded by 1 for upward excursions but not for drops.
    v = sine(2000, 20, 50.0, 10.0) + rng.normal(0.0, 0.1, 2000)
    spikes = [500, 1100, 1700]
    for s in spikes:
        v[s] = 5.0
    write_series("sine_spikes", v)
    write_labels("sine_spikes", spikes, [], "synthetic: spikes injected at the listed indices")

    # 20 periods of 50 points; period 8 (indices 400..449) flattened to the mean.
    v = sine(1000, 50, 50.0, 20.0)
    v[400:450] = 50.0
    write_series("recurrent_flat", v)
    write_labels("recurrent_flat", [], [[400, 449]], "synthetic: period 8 replaced by a flat segment")

    # 4032 points (the length of the NAB CC2/B3B series) with CC2's label shape:
    # two point anomalies and one collective anomaly.
    v = sine(4032, 288, 40.0, 5.0) + rng.normal(0.0, 0.5, 4032)
    write_series("cc2_shape", v)
    write_labels("cc2_shape", [1000, 2500], [[3300, 3350]], "synthetic: CC2 label counts, arbitrary positions")


if __name__ == "__main__":
    main()
