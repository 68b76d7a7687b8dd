#!/usr/bin/env python3
"""Convert NAB anomaly timestamps into the index-based label format.

NAB's labels/combined_labels.json maps each data file to a list of anomaly
timestamps. Every timestamp becomes a point label unless it falls inside a
range given with --collective, in which case the range is emitted as one
collective label instead.

    nab_to_labels.py --series data/realAWSCloudwatch/rds_cpu_utilization_e47b3b.csv \
        --nab-labels labels/combined_labels.json \
        --key realAWSCloudwatch/rds_cpu_utilization_e47b3b.csv \
        --collective "2014-04-10 00:00:00" "2014-04-11 12:00:00" \
        --out b3b.labels.json
"""

import argparse
import bisect
import csv
import json
import sys
from datetime import datetime, timezone


def parse_ts(text):
    text = text.strip()
    try:
        return float(text)
    except ValueError:
        pass
    text = text.replace("T", " ").rstrip("Z")
    for layout in ("%Y-%m-%d %H:%M:%S.%f", "%Y-%m-%d %H:%M:%S", "%Y-%m-%d %H:%M"):
        try:
            return datetime.strptime(text, layout).replace(tzinfo=timezone.utc).timestamp()
        except ValueError:
            continue
    raise ValueError(f"unrecognised timestamp {text!r}")


def load_times(path):
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if [h.strip() for h in header[:2]] != ["timestamp", "value"]:
            sys.exit(f"{path}: expected header 'timestamp,value'")
        return [parse_ts(row[0]) for row in reader if row]


def nearest_index(times, t):
    i = bisect.bisect_left(times, t)
    if i == len(times):
        return len(times) - 1
    if i > 0 and t - times[i - 1] < times[i] - t:
        return i - 1
    return i


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--series", required=True, help="NAB data CSV")
    ap.add_argument("--nab-labels", required=True, help="NAB labels/combined_labels.json")
    ap.add_argument("--key", required=True, help="entry in the NAB label file, e.g. realAWSCloudwatch/x.csv")
    ap.add_argument("--collective", nargs=2, action="append", default=[], metavar=("START", "END"),
                    help="timestamp range to emit as one collective anomaly (repeatable)")
    ap.add_argument("--out", required=True)
    args = ap.parse_args(argv)

    times = load_times(args.series)
    with open(args.nab_labels, encoding="utf-8") as fh:
        nab = json.load(fh)
    if args.key not in nab:
        sys.exit(f"{args.key!r} not found in {args.nab_labels}")

    ranges = []
    for start, end in args.collective:
        a, b = nearest_index(times, parse_ts(start)), nearest_index(times, parse_ts(end))
        if a > b:
            sys.exit(f"collective range {start} .. {end} is reversed")
        ranges.append([a, b])

    points = []
    for stamp in nab[args.key]:
        idx = nearest_index(times, parse_ts(stamp))
        if not any(a <= idx <= b for a, b in ranges):
            points.append(idx)

    doc = {
        "points": sorted(set(points)),
        "collectives": sorted(ranges),
        "provenance": f"NAB {args.key}; collectives: {args.collective or 'none'}",
    }
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    print(f"{args.out}: {len(doc['points'])} point, {len(doc['collectives'])} collective over {len(times)} rows")


if __name__ == "__main__":
    main()
