#!/usr/bin/env python3
"""Reference ranking: sort models by composite value computed from a trace.

Reads a pool file (JSON array or CSV) and a complete trace CSV, computes each
model's exact accuracy and inverted min-max size/complexity scores in exact
rational arithmetic, and prints model ids best first, one per line. Equal
values keep pool order.
"""
import argparse
import csv
import io
import json
import sys
from fractions import Fraction


def load_pool(path):
    text = open(path, encoding="utf-8-sig").read()
    if text.lstrip().startswith("["):
        rows = json.loads(text, parse_float=Fraction, parse_int=Fraction)
    else:
        rows = [{k: (v if k in ("id", "source") else Fraction(v)) for k, v in r.items()}
                for r in csv.DictReader(io.StringIO(text))]
    return [(r["id"], Fraction(r["size_mb"]), Fraction(r["complexity_mmac"])) for r in rows]


def load_trace(path):
    hits, samples = {}, set()
    with open(path, newline="", encoding="utf-8-sig") as f:
        reader = csv.reader(f)
        if next(reader) != ["model_id", "sample_id", "correct"]:
            sys.exit("bad trace header")
        for model, sample, correct in reader:
            samples.add(sample)
            hits.setdefault(model, {})[sample] = correct == "1"
    return hits, samples


def inverted(values):
    lo, hi = min(values), max(values)
    return [Fraction(1) if hi == lo else (hi - v) / (hi - lo) for v in values]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--pool", required=True)
    ap.add_argument("--trace", required=True)
    ap.add_argument("--weights", required=True, help="accuracy,size,complexity")
    args = ap.parse_args()

    wa, ws, wc = (Fraction(x) for x in args.weights.split(","))
    pool = load_pool(args.pool)
    hits, samples = load_trace(args.trace)
    n = len(samples)
    size_scores = inverted([m[1] for m in pool])
    cx_scores = inverted([m[2] for m in pool])

    values = []
    for i, (mid, _, _) in enumerate(pool):
        row = hits.get(mid, {})
        if len(row) != n:
            sys.exit(f"trace incomplete for {mid}")
        acc = Fraction(sum(row.values()), n)
        values.append((-(wa * acc + ws * size_scores[i] + wc * cx_scores[i]), i, mid))
    for _, _, mid in sorted(values):
        print(mid)


if __name__ == "__main__":
    main()
