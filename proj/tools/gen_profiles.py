#!/usr/bin/env python3
"""Writes synthetic instruction profiles for trying out `wasubench analyze`.

The numbers are made up. Each benchmark gets a different opcode mix and a
different hotness shape so the metrics table has real spread for PCA.

    python3 tools/gen_profiles.py [OUT_DIR]   (default samples/profiles)
"""
import json
import random
import sys
from pathlib import Path

MIXES = {
    "int": {"i32.add": 6, "i32.mul": 2, "i64.add": 2, "i32.load": 2, "i32.store": 1,
            "local.get": 5, "br_if": 2, "global.get": 1},
    "float": {"f64.mul": 5, "f64.add": 5, "f32.div": 1, "f64.load": 3, "f64.store": 2,
              "local.get": 5, "i32.add": 2, "br_if": 1},
    "memory": {"i32.load": 5, "i64.load8_u": 2, "i32.store": 4, "i64.store": 1,
               "i32.add": 3, "local.get": 4, "global.set": 1, "global.get": 2},
    "dispatch": {"call_indirect": 3, "call": 3, "global.get": 3, "global.set": 2,
                 "i32.add": 3, "local.get": 4, "br_table": 1, "i32.load": 1},
}

# (group, id, mix, functions, executed fraction, hotness skew, seed)
BENCHMARKS = [
    ("polybench", "gemm", "float", 12, 0.6, 2.5, 1),
    ("polybench", "jacobi-2d", "float", 10, 0.5, 3.0, 2),
    ("polybench", "lu", "float", 14, 0.7, 1.8, 3),
    ("mibench", "crc32", "int", 8, 0.9, 1.2, 4),
    ("mibench", "sha", "int", 16, 0.8, 1.5, 5),
    ("mibench", "qsort", "memory", 20, 0.4, 1.1, 6),
    ("ostrich", "nw", "memory", 18, 0.5, 2.0, 7),
    ("ostrich", "fft", "float", 22, 0.3, 1.6, 8),
    ("libsodium", "chacha20", "int", 40, 0.2, 2.8, 9),
    ("libsodium", "box", "dispatch", 60, 0.15, 1.3, 10),
    ("jetstream", "richards", "dispatch", 35, 0.6, 0.9, 11),
    ("jetstream", "deltablue", "dispatch", 45, 0.5, 1.0, 12),
]


def weighted(rng, mix):
    ops, weights = zip(*mix.items())
    return rng.choices(ops, weights=weights)[0]


def profile(group, bench, mix, nfuncs, executed, skew, seed):
    rng = random.Random(seed)
    sites, blocks = [], []
    instructions = blocks_total = 0
    hot = max(1, int(nfuncs * executed))
    for f in range(nfuncs):
        size = rng.randint(6, 30)
        nblocks = rng.randint(1, 5)
        instructions += size
        blocks_total += nblocks
        if f >= hot:
            continue
        # Earlier functions are hotter; skew sharpens the falloff.
        weight = 1.0 / (f + 1) ** skew
        offset = 0
        for _ in range(size):
            offset += rng.randint(1, 4)
            if rng.random() < 0.15:
                continue
            count = int(1_000_000 * weight * rng.uniform(0.05, 1.0))
            sites.append({"func": f, "offset": offset, "opcode": weighted(rng, MIXES[mix]),
                          "count": count})
        for b in range(nblocks):
            kind = rng.choice(["block", "loop", "if"])
            count = int(20_000 * weight * rng.uniform(0.0, 1.0)) if rng.random() < 0.8 else 0
            blocks.append({"func": f, "block": b, "kind": kind, "count": count})
    return {
        "benchmark_id": bench,
        "group": group,
        "static_totals": {"functions": nfuncs, "instructions": instructions,
                          "blocks": blocks_total},
        "sites": sites,
        "blocks": blocks,
    }


def main():
    out = Path(sys.argv[1] if len(sys.argv) > 1 else "samples/profiles")
    out.mkdir(parents=True, exist_ok=True)
    for group, bench, *rest in BENCHMARKS:
        data = profile(group, bench, *rest)
        path = out / f"{group}-{bench}.json"
        path.write_text(json.dumps(data, indent=1) + "\n")
        print(path)


if __name__ == "__main__":
    main()
