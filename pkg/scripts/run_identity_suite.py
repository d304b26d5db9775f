#!/usr/bin/env python3
"""Run the full exact-arithmetic identity suite and summarize per identity.

Every check is performed in rational arithmetic, so any failure is a genuine
algebra bug, not roundoff.  Writes the full per-case report as JSON and prints
a per-identity summary table.
"""

import argparse
import json
import sys
import time
from collections import defaultdict
from pathlib import Path

from momray.identities import default_cases, run_suite


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-m", type=int, default=3)
    ap.add_argument("--dims", default="2,3,4")
    ap.add_argument("--seeds", default="1,2,3,4,5")
    ap.add_argument("--suite", default="all")
    ap.add_argument("--out", default="identity_report.json")
    args = ap.parse_args()

    dims = tuple(int(v) for v in args.dims.split(","))
    seeds = tuple(int(v) for v in args.seeds.split(","))
    cases = default_cases(max_m=args.max_m, dims=dims, seeds=seeds, suite=args.suite)
    print(f"running {len(cases)} exact identity checks ...")
    t0 = time.time()
    results = run_suite(cases)
    elapsed = time.time() - t0

    by_name = defaultdict(lambda: [0, 0, 0.0])
    for r in results:
        slot = by_name[r["identity"]]
        slot[0] += 1
        slot[1] += r["pass"]
        slot[2] += r["elapsed_ms"]
    print(f"{'identity':<16} {'cases':>6} {'passed':>7} {'time_ms':>9}")
    for name in sorted(by_name):
        total, passed, ms = by_name[name]
        print(f"{name:<16} {total:>6} {passed:>7} {ms:>9.0f}")
    failures = sum(not r["pass"] for r in results)
    print(f"total: {len(results)} cases, {failures} failures, {elapsed:.1f}s")

    Path(args.out).write_text(json.dumps(results, indent=1))
    print(f"wrote {args.out}")
    return 0 if failures == 0 else 1


if __name__ == "__main__":
    sys.exit(main())
