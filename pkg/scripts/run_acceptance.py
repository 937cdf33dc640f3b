"""Run the acceptance checks and print one PASS/FAIL line each."""

import argparse
import sys
import time

from atomburgers import acceptance


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--quick", action="store_true", help="reduced sample counts")
    args = ap.parse_args()
    start = time.perf_counter()
    results = acceptance.run_all(quick=args.quick)
    for r in results:
        print(r.line())
    bad = sum(not r.passed for r in results)
    print(f"{len(results) - bad}/{len(results)} passed in {time.perf_counter() - start:.1f}s")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
