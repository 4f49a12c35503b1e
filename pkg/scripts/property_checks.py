"""Run the randomized property checks and print a one-line summary for each."""
import argparse
import time

from dhtransfer.properties import CHECKS


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--only", choices=sorted(CHECKS))
    args = ap.parse_args()
    for name, fn in sorted(CHECKS.items()):
        if args.only and name != args.only:
            continue
        t0 = time.perf_counter()
        res = fn(seed=args.seed)
        passed = sum(1 for r in res if r["ok"])
        print(f"{name}: {passed}/{len(res)} passed in {time.perf_counter() - t0:.1f}s")


if __name__ == "__main__":
    main()
