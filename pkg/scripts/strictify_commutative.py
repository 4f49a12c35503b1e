"""Stabilization table of the truncated good cobar for the commutative Q[t] example."""
import argparse

from dhtransfer.algebra import COMM
from dhtransfer.barcobar import stabilization_table
from dhtransfer.fixtures import qt_example


def fmt(h):
    parts = ([f"Q[t]^{h['rank']}"] if h["rank"] else []) + [f"Q[t]/({t})" for t in h["torsion"]]
    return " + ".join(parts) or "0"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--weight", type=int, default=8)
    ap.add_argument("--degmax", type=int, default=5)
    args = ap.parse_args()
    st = stabilization_table(qt_example(COMM).morphism, args.weight, args.degmax)
    for n in range(0, args.degmax + 1):
        row = "  ".join(f"W={W}: {fmt(h)}" for W, h in sorted(st["table"][n].items()))
        print(f"H_{n}: target {fmt(st['target'][n])}, stable from W={st['stable_from'][n]}")
        print(f"  {row}")


if __name__ == "__main__":
    main()
