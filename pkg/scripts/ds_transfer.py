"""Transfer the DS auxiliary algebra to its homology and compare with both expected tables."""
import argparse

from dhtransfer.algebra import verify_algebra, verify_morphism
from dhtransfer.cli import _tables, compare_tables
from dhtransfer.fixtures import dugger_shipley
from dhtransfer.registry import _ds_expected
from dhtransfer.transfer import minimal_model


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--p", type=int, default=3)
    ap.add_argument("--rmax", type=int, default=4)
    ap.add_argument("--imax", type=int, default=3)
    args = ap.parse_args()
    fx = dugger_shipley(args.p)
    M, f, res = minimal_model(fx.tilde, fx.contraction, args.rmax, args.imax)
    entries, table = _tables(M, f, 2, args.imax)
    for row in table:
        print(f"{row['op']}({', '.join(row['inputs'])}) = {row['value']}")
    print()
    print("minimal model verifies:", verify_algebra(M, args.rmax, args.imax).ok)
    print("iota_inf verifies:", verify_morphism(res.inclusion, args.rmax, args.imax).ok)
    for variant in ("consistent", "literal"):
        diffs = compare_tables(entries, _ds_expected(args.p, fx.spec, variant), M.carrier, f.target.carrier,
                               fx.minimal)
        print(f"differences from the {variant} tables: {len(diffs)}")
        for d in diffs[:3]:
            print(f"  {d['op']}({', '.join(d['inputs'])}): expected {d['expected']}, computed {d['computed']}")


if __name__ == "__main__":
    main()
