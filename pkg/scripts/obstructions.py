"""Search for an E^2-equivalence from the DS minimal model over F_p to F_p[x^{+-1}]."""
import argparse

from dhtransfer.obstruction import Obstructed, forced_values, search_e2_equivalence, small_fractions
from dhtransfer.registry import get_fixture
from dhtransfer.rings import ring


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--primes", type=int, nargs="+", default=[2, 3, 5])
    ap.add_argument("--window", type=int, default=2)
    args = ap.parse_args()
    for p in args.primes:
        T = get_fixture("H(A)", {"p": p})
        S = get_fixture("dugger-shipley", {"p": p}, {"n": (-args.window, args.window)}, f"GF({p})")
        M, H = S.algebras[S.minimal], T.algebras[T.minimal]
        res = search_e2_equivalence(M, H, 3, 2)
        R = ring(M.spec)
        print(f"p = {p}")
        for u, v in forced_values(res.state, R)[:4]:
            fr = ", ".join(str(q) for q in small_fractions(v, p))
            print(f"  forced f_{u.i},{u.r}({M.carrier.fmt(u.inputs[0])}) = {R.fmt(v)}*{H.carrier.fmt(u.output)}  [{fr}]")
        if isinstance(res, Obstructed):
            ob = res.obstruction
            inputs = ", ".join(M.carrier.fmt(x) for x in ob.inputs)
            print(f"  Obstructed at (i, r) = ({ob.i}, {ob.r}) on ({inputs}), constant {R.fmt(ob.constant)}, "
                  f"unconditional: {ob.unconditional}")
        else:
            print("  Solved up to the bounds")


if __name__ == "__main__":
    main()
