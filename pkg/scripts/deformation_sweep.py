"""Track (alpha, beta) of D-homothetic deformations of the Heisenberg structure.

alpha = -2 is a fixed point of the deformation, so every row should report
alpha = -2 and beta = 2n + 2 regardless of the deformation constant.
"""

import argparse

import numpy as np

from sasaki_soliton.contact import classify, d_homothetic_deform
from sasaki_soliton.fields import sample_points
from sasaki_soliton.models import build_heisenberg


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=1)
    ap.add_argument("--samples", type=int, default=8)
    ap.add_argument("--a", type=float, nargs="*", default=list(np.geomspace(0.1, 10, 9)))
    args = ap.parse_args()

    base = build_heisenberg(args.n).structure
    print(f"{'a':>8} {'alpha':>12} {'beta':>12} {'Sasakian':>9}")
    for a in args.a:
        s = d_homothetic_deform(base, a)
        sc = classify(s, sample_points(s.chart, args.samples, 0))
        print(f"{a:>8.3g} {sc.alpha.value:>12.9f} {sc.beta.value:>12.9f} {str(sc['Sasakian']):>9}")


if __name__ == "__main__":
    main()
