"""Run every suite on every catalog model and write the coverage matrix as JSON."""

import argparse
from pathlib import Path

from sasaki_soliton.cli import RunConfig, cmd_report_matrix, matrix_json, matrix_text


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=16)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--tolerance", type=float, default=1e-7)
    ap.add_argument("--out", type=Path, default=Path("results/matrix.json"))
    args = ap.parse_args()

    cfg = RunConfig(command="matrix", samples=args.samples, seed=args.seed, tolerance=args.tolerance)
    code, matrix = cmd_report_matrix(cfg)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(matrix_json(matrix) + "\n")
    print(matrix_text(matrix))
    print(f"wrote {args.out}")
    raise SystemExit(code)


if __name__ == "__main__":
    main()
