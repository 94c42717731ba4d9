"""Regenerate the synthetic proliferation series under data/proliferation.

The shipped count series are noiseless evaluations of the closed-form
logistic growth law at half-day observation times over six days, in rescaled
units (counts per hundred thousand cells, starting from 1.0).  The untreated
pair uses the fitted growth rates of the two cell lines with the quadratic
coefficient tied to the shared saturation level; the treated series add the
fitted extra mortality of each drug concentration.  Running this script
twice produces byte-identical files.
"""

from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from dishsim.fitting import DEFAULT_SATURATION, logistic_solution

GROWTH = {"species1": 0.6420, "species2": 0.6359}

# fitted extra mortality per drug concentration (label -> per-species rate)
MORTALITY = {
    "dose_0.1": (0.6619, 0.0),
    "dose_0.3": (0.8109, 0.0),
    "dose_1": (1.0118, 0.0246),
    "dose_3": (1.5585, 0.0569),
    "dose_10": (1.9545, 0.2192),
}

TIMES = np.arange(0.0, 6.0 + 1e-9, 0.5)


def write_series(path: Path, growth: float, mortality: float) -> None:
    counts = logistic_solution(TIMES, 1.0, growth,
                               growth / DEFAULT_SATURATION, mortality)
    lines = ["t,count"]
    lines += [f"{float(t)!r},{float(c)!r}" for t, c in zip(TIMES, counts)]
    path.write_text("\n".join(lines) + "\n")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out-dir",
                        default=Path(__file__).parent.parent
                        / "data" / "proliferation",
                        type=Path, help="directory to fill with CSV files")
    args = parser.parse_args(argv)
    args.out_dir.mkdir(parents=True, exist_ok=True)

    for species, growth in GROWTH.items():
        write_series(args.out_dir / f"{species}_untreated.csv", growth, 0.0)
        for label, rates in MORTALITY.items():
            mortality = rates[0] if species == "species1" else rates[1]
            write_series(args.out_dir / f"{species}_{label}.csv",
                         growth, mortality)
    n = len(GROWTH) * (1 + len(MORTALITY))
    print(f"wrote {n} series to {args.out_dir}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
