"""Spike-time histograms of both inhibitory pairs, event-based and EulerGobet.

Writes results/pairs/<network>/{report.json,timings.json,histogram_*.csv}.
"""

import argparse
from pathlib import Path

from spikechain.cli import cmd_compare

ROOT = Path(__file__).resolve().parent.parent

if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--runs", type=int, default=50_000)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=ROOT / "results" / "pairs")
    args = p.parse_args()
    for name in ("symmetric_pair", "asymmetric_pair"):
        r = cmd_compare(ROOT / "specs" / f"{name}.toml", args.seed, args.runs, args.dt,
                        args.out / name, bin_width=0.01)
        print(name, {k: [round(x, 4) for x in v] for k, v in r.ks.items()},
              {k: round(v, 2) for k, v in r.timings.items()})
