"""Wall-clock of the event-based loop against both Monte-Carlo schemes."""

import argparse
import json
from pathlib import Path

from spikechain.cli import cmd_bench

ROOT = Path(__file__).resolve().parent.parent

if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--spec", type=Path, default=ROOT / "specs" / "symmetric_pair.toml")
    p.add_argument("--runs", type=int, default=50_000)
    p.add_argument("--dt", type=float, default=1e-2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=ROOT / "results" / "bench")
    args = p.parse_args()
    doc = cmd_bench(args.spec, args.seed, args.runs, args.dt, args.out)
    print(json.dumps(doc["methods"], indent=1))
