"""Command-line front end: simulate, compare, bench, fpt-table.

Every command is a function of its files, flags and seed.  Outputs written to
``--out`` are byte-identical across reruns, except ``timings.json`` (wall
clock and machine metadata), which is kept apart for that reason.  Failures
print one JSON object to stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import platform
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from .core import AvalancheDetected, SpikeEnsemble, run_ensemble
from .fpt import FptTable, ig_density, volterra_fpt
from .fpt.dip import dip_fpt_mc
from .fpt.processes import DriftedBmFptParams
from .fpt.tables import refined_grid
from .mc import Histogram, McConfig, Scheme, euler_run, histogram
from .models import NeuronModel, NetworkSpec, SpecError, load_network, serialize

REPORT_VERSION = 1
REFERENCE_TIMINGS = {"monte_carlo_s": 716.68, "event_based_s": 2.46}
REFERENCE_GAIN = 30.0

EXIT_USAGE = 2
EXIT_RUNTIME = 3


class CliError(Exception):
    def __init__(self, kind: str, message: str, code: int = EXIT_USAGE, **extra):
        super().__init__(message)
        self.kind = kind
        self.code = code
        self.extra = extra


def ks_statistic(samples_a, samples_b) -> float:
    """Two-sample Kolmogorov-Smirnov distance between empirical CDFs."""
    a = np.asarray(samples_a, dtype=float).ravel()
    b = np.asarray(samples_b, dtype=float).ravel()
    if a.size == 0 or b.size == 0:
        raise ValueError("KS statistic needs two nonempty samples")
    return float(stats.ks_2samp(a, b).statistic)


def spec_digest(spec: NetworkSpec) -> str:
    return hashlib.sha256(serialize(spec).encode()).hexdigest()


def machine_metadata() -> dict:
    return {
        "platform": platform.platform(),
        "machine": platform.machine(),
        "processor": platform.processor(),
        "cpu_count": os.cpu_count(),
        "python": platform.python_version(),
        "numpy": np.__version__,
    }


def _hist_doc(h: Histogram) -> dict:
    return {"edges": h.edges.tolist(), "counts": h.counts.tolist()}


def _hist_from_doc(doc: dict) -> Histogram:
    counts = np.array(doc["counts"], dtype=float)
    tot = counts.sum(axis=1, keepdims=True)
    probs = np.divide(counts, tot, out=np.zeros_like(counts), where=tot > 0)
    return Histogram(np.array(doc["edges"], dtype=float), probs, counts)


@dataclass
class SimReport:
    """Comparison summary; every number is keyed by method and traceable to
    (spec_digest, seeds)."""

    spec_digest: str
    seeds: dict
    n_runs: int
    window: tuple
    sigma: list
    mc_dt: float
    histograms: dict = field(default_factory=dict)
    ks: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    machine: dict = field(default_factory=dict)
    format_version: int = REPORT_VERSION

    def to_doc(self, volatile: bool = True) -> dict:
        doc = {
            "format_version": self.format_version,
            "spec_digest": self.spec_digest,
            "seeds": dict(self.seeds),
            "n_runs": self.n_runs,
            "window": list(self.window),
            "sigma": list(self.sigma),
            "mc_dt": self.mc_dt,
            "histograms": {k: _hist_doc(h) for k, h in self.histograms.items()},
            "ks": {k: list(v) for k, v in self.ks.items()},
        }
        if volatile:
            doc["timings"] = dict(self.timings)
            doc["machine"] = dict(self.machine)
        return doc

    def to_json(self, volatile: bool = True) -> str:
        return json.dumps(self.to_doc(volatile), indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "SimReport":
        doc = json.loads(text)
        if doc.get("format_version") != REPORT_VERSION:
            raise ValueError(f"unsupported report version {doc.get('format_version')!r}")
        return cls(doc["spec_digest"], doc["seeds"], doc["n_runs"], tuple(doc["window"]),
                   doc["sigma"], doc["mc_dt"],
                   {k: _hist_from_doc(h) for k, h in doc["histograms"].items()},
                   {k: list(v) for k, v in doc["ks"].items()},
                   doc.get("timings", {}), doc.get("machine", {}), doc["format_version"])

    def __eq__(self, other):
        return isinstance(other, SimReport) and self.to_json() == other.to_json()


# -- commands -----------------------------------------------------------------

def _load(spec_path, horizon) -> NetworkSpec:
    spec = load_network(spec_path)
    if horizon is not None:
        if not horizon > 0:
            raise CliError("ValidationError", "--horizon must be > 0")
        spec = spec.with_horizon(horizon)
    return spec


def _check_runs(n_runs: int) -> None:
    if n_runs < 1:
        raise CliError("ValidationError", f"--runs must be >= 1 (got {n_runs})")


def _check_dt(dt: float, spec: NetworkSpec) -> None:
    if not (dt > 0 and dt <= spec.horizon):
        raise CliError("ValidationError", f"--dt must lie in (0, horizon] (got {dt})")


def _write(out: Path, name: str, text: str) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_text(text)


def _isi_summary(ens: SpikeEnsemble, n: int) -> list:
    rows = []
    for i in range(n):
        sel = ens.neuron == i
        r, t = ens.run[sel], ens.time[sel]
        same = r[1:] == r[:-1]
        isi = np.diff(t)[same]
        rows.append({
            "neuron": i,
            "spikes": int(t.size),
            "mean_spikes_per_run": t.size / ens.n_runs,
            "isi_count": int(isi.size),
            "isi_mean": float(isi.mean()) if isi.size else None,
            "isi_std": float(isi.std()) if isi.size else None,
            "isi_cv": float(isi.std() / isi.mean()) if isi.size and isi.mean() > 0 else None,
        })
    return rows


def _event(spec, n_runs, seed):
    try:
        return run_ensemble(spec, n_runs, seed)
    except AvalancheDetected as e:
        raise CliError("AvalancheDetected", str(e), EXIT_RUNTIME, time=e.time, count=e.count)


def cmd_simulate(spec_path, seed: int, n_runs: int, out_path, horizon=None,
                 bin_width: float = 0.01) -> dict:
    _check_runs(n_runs)
    spec = _load(spec_path, horizon)
    ens = _event(spec, n_runs, seed)
    window = (0.0, spec.horizon)
    summary = {
        "format_version": REPORT_VERSION,
        "spec_digest": spec_digest(spec),
        "seed": seed,
        "n_runs": n_runs,
        "window": list(window),
        "sigma": [nr.sigma for nr in spec.neurons],
        "neurons": _isi_summary(ens, spec.n),
    }
    if out_path is not None:
        out = Path(out_path)
        _write(out, "spikes.csv", ens.to_csv())
        if ens.time.size:
            _write(out, "histogram.csv", histogram(ens, bin_width, window).to_csv())
        _write(out, "summary.json", json.dumps(summary, indent=1, sort_keys=True) + "\n")
    return summary


def _mc_seed(seed: int) -> int:
    return seed + 1


def cmd_compare(spec_path, seed: int, n_runs: int, mc_dt: float, out_path=None, horizon=None,
                bin_width: float = 0.01) -> SimReport:
    _check_runs(n_runs)
    spec = _load(spec_path, horizon)
    _check_dt(mc_dt, spec)
    window = (0.0, spec.horizon)
    ensembles, timings = {}, {}
    t0 = time.perf_counter()
    ensembles["event"] = _event(spec, n_runs, seed)
    timings["event"] = time.perf_counter() - t0
    for scheme in Scheme:
        t0 = time.perf_counter()
        ensembles[scheme.value] = euler_run(spec, cfg=McConfig(mc_dt, n_runs, scheme, _mc_seed(seed)))
        timings[scheme.value] = time.perf_counter() - t0
    ks = {}
    for scheme in Scheme:
        ks[f"event_vs_{scheme.value}"] = [
            _ks_or_none(ensembles["event"].spike_times(i, window),
                       ensembles[scheme.value].spike_times(i, window)) for i in range(spec.n)]
    hists = {k: histogram(e, bin_width, window) for k, e in ensembles.items() if e.time.size}
    report = SimReport(spec_digest(spec), {"event": seed, "mc": _mc_seed(seed)}, n_runs, window,
                       [nr.sigma for nr in spec.neurons], mc_dt, hists, ks, timings,
                       machine_metadata())
    if out_path is not None:
        out = Path(out_path)
        _write(out, "report.json", report.to_json(volatile=False))
        _write(out, "timings.json", json.dumps({"timings": timings, "machine": report.machine},
                                               indent=1, sort_keys=True) + "\n")
        for k, h in hists.items():
            _write(out, f"histogram_{k}.csv", h.to_csv())
    return report


def _ks_or_none(a, b):
    """KS per neuron; None when either method produced no spike for it."""
    return ks_statistic(a, b) if len(a) and len(b) else None


def _timed(fn, repeats: int = 1):
    best = math.inf
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def cmd_bench(spec_path, seed: int, n_runs: int, mc_dt: float, out_path=None,
              horizon=None) -> dict:
    """Wall-clock per method at matched n_runs.  Each method runs once on a
    single realization first so compilation is not timed."""
    _check_runs(n_runs)
    spec = _load(spec_path, horizon)
    _check_dt(mc_dt, spec)
    window = (0.0, spec.horizon)
    run_ensemble(spec, 1, seed)
    for scheme in Scheme:
        euler_run(spec, cfg=McConfig(mc_dt, 1, scheme, seed))
    t_event, ev = _timed(lambda: run_ensemble(spec, n_runs, seed))
    rows = {"event": {"seconds": t_event}}
    for scheme in Scheme:
        t, ens = _timed(lambda: euler_run(spec, cfg=McConfig(mc_dt, n_runs, scheme, _mc_seed(seed))))
        rows[scheme.value] = {
            "seconds": t,
            "ratio_to_event": t / t_event if t_event > 0 else math.inf,
            "ks_vs_event": [_ks_or_none(ev.spike_times(i, window), ens.spike_times(i, window))
                            for i in range(spec.n)],
        }
    doc = {
        "format_version": REPORT_VERSION,
        "spec_digest": spec_digest(spec),
        "seed": seed,
        "n_runs": n_runs,
        "mc_dt": mc_dt,
        "methods": rows,
        "reference": {
            "reported_timings_s": REFERENCE_TIMINGS,
            "ratio_from_reported_timings": REFERENCE_TIMINGS["monte_carlo_s"] / REFERENCE_TIMINGS["event_based_s"],
            "claimed_gain": REFERENCE_GAIN,
        },
        "machine": machine_metadata(),
    }
    if out_path is not None:
        _write(Path(out_path), "bench.json", json.dumps(doc, indent=1, sort_keys=True) + "\n")
    return doc


def fpt_table_for(spec: NetworkSpec, neuron: int, v0: float | None = None, horizon=None,
                  seed: int = 0, dt: float = 1e-3, n_paths: int = 100_000) -> FptTable:
    """Free first-passage law of one neuron from ``v0`` (default: reset)."""
    if not 0 <= neuron < spec.n:
        raise CliError("ValidationError", f"--neuron must lie in [0, {spec.n})")
    nr = spec.neurons[neuron]
    v0 = nr.v_reset if v0 is None else v0
    horizon = spec.horizon if horizon is None else horizon
    if not v0 < nr.theta:
        raise CliError("ValidationError", "start voltage must lie below theta")
    if nr.model.exp_synapse:
        return dip_fpt_mc(np.random.default_rng(seed), nr.tau_s, nr.sigma, nr.input, v0, nr.is0,
                          nr.theta, dt, horizon, n_paths, nr.tau, nr.rest_mu)
    if nr.model is NeuronModel.PIF_INSTANT and nr.input.is_constant:
        grid = refined_grid(horizon)
        p = DriftedBmFptParams(nr.theta - v0, nr.input.values[0], nr.sigma)
        dens = np.concatenate([[0.0], ig_density(grid[1:], p)])
        return FptTable.from_density(grid, dens)
    return volterra_fpt(nr.process(), v0, nr.theta, 0.0, horizon=horizon)


def cmd_fpt_table(spec_path, neuron: int, out_path, v0=None, horizon=None, seed: int = 0,
                  dt: float = 1e-3, n_paths: int = 100_000) -> FptTable:
    spec = load_network(spec_path)
    table = fpt_table_for(spec, neuron, v0, horizon, seed, dt, n_paths)
    if out_path is not None:
        out = Path(out_path)
        out.parent.mkdir(parents=True, exist_ok=True)
        table.to_csv(out)
    return table


# -- argument parsing -----------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError("UsageError", message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="spikechain", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, dt_default=None):
        sp.add_argument("--spec", required=True, help="network TOML file")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", default=None, help="output directory")
        sp.add_argument("--horizon", type=float, default=None, help="override the network horizon")
        if dt_default is not None:
            sp.add_argument("--dt", type=float, default=dt_default, help="Monte-Carlo time step")

    s = sub.add_parser("simulate", help="event-based ensemble")
    common(s)
    s.add_argument("--runs", type=int, default=1000)
    s.add_argument("--bin", type=float, default=0.01, help="histogram bin width")

    c = sub.add_parser("compare", help="event-based vs Euler and EulerGobet")
    common(c, 1e-3)
    c.add_argument("--runs", type=int, default=1000)
    c.add_argument("--bin", type=float, default=0.01, help="histogram bin width")

    b = sub.add_parser("bench", help="wall-clock per method")
    common(b, 1e-2)
    b.add_argument("--runs", type=int, default=50_000)

    f = sub.add_parser("fpt-table", help="dump a neuron's free first-passage law to CSV")
    common(f, 1e-3)
    f.add_argument("--neuron", type=int, default=0)
    f.add_argument("--v0", type=float, default=None, help="start voltage (default: reset)")
    f.add_argument("--runs", type=int, default=100_000, help="paths for filtered-noise neurons")
    return p


def _dispatch(args) -> dict:
    if args.command == "simulate":
        return cmd_simulate(args.spec, args.seed, args.runs, args.out, args.horizon, args.bin)
    if args.command == "compare":
        r = cmd_compare(args.spec, args.seed, args.runs, args.dt, args.out, args.horizon, args.bin)
        return {"spec_digest": r.spec_digest, "ks": r.ks, "timings": r.timings}
    if args.command == "bench":
        return cmd_bench(args.spec, args.seed, args.runs, args.dt, args.out, args.horizon)
    out = None if args.out is None else Path(args.out) / f"fpt_neuron{args.neuron}.csv"
    t = cmd_fpt_table(args.spec, args.neuron, out, args.v0, args.horizon, args.seed, args.dt,
                      args.runs)
    return {"hit_mass": t.hit_mass, "horizon": t.horizon, "points": int(t.grid.size),
            "path": None if out is None else str(out)}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        doc = _dispatch(args)
    except CliError as e:
        _fail(e.kind, str(e), e.code, **e.extra)
        return e.code
    except SpecError as e:
        _fail("SpecError", str(e), EXIT_USAGE, path=e.path)
        return EXIT_USAGE
    except (OSError, ValueError) as e:
        _fail(type(e).__name__, str(e), EXIT_USAGE)
        return EXIT_USAGE
    except Exception as e:  # noqa: BLE001
        _fail(type(e).__name__, str(e), EXIT_RUNTIME)
        return EXIT_RUNTIME
    sys.stdout.write(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    return 0


def _fail(kind: str, message: str, code: int, **extra) -> None:
    doc = {"error": kind, "message": message, "exit_code": code}
    doc.update(extra)
    sys.stderr.write(json.dumps(doc, sort_keys=True) + "\n")


if __name__ == "__main__":
    raise SystemExit(main())
