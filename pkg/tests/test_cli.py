import json
from pathlib import Path

import pytest

from spikechain.cli import (CliError, SimReport, cmd_bench, cmd_compare, cmd_fpt_table,
                            cmd_simulate, ks_statistic, main)
from spikechain.core import run_ensemble
from spikechain.models import serialize, symmetric_pair

SPECS = Path(__file__).resolve().parents[1] / "specs"


@pytest.fixture
def spec_file(tmp_path):
    p = tmp_path / "net.toml"
    p.write_text(serialize(symmetric_pair()))
    return p


def test_ks_of_identical_samples_is_zero():
    assert ks_statistic([1.0, 2.0, 2.5], [1.0, 2.0, 2.5]) == 0.0


def test_ks_of_disjoint_samples_is_one():
    assert ks_statistic([0.1, 0.2], [1.0, 2.0, 3.0]) == 1.0


def test_ks_small_example():
    assert ks_statistic([1, 2, 3], [1, 2, 4]) == pytest.approx(1 / 3)


def test_ks_rejects_empty_input():
    with pytest.raises(ValueError):
        ks_statistic([], [1.0])


def test_same_method_same_seed_gives_zero_ks():
    a = run_ensemble(symmetric_pair(), 500, 3)
    b = run_ensemble(symmetric_pair(), 500, 3)
    assert ks_statistic(a.spike_times(0), b.spike_times(0)) == 0.0


def test_simulate_writes_files_and_reruns_identically(spec_file, tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    s = cmd_simulate(spec_file, 7, 200, out1, bin_width=0.05)
    cmd_simulate(spec_file, 7, 200, out2, bin_width=0.05)
    names = sorted(p.name for p in out1.iterdir())
    assert names == ["histogram.csv", "spikes.csv", "summary.json"]
    for n in names:
        assert (out1 / n).read_bytes() == (out2 / n).read_bytes()
    assert len(s["neurons"]) == 2
    hist = (out1 / "histogram.csv").read_text().splitlines()
    assert hist[0] == "bin_start,bin_end,neuron_0,neuron_1"
    assert len(hist) == 1 + 80


def test_simulate_rejects_zero_runs(spec_file, tmp_path):
    with pytest.raises(CliError):
        cmd_simulate(spec_file, 0, 0, tmp_path)


def test_compare_report_round_trips(spec_file, tmp_path):
    r = cmd_compare(spec_file, 1, 300, 1e-2, tmp_path, bin_width=0.1)
    assert set(r.ks) == {"event_vs_Euler", "event_vs_EulerGobet"}
    assert all(0.0 <= k <= 1.0 for v in r.ks.values() for k in v)
    assert SimReport.from_json(r.to_json()) == r
    text = (tmp_path / "report.json").read_text()
    assert "timings" not in json.loads(text)
    assert SimReport.from_json(text).seeds == {"event": 1, "mc": 2}
    again = tmp_path / "again"
    cmd_compare(spec_file, 1, 300, 1e-2, again, bin_width=0.1)
    assert (again / "report.json").read_bytes() == text.encode()


def test_report_rejects_other_versions(spec_file):
    r = cmd_compare(spec_file, 1, 50, 1e-2)
    doc = json.loads(r.to_json())
    doc["format_version"] = 99
    with pytest.raises(ValueError):
        SimReport.from_json(json.dumps(doc))


def test_bench_with_a_single_run(spec_file, tmp_path):
    doc = cmd_bench(spec_file, 0, 1, 1e-2, tmp_path)
    assert set(doc["methods"]) == {"event", "Euler", "EulerGobet"}
    assert doc["methods"]["event"]["seconds"] >= 0
    for k in ("python", "platform", "cpu_count"):
        assert k in doc["machine"]
    assert json.loads((tmp_path / "bench.json").read_text())["n_runs"] == 1


def test_fpt_table_csv(spec_file, tmp_path):
    t = cmd_fpt_table(spec_file, 0, tmp_path / "t.csv", horizon=4.0)
    assert (tmp_path / "t.csv").read_text().startswith("t,density,cdf")
    assert 0.99 < t.hit_mass <= 1.0


def test_main_success(spec_file, tmp_path, capsys):
    code = main(["simulate", "--spec", str(spec_file), "--runs", "20", "--out", str(tmp_path)])
    assert code == 0
    assert json.loads(capsys.readouterr().out)["n_runs"] == 20


@pytest.mark.parametrize("argv,kind", [
    (["simulate", "--spec", "missing.toml"], "SpecError"),
    (["simulate", "--runs", "5"], "UsageError"),
    (["teleport"], "UsageError"),
])
def test_main_reports_machine_readable_errors(argv, kind, capsys):
    code = main(argv)
    assert code != 0
    err = json.loads(capsys.readouterr().err)
    assert err["exit_code"] == code
    assert err["error"] in (kind, "FileNotFoundError")


def test_main_rejects_zero_runs(spec_file, capsys):
    assert main(["simulate", "--spec", str(spec_file), "--runs", "0"]) == 2
    assert "error" in json.loads(capsys.readouterr().err)


def test_main_reports_bad_specs(tmp_path, capsys):
    p = tmp_path / "bad.toml"
    p.write_text(serialize(symmetric_pair()).replace("v_reset = 0.0", "v_reset = 2.0", 1))
    assert main(["simulate", "--spec", str(p), "--runs", "5"]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "SpecError" and err["path"].endswith("v_reset")


def test_shipped_specs_parse():
    from spikechain.models import load_network
    names = sorted(p.stem for p in SPECS.glob("*.toml"))
    assert names == ["asymmetric_pair", "excitatory_pair", "mixed10", "symmetric_pair"]
    for p in SPECS.glob("*.toml"):
        load_network(p)
