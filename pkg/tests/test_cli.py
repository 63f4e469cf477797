import csv
import dataclasses
import json

import pytest

from renewal_bayes import cli
from renewal_bayes.errors import NumericError
from renewal_bayes.experiments import EXPERIMENTS


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def run(argv):
    return cli.main([str(a) for a in argv])


def test_list_experiments(capsys):
    assert run(["list-experiments"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == len(EXPERIMENTS) == 10
    text = "\n".join(lines)
    assert "convergence-main → Main Theorem" in text
    assert "bandit-gap → Remark on p*_v vs p*_f" in text


@pytest.mark.parametrize(
    "body",
    [
        'experiment = "verify-density"\nseed = [',
        'experiment = "verify-density"\nbogus = 1\n',
        'experiment = "no-such-thing"\n',
        'experiment = "convergence-main"\n[system]\nn = [1000, 100]\n',
        'experiment = "verify-density"\nseed = -3\n',
        'experiment = "convergence-main"\n[density]\nfamily = "gamma"\nshape = -1.0\n',
    ],
    ids=["malformed", "unknown-key", "unknown-experiment", "decreasing-n", "negative-seed", "bad-density"],
)
def test_config_errors_exit_2_with_only_error_log(tmp_path, body):
    cfg = write(tmp_path, "c.toml", body)
    out = tmp_path / "out"
    assert run(["run", cfg, "--out", out]) == 2
    assert sorted(p.name for p in out.iterdir()) == ["error.log"]


def test_unsupported_suffix(tmp_path):
    cfg = write(tmp_path, "c.yaml", "experiment: verify-density\n")
    assert run(["run", cfg, "--out", tmp_path / "o"]) == 2


def test_assertion_failure_exit_1(tmp_path):
    cfg = write(
        tmp_path,
        "c.toml",
        'experiment = "clt-score-walk"\nreps = 50\nthreshold = 1e-4\n[system]\nn = 200\n',
    )
    out = tmp_path / "out"
    assert run(["run", cfg, "--out", out]) == 1
    summary = json.loads((out / "summary.json").read_text())
    assert summary["passed"] is False


def test_numeric_failure_exit_3(tmp_path, monkeypatch):
    def boom(cfg, root, threads):
        raise NumericError("quadrature did not converge", {"a": 1.0})

    exp = EXPERIMENTS["verify-density"]
    monkeypatch.setitem(EXPERIMENTS, "verify-density", dataclasses.replace(exp, run=boom))
    cfg = write(tmp_path, "c.toml", 'experiment = "verify-density"\n')
    out = tmp_path / "out"
    assert run(["run", cfg, "--out", out]) == 3
    assert "numerical failure" in (out / "error.log").read_text()


def test_lemma_triples_in_summary(tmp_path):
    cfg = write(tmp_path, "c.json", json.dumps({"experiment": "verify-lemma-r"}))
    out = tmp_path / "out"
    assert run(["run", cfg, "--out", out]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["passed"] is True
    assert summary["results"]["triples"]["gamma(shape=2)"] == pytest.approx([-1.0, -1.0, -2.0], abs=1e-12)
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["experiment"] == "verify-lemma-r" and manifest["seed"] == 0
    assert set(manifest["versions"]) >= {"python", "numpy", "scipy"}
    with open(out / "lemma_r.csv") as fh:
        header = next(csv.reader(fh))
    assert header[0] == "density"


def test_output_dir_from_config(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    cfg = write(tmp_path, "c.toml", 'experiment = "verify-lemma-r"\noutput_dir = "here"\n')
    assert run(["run", cfg]) == 0
    assert (tmp_path / "here" / "summary.json").exists()


def _outputs(out):
    files = {p.name: p.read_bytes() for p in out.iterdir() if p.name != "manifest.json"}
    manifest = json.loads((out / "manifest.json").read_text())
    manifest.pop("timestamp")
    return files, manifest


def test_reruns_are_byte_identical(tmp_path):
    cfg = write(
        tmp_path,
        "c.toml",
        'experiment = "intermittent"\nreps = 200\n[system]\nn = 300\n',
    )
    runs = []
    for i, threads in enumerate([1, 1, 3]):
        out = tmp_path / f"o{i}"
        assert run(["run", cfg, "--out", out, "--threads", threads]) in (0, 1)
        runs.append(_outputs(out))
    assert runs[0] == runs[1] == runs[2]
    assert any(name.endswith(".csv") for name in runs[0][0])


def test_seed_override_changes_results(tmp_path):
    cfg = write(tmp_path, "c.toml", 'experiment = "intermittent"\nreps = 100\n[system]\nn = 200\n')
    run(["run", cfg, "--out", tmp_path / "a"])
    run(["run", cfg, "--out", tmp_path / "b", "--seed", 7])
    a, b = _outputs(tmp_path / "a"), _outputs(tmp_path / "b")
    assert b[1]["seed"] == 7
    assert a[0]["summary.json"] != b[0]["summary.json"]


def test_number_format():
    assert cli.format_number(0.1) == "0.10000000000000001"
    assert cli.format_number(1.0) == "1"
    assert cli.format_number(float("nan")) == "nan"
    assert cli._json({"x": float("inf"), "y": [1.5, None]}) == '{\n  "x": null,\n  "y": [1.5, null]\n}'
