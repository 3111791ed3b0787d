import json
import math
import subprocess
import sys

import numpy as np
import pytest

from inconclusive.cli import main
from inconclusive.states import bernoulli


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def bern_files(tmp_path):
    paths = {}
    for name, p in (("p", 0.9), ("q", 0.2)):
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps(bernoulli(p).to_json()))
        paths[name] = str(path)
    return paths


def test_divergence_in_bits_from_files(capsys, bern_files):
    code, out, _ = run(capsys, "divergence", "--kind", "umegaki", "--rho", bern_files["p"],
                       "--sigma", bern_files["q"], "--base", "2")
    assert code == 0
    assert out.strip() == "1.65293250129808"


def test_identical_inputs_give_zero(capsys, bern_files):
    code, out, _ = run(capsys, "divergence", "--kind", "umegaki", "--rho", bern_files["p"],
                       "--sigma", bern_files["p"])
    assert code == 0 and float(out) == 0.0


def test_divergence_json_has_metadata(capsys, bern_files):
    code, out, _ = run(capsys, "divergence", "--kind", "sandwiched", "--s", "0.5", "--json",
                       "--rho", bern_files["p"], "--sigma", bern_files["q"])
    data = json.loads(out)
    assert code == 0
    assert data["value"] == pytest.approx(math.log(2))
    assert set(data["inputs"]) == {bern_files["p"], bern_files["q"]}


def test_rank_deficient_input_exit_2(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"dim": 2, "matrix": [[[1, 0], [0, 0]], [[0, 0], [0, 0]]]}))
    code, _, err = run(capsys, "divergence", "--kind", "umegaki", "--rho", str(path))
    assert code == 2 and "RankDeficient" in err


def test_unsupported_order_exit_2(capsys):
    code, _, err = run(capsys, "divergence", "--kind", "petz", "--s", "3")
    assert code == 2 and "UnsupportedOrder" in err


def test_region_csv_and_manifest(capsys, tmp_path):
    out_path = tmp_path / "det.csv"
    code, _, _ = run(capsys, "region", "--which", "deterministic_hoeffding", "--samples", "256",
                     "--base", "2", "--out", str(out_path))
    assert code == 0
    lines = out_path.read_text().splitlines()
    assert lines[0] == "x,y" and len(lines) == 257
    x0, y0 = map(float, lines[1].split(","))
    assert x0 == 0.0 and y0 == pytest.approx(1.652932501, abs=1e-8)
    manifest = json.loads((tmp_path / "det.csv.manifest.json").read_text())
    assert manifest["command"] == "region"
    assert manifest["arguments"]["samples"] == 256
    assert len(manifest["output_digests"][str(out_path)]) == 64


def test_region_symmetric_single_z(capsys):
    code, out, _ = run(capsys, "region", "--which", "symmetric", "--Z", "0", "--mode", "maximal",
                       "--base", "2")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "x,y" and len(lines) == 2
    assert float(lines[1].split(",")[1]) == pytest.approx(1.652933, abs=1e-6)


def test_region_bad_samples_exit_2(capsys):
    code, _, _ = run(capsys, "region", "--which", "onesided", "--samples", "1")
    assert code == 2


def test_simulate_classical_exact(capsys):
    code, out, _ = run(capsys, "simulate-classical", "--P", "0.9", "--Q", "0.2", "--n", "2000",
                       "--mode", "stein", "--json")
    data = json.loads(out)
    assert code == 0 and data["exact"] is True and data["flags"] == []


def test_simulate_classical_budget(capsys, tmp_path):
    p, q = tmp_path / "p.json", tmp_path / "q.json"
    p.write_text(json.dumps({"probs": [0.3, 0.2, 0.15, 0.15, 0.1, 0.1]}))
    q.write_text(json.dumps({"probs": [0.05, 0.05, 0.1, 0.2, 0.25, 0.35]}))
    args = ["simulate-classical", "--P", str(p), "--Q", str(q), "--n", "400", "--delta", "0.1", "--json"]
    code, _, err = run(capsys, *args, "--exact")
    assert code == 4 and "TooManyTypes" in err
    code, out, _ = run(capsys, *args, "--mc-samples", "500")
    data = json.loads(out)
    assert code == 0 and data["exact"] is False and "monte_carlo" in data["flags"]


def test_simulate_sequential_is_byte_stable(capsys):
    args = ["simulate-sequential", "--n", "100", "--epsilon-bits", "0.3", "--trials", "3000",
            "--seed", "24301", "--json"]
    _, first, _ = run(capsys, *args)
    _, second, _ = run(capsys, *args, "--threads", "3")
    assert first == second
    data = json.loads(first)
    assert data["config"]["seed"] == 24301 and data["config"]["trials"] == 3000
    assert "wall_clock_seconds" not in json.dumps(data)


def test_simulate_sequential_bad_epsilon(capsys):
    code, _, err = run(capsys, "simulate-sequential", "--n", "100", "--epsilon-bits", "5")
    assert code == 2 and "ConfigError" in err


def test_pinching_scan(capsys, tmp_path):
    rho = tmp_path / "r.json"
    rho.write_text(json.dumps({"dim": 2, "matrix": [[[0.5, 0], [0.25, 0]], [[0.25, 0], [0.5, 0]]]}))
    sigma = tmp_path / "s.json"
    sigma.write_text(json.dumps({"probs": [0.75, 0.25]}))
    code, out, _ = run(capsys, "pinching-scan", "--s", "0.7", "--kmax", "4", "--rho", str(rho),
                       "--sigma", str(sigma))
    lines = out.splitlines()
    assert code == 0 and lines[0] == "k,rate,target,gap,bound" and len(lines) == 5
    gaps = [float(line.split(",")[3]) for line in lines[1:]]
    assert all(b <= a for a, b in zip(gaps, gaps[1:]))


def test_verify_unknown_suite_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--suite", "nope"])
    assert exc.value.code == 2


def test_verify_divergences_suite_passes(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "divergences")
    assert code == 0 and "[PASS] criterion 1" in out


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "inconclusive", "divergence", "--kind", "fidelity"],
                         capture_output=True, text=True, check=True)
    assert float(res.stdout) == pytest.approx(0.5)


def test_base_two_is_exact_rescaling(capsys):
    _, nats, _ = run(capsys, "divergence", "--kind", "chernoff", "--json")
    _, bits, _ = run(capsys, "divergence", "--kind", "chernoff", "--json", "--base", "2")
    assert json.loads(bits)["value"] == json.loads(nats)["value"] / math.log(2)
    assert np.isfinite(json.loads(nats)["value"])
