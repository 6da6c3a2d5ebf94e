import json
import subprocess
import sys

import numpy as np
import pytest
import yaml

from walkmix.cli import format_float, main

from _chains import random_reversible_chain


def write_chain(path, p, **extra):
    doc = {"n": len(p), "p": np.asarray(p).tolist(), **extra}
    path.write_text(json.dumps(doc))
    return str(path)


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def two_state(tmp_path):
    return write_chain(tmp_path / "two.json", [[0.7, 0.3], [0.3, 0.7]])


def test_format_float_is_17_digits_and_round_trips():
    for x in [0.1, 1 / 3, 1.0, 1e20, 2.5e-17, 0.0]:
        s = format_float(x)
        assert float(s) == x
        assert isinstance(yaml.safe_load(s), float)
    assert format_float(0.1) == "0.10000000000000001"


def test_analyze_two_state(capsys, two_state):
    code, out, _ = run(capsys, "analyze", two_state)
    assert code == 0
    rep = yaml.safe_load(out)
    eig = [e["eigenvalue"] for e in rep["discriminant spectrum"]]
    assert eig == pytest.approx([1.0, 0.4], abs=1e-12)
    assert rep["classification"]["symmetric"] is True
    assert "uniform mixing criterion: PASS" in out


def test_analyze_row_sum_violation(capsys, tmp_path):
    path = write_chain(tmp_path / "bad.json", [[0.5, 0.6], [0.5, 0.5]])
    code, out, err = run(capsys, "analyze", path)
    assert code == 2
    assert "RowSumViolation" in err and "row 0" in err
    assert out == ""


@pytest.mark.parametrize("doc,needle", [
    ('{"n": 2, "p": [[1, 0], [0.5]]}', "row 1"),
    ('{"n": 2, "p": [[1, 0], [0.5, "x"]]}', "p[1][1]"),
    ('{"n": 3, "p": [[1, 0], [0.5, 0.5]]}', "n = 3"),
    ('{"n": 2, "p": [[1.5, -0.5], [0.5, 0.5]]}', "NegativeEntry"),
    ('[1, 2]', "top level"),
    ('{"n": 2, "p": [[1, 0], [0.5, 0.5]', "not valid JSON"),
])
def test_parse_diagnostics(capsys, tmp_path, doc, needle):
    path = tmp_path / "c.json"
    path.write_text(doc)
    code, _, err = run(capsys, "analyze", path)
    assert code == 2
    assert needle in err


def test_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "analyze", tmp_path / "nope.json")
    assert code == 2 and "cannot read" in err


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as info:
        main(["mix"])
    assert info.value.code == 1


def test_normalize_rows(capsys, tmp_path):
    path = write_chain(tmp_path / "c.json", [[0.7, 0.3 + 4e-7], [0.3, 0.7]])
    assert run(capsys, "analyze", path)[0] == 2
    assert run(capsys, "analyze", path, "--normalize-rows")[0] == 0
    far = write_chain(tmp_path / "far.json", [[0.7, 0.31], [0.3, 0.7]])
    code, _, err = run(capsys, "analyze", far, "--normalize-rows")
    assert code == 2 and "RowSumViolation" in err


def test_analyze_prime_family_round_trip(capsys, tmp_path):
    code, out, _ = run(capsys, "construct", "--primes", "3,5")
    assert code == 0
    doc = json.loads(out)
    assert doc["n"] == 4 and len(doc["labels"]) == 4
    path = tmp_path / "pf.json"
    path.write_text(out)
    code, out, err = run(capsys, "analyze", path)
    assert code == 0 and err == ""
    assert "uniform mixing criterion: PASS" in out


def test_construct_two_state(capsys):
    code, out, _ = run(capsys, "construct", "--two-state", "0.5")
    assert json.loads(out)["p"] == [[0.5, 0.5], [0.5, 0.5]]


def test_construct_tensor_matches_kron(capsys, tmp_path):
    a = [[0.2, 0.8], [0.8, 0.2]]
    b = [[0.5, 0.25, 0.25], [0.25, 0.5, 0.25], [0.25, 0.25, 0.5]]
    fa, fb = write_chain(tmp_path / "a.json", a), write_chain(tmp_path / "b.json", b)
    code, out, _ = run(capsys, "construct", "--tensor", fa, fb)
    assert code == 0
    got = np.array(json.loads(out)["p"])
    for i, j, k, l in np.ndindex(2, 2, 3, 3):
        assert got[i * 3 + k, j * 3 + l] == a[i][j] * b[k][l]


def test_construct_errors(capsys):
    code, _, err = run(capsys, "construct", "--primes", "3,3")
    assert code == 2 and "DuplicatePrime" in err
    code, _, err = run(capsys, "construct", "--primes", "3,9")
    assert code == 2 and "NotOddPrime" in err
    code, _, err = run(capsys, "construct", "--two-state", "1.0")
    assert code == 2 and "OutOfRange" in err


def test_construct_sign(capsys):
    _, out, _ = run(capsys, "construct", "--primes", "3", "--sign", "-1")
    assert json.loads(out)["p"][0][0] == pytest.approx(1 / 3)


def test_mix_closed_two_state(capsys, tmp_path):
    path = write_chain(tmp_path / "c.json", [[0.3, 0.7], [0.7, 0.3]])
    code, out, _ = run(capsys, "mix", path, "--kind", "discrete", "--method", "closed")
    assert code == 0
    rep = yaml.safe_load(out)
    np.testing.assert_allclose(rep["matrix"], 0.5, atol=1e-12)
    assert rep["method"] == "closed-form"


def test_mix_empirical_T1(capsys, two_state):
    code, out, _ = run(capsys, "mix", two_state, "--method", "empirical", "--T", "1")
    assert code == 0
    assert yaml.safe_load(out)["matrix"] == [[1.0, 0.0], [0.0, 1.0]]


def test_mix_check_random_reversible(capsys, tmp_path):
    c = random_reversible_chain(np.random.default_rng(7), 4)
    path = write_chain(tmp_path / "c.json", c.p)
    code, out, _ = run(capsys, "mix", path, "--check")
    assert code == 0
    check = yaml.safe_load(out)["check"]
    assert check["method"] == "empirical"
    assert check["max discrepancy"] <= 5e-3


def test_mix_continuous(capsys, two_state):
    code, out, _ = run(capsys, "mix", two_state, "--kind", "continuous", "--method", "integral",
                       "--T", "500", "--steps", "5000", "--check")
    rep = yaml.safe_load(out)
    assert code == 0
    assert rep["parameters"] == {"T": 500.0, "steps": 5000}
    assert rep["check"]["max discrepancy"] <= 1e-2


def test_mix_closed_non_reversible(capsys, tmp_path):
    path = write_chain(tmp_path / "cyc.json", np.roll(np.eye(3), 1, axis=1))
    code, _, err = run(capsys, "mix", path, "--method", "closed")
    assert code == 2 and "reversible" in err


def test_mix_incompatible_flags(capsys, two_state):
    code, _, err = run(capsys, "mix", two_state, "--kind", "continuous", "--method", "empirical")
    assert code == 1 and "not available" in err


def test_mix_matrix_format(capsys, two_state):
    code, out, _ = run(capsys, "mix", two_state, "--format", "matrix")
    assert code == 0
    rows = [list(map(float, line.split())) for line in out.splitlines()]
    np.testing.assert_allclose(rows, 0.5, atol=1e-12)


def test_env_default_T(capsys, two_state, monkeypatch):
    monkeypatch.setenv("WALKMIX_DEFAULT_T", "1")
    _, out, _ = run(capsys, "mix", two_state, "--method", "empirical")
    rep = yaml.safe_load(out)
    assert rep["parameters"]["T"] == 1
    assert rep["matrix"] == [[1.0, 0.0], [0.0, 1.0]]


def test_verify_two_state(capsys, two_state):
    code, out, _ = run(capsys, "verify", two_state)
    rep = yaml.safe_load(out)
    assert code == 0 and rep["result"] == "PASS"
    assert rep["properties"]["symmetry"] == "PASS"
    assert len(rep["properties"]["automorphism residuals"]) == 2


def test_verify_directed_cycle(capsys, tmp_path):
    path = write_chain(tmp_path / "cyc.json", np.roll(np.eye(3), 1, axis=1))
    code, out, _ = run(capsys, "verify", path, "--T", "50000")
    rep = yaml.safe_load(out)
    assert code == 0
    assert any("closed form skipped" in note for note in rep["notes"])
    assert rep["checks"]["empirical column sums"]["status"] == "PASS"


def test_verify_with_automorphism_file(capsys, tmp_path, two_state):
    autos = tmp_path / "autos.json"
    autos.write_text("[[0, 1]]")
    code, out, _ = run(capsys, "verify", two_state, "--automorphisms", autos)
    rep = yaml.safe_load(out)
    assert code == 0
    res = {tuple(a["sigma"]): a["residual"] for a in rep["properties"]["automorphism residuals"]}
    assert res[(0, 1)] == 0.0


def test_verify_rejects_invalid_automorphism(capsys, tmp_path):
    path = write_chain(tmp_path / "c.json", [[0.2, 0.8, 0.0], [0.4, 0.2, 0.4], [0.0, 0.8, 0.2]])
    autos = tmp_path / "autos.json"
    autos.write_text("[[1, 0, 2]]")
    code, _, err = run(capsys, "verify", path, "--automorphisms", autos, "--T", "100")
    assert code == 2 and "NotAutomorphism" in err


def test_walk_t0_point_mass(capsys, two_state):
    code, out, _ = run(capsys, "walk", two_state, "--start", "1", "--t", "0")
    rep = yaml.safe_load(out)
    assert code == 0
    assert rep["vertex marginal"] == [0.0, 1.0]


def test_walk_one_step(capsys, two_state):
    _, out, _ = run(capsys, "walk", two_state, "--start", "0", "--t", "1")
    rep = yaml.safe_load(out)
    np.testing.assert_allclose(rep["arc distribution"], [[0.7, 0.0], [0.3, 0.0]], atol=1e-15)
    assert abs(rep["marginal sum"] - 1) <= 1e-10


def test_walk_marginal_sums_to_one(capsys, tmp_path):
    c = random_reversible_chain(np.random.default_rng(3), 5)
    path = write_chain(tmp_path / "c.json", c.p)
    _, out, _ = run(capsys, "walk", path, "--start", "2", "--t", "123")
    rep = yaml.safe_load(out)
    assert abs(sum(rep["vertex marginal"]) - 1) <= 1e-10


def test_reports_are_deterministic(capsys, tmp_path):
    c = random_reversible_chain(np.random.default_rng(6), 4)
    path = write_chain(tmp_path / "c.json", c.p)
    for argv in (["analyze", path], ["mix", path, "--check"], ["verify", path, "--T", "500"]):
        first = run(capsys, *argv)
        assert first == run(capsys, *argv)


def test_module_entry_point(tmp_path):
    path = write_chain(tmp_path / "two.json", [[0.7, 0.3], [0.3, 0.7]])
    proc = subprocess.run([sys.executable, "-m", "walkmix", "analyze", path],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert "uniform mixing criterion: PASS" in proc.stdout
