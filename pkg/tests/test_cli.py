import json
from pathlib import Path

import numpy as np
import pytest

from conftest import WORKED
from moserlab import io
from moserlab.cli import main
from moserlab.mesh import Field, build_mesh, unit_square
from moserlab.solver import SolutionPair


def write(path: Path, obj):
    path.write_text(json.dumps(obj), encoding="utf-8")
    return str(path)


@pytest.fixture
def worked(tmp_path):
    return write(tmp_path / "worked.json", WORKED)


def run_json(capsys, argv):
    code = main(argv + ["--format", "json"])
    return code, json.loads(capsys.readouterr().out)


def test_check_worked_passes(worked, capsys):
    code, out = run_json(capsys, ["check-exponents", worked])
    assert code == 0 and out["overall"] is True


def test_check_b2_four_flags_e4(tmp_path, capsys):
    path = write(tmp_path / "bad.json", dict(WORKED, b2=4))
    code, out = run_json(capsys, ["check-exponents", path])
    assert code == 1 and "E4" in out["failed"]


@pytest.mark.parametrize("text", ["{not json", "[1, 2]", '{"p": "two", "q": 2, "N": 3}'])
def test_malformed_input_exit_2(tmp_path, text):
    path = tmp_path / "broken.json"
    path.write_text(text)
    assert main(["check-exponents", str(path)]) == 2


def test_missing_file_and_bad_flags(tmp_path):
    assert main(["check-exponents", str(tmp_path / "absent.json")]) == 2
    assert main(["check-exponents"]) == 2
    assert main(["solve", "x.json", "--n", "ten"]) == 2


def test_check_writes_report_and_record(worked, tmp_path):
    out = tmp_path / "report.json"
    assert main(["check-exponents", worked, "--mode", "weak", "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["mode"] == "weak"
    record = json.loads(Path(f"{out}.record.json").read_text())
    assert record["inputs"][worked] == io.sha256_file(worked)
    assert record["config"] == {"mode": "weak"}


def test_split_worked_values(worked, capsys):
    code, out = run_json(capsys, ["holder-split", worked])
    assert code == 0
    assert out["s"] == pytest.approx(2.0, abs=1e-12)
    assert out["t"] == pytest.approx(4 / 3, abs=1e-12)


def test_split_inadmissible_exit_1(tmp_path):
    assert main(["holder-split", write(tmp_path / "bad.json", dict(WORKED, b2=4))]) == 1


def test_split_lists_omitted_terms(tmp_path, capsys):
    path = write(tmp_path / "zero.json", dict(WORKED, b7=0, b8=0, c3=0, c4=0))
    code, out = run_json(capsys, ["holder-split", path])
    assert code == 0 and out["omitted_terms"]


def test_schedule_worked(worked, capsys):
    code, out = run_json(capsys, ["schedule", worked, "--n-max", "3"])
    assert code == 0
    assert out["alphas"] == pytest.approx([9, 13.5, 20.25], abs=1e-12)


@pytest.fixture
def problem(tmp_path):
    def make(preset, **extra):
        return write(tmp_path / f"{preset}.json", {"preset": preset, **extra})
    return make


def test_solve_linear_preset(problem, tmp_path, capsys):
    sol = tmp_path / "lin.sol"
    code, out = run_json(capsys, ["solve", problem("linear-1d"), "--n", "128", "--out", str(sol)])
    assert code == 0 and out["converged"] is True
    pair = io.read_solution(sol)
    assert pair.converged and pair.mesh.n_vertices == 129
    assert Path(f"{sol}.record.json").exists()


def test_solve_dirichlet_zeroes_boundary(problem, tmp_path):
    sol = tmp_path / "d.sol"
    assert main(["solve", problem("linear-1d"), "--n", "16", "--mode", "dirichlet",
                 "--out", str(sol)]) == 0
    pair = io.read_solution(sol)
    bv = pair.mesh.boundary_vertices
    assert np.all(pair.u.values[bv] == 0) and np.all(pair.v.values[bv] == 0)


def test_solve_cap_one_unconverged(problem, tmp_path):
    sol = tmp_path / "cap.sol"
    assert main(["solve", problem("plap-2d"), "--n", "8", "--picard-max", "1",
                 "--out", str(sol)]) == 1
    assert io.read_solution(sol).converged is False


def test_solve_unknown_preset_exit_2(problem):
    assert main(["solve", problem("no-such-preset")]) == 2


def test_ladder_and_certify_on_linear(problem, tmp_path, capsys):
    prob = problem("linear-1d")
    sol = tmp_path / "lin.sol"
    assert main(["solve", prob, "--n", "64", "--out", str(sol)]) == 0
    capsys.readouterr()
    code, lad = run_json(capsys, ["ladder", str(sol), prob, "--n-max", "20", "--part", "plus"])
    assert code == 0
    assert abs(lad["interior"][-1] - lad["nodal_max"]) <= 0.02 * lad["nodal_max"]
    code, cert = run_json(capsys, ["certify", str(sol), prob, "--h-values", "0.1,0.3"])
    assert code == 0 and np.isfinite(cert["growth_fit"])
    assert len(cert["ratios"]) == 6 and len(cert["ratios"][0]) == 2


def test_certify_unconverged_exit_1(problem, tmp_path):
    sol = tmp_path / "cap.sol"
    main(["solve", problem("plap-2d"), "--n", "8", "--picard-max", "1", "--out", str(sol)])
    assert main(["certify", str(sol), problem("plap-2d")]) == 1


def test_constant_fixture_flat_ladder(tmp_path, worked, capsys):
    mesh = build_mesh(unit_square(), 4)
    c = np.full(mesh.n_vertices, 0.75)
    sol = tmp_path / "const.sol"
    io.write_solution(sol, SolutionPair(Field(mesh, c), Field(mesh, c), 0.0, 0.0, 1, True))
    code, out = run_json(capsys, ["ladder", str(sol), worked])
    assert code == 0
    assert out["interior"] == pytest.approx([0.75] * len(out["interior"]), rel=1e-12)
    assert out["verdict"] == "BOUNDED"


def test_envelope_requires_seed(problem):
    assert main(["verify-envelope", problem("linear-1d")]) == 2
    assert main(["verify-envelope", problem("linear-1d"), "--seed", "3", "--samples", "200"]) == 0


def test_deterministic_outputs(problem, tmp_path):
    prob = problem("plap-2d")
    digests = []
    for k in range(2):
        d = tmp_path / f"run{k}"
        d.mkdir()
        sol, lad, env = d / "s.sol", d / "lad", d / "env.json"
        main(["solve", prob, "--n", "8", "--out", str(sol)])
        main(["ladder", str(sol), prob, "--out", str(lad)])
        main(["verify-envelope", prob, "--seed", "11", "--samples", "300", "--out", str(env)])
        digests.append([io.sha256_file(p) for p in (sol, f"{lad}.csv", f"{lad}.json", env)])
    assert digests[0] == digests[1]


def _numbers(text):
    out = []
    for tok in text.replace(",", " ").replace(":", " ").split():
        try:
            out.append(float(tok))
        except ValueError:
            pass
    return out


def test_format_does_not_change_numbers(worked, capsys):
    main(["holder-split", worked, "--format", "json"])
    js = json.loads(capsys.readouterr().out)
    main(["holder-split", worked, "--format", "table"])
    table = _numbers(capsys.readouterr().out)
    for key in ("s", "t", "s1", "t1"):
        assert min(abs(x - js[key]) for x in table) <= 1e-9 * max(1, abs(js[key]))
