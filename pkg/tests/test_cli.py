import json

import pytest

from hermdense.cli import main


@pytest.fixture
def lat(tmp_path):
    def write(name, p, gram):
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps({"p": p, "gram": gram}))
        return str(path)

    return {
        "H": write(
            "H", 3, [[["0", "0"], ["0", "1/3"]], [["0", "-1/3"], ["0", "0"]]]
        ),
        "p3": write("p3", 3, [[["3", "0"]]]),
        "one": write("one", 3, [[["1", "0"]]]),
        "eps": write("eps", 3, [[["2", "0"]]]),
        "neg1": write("neg1", 3, [[["-1", "0"]]]),
        "bad_json": str((tmp_path / "bad.json").write_text("{not json") or tmp_path / "bad.json"),
        "not_herm": write("nh", 3, [[["1", "0"], ["1", "0"]], [["0", "0"], ["1", "0"]]]),
        "degenerate": write("dg", 3, [[["1", "0"], ["1", "0"]], [["1", "0"], ["1", "0"]]]),
    }


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_info(capsys, lat):
    code, out, _ = run(capsys, "info", lat["H"])
    data = json.loads(out)
    assert code == 0
    assert data["fundamental_invariants"] == [0, 0]
    assert data["class"] == "split"
    assert data["normal_form"]["hyperbolic_blocks"] == [0]

    code, out, _ = run(capsys, "info", lat["p3"])
    data = json.loads(out)
    assert code == 0
    assert data["fundamental_invariants"] == [3]
    assert data["val"] == 3
    assert data["class"] == "nonsplit"


def test_info_malformed_inputs(capsys, lat):
    assert run(capsys, "info", lat["bad_json"])[0] == 2
    code, _, err = run(capsys, "info", lat["not_herm"])
    assert code == 2 and "hermitian" in err
    code, _, err = run(capsys, "info", lat["degenerate"])
    assert code == 2 and "degenerate" in err
    assert run(capsys, "info", str(lat["p3"]) + ".missing")[0] == 2


def test_pden_and_aliases(capsys, lat):
    code, out, _ = run(capsys, "pden", lat["p3"])
    data = json.loads(out)
    assert code == 0 and data["partial_den"] == "2"
    code, out, _ = run(capsys, "int-y", lat["eps"])
    data = json.loads(out)
    assert code == 0 and data["int_y"] == "1"
    assert run(capsys, "pden", lat["one"])[0] == 4  # split class


def test_density_command(capsys, lat):
    code, out, _ = run(capsys, "density", lat["eps"], "--k", "1")
    data = json.loads(out)
    assert code == 0
    assert data["den"] == "8/9"
    code, out, _ = run(capsys, "density", lat["eps"], "--target", lat["H"])
    assert code == 0 and json.loads(out)["den"] == "8/9"
    # d_max 1 cannot stabilize
    code, _, _ = run(capsys, "density", lat["eps"], "--d-max", "1")
    assert code == 3


def test_denpoly(capsys, lat):
    code, out, _ = run(capsys, "denpoly", lat["eps"])
    data = json.loads(out)
    assert code == 0
    assert data["coeffs"] == ["1", "-1"]
    assert data["grid"][0] == [0, "0"]


def test_whittaker_csv(capsys, lat):
    code, out, _ = run(
        capsys, "whittaker", lat["neg1"], "--s-max", "1",
        "--comparison-rank", "2", "--emit", "csv",
    )
    assert code == 0
    assert out.splitlines() == ["s,value-num,value-den", "0,8,9", "1,80,81"]


def test_budget_exit(capsys, lat):
    from hermdense.density import clear_caches

    clear_caches()
    code, _, err = run(capsys, "density", lat["eps"], "--k", "4", "--d-max", "3",
                       "--d-min", "3", "--budget", "100")
    assert code == 5


def test_int_z(capsys, tmp_path, lat):
    # pi-rescaled diag(2, 3): Gram diag(-6, -9), p^-1-scaled form is integral
    path = tmp_path / "zlat.json"
    path.write_text(json.dumps({"p": 3, "gram": [
        [["-6", "0"], ["0", "0"]], [["0", "0"], ["-9", "0"]]]}))
    code, out, _ = run(capsys, "int-z", str(path))
    assert code == 0 and json.loads(out)["int_z"] == "4"
    code, _, _ = run(capsys, "int-z", lat["eps"])
    assert code == 2  # odd rank


def test_output_byte_stable(capsys, lat):
    outs = set()
    for workers in ("1", "2"):
        code, out, _ = run(capsys, "pden", lat["p3"], "--workers", workers)
        assert code == 0
        outs.add(out)
    assert len(outs) == 1


def test_verify_smoke(capsys, tmp_path):
    report_path = tmp_path / "reports.json"
    code, out, _ = run(capsys, "verify", "--p", "3", "--skip-stretch",
                       "--json", str(report_path))
    assert code == 0
    lines = [l for l in out.splitlines() if l and not l.startswith("#")]
    assert all(l.startswith("PASS") for l in lines)
    reports = json.loads(report_path.read_text())
    assert all(r["pass"] for r in reports)
    assert set(reports[0]) == {"identity", "inputs", "lhs", "rhs", "pass", "diagnostics"}


def test_verify_rejects_p2(capsys):
    assert run(capsys, "verify", "--p", "2")[0] == 2


def test_verify_starved_budget(capsys):
    from hermdense.density import clear_caches

    clear_caches()
    code, out, _ = run(capsys, "verify", "--p", "3", "--budget", "10",
                       "--skip-stretch")
    assert code == 5
    assert "INFEASIBLE" in out


def test_env_budget(capsys, lat, monkeypatch):
    from hermdense.density import clear_caches

    clear_caches()
    monkeypatch.setenv("HERMDENSE_BUDGET", "100")
    code, _, _ = run(capsys, "density", lat["eps"], "--k", "4", "--d-max", "3",
                     "--d-min", "3")
    assert code == 5
