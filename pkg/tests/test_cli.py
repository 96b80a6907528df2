import csv
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from ukrylov.cli import main, run
from ukrylov.errors import ConfigError
from ukrylov.io import fmt, write_csv

GUE6 = {"family": "gue", "seed": 0, "params": {"dt": 0.3}, "num_sites": 6, "boundary": "open"}


def _run(tmp_path, cfg, name="out", extra=()):
    path = tmp_path / f"{name}.json"
    path.write_text(json.dumps(cfg))
    out = tmp_path / name
    code = main(["--config", str(path), "--out", str(out), *extra])
    return code, out


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_dual_unitary_table(tmp_path):
    code, out = _run(tmp_path, {"command": "krylov", "backend": "dual-unitary", "T": 8})
    assert code == 0
    rows = _rows(out / "krylov.csv")
    assert rows[0] == ["n", "re_a", "im_a", "abs_b", "abs_c"]
    for r in rows[1:]:
        if r[1]:
            assert float(r[1]) == 0 and float(r[2]) == 0
        if r[3]:
            assert float(r[3]) == 1
    side = json.loads((out / "krylov.json").read_text())
    assert side["config"]["backend"] == "dual-unitary" and side["version"]
    assert side["precision_digits"] == 16


def test_same_config_same_bytes(tmp_path):
    cfg = {"command": "krylov", "backend": "ed", "T": 8, "circuit": GUE6}
    _, a = _run(tmp_path, cfg, "a")
    _, b = _run(tmp_path, cfg, "b")
    for f in ("krylov.csv", "krylov.json"):
        assert (a / f).read_bytes() == (b / f).read_bytes()


def test_precision_flag_controls_digits(tmp_path):
    cfg = {"command": "krylov", "backend": "ed", "T": 6, "circuit": GUE6}
    _, lo = _run(tmp_path, cfg, "lo")
    _, hi = _run(tmp_path, cfg, "hi", ["--precision", "32"])
    r_lo, r_hi = _rows(lo / "krylov.csv")[1], _rows(hi / "krylov.csv")[1]
    assert len(r_hi[1].split("e")[0].replace("-", "").replace(".", "")) == 32
    assert len(r_lo[1].split("e")[0].replace("-", "").replace(".", "")) == 16
    assert abs(float(r_hi[1]) - float(r_lo[1])) < 1e-12


@pytest.mark.parametrize("command,files", [
    ("complexity", ["complexity.csv"]),
    ("spectral", ["spectral.csv", "modes.csv"]),
    ("otoc", ["otoc.csv", "otoc_fit.csv"]),
])
def test_ed_commands(tmp_path, command, files):
    cfg = {"command": command, "backend": "ed", "T": 6, "nmax": 4, "circuit": GUE6}
    code, out = _run(tmp_path, cfg)
    assert code == 0
    for f in files:
        assert (out / f).exists() and (out / f.replace(".csv", ".json")).exists()


def test_moments_backend(tmp_path):
    lam2 = 0.64
    cfg = {"command": "krylov", "backend": "moments", "moments": [lam2 ** t for t in range(10)]}
    code, out = _run(tmp_path, cfg)
    rows = _rows(out / "krylov.csv")
    assert code == 0 and float(rows[1][1]) == pytest.approx(0.64)
    assert float(rows[2][3]) == pytest.approx(np.sqrt(1 - 0.8 ** 4))


def test_transition_scan_threads_deterministic(tmp_path):
    cfg = {"command": "transition-scan", "backend": "free-fermion", "N": 100, "nmax": 40,
           "grid": {"dt": [0.2, 0.3, 0.5, 0.7], "s": [2]}}
    _, one = _run(tmp_path, cfg, "one", ["--threads", "1"])
    _, two = _run(tmp_path, cfg, "two", ["--threads", "3"])
    assert (one / "scan.csv").read_bytes() == (two / "scan.csv").read_bytes()
    rows = _rows(one / "scan.csv")
    assert [float(r[0]) for r in rows[1:]] == [0.2, 0.3, 0.5, 0.7]
    assert [r[2] for r in rows[1:]] == ["0", "0", "1", "1"]


def test_clifford_command(tmp_path):
    cfg = {"command": "clifford", "backend": "clifford", "num_sites": 8, "tmax": 300,
           "grid": {"seeds": list(range(10))}, "scan": True}
    code, out = _run(tmp_path, cfg)
    assert code == 0
    side = json.loads((out / "clifford.json").read_text())
    P = side["period_bits"]
    K = [int(r[1]) for r in _rows(out / "clifford.csv")[1:]]
    assert K == [t % P for t in range(301)]
    assert (out / "clifford_sequence.txt").read_text().startswith("+Z")


def test_fit_command(tmp_path):
    x = [1, 2, 4, 8]
    cfg = {"command": "fit", "backend": "moments",
           "fit": {"kind": "power_law", "xs": x, "ys": [3 * v ** 1.5 for v in x]}}
    code, out = _run(tmp_path, cfg)
    rep = json.loads((out / "fit_report.json").read_text())
    assert code == 0 and rep["params"]["exponent"] == pytest.approx(1.5)


def test_config_errors_exit_2(tmp_path, capsys):
    code, _ = _run(tmp_path, {"command": "nope", "backend": "ed"})
    assert code == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "ConfigError"
    assert main(["--config", str(tmp_path / "missing.json"), "--out", str(tmp_path)]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["--config", str(bad), "--out", str(tmp_path)]) == 2
    code, _ = _run(tmp_path, {"command": "krylov", "backend": "ed", "T": 4, "circuit": GUE6},
                   "lowprec", ["--precision", "8"])
    assert code == 2
    code, _ = _run(tmp_path, {"command": "transition-scan", "backend": "ed"}, "wrong")
    assert code == 2


def test_numerical_failure_exit_3(tmp_path, capsys):
    cfg = {"command": "krylov", "backend": "moments", "precision_digits": 30,
           "moments": [1, 0.99, 0]}
    code, _ = _run(tmp_path, cfg)
    assert code == 3
    assert json.loads(capsys.readouterr().err)["error"] == "PrecisionExhausted"


def test_thread_env_override(tmp_path, monkeypatch):
    from ukrylov.cli import _threads
    monkeypatch.setenv("UKRYLOV_THREADS", "4")
    assert _threads(None) == 4 and _threads(2) == 2
    monkeypatch.setenv("UKRYLOV_THREADS", "x")
    with pytest.raises(ConfigError):
        _threads(None)


def test_run_api(tmp_path):
    paths = run({"command": "complexity", "backend": "dual-unitary", "T": 5}, str(tmp_path))
    rows = _rows(paths[0])
    assert [float(r[1]) for r in rows[1:]] == pytest.approx(list(range(6)))


def test_module_entry_point(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"command": "krylov", "backend": "dual-unitary", "T": 3}))
    res = subprocess.run([sys.executable, "-m", "ukrylov", "--config", str(cfg), "--out",
                          str(tmp_path / "o")], capture_output=True, text=True)
    assert res.returncode == 0 and os.path.exists(tmp_path / "o" / "krylov.csv")


def test_fmt_and_csv(tmp_path):
    import mpmath as mp
    assert fmt(3) == "3" and fmt(True) == "1" and fmt(None) == ""
    assert fmt(0.1) == "1.0000000000000001e-01"
    assert fmt(0.1, 40) == "1.0000000000000001e-01"
    with mp.workdps(30):
        assert fmt(mp.mpf(1) / 3, 20).startswith("3.3333333333333333333e-1")
    p = tmp_path / "x.csv"
    write_csv(p, ["a", "b"], [(1, 2.5)])
    assert p.read_bytes() == b"a,b\n1,2.5000000000000000e+00\n"
