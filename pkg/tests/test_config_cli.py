import json

import numpy as np
import pytest
import yaml

from epgrav import ValidationError
from epgrav import config as cfgmod
from epgrav.cli import main, run_report


def _rows(path):
    return np.loadtxt(path, comments="#", ndmin=2)


def test_default_config_round_trip():
    cfg = cfgmod.load()
    again = cfgmod.from_dict(yaml.safe_load(cfg.dump()))
    assert again == cfg
    assert again.dump() == cfg.dump()
    assert again.sha256() == cfg.sha256()


def test_derived_test_mass():
    cfg = cfgmod.load()
    assert cfg.system.m_t is None
    assert cfg.system_params().m_t == pytest.approx(1.55e-10)


def test_yaml_exponent_without_dot():
    cfg = cfgmod.from_dict({"system": {"kappa": "1e7"}})
    assert cfg.system.kappa == 1e7


@pytest.mark.parametrize("override,path", [
    ("system.omega_m=-1", "system.omega_m"),
    ("system.kappa=0", "system.kappa"),
    ("system.J=-5", "system.J"),
    ("system.bogus=1", "system.bogus"),
    ("sweep.n_min=-1", "sweep.n_min"),
    ("sweep.points=2.5", "sweep.points"),
    ("geometry.gap=0", "geometry.gap"),
    ("response.window=[1e-3, 1e-6]", "response.window"),
    ("timedomain.t_span=0", "timedomain.t_span"),
    ("exclusion.overlays=[missing.txt]", "exclusion.overlays[0]"),
    ("unit_mode=hz", "unit_mode"),
])
def test_validation_names_field(override, path):
    with pytest.raises(ValidationError) as info:
        cfgmod.load(overrides=[override])
    assert info.value.path == path


def test_bad_override_syntax():
    with pytest.raises(ValidationError):
        cfgmod.load(overrides=["system.J"])


def test_malformed_yaml(tmp_path):
    f = tmp_path / "c.yaml"
    f.write_text("system: [unclosed\n")
    with pytest.raises(ValidationError, match="malformed"):
        cfgmod.load(f)


def test_angular_mode_changes_rates():
    lit = cfgmod.load().system_params()
    ang = cfgmod.load(unit_mode="angular").system_params()
    assert ang.omega_m == pytest.approx(2 * np.pi * lit.omega_m)
    assert ang.Q == lit.Q


def test_exit_codes(tmp_path, capsys):
    out = str(tmp_path)
    assert main(["report", "--out", out, "--override", "system.J=0"]) == 2
    err = capsys.readouterr().err
    assert "find_ep" in err and "no EP in range" in err
    assert main(["report", "--out", out, "--override", "system.omega_m=-1"]) == 1
    assert "system.omega_m" in capsys.readouterr().err
    assert main(["timedomain", "--out", out, "--override", "timedomain.t_span=0"]) == 1
    assert "timedomain.t_span" in capsys.readouterr().err


def test_single_point_sweep(tmp_path):
    assert main(["sweep", "--out", str(tmp_path), "--override", "sweep.points=1"]) == 0
    rows = _rows(tmp_path / "sweep.tsv")
    assert rows.shape == (1, 6)


def test_sweep_table_header(tmp_path):
    assert main(["sweep", "--out", str(tmp_path), "--override", "sweep.points=11"]) == 0
    head = (tmp_path / "sweep.tsv").read_text().splitlines()
    assert head[1] == f"# config_sha256: {cfgmod.load(overrides=['sweep.points=11']).sha256()}"
    assert "re_omega_plus" in head[3]


@pytest.mark.parametrize("cmd", ["sweep", "splitting", "report", "exclusion", "timedomain"])
def test_reruns_are_byte_identical(tmp_path, cmd):
    extra = ["--override", "timedomain.beat_periods=3"] if cmd == "timedomain" else []
    a, b = tmp_path / "a", tmp_path / "b"
    assert main([cmd, "--out", str(a), *extra]) == 0
    assert main([cmd, "--out", str(b), *extra]) == 0
    names = sorted(p.name for p in a.iterdir())
    assert names == sorted(p.name for p in b.iterdir())
    for n in names:
        assert (a / n).read_bytes() == (b / n).read_bytes(), n


def test_overlay_pass_through(tmp_path):
    overlay = tmp_path / "casimir_limit.txt"
    overlay.write_text("# lambda alpha\n1e-7 1e20\n1e-6 1e12\n")
    base = yaml.safe_load(cfgmod.DEFAULT_CONFIG.read_text())
    base["exclusion"]["overlays"] = ["casimir_limit.txt"]
    conf = tmp_path / "run.yaml"
    conf.write_text(yaml.safe_dump(base))
    out = tmp_path / "out"
    assert main(["exclusion", "--config", str(conf), "--out", str(out)]) == 0
    assert (out / "overlays" / "casimir_limit.txt").read_bytes() == overlay.read_bytes()


def test_exclusion_table(tmp_path):
    assert main(["exclusion", "--out", str(tmp_path)]) == 0
    lam, a_ep, a_lin = _rows(tmp_path / "exclusion.tsv").T
    assert lam[0] == pytest.approx(1e-8) and lam[-1] == pytest.approx(1e-4)
    assert np.all(np.isfinite(a_ep)) and np.all(a_ep > 0)
    ratio = a_lin / a_ep
    assert np.allclose(ratio, ratio[0], rtol=1e-10)


@pytest.fixture(scope="module")
def report():
    return run_report(cfgmod.load())


def test_report_contents(report):
    assert report["sigma"] == pytest.approx(8.3e-3, rel=5e-3)
    for key in ("n0", "Y", "sigma", "dw_min", "grad_min", "f_min", "eta"):
        assert key in report["deviations"]
    assert report["Y_source"] == "fit"
    assert report["eta"] == pytest.approx(report["Y_used"] / report["sigma"], rel=1e-12)


def test_report_pinned_y():
    rep = run_report(cfgmod.load(overrides=["sensing.Y_override=5e4"]))
    assert rep["Y_source"] == "override"
    assert rep["dw_min"] == pytest.approx((1e5 / 1.2e7) ** 2 / 5e4, rel=1e-12)
    # 6.02e6 when sigma is rounded to 8.3e-3; 6.00e6 with the exact 1e5 / 1.2e7
    assert rep["eta"] == pytest.approx(6.02e6, rel=1e-2)


@pytest.mark.xfail(strict=True, reason="the fitted Y is about 4x the quoted 5e4, so the "
                   "unpinned floor is about 4x lower than 1.38e-9")
def test_report_unpinned_floor_near_quoted(report):
    assert report["dw_min"] == pytest.approx(1.38e-9, rel=0.4)


def test_timedomain_summary(tmp_path):
    assert main(["timedomain", "--out", str(tmp_path)]) == 0
    s = json.loads((tmp_path / "spectrum.json").read_text())
    assert s["phase"] == "unbroken"
    assert s["peaks_within_resolution"]
    rows = _rows(tmp_path / "trajectory.tsv")
    assert rows.shape[1] == 5
