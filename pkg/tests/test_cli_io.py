import io
import os
import subprocess
import sys

import numpy as np
import pytest

from polyweb.activity import ActivityMeasure
from polyweb.config import ConfigError, parse_config
from polyweb.fields import sample_field
from polyweb.geometry import Line
from polyweb.io_formats import read_field, read_web, write_field, write_web
from polyweb.svg import field_svg, web_svg
from polyweb.webs import MarkerConfig, sample_web

CFG = """
domain = disc 0 0 1
family = concentric
activity = homogeneous 1.0
marker = 0.9 0.3 0.3593200665423779 0.029817608555702618
marker = 2.1 -0.15 -0.02851218407735953 0.2483687890197534
stop_rule = tangency
seed = 11
replicas = 2
eps_x = 0.02
eps_phi = 0.02
n_field = 60
n_web = 60
method = exact
"""


def test_parse_config_roundtrip_fields():
    cfg = parse_config(CFG)
    assert cfg.domain.kind == "disc"
    assert cfg.activity.lam == 1.0
    assert len(cfg.markers) == 2
    assert cfg.seed == 11 and cfg.replicas == 2
    assert cfg.stop_rule == "tangency"
    assert len(cfg.config_hash) == 16


def test_parse_config_rejects_unknown_key():
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config(CFG + "\nbogus = 1\n")
    with pytest.raises(ConfigError, match="domain"):
        parse_config("activity = homogeneous 1.0\n")
    with pytest.raises(ConfigError, match="not on its line"):
        parse_config("domain = disc 0 0 1\nmarker = 0.3 0.1 5 5\n")


def test_field_roundtrip(disc_family):
    s = sample_field(ActivityMeasure.homogeneous(1.0), disc_family,
                     np.random.default_rng(5), seed=5)
    buf = io.StringIO()
    write_field(s, buf)
    text = buf.getvalue()
    s2 = read_field(io.StringIO(text))
    buf2 = io.StringIO()
    write_field(s2, buf2)
    assert buf2.getvalue() == text
    assert s2.edge_count() == s.edge_count()


def test_web_roundtrip_and_crops_replay(disc_family):
    mc = MarkerConfig([(Line(0.3, 0.1), Line(0.3, 0.1).point_at(0.2)),
                       (Line(1.5, -0.2), Line(1.5, -0.2).point_at(-0.3))])
    w = sample_web(ActivityMeasure.homogeneous(1.0), disc_family, mc,
                   rng=np.random.default_rng(10), seed=10)
    buf = io.StringIO()
    write_web(w, buf)
    text = buf.getvalue()
    w2 = read_web(io.StringIO(text))
    buf2 = io.StringIO()
    write_web(w2, buf2)
    assert buf2.getvalue() == text
    from polyweb.crop import crop_graph_sum, em_signed_count
    assert crop_graph_sum(w2) == crop_graph_sum(w)
    assert em_signed_count(w2) == em_signed_count(w)


def test_svg_segment_count(disc_family):
    s = sample_field(ActivityMeasure.homogeneous(1.0), disc_family,
                     np.random.default_rng(5))
    svg = field_svg(s)
    assert svg.count("<polyline") == s.edge_count()
    mc = MarkerConfig([(Line(0.3, 0.1), Line(0.3, 0.1).point_at(0.2))])
    w = sample_web(ActivityMeasure.homogeneous(1.0), disc_family, mc,
                   rng=np.random.default_rng(10))
    assert "<svg" in web_svg(w)


def _run_cli(args, cwd):
    return subprocess.run([sys.executable, "-m", "polyweb.cli", *args],
                          capture_output=True, text=True, cwd=cwd)


def test_cli_end_to_end(tmp_path):
    out = tmp_path / "out"
    cfg_path = tmp_path / "run.cfg"
    cfg_path.write_text(CFG + f"\nout = {out}\n")

    r = _run_cli(["sample-web", "--config", str(cfg_path)], tmp_path)
    assert r.returncode == 0, r.stderr
    webfile = out / "sample_00000.web.txt"
    assert webfile.exists()
    assert (out / "manifest.txt").exists()

    cfg_path.write_text(CFG + f"\nout = {out}\ninput = {webfile}\n")
    r = _run_cli(["crop", "--config", str(cfg_path)], tmp_path)
    assert r.returncode == 0, r.stderr
    assert "crop_graph_sum" in r.stdout

    r = _run_cli(["count-marked", "--config", str(cfg_path)], tmp_path)
    assert r.returncode == 0 and "count_marked = 1" in r.stdout

    r = _run_cli(["render", "--config", str(cfg_path)], tmp_path)
    assert r.returncode == 0
    assert (out / "sample_00000.web.txt.svg").exists()

    r = _run_cli(["verify-duality", "--config", str(cfg_path)], tmp_path)
    assert r.returncode == 0, r.stdout + r.stderr

    report = (out / "report.csv").read_text()
    assert report.splitlines()[0] == ("subcommand,k,lambda,estimate,se,n,"
                                      "eps_x,eps_phi,pass,seed,config_hash")
    manifest = (out / "manifest.txt").read_text()
    assert "config_hash" in manifest and "seed 11" in manifest


def test_cli_byte_identical_reruns(tmp_path):
    for d in ("a", "b"):
        out = tmp_path / d
        cfg_path = tmp_path / f"run_{d}.cfg"
        cfg_path.write_text(CFG + "out = " + str(out) + "\n")
        r = _run_cli(["sample-web", "--config", str(cfg_path)], tmp_path)
        assert r.returncode == 0, r.stderr
    a = (tmp_path / "a" / "sample_00000.web.txt").read_bytes()
    b = (tmp_path / "b" / "sample_00000.web.txt").read_bytes()
    assert a == b


def test_cli_bad_config(tmp_path):
    cfg_path = tmp_path / "bad.cfg"
    cfg_path.write_text("domain = disc 0 0 1\nwhat = ever\n")
    r = _run_cli(["sample-field", "--config", str(cfg_path)], tmp_path)
    assert r.returncode == 2
    assert "unknown key" in r.stderr
