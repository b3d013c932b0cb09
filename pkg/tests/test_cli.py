import json
import subprocess
import sys

import pytest

from nanofind.cli import main, resolve_detect_config
from nanofind.evaluate import pearson
from nanofind.regionprops import CSV_HEADER, read_csv

SYNTH_CFG = """# small two-population scene
width = 128
height = 128
n_bright = 5
n_faint = 3
bright_range = 170,170
faint_range = 90,90
seed = 21
"""


@pytest.fixture
def scene(tmp_path):
    cfg = tmp_path / "synth.cfg"
    cfg.write_text(SYNTH_CFG)
    assert main(["synth", "--config", str(cfg), "--out", str(tmp_path / "data"), "--name", "scene"]) == 0
    return tmp_path


def test_synth_writes_three_files_and_is_reproducible(scene, tmp_path):
    data = scene / "data"
    assert sorted(p.name for p in data.iterdir()) == ["scene.gt.csv", "scene.manifest.json", "scene.pgm"]
    before = {p.name: p.read_bytes() for p in data.iterdir()}
    assert main(["synth", "--config", str(scene / "synth.cfg"), "--out", str(data), "--name", "scene"]) == 0
    assert {p.name: p.read_bytes() for p in data.iterdir()} == before


def test_synth_errors(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("width = 20\nheight = 20\nn_bright = 50\n")
    assert main(["synth", "--config", str(bad), "--out", str(tmp_path / "o")]) == 1
    bad.write_text("colour = red\n")
    assert main(["synth", "--config", str(bad), "--out", str(tmp_path / "o")]) == 1
    assert "colour" in capsys.readouterr().err


def test_detect_single_image(scene):
    out = scene / "out"
    assert main(["detect", str(scene / "data" / "scene.pgm"), "--out", str(out)]) == 0
    assert (out / "scene.particles.csv").read_text().startswith(CSV_HEADER)
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["exit_code"] == 0 and manifest["input_files"] == ["scene.pgm"]
    assert manifest["config_snapshot"]["max_iterations"] == "3"
    for key in ("tool_version", "started", "finished", "skipped"):
        assert key in manifest


def test_detect_rerun_identical(scene):
    img = str(scene / "data" / "scene.pgm")
    main(["detect", img, "--out", str(scene / "a")])
    main(["detect", img, "--out", str(scene / "b")])
    for name in ("scene.particles.csv", "summary.csv"):
        assert (scene / "a" / name).read_bytes() == (scene / "b" / name).read_bytes()


def test_manifest_snapshot_reproduces_run(scene):
    img = str(scene / "data" / "scene.pgm")
    main(["detect", img, "--out", str(scene / "a"), "--max-iterations", "2", "--min-area", "6"])
    snap = json.loads((scene / "a" / "manifest.json").read_text())["config_snapshot"]
    cfg = scene / "snap.cfg"
    cfg.write_text("".join(f"{k} = {v}\n" for k, v in snap.items()))
    main(["detect", img, "--out", str(scene / "b"), "--config", str(cfg)])
    assert (scene / "a" / "scene.particles.csv").read_bytes() == (scene / "b" / "scene.particles.csv").read_bytes()


def test_partial_failure(scene, capsys):
    d = scene / "data"
    (d / "corrupt.pgm").write_bytes(b"P5\n5 5\n255\nxx")
    out = scene / "out"
    assert main(["detect", str(d), "--out", str(out)]) == 2
    assert sorted(p.name for p in out.glob("*.particles.csv")) == ["scene.particles.csv"]
    assert json.loads((out / "manifest.json").read_text())["skipped"] == ["corrupt.pgm"]


def test_fatal_cases(tmp_path, capsys):
    empty = tmp_path / "empty"
    empty.mkdir()
    assert main(["detect", str(empty), "--out", str(tmp_path / "o")]) == 1
    assert main(["detect", str(tmp_path / "nope"), "--out", str(tmp_path / "o")]) == 1
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("erode_schedule = 1,2,3\n")
    assert main(["detect", str(empty), "--out", str(tmp_path / "o"), "--config", str(cfg)]) == 1
    assert "erode_schedule" in capsys.readouterr().err


def test_precedence(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("min_area = 9\nmax_iterations = 2\n")
    assert resolve_detect_config().min_area == 4
    r = resolve_detect_config(str(cfg))
    assert (r.min_area, r.max_iterations) == (9, 2)
    r = resolve_detect_config(str(cfg), {"min_area": 12, "max_iterations": None})
    assert (r.min_area, r.max_iterations) == (12, 2)


def test_eval_perfect_and_vacuous(scene, capsys):
    d = scene / "data"
    parts = scene / "perfect.csv"
    gt_lines = (d / "scene.gt.csv").read_text().splitlines()[1:]
    rows = [f"{k},{line},10,4,4,12,100,0,1" for k, line in enumerate(gt_lines, start=1)]
    parts.write_text(CSV_HEADER + "\n" + "".join(r + "\n" for r in rows))
    assert main(["eval", str(parts), str(d / "scene.gt.csv"), "--radius", "3", "--out", str(scene / "ev")]) == 0
    text = capsys.readouterr().out
    assert "recall=1.000000" in text and "precision=1.000000" in text
    assert (scene / "ev" / "report.txt").read_text() == text
    assert (scene / "ev" / "match.csv").exists()

    empty_gt = scene / "empty.csv"
    empty_gt.write_text("x,y\n")
    assert main(["eval", str(parts), str(empty_gt)]) == 0
    text = capsys.readouterr().out
    assert "recall=1.000000" in text and "precision=0.000000" in text and "vacuous" in text


def test_eval_parse_error(tmp_path, capsys):
    p = tmp_path / "p.csv"
    p.write_text(CSV_HEADER + "\n1,2\n")
    gt = tmp_path / "g.csv"
    gt.write_text("x,y\n")
    assert main(["eval", str(p), str(gt)]) == 1
    assert ":2:" in capsys.readouterr().err


def test_end_to_end_and_stats(scene, capsys):
    d = scene / "data"
    out = scene / "out"
    assert main(["detect", str(d), "--out", str(out)]) == 0
    assert main(["eval", str(out / "scene.particles.csv"), str(d / "scene.gt.csv"), "--radius", "10"]) == 0
    assert "recall=1.000000" in capsys.readouterr().out
    st = scene / "stats"
    assert main(["stats", str(out / "scene.particles.csv"), "--out", str(st),
                 "--histogram", str(d / "scene.pgm")]) == 0
    parts = read_csv(out / "scene.particles.csv")
    r = pearson([p.mean_intensity for p in parts], [p.area for p in parts])
    assert (st / "pearson.txt").read_text() == f"pearson_r={r:.6f}\n"
    assert f"pearson_r={r:.6f}" in capsys.readouterr().out
    assert len((st / "intensity_size.csv").read_text().splitlines()) == len(parts) + 1
    hist = (st / "histogram.csv").read_text().splitlines()
    assert hist[0] == "intensity,count" and len(hist) == 257
    assert sum(int(line.split(",")[1]) for line in hist[1:]) == 128 * 128


def test_stats_errors(tmp_path, capsys):
    p = tmp_path / "p.csv"
    p.write_text(CSV_HEADER + "\n1,1,1,5,1,1,8,80,0,1\n2,5,5,9,1,1,8,80,0,1\n")
    assert main(["stats", str(p), "--out", str(tmp_path / "s")]) == 1
    assert "zero variance" in capsys.readouterr().err
    p.write_text(CSV_HEADER + "\n1,1,1,5,1,1,8,80,0,1\n")
    assert main(["stats", str(p), "--out", str(tmp_path / "s")]) == 1


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "nanofind", "--version"],
                         capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "0.1.0"
