import numpy as np
import pytest

from compactseg import io
from compactseg.baselines import threshold_segment
from compactseg.cli import build_parser, main, parse_grid
from compactseg.energy import unary_from_probability


@pytest.fixture(scope="module")
def disk(tmp_path_factory):
    d = tmp_path_factory.mktemp("disk")
    gt, prob = d / "gt.pgm", d / "prob.raw"
    assert main(["phantom", "--kind", "disk", "--dims", "64", "64", "--seed", "1",
                 "--out-gt", str(gt), "--out-prob", str(prob)]) == 0
    return d, gt, prob


def test_segment_defaults(disk, tmp_path):
    _, _, prob = disk
    out, trace = tmp_path / "seg.pgm", tmp_path / "trace.csv"
    code = main(["segment", "--prob", str(prob), "--lambda", "200", "--out", str(out),
                 "--trace", str(trace), "--seed-free"])
    assert code == 0
    _, y = io.read_mask(out)
    assert y.any()
    assert len(io.read_trace_csv(trace)) >= 1


def test_segment_lambda_zero_is_threshold(disk, tmp_path):
    _, _, prob = disk
    out = tmp_path / "seg.pgm"
    assert main(["segment", "--prob", str(prob), "--lambda", "0", "--out", str(out)]) == 0
    _, p = io.read_raster(prob)
    ref = tmp_path / "thr.pgm"
    dom, _ = io.read_mask(out)
    io.write_mask(threshold_segment(unary_from_probability(p.astype(np.float64))), dom, ref)
    assert out.read_bytes() == ref.read_bytes()


def test_segment_max_iters_exit_code(disk, tmp_path):
    _, _, prob = disk
    out = tmp_path / "seg.pgm"
    code = main(["segment", "--prob", str(prob), "--lambda", "200", "--max-iters", "1",
                 "--out", str(out)])
    assert code == 2 and out.exists()


def test_missing_prob_is_usage_error(tmp_path, capsys):
    with pytest.raises(SystemExit) as info:
        main(["segment", "--lambda", "1", "--out", str(tmp_path / "x.pgm")])
    assert info.value.code == 1
    assert "usage:" in capsys.readouterr().err


def test_missing_file_is_error(tmp_path, capsys):
    code = main(["segment", "--prob", str(tmp_path / "nope.raw"), "--lambda", "1",
                 "--out", str(tmp_path / "x.pgm")])
    assert code == 1
    assert "error" in capsys.readouterr().err


def test_evaluate_and_energy(disk, capsys):
    _, gt, prob = disk
    assert main(["evaluate", "--pred", str(gt), "--gt", str(gt)]) == 0
    assert capsys.readouterr().out.strip() == "dice=1"
    assert main(["energy", "--mask", str(gt), "--prob", str(prob), "--lambda", "2"]) == 0
    out = dict(line.split("=") for line in capsys.readouterr().out.split())
    assert set(out) == {"E", "E_p", "P", "A", "E_c", "lambda", "empty"}
    assert float(out["E"]) == pytest.approx(float(out["E_p"]) + 2 * float(out["E_c"]))


def test_sweep_gc(disk, tmp_path):
    _, gt, prob = disk
    csv = tmp_path / "sweep.csv"
    assert main(["sweep", "--method", "gc", "--prob", str(prob), "--gt", str(gt),
                 "--out", str(csv)]) == 0
    lines = csv.read_text().splitlines()
    assert lines[0] == "param,dice" and len(lines) == 21


def test_sweep_compactness(disk, capsys):
    _, gt, prob = disk
    assert main(["sweep", "--method", "compactness", "--param-grid", "0,200", "--prob", str(prob),
                 "--gt", str(gt)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 3 and lines[1].startswith("0,")


def test_phantom_deterministic(tmp_path):
    paths = []
    for tag in "ab":
        gt, prob = tmp_path / f"{tag}.raw", tmp_path / f"{tag}p.raw"
        main(["phantom", "--kind", "bifurcation", "--seed", "9", "--noise", "0.7", "0.3", "0.2",
              "--out-gt", str(gt), "--out-prob", str(prob)])
        paths.append((gt.read_bytes(), prob.read_bytes()))
    assert paths[0] == paths[1]


def test_oracle_hidden_but_available(tmp_path, capsys):
    prob = tmp_path / "p.raw"
    io.write_raster(np.array([0.9, 0.9], np.float32), io.RasterHeader((2, 1)), prob)
    assert main(["oracle", "--prob", str(prob), "--lambda", "1"]) == 0
    assert capsys.readouterr().out.splitlines()[0] == "y=11"
    assert "oracle" not in build_parser().format_help()


def test_help_lists_defaults():
    parser = build_parser()
    sub = next(a for a in parser._actions if hasattr(a, "choices") and a.choices)
    text = sub.choices["segment"].format_help()
    for flag, default in [("--mu1", "2000"), ("--mu2", "50"), ("--growth", "1.01"),
                          ("--eps", "0.001"), ("--max-iters", "200")]:
        assert flag in text and f"default: {default}" in text
    assert "--conn" in text and "--seed-free" in text and "--trace" in text


def test_parse_grid():
    assert parse_grid("1,2.5").tolist() == [1.0, 2.5]
    assert np.allclose(parse_grid("log:1:100:3"), [1, 10, 100])
