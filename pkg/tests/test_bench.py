from pathlib import Path

import numpy as np
import pytest

from tccbench import bench, dataset, static, synth
from tccbench.bench import ResultsTable, RunConfig, SequenceResult, TableRow
from tccbench.color import ErrorStats, Illuminant, angular_error, summarize
from tccbench.errors import EmptyInputError, ValidationError

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture(scope="module")
def suite(tmp_path_factory):
    root = tmp_path_factory.mktemp("suite")
    spec = synth.SceneSpec(height=24, width=24, grid=3, balanced=True, noise=0.002)
    manifest, _ = synth.generate_dataset(root, [3, 4, 3, 5, 3, 4], spec, seed=7)
    manifest = dataset.fixed_split(manifest, 0.5, seed=1)
    dataset.write_manifest(root / "manifest.jsonl", manifest)
    return root / "manifest.jsonl"


def test_registry_has_table_methods():
    for name in ("white-patch", "gray-world", "shades-of-gray", "general-gray-world", "grey-edge-1",
                 "grey-edge-2", "grayness-index", "t-gi", "kalman-smooth", "moving-average",
                 "oracle", "fixed", "tcc-net"):
        assert name in bench.REGISTRY
    with pytest.raises(ValidationError):
        bench.resolve("ffcc")


def test_method_params_parse():
    spec = bench.resolve("shades-of-gray")
    kw = spec.parse(["--p", "8"])
    assert kw == {"p": 8.0, "sigma": 0.0}
    assert spec.label(kw) == "Shades-of-Grey (p=8, sigma=0)"
    assert spec.label(spec.defaults()) == "Shades-of-Grey (p=4)"
    with pytest.raises(ValidationError):
        spec.parse(["--q", "1"])
    with pytest.raises(ValidationError):
        spec.parse(["--p", "four"])


def test_run_config_validation(suite):
    with pytest.raises(ValidationError):
        RunConfig(suite, "nope")
    with pytest.raises(ValidationError):
        RunConfig(suite, "oracle", fold="dev")


def test_oracle_is_zero(suite):
    table = bench.run_benchmark(RunConfig(suite, "oracle", fold="all"))
    row = table.rows[0]
    assert row.failures == 0
    assert all(v == 0.0 for v in row.stats.as_tuple()[:6])
    assert row.stats.count == 6


def test_fixed_estimate_matches_independent_errors(suite):
    table = bench.run_benchmark(RunConfig(suite, "fixed", {"r": 1.0, "g": 0.8, "b": 0.5}, fold="all"))
    manifest = dataset.read_manifest(suite)
    errors = [angular_error(Illuminant(1.0, 0.8, 0.5), r.ground_truth) for r in manifest.records]
    assert table.rows[0].stats == summarize(errors)
    assert [r.id for r in table.rows[0].log] == [r.id for r in manifest.records]


def test_gray_world_on_balanced_fold(suite):
    table = bench.run_benchmark(RunConfig(suite, "gray-world", fold="test"))
    assert table.rows[0].stats.count == 3
    assert table.rows[0].stats.mean < 0.5


@pytest.mark.parametrize("method", ["t-gi", "kalman-smooth", "moving-average", "grayness-index",
                                    "grey-edge-1", "grey-edge-2", "general-gray-world"])
def test_every_method_runs(suite, method):
    row = bench.run_benchmark(RunConfig(suite, method, fold="all")).rows[0]
    assert row.failures + row.stats.count == 6


def test_failures_are_counted(tmp_path):
    rec_ok = dataset.SequenceRecord("ok", ("ok.png",), Illuminant(1, 1, 1))
    rec_black = dataset.SequenceRecord("black", ("black.png",), Illuminant(1, 1, 1))
    rec_missing = dataset.SequenceRecord("missing", ("missing.png",), Illuminant(1, 1, 1))
    dataset.save_frame(tmp_path / "ok.png", np.full((4, 4, 3), 0.5))
    dataset.save_frame(tmp_path / "black.png", np.zeros((4, 4, 3)))
    m = dataset.DatasetManifest([rec_ok, rec_black, rec_missing], root=tmp_path)
    dataset.write_manifest(tmp_path / "m.jsonl", m)
    row = bench.run_benchmark(RunConfig(tmp_path / "m.jsonl", "gray-world", fold="all")).rows[0]
    assert row.failures == 2 and row.stats.count == 1
    errors = {r.id: r.error for r in row.log}
    assert "DegenerateImageError" in errors["black"]
    assert "FrameIOError" in errors["missing"]
    assert b"| 2 |" in bench.emit_table(ResultsTable([row]))


def test_all_failures_row():
    row = TableRow("X", None, 1, (SequenceResult("a", None, "boom"),))
    row.check()
    assert bench.emit_table(ResultsTable([row]), "csv") == b"Method,Mean,Med.,Tri.,B25%,W25%,W5%,Failures\nX,-,-,-,-,-,-,1\n"


def test_table_self_consistency_check():
    log = (SequenceResult("a", 1.0), SequenceResult("b", 3.0))
    TableRow("m", summarize([1.0, 3.0]), 0, log).check()
    with pytest.raises(AssertionError):
        TableRow("m", summarize([1.0, 2.0]), 0, log).check()
    with pytest.raises(AssertionError):
        TableRow("m", summarize([1.0, 3.0]), 1, log).check()


def test_single_frame_via_length_one_adapter(tmp_path, make_scene):
    frame = make_scene(synth.SceneSpec(height=24, width=24), (0.2, 0.5, 0.3), seed=4)[-1]
    dataset.save_frame(tmp_path / "img.png", frame)
    (tmp_path / "gt.csv").write_text("image,r,g,b\nimg.png,0.2,0.5,0.3\n")
    m = dataset.read_single_image_csv(tmp_path / "gt.csv")
    dataset.write_manifest(tmp_path / "m.jsonl", m)
    loaded = dataset.load_frame(tmp_path / "img.png")
    for method in ("gray-world", "shades-of-gray", "grayness-index", "grey-edge-1"):
        spec = bench.resolve(method)
        direct = spec.build(spec.defaults())([loaded], m.records[0])
        row = bench.run_benchmark(RunConfig(tmp_path / "m.jsonl", method, fold="all")).rows[0]
        assert row.log[0].degrees == angular_error(direct, Illuminant(0.2, 0.5, 0.3))


def zero_table():
    stats = ErrorStats(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 3)
    log = tuple(SequenceResult(f"s{i}", 0.0) for i in range(3))
    return ResultsTable([TableRow("Oracle", stats, 0, log)])


@pytest.mark.parametrize("fmt,name", [("markdown", "zero_table.md"), ("csv", "zero_table.csv")])
def test_golden_tables(fmt, name):
    assert bench.emit_table(zero_table(), fmt) == (GOLDEN / name).read_bytes()


def test_header_order():
    header = bench.emit_table(zero_table(), "csv").splitlines()[0].decode()
    assert header.split(",")[1:7] == ["Mean", "Med.", "Tri.", "B25%", "W25%", "W5%"]


def test_emit_is_deterministic_and_two_decimal():
    row = TableRow("m", summarize([1.0, 2.345, 10.0]), 0,
                   tuple(SequenceResult(str(i), v) for i, v in enumerate([1.0, 2.345, 10.0])))
    a = bench.emit_table(ResultsTable([row]), "csv")
    assert a == bench.emit_table(ResultsTable([row]), "csv")
    assert a.splitlines()[1].decode().startswith("m,4.45,2.35,")


def test_empty_table():
    with pytest.raises(EmptyInputError):
        bench.emit_table(ResultsTable([]))
    with pytest.raises(ValidationError):
        bench.emit_table(zero_table(), "html")


def test_workers_give_same_result(suite):
    a = bench.run_benchmark(RunConfig(suite, "grayness-index", fold="all", workers=1))
    b = bench.run_benchmark(RunConfig(suite, "grayness-index", fold="all", workers=3))
    assert a.rows == b.rows


def test_outputs_written(suite, tmp_path):
    bench.run_benchmark(RunConfig(suite, "gray-world", fold="all", out_dir=tmp_path / "o"))
    assert {p.name for p in (tmp_path / "o").iterdir()} == {"table.md", "table.csv", "errors.csv"}
    lines = (tmp_path / "o" / "errors.csv").read_text().splitlines()
    assert lines[0] == "method,id,degrees,error" and len(lines) == 7


def test_tcc_net_method(tmp_path, suite):
    from tccbench.net import checkpoint, model

    config = model.TccNetConfig(input_size=16, backbone=model.BackboneConfig((4, 4, 4)),
                                lstm=(model.LstmConfig(3, 3),) * 2, head=model.HeadConfig(4))
    checkpoint.save_checkpoint(tmp_path / "w.bin", config, model.init_params(config))
    row = bench.run_benchmark(RunConfig(suite, "tcc-net", {"checkpoint": str(tmp_path / "w.bin")},
                                        fold="all")).rows[0]
    assert row.failures == 0 and row.stats.count == 6
    with pytest.raises(ValidationError):
        bench.run_benchmark(RunConfig(suite, "tcc-net", fold="all"))
