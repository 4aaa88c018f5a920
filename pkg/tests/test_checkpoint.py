import struct

import numpy as np
import pytest

from tccbench.errors import CheckpointError
from tccbench.net import model
from tccbench.net.checkpoint import MAGIC, decode, encode, load_checkpoint, save_checkpoint


def float32_params(config, seed=0):
    return {k: v.astype(np.float32) for k, v in model.init_params(config, seed).items()}


def test_round_trip_is_bit_exact(tmp_path):
    config = model.desk()
    params = float32_params(config, 3)
    path = tmp_path / "w.bin"
    save_checkpoint(path, config, params)
    config2, params2 = load_checkpoint(path, dtype=None)
    assert config2 == config
    assert set(params2) == set(params)
    for k in params:
        assert params2[k].dtype == np.float32
        assert params2[k].tobytes() == params[k].tobytes()
    # re-encoding the decoded weights reproduces the file byte for byte
    assert encode(config2, params2)[0] == path.read_bytes()


def test_float64_weights_are_stored_as_float32(tmp_path):
    config = model.tiny()
    params = model.init_params(config, 1)
    path = tmp_path / "w.bin"
    save_checkpoint(path, config, params)
    _, loaded = load_checkpoint(path)
    for k, v in params.items():
        assert loaded[k].dtype == np.float64
        np.testing.assert_array_equal(loaded[k], v.astype(np.float32).astype(np.float64))


def test_layout_header():
    config = model.tiny()
    blob, _ = encode(config, float32_params(config))
    assert blob[:8] == MAGIC
    version, cfg_len = struct.unpack("<II", blob[8:16])
    assert version == 1
    (count,) = struct.unpack("<I", blob[16 + cfg_len:20 + cfg_len])
    assert count == len(float32_params(config))


def test_manifest_offsets_point_at_data(tmp_path):
    config = model.tiny()
    params = float32_params(config, 2)
    path = tmp_path / "w.bin"
    manifest = save_checkpoint(path, config, params)
    blob = path.read_bytes()
    lines = manifest.read_text().splitlines()
    assert [ln.split("\t")[0] for ln in lines] == sorted(params)
    for line in lines:
        name, shape, offset, count = line.split("\t")
        offset, count = int(offset), int(count)
        raw = np.frombuffer(blob[offset:offset + 4 * count], dtype="<f4")
        assert "x".join(map(str, params[name].shape)) == shape
        np.testing.assert_array_equal(raw, params[name].ravel())


def test_corrupt_files(tmp_path):
    config = model.tiny()
    blob, _ = encode(config, float32_params(config))
    with pytest.raises(CheckpointError):
        decode(b"NOTMAGIC" + blob[8:])
    with pytest.raises(CheckpointError):
        decode(blob[:-3])
    with pytest.raises(CheckpointError):
        decode(blob + b"\0")
    with pytest.raises(CheckpointError):
        load_checkpoint(tmp_path / "missing.bin")
