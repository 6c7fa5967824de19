import struct

import numpy as np
import pytest

from augforget.errors import (CheckpointMagicError, CheckpointSizeError,
                              CheckpointTruncatedError, CheckpointVersionError)
from augforget.io import (decode_checkpoint, encode_checkpoint, format_value, load_checkpoint,
                          read_csv, save_checkpoint, save_snapshot, write_csv)
from augforget.model import MLP
from augforget.numerics import make_rng

SIZES = (6, 5, 3)


@pytest.fixture
def model():
    return MLP(SIZES, make_rng(0).standard_normal(6 * 5 + 5 + 5 * 3 + 3))


class TestCheckpoint:
    def test_round_trip_bit_identical(self, model, tmp_path):
        path = tmp_path / "m.afck"
        save_checkpoint(path, model)
        again = load_checkpoint(path)
        assert again.layer_sizes == model.layer_sizes
        assert again.flat_params().tobytes() == model.flat_params().tobytes()
        x = make_rng(1).standard_normal((4, 6))
        assert again.logits(x).tobytes() == model.logits(x).tobytes()

    def test_layout(self, model):
        raw = encode_checkpoint(SIZES, model.params)
        assert raw[:4] == b"AFCK"
        assert struct.unpack("<5I", raw[4:24]) == (1, 3) + SIZES
        assert len(raw) == 24 + 8 * model.n_params
        np.testing.assert_array_equal(np.frombuffer(raw[24:], "<f8"), model.params)

    def test_snapshot_file(self, model, tmp_path):
        save_snapshot(tmp_path / "s.afck", SIZES, model.params * 2)
        np.testing.assert_array_equal(load_checkpoint(tmp_path / "s.afck").params,
                                      model.params * 2)

    def test_bad_magic(self, model):
        raw = b"XFCK" + encode_checkpoint(SIZES, model.params)[4:]
        with pytest.raises(CheckpointMagicError):
            decode_checkpoint(raw)
        with pytest.raises(CheckpointMagicError):
            decode_checkpoint(b"PK")

    def test_bad_version(self, model):
        raw = bytearray(encode_checkpoint(SIZES, model.params))
        raw[4:8] = struct.pack("<I", 2)
        with pytest.raises(CheckpointVersionError):
            decode_checkpoint(bytes(raw))

    @pytest.mark.parametrize("cut", [1, 8, 100])
    def test_truncated_reports_lengths(self, model, cut):
        raw = encode_checkpoint(SIZES, model.params)
        with pytest.raises(CheckpointTruncatedError) as info:
            decode_checkpoint(raw[:-cut], "m.afck")
        assert info.value.expected == len(raw)
        assert info.value.found == len(raw) - cut

    def test_truncated_header(self, model):
        raw = encode_checkpoint(SIZES, model.params)
        with pytest.raises(CheckpointTruncatedError) as info:
            decode_checkpoint(raw[:16])
        assert (info.value.expected, info.value.found) == (24, 16)

    def test_trailing_bytes(self, model):
        with pytest.raises(CheckpointSizeError):
            decode_checkpoint(encode_checkpoint(SIZES, model.params) + b"\0")

    def test_wrong_param_count(self):
        with pytest.raises(CheckpointSizeError):
            encode_checkpoint(SIZES, np.zeros(3))


class TestCsv:
    def test_header_only(self, tmp_path):
        write_csv(tmp_path / "a.csv", ["x", "y"], [])
        assert (tmp_path / "a.csv").read_bytes() == b"x,y\n"

    def test_nine_significant_digits(self, tmp_path):
        write_csv(tmp_path / "a.csv", ["v", "n"], [[1 / 3, 7], [np.float64(2.0), np.int64(3)]])
        assert (tmp_path / "a.csv").read_text() == "v,n\n0.333333333,7\n2,3\n"

    def test_special_values(self):
        assert [format_value(v) for v in (np.nan, np.inf, -np.inf, 1e-12, "rotate:45")] == \
            ["nan", "inf", "-inf", "1e-12", "rotate:45"]

    def test_deterministic_and_readable(self, tmp_path):
        rows = [[i, float(v)] for i, v in enumerate(make_rng(2).random(20))]
        write_csv(tmp_path / "a.csv", ["i", "v"], rows)
        write_csv(tmp_path / "b.csv", ["i", "v"], rows)
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
        header, body = read_csv(tmp_path / "a.csv")
        assert header == ["i", "v"] and len(body) == 20
        np.testing.assert_allclose([float(r[1]) for r in body], [r[1] for r in rows], rtol=1e-8)

    def test_ragged_row(self, tmp_path):
        with pytest.raises(ValueError):
            write_csv(tmp_path / "a.csv", ["x", "y"], [[1]])

    def test_unwritable(self, tmp_path):
        with pytest.raises(OSError):
            write_csv(tmp_path / "missing" / "a.csv", ["x"], [[1]])
