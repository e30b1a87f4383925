import struct

import numpy as np
import pytest

from glc.core.errors import DataError
from glc.core.numeric import make_rng
from glc.infrastructure.checkpoints import (
    MAGIC,
    decode_checkpoint,
    encode_checkpoint,
    load_checkpoint,
    save_checkpoint,
)
from glc.infrastructure.datasets import load_csv, save_csv
from glc.infrastructure.reports import (
    HISTORY_COLUMNS,
    METRICS_COLUMNS,
    append_rows,
    write_history_csv,
    write_pseudo_label_dump,
)
from glc.models.models import LabeledDataset, ModelParams
from glc.services.types import AdaptHistory, EpochRecord, PseudoLabelResult


def _dataset(rows: int, dim: int = 3) -> LabeledDataset:
    rng = make_rng(rows, 18)
    return LabeledDataset(
        X=rng.normal(scale=1e3, size=(rows, dim)) * rng.uniform(1e-6, 1.0, size=(rows, dim)),
        y=rng.integers(0, 7, size=rows),
    )


@pytest.mark.parametrize("rows", [0, 1, 1000])
def test_csv_round_trip_is_bit_exact(tmp_path, rows: int) -> None:
    dataset = _dataset(rows)
    path = tmp_path / "data.csv"

    save_csv(dataset, path)
    loaded = load_csv(path)

    assert loaded.X.shape == (rows, 3)
    np.testing.assert_array_equal(loaded.X, dataset.X)
    np.testing.assert_array_equal(loaded.y, dataset.y)
    save_csv(loaded, tmp_path / "again.csv")
    assert (tmp_path / "again.csv").read_bytes() == path.read_bytes()


def test_empty_dataset_is_header_only(tmp_path) -> None:
    path = tmp_path / "empty.csv"

    save_csv(_dataset(0, dim=2), path)

    assert path.read_text() == "f0,f1,label\n"


@pytest.mark.parametrize(
    ("body", "line"),
    [
        ("f0,f1,label\n1.0,2.0,0\n3.0,1\n", ":3:"),
        ("f0,f1,label\n1.0,abc,0\n", ":2:"),
        ("f0,f1,label\n1.0,2.0,0\n1.0,2.0,0.5\n", ":3:"),
        ("f0,f1,label\n1.0,nan,0\n", ":2:"),
        ("f0,f1,label\n1.0,2.0,-1\n", ":2:"),
        ("f0,f2,label\n", ":1:"),
    ],
)
def test_malformed_csv_names_the_line(tmp_path, body: str, line: str) -> None:
    path = tmp_path / "bad.csv"
    path.write_text(body)

    with pytest.raises(DataError, match=line):
        load_csv(path)


def test_missing_and_empty_csv(tmp_path) -> None:
    with pytest.raises(DataError):
        load_csv(tmp_path / "absent.csv")
    (tmp_path / "blank.csv").write_text("")
    with pytest.raises(DataError):
        load_csv(tmp_path / "blank.csv")


def test_checkpoint_round_trip(tmp_path, small_params: ModelParams) -> None:
    path = tmp_path / "model.ckpt"

    save_checkpoint(small_params, path)
    loaded = load_checkpoint(path)

    for (name, original), (loaded_name, restored) in zip(
        small_params.tensors(), loaded.tensors()
    ):
        assert name == loaded_name
        np.testing.assert_array_equal(restored, original)
    assert encode_checkpoint(loaded) == path.read_bytes()


def test_checkpoint_layout_starts_with_magic_and_version(small_params: ModelParams) -> None:
    payload = encode_checkpoint(small_params)

    assert payload[:8] == MAGIC
    assert struct.unpack("<II", payload[8:16]) == (1, 6)
    (name_length,) = struct.unpack("<H", payload[16:18])
    assert payload[18 : 18 + name_length] == b"hidden.weight"
    # 107 float64 values plus headers.
    assert len(payload) > 107 * 8


def test_corrupt_checkpoints_are_rejected(small_params: ModelParams) -> None:
    payload = encode_checkpoint(small_params)

    with pytest.raises(DataError, match="magic"):
        decode_checkpoint(b"NOTACKPT" + payload[8:])
    with pytest.raises(DataError):
        decode_checkpoint(payload[:-3])
    with pytest.raises(DataError, match="trailing"):
        decode_checkpoint(payload + b"\x00")
    with pytest.raises(DataError, match="version"):
        decode_checkpoint(payload[:8] + struct.pack("<II", 2, 6) + payload[16:])


def test_missing_checkpoint(tmp_path) -> None:
    with pytest.raises(DataError):
        load_checkpoint(tmp_path / "absent.ckpt")


def test_append_rows_writes_one_header(tmp_path) -> None:
    path = tmp_path / "metrics.csv"
    row = ("a.ckpt", "t.csv", "h-score", 0.55, 0.5, 0.5, 0.5, 0.5)

    append_rows(path, METRICS_COLUMNS, [row])
    append_rows(path, METRICS_COLUMNS, [row])

    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(METRICS_COLUMNS)
    assert lines[1] == lines[2] == "a.ckpt,t.csv,h-score,0.55,0.5,0.5,0.5,0.5"
    assert len(lines) == 3


def test_append_rows_refuses_a_foreign_header(tmp_path) -> None:
    path = tmp_path / "metrics.csv"
    path.write_text("something,else\n1,2\n")

    with pytest.raises(DataError, match="header"):
        append_rows(path, METRICS_COLUMNS, [("x",) * len(METRICS_COLUMNS)])


def test_append_rows_repairs_a_missing_final_newline(tmp_path) -> None:
    path = tmp_path / "metrics.csv"
    path.write_text("a,b\n1,2")

    append_rows(path, ("a", "b"), [(3, 4)])

    assert path.read_text() == "a,b\n1,2\n3,4\n"


def test_history_csv_leaves_missing_scores_blank(tmp_path) -> None:
    history = AdaptHistory().appended(
        EpochRecord(epoch=1, loss_glb=0.5, loss_loc=0.25, loss_tar=0.4, c_t_hat=12)
    )
    path = tmp_path / "history.csv"

    write_history_csv(history, path)

    assert path.read_text().splitlines() == [",".join(HISTORY_COLUMNS), "1,0.5,0.25,0.4,,,,12,"]


def test_pseudo_label_dump(tmp_path) -> None:
    result = PseudoLabelResult(
        targets=np.array([[1.0, 0.0], [0.5, 0.5]]),
        claimed=np.array([0, -1]),
        scores=np.array([0.75, np.nan]),
        prototypes=(),
    )
    path = tmp_path / "dump.csv"

    write_pseudo_label_dump(result, path)

    assert path.read_text().splitlines() == ["sample,claimed_class,score", "0,0,0.75", "1,-1,"]
