import numpy as np
import pytest
from PIL import Image

from videocutout import Mask, load_mask, load_sequence, save_mask
from videocutout.config import RunConfig
from videocutout.io import decode_mask_png, encode_mask_png, load_dataset_sequence


def _write(path, arr):
    Image.fromarray(arr).save(path)


def test_load_sequence_counts_and_order(tmp_path):
    for i in range(3):
        _write(tmp_path / f"{i:05d}.png", np.full((4, 4, 3), i * 10, np.uint8))
    seq = load_sequence(tmp_path)
    assert seq.n_frames == 3
    assert seq.width == 4 and seq.height == 4
    # ordered by numeric index regardless of creation order
    assert seq.frame(2)[0, 0, 0] == 10


def test_load_sequence_single_frame(tmp_path):
    _write(tmp_path / "00000.png", np.zeros((2, 2, 3), np.uint8))
    assert load_sequence(tmp_path).n_frames == 1


def test_load_sequence_mixed_dimensions(tmp_path):
    _write(tmp_path / "00000.png", np.zeros((4, 4, 3), np.uint8))
    _write(tmp_path / "00001.png", np.zeros((8, 8, 3), np.uint8))
    with pytest.raises(ValueError, match="mixed dimensions"):
        load_sequence(tmp_path)


def test_load_sequence_missing_directory(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_sequence(tmp_path / "nope")


def test_load_sequence_undecodable_reports_filename(tmp_path):
    (tmp_path / "00000.png").write_bytes(b"not a png")
    with pytest.raises(ValueError, match="00000.png"):
        load_sequence(tmp_path)


def test_load_is_deterministic(tmp_path, rng):
    for i in range(5):
        _write(tmp_path / f"{i:05d}.png",
               rng.integers(0, 256, (6, 5, 3)).astype(np.uint8))
    a = load_sequence(tmp_path)
    b = load_sequence(tmp_path)
    assert all(np.array_equal(x, y) for x, y in zip(a.frames, b.frames))


def test_load_mask_threshold(tmp_path):
    arr = np.zeros((2, 2), np.uint8)
    arr[0, 0] = 255
    arr[0, 1] = 200
    arr[1, 0] = 128
    arr[1, 1] = 100
    _write(tmp_path / "m.png", arr)
    m = load_mask(tmp_path / "m.png", 1)
    assert m.labels.tolist() == [[1, 1], [1, 0]]


def test_load_mask_all_extremes(tmp_path):
    _write(tmp_path / "a.png", np.full((3, 3), 255, np.uint8))
    _write(tmp_path / "b.png", np.zeros((3, 3), np.uint8))
    assert load_mask(tmp_path / "a.png", 1).labels.all()
    assert not load_mask(tmp_path / "b.png", 1).labels.any()


def test_load_mask_dimension_mismatch(tmp_path):
    _write(tmp_path / "m.png", np.zeros((3, 3), np.uint8))
    with pytest.raises(ValueError, match="m.png"):
        load_mask(tmp_path / "m.png", 1, expected_shape=(4, 4))


def test_mask_round_trip(tmp_path, rng):
    for trial in range(5):
        labels = rng.integers(0, 2, (9, 7)).astype(np.uint8)
        save_mask(Mask(labels, 1), tmp_path / "m.png")
        back = load_mask(tmp_path / "m.png", 1)
        assert np.array_equal(back.labels, labels)


def test_save_mask_writes_255(tmp_path):
    save_mask(np.ones((4, 4), np.uint8), tmp_path / "m.png")
    raw = np.asarray(Image.open(tmp_path / "m.png"))
    assert (raw == 255).all()
    save_mask(np.zeros((4, 4), np.uint8), tmp_path / "z.png")
    assert (np.asarray(Image.open(tmp_path / "z.png")) == 0).all()


def test_png_bytes_round_trip(rng):
    labels = rng.integers(0, 2, (8, 8)).astype(np.uint8)
    assert np.array_equal(decode_mask_png(encode_mask_png(labels)).labels, labels)


def test_dataset_layout(tmp_path):
    from conftest import static_scene, write_dataset

    seq, gt = static_scene(h=16, w=20, n=3)
    write_dataset(tmp_path, {"vid": (seq, [gt] * 3)})
    loaded, masks = load_dataset_sequence(tmp_path / "vid")
    assert loaded.n_frames == 3
    assert sorted(masks) == [1, 2, 3]
    assert np.array_equal(masks[2].labels, gt)


def test_config_file_round_trip(tmp_path):
    cfg = RunConfig(pyramid_levels=2, window_sizes=(16, 24), annotation_budget=3)
    cfg.to_file(tmp_path / "run.cfg")
    back = RunConfig.from_file(tmp_path / "run.cfg")
    assert back.pyramid_levels == 2
    assert back.window_sizes == (16, 24)
    assert back.annotation_budget == 3
    assert back.contour_tolerance is None


def test_config_overrides_and_validation():
    cfg = RunConfig()
    cfg.apply_overrides(["pyramid_levels=1", "window_sizes=10,20"])
    assert cfg.pyramid_levels == 1 and cfg.window_sizes == (10, 20)
    with pytest.raises(ValueError):
        cfg.apply_overrides(["no_such_key=1"])
    with pytest.raises(ValueError):
        RunConfig(bins_per_channel=31).validate()
    with pytest.raises(ValueError):
        RunConfig(annotation_budget=0).validate()
