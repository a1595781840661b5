import numpy as np
import pytest

from sevdecoder import SemEntry, SemFormatError, load_sem, render_condition, save_sem


def _entries():
    rng = np.random.default_rng(3)
    return [
        SemEntry(
            frame_index=i * 5,
            is_key=(i % 2 == 0),
            labels=rng.integers(0, 4, (6, 8)).astype(np.uint8),
        )
        for i in range(5)
    ]


def test_round_trip(tmp_path):
    path = tmp_path / "maps.sem"
    palette = np.array([(255, 0, 0), (0, 255, 0), (0, 0, 255)], np.uint8)
    entries = _entries()
    save_sem(path, 8, 6, 4, palette, entries)
    sem = load_sem(path)
    assert (sem.width, sem.height, sem.k) == (8, 6, 4)
    assert np.array_equal(sem.palette, palette)
    assert len(sem.entries) == 5
    for orig, got in zip(entries, sem.entries):
        assert got.frame_index == orig.frame_index
        assert got.is_key == orig.is_key
        assert np.array_equal(got.labels, orig.labels)
    assert len(sem.key_entries) == 3
    assert len(sem.g_entries) == 2


def test_bad_magic(tmp_path):
    path = tmp_path / "bad.sem"
    path.write_bytes(b"NOPE" + b"\x00" * 20)
    with pytest.raises(SemFormatError, match="magic"):
        load_sem(path)


def test_truncated_labels(tmp_path):
    path = tmp_path / "maps.sem"
    palette = np.array([(255, 0, 0), (0, 255, 0), (0, 0, 255)], np.uint8)
    save_sem(path, 8, 6, 4, palette, _entries()[:1])
    data = path.read_bytes()
    path.write_bytes(data[:-10])
    with pytest.raises(SemFormatError, match="truncated"):
        load_sem(path)


def test_trailing_bytes(tmp_path):
    path = tmp_path / "maps.sem"
    save_sem(path, 8, 6, 4, np.array([(1, 2, 3), (4, 5, 6), (7, 8, 9)], np.uint8), _entries()[:1])
    path.write_bytes(path.read_bytes() + b"\x00\x01")
    with pytest.raises(SemFormatError, match="trailing"):
        load_sem(path)


def test_label_beyond_palette(tmp_path):
    path = tmp_path / "maps.sem"
    labels = np.full((2, 2), 3, np.uint8)  # palette has only 1 entry
    entry = SemEntry(frame_index=0, is_key=True, labels=labels)
    save_sem(path, 2, 2, 2, np.array([(1, 2, 3)], np.uint8), [entry])
    with pytest.raises(SemFormatError, match="palette"):
        load_sem(path)


def test_render_condition_lut():
    palette = np.array([(10, 20, 30), (40, 50, 60)], np.uint8)
    labels = np.array([[0, 1], [2, 0]], np.uint8)
    rgb = render_condition(labels, palette)
    assert rgb.shape == (2, 2, 3)
    assert tuple(rgb[0, 0]) == (0, 0, 0)
    assert tuple(rgb[0, 1]) == (10, 20, 30)
    assert tuple(rgb[1, 0]) == (40, 50, 60)


def test_render_all_zero_is_black():
    palette = np.array([(200, 100, 50)], np.uint8)
    rgb = render_condition(np.zeros((4, 4), np.uint8), palette)
    assert not rgb.any()
