import numpy as np
import pytest

from illumkit.pngio import PngFormatError, read_png, write_png
from illumkit.rng import CounterStream

cv2 = pytest.importorskip("cv2")


def _random_pixels(dtype, seed=0):
    peak = 255 if dtype == np.uint8 else 65535
    vals = CounterStream(seed).random(23, 17, 3) * (peak + 1)
    return np.minimum(vals, peak).astype(dtype)


@pytest.mark.parametrize("dtype", [np.uint8, np.uint16])
def test_round_trip_exact(tmp_path, dtype):
    pixels = _random_pixels(dtype)
    path = tmp_path / "img.png"
    write_png(path, pixels)
    back = read_png(path)
    assert back.dtype == dtype
    assert np.array_equal(back, pixels)


@pytest.mark.parametrize("dtype", [np.uint8, np.uint16])
def test_cv2_reads_our_files(tmp_path, dtype):
    pixels = _random_pixels(dtype, seed=1)
    path = tmp_path / "img.png"
    write_png(path, pixels)
    via_cv2 = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)[:, :, ::-1]  # BGR -> RGB
    assert np.array_equal(via_cv2, pixels)


@pytest.mark.parametrize("dtype", [np.uint8, np.uint16])
def test_reads_cv2_files(tmp_path, dtype):
    # cv2 uses scanline filters, exercising the unfilter path.
    pixels = _random_pixels(dtype, seed=2)
    path = tmp_path / "img.png"
    cv2.imwrite(str(path), pixels[:, :, ::-1])
    assert np.array_equal(read_png(path), pixels)


def test_deterministic_bytes(tmp_path):
    pixels = _random_pixels(np.uint8, seed=3)
    a, b = tmp_path / "a.png", tmp_path / "b.png"
    write_png(a, pixels)
    write_png(b, pixels)
    assert a.read_bytes() == b.read_bytes()


def test_rejects_non_png(tmp_path):
    path = tmp_path / "bogus.png"
    path.write_bytes(b"definitely not a png")
    with pytest.raises(PngFormatError, match="not a PNG"):
        read_png(path)


def test_rejects_grayscale(tmp_path):
    path = tmp_path / "gray.png"
    cv2.imwrite(str(path), np.zeros((4, 4), dtype=np.uint8))
    with pytest.raises(PngFormatError, match="color type"):
        read_png(path)


def test_rejects_bad_shape_on_write(tmp_path):
    with pytest.raises(PngFormatError):
        write_png(tmp_path / "x.png", np.zeros((4, 4), dtype=np.uint8))
    with pytest.raises(PngFormatError):
        write_png(tmp_path / "x.png", np.zeros((4, 4, 3), dtype=np.float64))


def test_rejects_truncated(tmp_path):
    path = tmp_path / "img.png"
    write_png(path, _random_pixels(np.uint8, seed=4))
    clipped = tmp_path / "clipped.png"
    clipped.write_bytes(path.read_bytes()[:40])
    with pytest.raises(PngFormatError):
        read_png(clipped)
