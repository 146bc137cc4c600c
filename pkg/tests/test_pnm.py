import numpy as np
import pytest

from assignflow import pnm


class TestRoundTrips:
    def test_pgm(self, tmp_path, rng):
        img = rng.integers(0, 256, size=(5, 7), dtype=np.uint8)
        path = tmp_path / "a.pgm"
        pnm.write_pgm(path, img)
        np.testing.assert_array_equal(pnm.read_pnm(path), img)

    def test_ppm(self, tmp_path, rng):
        img = rng.integers(0, 256, size=(4, 3, 3), dtype=np.uint8)
        path = tmp_path / "a.ppm"
        pnm.write_ppm(path, img)
        np.testing.assert_array_equal(pnm.read_pnm(path), img)

    def test_dispatch(self, tmp_path):
        gray = np.zeros((2, 2), dtype=np.uint8)
        color = np.zeros((2, 2, 3), dtype=np.uint8)
        pnm.write_pnm(tmp_path / "g.pgm", gray)
        pnm.write_pnm(tmp_path / "c.ppm", color)
        assert pnm.read_pnm(tmp_path / "g.pgm").ndim == 2
        assert pnm.read_pnm(tmp_path / "c.ppm").ndim == 3


class TestHeaderHandling:
    def test_comments_tolerated(self, tmp_path):
        raw = b"P5\n# a comment\n2 2\n# another\n255\n" + bytes(4)
        path = tmp_path / "c.pgm"
        path.write_bytes(raw)
        img = pnm.read_pnm(path)
        np.testing.assert_array_equal(img, np.zeros((2, 2), dtype=np.uint8))

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.pgm"
        path.write_bytes(b"P2\n2 2\n255\n0 0 0 0\n")
        with pytest.raises(ValueError):
            pnm.read_pnm(path)

    def test_wrong_maxval(self, tmp_path):
        path = tmp_path / "bad.pgm"
        path.write_bytes(b"P5\n1 1\n65535\n\x00\x00")
        with pytest.raises(ValueError):
            pnm.read_pnm(path)

    def test_truncated_pixels(self, tmp_path):
        path = tmp_path / "short.pgm"
        path.write_bytes(b"P5\n4 4\n255\n\x00\x00")
        with pytest.raises(ValueError):
            pnm.read_pnm(path)

    def test_shape_validation_on_write(self, tmp_path):
        with pytest.raises(ValueError):
            pnm.write_pgm(tmp_path / "x.pgm", np.zeros((2, 2, 3)))
        with pytest.raises(ValueError):
            pnm.write_ppm(tmp_path / "x.ppm", np.zeros((2, 2)))
