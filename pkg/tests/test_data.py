"""Tests for dataset generation, IDX files, and dictionary sampling."""

import numpy as np
import pytest

from polycert.data import (
    Dictionary,
    LabeledDataset,
    build_dictionary,
    generate_uos,
    load_idx_images,
    read_idx_images_raw,
    resize_bilinear,
    write_idx_images,
    write_idx_labels,
)
from polycert.errors import ArgumentError, ModelError, ParseError


class TestGenerateUos:
    def test_exact_membership_gamma_zero(self):
        ds, model = generate_uos(n=8, K=3, d=2, per_class=10, gamma=0.0, seed=11)
        for i in range(ds.count):
            r = model.residual_norm(ds.point(i), int(ds.labels[i]))
            assert r <= 1e-12
        assert np.allclose(np.linalg.norm(ds.points, axis=0), 1.0)

    def test_noise_bound(self):
        ds, model = generate_uos(n=8, K=2, d=3, per_class=25, gamma=0.05, seed=7)
        dists = [
            model.residual_norm(ds.point(i), int(ds.labels[i])) for i in range(ds.count)
        ]
        assert max(dists) <= 0.05 + 1e-12
        assert np.all(np.linalg.norm(ds.points, axis=0) <= 1.0 + 1e-12)

    def test_class_matrix_rank(self):
        # With gamma=0 and per_class > d, each class's points span exactly d dims.
        d = 3
        ds, _ = generate_uos(n=10, K=2, d=d, per_class=8, gamma=0.0, seed=3)
        for k in (1, 2):
            block = ds.points[:, ds.labels == k]
            s = np.linalg.svd(block, compute_uv=False)
            assert np.sum(s > 1e-10) == d

    def test_labels_and_shapes(self):
        ds, model = generate_uos(n=6, K=4, d=1, per_class=5, gamma=0.0, seed=0)
        assert ds.class_ids() == [1, 2, 3, 4]
        assert ds.points.shape == (6, 20)
        assert model.num_classes == 4

    def test_deterministic(self):
        a, _ = generate_uos(n=5, K=2, d=2, per_class=4, gamma=0.01, seed=42)
        b, _ = generate_uos(n=5, K=2, d=2, per_class=4, gamma=0.01, seed=42)
        assert np.array_equal(a.points, b.points)
        c, _ = generate_uos(n=5, K=2, d=2, per_class=4, gamma=0.01, seed=43)
        assert not np.array_equal(a.points, c.points)

    def test_model_errors(self):
        with pytest.raises(ModelError):
            generate_uos(n=4, K=2, d=4, per_class=3, gamma=0.0, seed=0)
        with pytest.raises(ModelError):
            generate_uos(n=4, K=0, d=2, per_class=3, gamma=0.0, seed=0)
        with pytest.raises(ModelError):
            generate_uos(n=4, K=1, d=2, per_class=3, gamma=-0.1, seed=0)


class TestIdxFiles:
    def test_round_trip_images(self, tmp_path):
        rng = np.random.default_rng(5)
        imgs = rng.integers(0, 256, size=(7, 32, 32), dtype=np.uint8)
        labels = rng.integers(0, 10, size=7, dtype=np.uint8)
        ip, lp = tmp_path / "img.idx", tmp_path / "lab.idx"
        write_idx_images(ip, imgs)
        write_idx_labels(lp, labels)
        assert np.array_equal(read_idx_images_raw(ip), imgs)
        ds = load_idx_images(ip, lp)
        # 32x32 inputs skip resizing, so loading is flatten + normalize.
        for i in range(7):
            flat = imgs[i].astype(np.float64).reshape(-1)
            expect = flat / np.linalg.norm(flat)
            assert np.allclose(ds.point(i), expect, atol=1e-12)
        assert np.array_equal(ds.labels, labels.astype(np.int64) + 1)

    def test_resize_path(self, tmp_path):
        rng = np.random.default_rng(6)
        imgs = rng.integers(1, 256, size=(3, 28, 28), dtype=np.uint8)
        write_idx_images(tmp_path / "i", imgs)
        write_idx_labels(tmp_path / "l", np.zeros(3, dtype=np.uint8))
        ds = load_idx_images(tmp_path / "i", tmp_path / "l")
        assert ds.points.shape == (1024, 3)
        assert np.allclose(np.linalg.norm(ds.points, axis=0), 1.0)

    def test_bad_magic(self, tmp_path):
        p = tmp_path / "bad.idx"
        p.write_bytes((0x00000777).to_bytes(4, "big") + b"\x00" * 16)
        with pytest.raises(ParseError) as err:
            read_idx_images_raw(p)
        assert err.value.byte_offset == 0

    def test_truncated_payload(self, tmp_path):
        p = tmp_path / "trunc.idx"
        header = (
            (0x00000803).to_bytes(4, "big")
            + (2).to_bytes(4, "big")
            + (4).to_bytes(4, "big")
            + (4).to_bytes(4, "big")
        )
        p.write_bytes(header + b"\x01" * 10)  # needs 32 payload bytes
        with pytest.raises(ParseError) as err:
            read_idx_images_raw(p)
        assert err.value.byte_offset == 26
        assert "byte offset 26" in str(err.value)

    def test_truncated_header(self, tmp_path):
        p = tmp_path / "short.idx"
        p.write_bytes((0x00000803).to_bytes(4, "big") + b"\x00\x00")
        with pytest.raises(ParseError) as err:
            read_idx_images_raw(p)
        assert err.value.byte_offset == 6

    def test_count_mismatch(self, tmp_path):
        write_idx_images(tmp_path / "i", np.zeros((2, 4, 4), dtype=np.uint8) + 9)
        write_idx_labels(tmp_path / "l", np.zeros(3, dtype=np.uint8))
        with pytest.raises(ModelError):
            load_idx_images(tmp_path / "i", tmp_path / "l")


class TestResizeBilinear:
    def test_identity_at_same_size(self):
        img = np.arange(32 * 32, dtype=np.float64).reshape(32, 32)
        assert np.allclose(resize_bilinear(img, 32), img, atol=0)

    def test_constant_preserved(self):
        img = np.full((28, 28), 7.5)
        out = resize_bilinear(img, 32)
        assert out.shape == (32, 32)
        assert np.allclose(out, 7.5, atol=1e-12)

    def test_value_range_preserved(self):
        rng = np.random.default_rng(0)
        img = rng.uniform(0, 255, size=(28, 28))
        out = resize_bilinear(img, 32)
        assert out.min() >= img.min() - 1e-9
        assert out.max() <= img.max() + 1e-9

    def test_downscale_average(self):
        # 2x2 blocks of a 64-wide image average pairwise under halving.
        img = np.zeros((2, 4))
        img[:, 2:] = 8.0
        out = resize_bilinear(img, 2)
        assert out.shape == (2, 2)
        assert np.allclose(out[:, 0], img[:, 0:2].mean())
        assert np.allclose(out[:, 1], img[:, 2:4].mean())


class TestDictionary:
    def make_ds(self):
        rng = np.random.default_rng(1)
        pts = rng.standard_normal((5, 12))
        labels = np.repeat([1, 2, 3], 4)
        return LabeledDataset(pts, labels)

    def test_unit_columns(self):
        D = build_dictionary(self.make_ds(), 6, seed=2)
        assert np.allclose(np.linalg.norm(D.S, axis=0), 1.0, atol=1e-12)

    def test_full_size_is_permutation(self):
        ds = self.make_ds()
        D = build_dictionary(ds, 12, seed=9)
        normalized = ds.points / np.linalg.norm(ds.points, axis=0)
        # Every original point appears exactly once (as a column), reordered.
        matches = [
            int(np.flatnonzero(np.all(np.isclose(normalized, D.S[:, [j]]), axis=0))[0])
            for j in range(12)
        ]
        assert sorted(matches) == list(range(12))
        assert matches != list(range(12))  # seed 9 actually permutes
        D2 = build_dictionary(ds, 12, seed=9)
        assert np.array_equal(D.S, D2.S)

    def test_balanced_quotas(self):
        D = build_dictionary(self.make_ds(), 7, seed=0, balanced=True)
        counts = {k: int(np.sum(D.labels == k)) for k in (1, 2, 3)}
        assert counts == {1: 3, 2: 2, 3: 2}

    def test_balanced_quota_overflow(self):
        rng = np.random.default_rng(4)
        ds = LabeledDataset(rng.standard_normal((5, 8)), [1] * 6 + [2] * 2)
        with pytest.raises(ModelError):
            build_dictionary(ds, 6, seed=0, balanced=True)  # class 2 lacks 3 points
        build_dictionary(ds, 4, seed=0, balanced=True)
        # An even split within capacity works on the 4/4/4 dataset.
        build_dictionary(self.make_ds(), 12, seed=0, balanced=True)

    def test_size_errors(self):
        with pytest.raises(ArgumentError):
            build_dictionary(self.make_ds(), 13, seed=0)
        with pytest.raises(ArgumentError):
            build_dictionary(self.make_ds(), 0, seed=0)

    def test_signed_columns(self):
        D = build_dictionary(self.make_ds(), 5, seed=3)
        for i in range(5):
            assert np.array_equal(D.signed_column(i), D.S[:, i])
            assert np.array_equal(D.signed_column(i + 5), -D.S[:, i])
        T = D.signed_view()
        assert T.shape == (5, 10)
        assert np.array_equal(T[:, 7], -D.S[:, 2])

    def test_zero_column_rejected(self):
        pts = np.ones((3, 2))
        pts[:, 1] = 0.0
        with pytest.raises(ModelError):
            Dictionary(pts, np.array([1, 1]))

    def test_gram_cached(self):
        D = build_dictionary(self.make_ds(), 4, seed=3)
        G = D.gram()
        assert np.allclose(G, D.S.T @ D.S)
        assert D.gram() is G
