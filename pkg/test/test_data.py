import gzip

import numpy as np
import pytest

from elulab.nn import activations as act
from elulab.nn import data as dt
from elulab.nn import errors as e
from elulab.nn import network as nw
from elulab.nn import optimizer as op

from conftest import fake_mnist

@pytest.fixture
def idx_pair(tmp_path):
    data = fake_mnist(5, seed=3)
    images, labels = tmp_path / "images", tmp_path / "labels"
    dt.write_mnist_idx(data, images, labels)
    return data, images, labels

class TestIdx:

    def test_round_trip(self, idx_pair):
        data, images, labels = idx_pair
        back = dt.load_mnist_idx(images, labels)
        np.testing.assert_array_equal(back.inputs, data.inputs)
        np.testing.assert_array_equal(back.labels, data.labels)
        assert back.dims == 784

    def test_pixel_scaling(self, tmp_path):
        pixels = np.zeros((1, 4))
        pixels[0, 1] = 1.0
        data = dt.dataset(pixels, [7])
        dt.write_mnist_idx(data, tmp_path / "i", tmp_path / "l", rows=2, cols=2)
        raw = (tmp_path / "i").read_bytes()
        assert raw[:16] == bytes.fromhex("00000803" "00000001" "00000002" "00000002")
        assert list(raw[16:]) == [0, 255, 0, 0]
        back = dt.load_mnist_idx(tmp_path / "i", tmp_path / "l")
        np.testing.assert_array_equal(back.inputs, [[0.0, 1.0, 0.0, 0.0]])

    def test_gzip(self, idx_pair, tmp_path):
        data, images, labels = idx_pair
        for path in (images, labels):
            with gzip.open(str(path) + ".gz", "wb") as f:
                f.write(path.read_bytes())
        back = dt.load_mnist_idx(str(images) + ".gz", str(labels) + ".gz")
        np.testing.assert_array_equal(back.inputs, data.inputs)

    def test_wrong_magic(self, idx_pair):
        _, _, labels = idx_pair
        with pytest.raises(e.FormatError) as err:
            dt.load_mnist_idx(labels, labels)
        assert err.value.observed == dt.IDX_LABELS_MAGIC

    def test_truncated(self, idx_pair):
        _, images, labels = idx_pair
        images.write_bytes(images.read_bytes()[:-10])
        with pytest.raises(e.LengthError):
            dt.load_mnist_idx(images, labels)

    def test_truncated_header(self, tmp_path):
        (tmp_path / "short").write_bytes(b"\x00\x00\x08")
        with pytest.raises(e.LengthError):
            dt.idx_file.load(tmp_path / "short", dt.IDX_IMAGES_MAGIC)

    def test_count_mismatch(self, idx_pair, tmp_path):
        data, images, _ = idx_pair
        (tmp_path / "few").write_bytes(dt.labels_to_idx(data.labels[:4]))
        with pytest.raises(e.LengthError):
            dt.load_mnist_idx(images, tmp_path / "few")

class TestMnistFiles:

    def test_find_plain_and_gzip(self, mnist_fixture):
        train = dt.find_mnist(str(mnist_fixture), "train")
        t10k = dt.find_mnist(str(mnist_fixture), "t10k")
        assert not train[0].endswith(".gz")
        assert all(p.endswith(".gz") for p in t10k)

    def test_load(self, mnist_fixture):
        assert len(dt.load_mnist(str(mnist_fixture), "train")) == 120
        test = dt.load_mnist(str(mnist_fixture), "t10k")
        assert len(test) == 40
        assert test.name == "mnist-t10k"

    def test_missing(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            dt.find_mnist(str(tmp_path), "train")

    def test_unknown_set(self, mnist_fixture):
        with pytest.raises(e.ConfigError):
            dt.find_mnist(str(mnist_fixture), "valid")

class TestSplit:

    def test_mnist_sizes(self):
        train, val = dt.split_indices(60000, 1 / 6, seed=0)
        assert len(train) == 50000
        assert len(val) == 10000

    def test_disjoint_and_complete(self):
        train, val = dt.split_indices(1000, 0.2, seed=3)
        assert len(np.intersect1d(train, val)) == 0
        np.testing.assert_array_equal(np.sort(np.concatenate([train, val])), np.arange(1000))

    def test_deterministic(self):
        a = dt.split_indices(500, 0.1, seed=11)
        b = dt.split_indices(500, 0.1, seed=11)
        c = dt.split_indices(500, 0.1, seed=12)
        np.testing.assert_array_equal(a[1], b[1])
        assert not np.array_equal(a[1], c[1])

    def test_partitions_keep_order(self):
        train, val = dt.split_indices(100, 0.3, seed=0)
        assert np.all(np.diff(train) > 0)
        assert np.all(np.diff(val) > 0)

    def test_invalid_fraction(self):
        with pytest.raises(e.ConfigError):
            dt.split_indices(10, 1.0, seed=0)

    def test_split_dataset(self):
        data = fake_mnist(30, seed=0)
        train, val = dt.split(data, 1 / 3, seed=0)
        assert (len(train), len(val)) == (20, 10)
        assert train.name.endswith("-train")

    def test_subset(self):
        data = fake_mnist(30, seed=0)
        first = dt.subset(data, 5)
        np.testing.assert_array_equal(first.inputs, data.inputs[:5])
        assert len(dt.subset(data, 100)) == 30

class TestHelpers:

    def test_one_hot(self):
        np.testing.assert_array_equal(dt.one_hot([2, 0], 3), [[0, 0, 1], [1, 0, 0]])

    def test_one_hot_out_of_range(self):
        with pytest.raises(e.ShapeError):
            dt.one_hot([3], 3)

    def test_two_gaussians(self):
        data = dt.synthetic_two_gaussians(2000, 3, 4.0, seed=0)
        np.testing.assert_array_equal(data.labels[:4], [0, 1, 0, 1])
        assert data.inputs[data.labels == 1, 0].mean() == pytest.approx(2.0, abs=0.15)
        assert data.inputs[data.labels == 0, 0].mean() == pytest.approx(-2.0, abs=0.15)
        assert data.inputs[:, 1].std() == pytest.approx(1.0, abs=0.1)

    def test_two_gaussians_reproducible_bytes(self):
        a = dt.synthetic_two_gaussians(100, 3, 1.0, seed=4)
        b = dt.synthetic_two_gaussians(100, 3, 1.0, seed=4)
        assert a.inputs.tobytes() == b.inputs.tobytes()
        assert a.labels.tobytes() == b.labels.tobytes()
        assert a.inputs.tobytes() != dt.synthetic_two_gaussians(100, 3, 1.0, seed=5).inputs.tobytes()

    def test_no_separation_is_chance_level(self):
        train = dt.synthetic_two_gaussians(2000, 3, 0.0, seed=0)
        held_out = dt.synthetic_two_gaussians(2000, 3, 0.0, seed=1)
        net = nw.init_he([3, 8, 2], act.activation_kind("elu"), seed=0)
        op.train(net, train, None, op.train_config(learning_rate=0.1, epochs=5, batch_size=32))
        _, accuracy = op.evaluate(net, held_out)
        assert accuracy == pytest.approx(0.5, abs=0.05)

    def test_wide_separation_is_linearly_separable(self):
        data = dt.synthetic_two_gaussians(200, 2, 10.0, seed=0)
        net = nw.init_he([2, 2], [], seed=0)
        op.train(net, data, None, op.train_config(learning_rate=0.1, epochs=20, batch_size=20))
        assert op.evaluate(net, data)[1] == 1.0

    def test_two_gaussians_odd(self):
        with pytest.raises(e.ConfigError):
            dt.synthetic_two_gaussians(3, 2, 1.0, seed=0)

    def test_label_count_mismatch(self):
        with pytest.raises(e.ShapeError):
            dt.dataset(np.zeros((3, 2)), [0, 1])
