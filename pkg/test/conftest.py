import gzip
import json
import os
import sys

import numpy as np
import pytest

# Add the root path so the tests run without installing elulab
root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if root not in sys.path:
    sys.path.insert(0, root)

from elulab import pyelulab
from elulab.frontend import settings as st
from elulab.nn import activations as act
from elulab.nn import data as dt

ALL_KINDS = [act.activation_kind(name) for name in act.KINDS]

def pytest_configure(config):
    config.addinivalue_line("markers", "slow: desk-scale MNIST runs (need $ELULAB_MNIST_DIR)")

@pytest.fixture
def rng():
    return np.random.default_rng(1234)

def fake_mnist(n, seed):
    """Labeled 28x28 images with pixels on the k/255 grid"""
    rng = np.random.default_rng(seed)
    pixels = rng.integers(0, 256, size=(n, 784)) / 255.0
    return dt.dataset(pixels, rng.integers(0, 10, size=n), "fake-mnist")

@pytest.fixture
def mnist_fixture(tmp_path):
    """Directory with small train (120) and t10k (40) IDX files, the t10k pair gzipped"""
    d = tmp_path / "mnist"
    d.mkdir()
    images, labels = dt.MNIST_FILES["train"]
    dt.write_mnist_idx(fake_mnist(120, 0), d / images, d / labels)
    images, labels = dt.MNIST_FILES["t10k"]
    dt.write_mnist_idx(fake_mnist(40, 1), d / "plain-images", d / "plain-labels")
    for src, dst in (("plain-images", images), ("plain-labels", labels)):
        with open(d / src, "rb") as f, gzip.open(d / (dst + ".gz"), "wb") as g:
            g.write(f.read())
        os.unlink(d / src)
    return d

@pytest.fixture
def small_config(tmp_path):
    """--config overlay for the fixture sized MNIST"""
    path = tmp_path / "small.json"
    path.write_text(json.dumps({
        "Data": {"validation_size": 20},
        "Train": {"hidden": "8x2", "probe_size": 32},
        "Trace": {"hidden": "6x3", "probe_size": 32},
        "Autoencoder": {"encoder": [16, 8, 4]},
        "Fisher": {"samples": 64, "units_per_layer": 2},
    }))
    return str(path)

@pytest.fixture
def mnist_dir():
    path = os.environ.get(st.MNIST_DIR_ENV)
    if not path or not os.path.isdir(path):
        pytest.skip(f"${st.MNIST_DIR_ENV} does not point to the MNIST files")
    return path

@pytest.fixture
def cli(monkeypatch):
    """Run an elulab command line in process, returning its exit code"""
    monkeypatch.delenv(st.MNIST_DIR_ENV, raising=False)

    def run(*argv):
        return pyelulab.main([str(a) for a in argv])
    return run
