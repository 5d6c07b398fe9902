import logging
import os
import struct

import numpy as np

from elulab.nn import binary_structure as bs
from elulab.nn import errors as e
from elulab.nn import linalg as la

log = logging.getLogger("elulab")
log.trace("data.py")

IDX_IMAGES_MAGIC = 2051
IDX_LABELS_MAGIC = 2049

# Standard file names of the MNIST distribution, with or without .gz
MNIST_FILES = {
    "train": ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
    "t10k": ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
}

class dataset:
    """Inputs (n x d) with optional class labels (absent when autoencoding)"""

    def __init__(self, inputs, labels=None, name="dataset"):
        self.inputs = la.as_matrix(inputs, "inputs")
        if labels is not None:
            labels = np.asarray(labels, dtype=np.int64)
            if labels.shape != (self.inputs.shape[0],):
                raise e.ShapeError("one label per input row expected", self.inputs.shape, labels.shape)
        self.labels = labels
        self.name = name

    def __len__(self):
        return self.inputs.shape[0]

    @property
    def dims(self):
        return self.inputs.shape[1]

    def take(self, indices, name=None):
        indices = np.asarray(indices, dtype=np.int64)
        labels = None if self.labels is None else self.labels[indices]
        return dataset(self.inputs[indices], labels, name or self.name)

    def __str__(self):
        kind = "unlabeled" if self.labels is None else f"{int(self.labels.max()) + 1 if len(self) else 0} classes"
        return f"{self.name}: {len(self)} x {self.dims} ({kind})"

class idx_file(bs.binary_structure):
    """python representation of an IDX file (big-endian header, u8 payload)

    Only the two layouts of the MNIST distribution are supported:
    images (magic 2051, dims n, rows, cols) and labels (magic 2049, dim n)
    """

    def __init__(self, mem, expected_magic, path=None):
        super(idx_file, self).__init__(mem, path=path)
        self.magic = 0
        self.dims = []
        self.unpack_header(expected_magic)

    @staticmethod
    def load(path, expected_magic):
        return idx_file(idx_file.read_file(path), expected_magic, path=str(path))

    def unpack_header(self, expected_magic):
        self.magic = self.next_variable(">I")
        if self.magic != expected_magic:
            raise e.FormatError(
                f"{self.where()}: wrong IDX magic {self.magic}, expected {expected_magic}",
                observed=self.magic,
            )
        ndims = 3 if expected_magic == IDX_IMAGES_MAGIC else 1
        self.dims = [self.next_variable(">I") for _ in range(ndims)]
        log.debug(f"idx_file.dims = {self.dims}")

    def payload(self):
        count = int(np.prod(self.dims))
        raw = self.next_bytes(count)
        return np.frombuffer(raw, dtype=np.uint8).reshape(self.dims)

def load_mnist_idx(images_path, labels_path, name="mnist"):
    """Load an image/label IDX pair

    Pixels are scaled from [0, 255] to [0, 1] by /255 (no centering) and
    every image is flattened row-major.
    """
    images = idx_file.load(images_path, IDX_IMAGES_MAGIC)
    labels = idx_file.load(labels_path, IDX_LABELS_MAGIC)
    n = images.dims[0]
    if labels.dims[0] != n:
        raise e.LengthError(f"{images.dims[0]} images but {labels.dims[0]} labels")
    pixels = images.payload().reshape(n, -1).astype(np.float64) / 255.0
    data = dataset(pixels, labels.payload().astype(np.int64), name)
    log.info(f"loaded {data}")
    return data

def find_mnist(mnist_dir, kind):
    """Locate the image/label files of the 'train' or 't10k' set in a directory"""
    if kind not in MNIST_FILES:
        raise e.ConfigError(f"unknown MNIST set '{kind}'")
    paths = []
    for base in MNIST_FILES[kind]:
        for candidate in (base, base + ".gz"):
            path = os.path.join(mnist_dir, candidate)
            if os.path.exists(path):
                paths.append(path)
                break
        else:
            raise FileNotFoundError(os.path.join(mnist_dir, base))
    return paths

def load_mnist(mnist_dir, kind="train"):
    images_path, labels_path = find_mnist(mnist_dir, kind)
    return load_mnist_idx(images_path, labels_path, name=f"mnist-{kind}")

def images_to_idx(inputs, rows, cols):
    """IDX image bytes of a dataset whose inputs are in [0, 1]"""
    inputs = np.asarray(inputs, dtype=np.float64)
    if inputs.shape[1] != rows * cols:
        raise e.ShapeError("inputs do not match the image dims", inputs.shape, (rows, cols))
    pixels = np.clip(np.rint(inputs * 255.0), 0, 255).astype(np.uint8)
    return struct.pack(">IIII", IDX_IMAGES_MAGIC, inputs.shape[0], rows, cols) + pixels.tobytes()

def labels_to_idx(labels):
    labels = np.asarray(labels)
    return struct.pack(">II", IDX_LABELS_MAGIC, labels.shape[0]) + labels.astype(np.uint8).tobytes()

def write_mnist_idx(data, images_path, labels_path, rows=28, cols=28):
    """Write a labeled dataset as an IDX pair (test fixtures)"""
    with open(images_path, "wb") as f:
        f.write(images_to_idx(data.inputs, rows, cols))
    with open(labels_path, "wb") as f:
        f.write(labels_to_idx(data.labels))

def split_indices(n, validation_fraction, seed):
    """Seeded shuffle of range(n), then cut: (train indices, validation indices)

    Each partition is returned sorted, so both keep the canonical dataset order
    """
    if not 0 <= validation_fraction < 1:
        raise e.ConfigError(f"validation fraction must be in [0, 1), got {validation_fraction}")
    order = la.seeded_rng(seed).permutation(n)
    n_val = int(round(validation_fraction * n))
    return np.sort(order[n_val:]), np.sort(order[:n_val])

def split(data, validation_fraction, seed):
    train_idx, val_idx = split_indices(len(data), validation_fraction, seed)
    return (data.take(train_idx, f"{data.name}-train"),
            data.take(val_idx, f"{data.name}-validation"))

def subset(data, n):
    """First n examples in the dataset order"""
    return data.take(np.arange(min(n, len(data))), data.name)

def one_hot(labels, classes):
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size and (labels.min() < 0 or labels.max() >= classes):
        raise e.ShapeError(f"labels outside 0..{classes - 1}", labels.shape)
    out = np.zeros((labels.shape[0], classes))
    out[np.arange(labels.shape[0]), labels] = 1.0
    return out

def synthetic_two_gaussians(n, d, separation, seed):
    """Two balanced classes centered at -/+ separation/2 along the first axis,
    unit-variance isotropic noise; labels alternate 0, 1, 0, 1, ...
    """
    if n % 2 != 0:
        raise e.ConfigError(f"n must be even, got {n}")
    rng = la.seeded_rng(seed)
    labels = np.arange(n) % 2
    inputs = rng.normal(0.0, 1.0, size=(n, d))
    inputs[:, 0] += np.where(labels == 1, 0.5, -0.5) * separation
    return dataset(inputs, labels, f"two-gaussians-{separation:g}")
