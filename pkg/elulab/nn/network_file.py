import logging
import struct

import numpy as np

from elulab.frontend import printutils as pu
from elulab.nn import binary_structure as bs
from elulab.nn import errors as e
from elulab.nn import network as nw

log = logging.getLogger("elulab")
log.trace("network_file.py")

MAGIC = b"ELUNET01"

# Layout (little-endian):
#   char[8]  magic "ELUNET01"
#   u32      layer count
#   per layer: u32 fan_out | u32 fan_in | u16 tag length | tag (utf-8, CLI string)
#   f64[]    weights of every layer, row-major, in layer order
#   f64[]    biases of every layer, in layer order

def to_bytes(net):
    """Serialize a network (see layout above)"""
    header = [MAGIC, struct.pack("<I", len(net.layers))]
    for l in net.layers:
        tag = l.tag.encode("utf-8")
        header.append(struct.pack("<IIH", l.fan_out, l.fan_in, len(tag)))
        header.append(tag)
    body = [l.weights.astype("<f8").tobytes(order="C") for l in net.layers]
    body += [l.bias.astype("<f8").tobytes() for l in net.layers]
    return b"".join(header + body)

class network_file(bs.binary_structure):
    """python representation of a serialized network"""

    def __init__(self, mem, path=None):
        super(network_file, self).__init__(mem, path=path)

        self.layer_count = 0
        self.dims = []          # (fan_out, fan_in) per layer
        self.tags = []
        self.header_size = 0

        self.unpack_header()

    @staticmethod
    def load(path):
        return network_file(network_file.read_file(path), path=str(path))

    def unpack_header(self):
        """Parse the header fields, leaving self.offset at the first weight"""
        magic = self.next_bytes(len(MAGIC))
        if magic != MAGIC:
            raise e.FormatError(f"{self.where()}: not a network file (magic {magic!r})", observed=magic)
        self.layer_count = self.next_variable("<I")
        if self.layer_count == 0:
            raise e.FormatError(f"{self.where()}: network file without layers")
        for i in range(self.layer_count):
            fan_out = self.next_variable("<I")
            fan_in = self.next_variable("<I")
            length = self.next_variable("<H")
            tag = self.next_bytes(length).decode("utf-8")
            self.dims.append((fan_out, fan_in))
            self.tags.append(tag)
        self.header_size = self.offset
        log.debug(f"network_file.header_size = {self.header_size:#x}")

        expected = self.header_size + 8 * sum(o * i + o for o, i in self.dims)
        if len(self.mem) < expected:
            raise e.LengthError(f"{self.where()}: truncated, need {expected} bytes but only {len(self.mem)} available")

    @property
    def loss(self):
        return nw.CROSS_ENTROPY if self.tags[-1] == nw.SOFTMAX else nw.MSE

    def to_network(self):
        self.offset = self.header_size
        weights = []
        for fan_out, fan_in in self.dims:
            raw = self.next_bytes(8 * fan_out * fan_in)
            weights.append(np.frombuffer(raw, dtype="<f8").reshape(fan_out, fan_in).astype(np.float64))
        biases = []
        for fan_out, _ in self.dims:
            raw = self.next_bytes(8 * fan_out)
            biases.append(np.frombuffer(raw, dtype="<f8").astype(np.float64))
        layers = [nw.layer(w, b, tag) for w, b, tag in zip(weights, biases, self.tags)]
        return nw.network(layers, self.loss)

    def __str__(self):
        title = f"network file {self.where()} {{"
        txt = pu.color_title(title)
        txt += "\n{:16} = ".format("magic")
        txt += pu.color_value(MAGIC.decode("ascii"))
        txt += "\n{:16} = ".format("layer_count")
        txt += pu.color_value(self.layer_count)
        for i, ((fan_out, fan_in), tag) in enumerate(zip(self.dims, self.tags)):
            txt += "\n{:16} = ".format(f"layer[{i}]")
            txt += pu.color_value(f"{fan_in}->{fan_out} {tag}")
        txt += "\n{:16} = ".format("header_size")
        txt += pu.color_value("{:#x}".format(self.header_size))
        txt += "\n{:16} = ".format("file_size")
        txt += pu.color_value("{:#x}".format(len(self.mem)))
        txt += "\n}"
        return txt

def load(path):
    return network_file.load(path).to_network()
