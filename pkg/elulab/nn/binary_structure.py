import gzip
import logging
import struct

from elulab.nn import errors as e

log = logging.getLogger("elulab")
log.trace("binary_structure.py")

class binary_structure(object):
    """Represent a binary file layout parsed from raw bytes. Inherited by the
    IDX and network file parsers so we don't duplicate the unpacking and
    bounds checking code.
    """

    def __init__(self, mem, path=None):
        log.trace("binary_structure.__init__()")
        self.mem = mem
        self.path = path
        self.offset = 0

    @staticmethod
    def read_file(path):
        """Read a whole file, transparently decompressing *.gz files"""
        if str(path).endswith(".gz"):
            with gzip.open(path, "rb") as f:
                return f.read()
        with open(path, "rb") as f:
            return f.read()

    def where(self):
        return self.path if self.path is not None else "<memory>"

    def require(self, length):
        """Check that length more bytes are available at the current offset"""
        if self.offset + length > len(self.mem):
            raise e.LengthError(
                f"{self.where()}: truncated, need {self.offset + length} bytes but only {len(self.mem)} available"
            )

    def unpack_variable(self, fmt, offset):
        return struct.unpack_from(fmt, self.mem, offset)[0]

    def next_variable(self, fmt):
        """Unpack one value at the current offset and move past it"""
        size = struct.calcsize(fmt)
        self.require(size)
        value = self.unpack_variable(fmt, self.offset)
        self.offset += size
        return value

    def next_bytes(self, length):
        self.require(length)
        data = self.mem[self.offset:self.offset + length]
        self.offset += length
        return data
