import logging

import hexdump

from elulab.frontend import helpers as h
from elulab.frontend.commands import elcmd
from elulab.nn import network_file as nf

log = logging.getLogger("elulab")
log.trace("elshow.py")

class elshow(elcmd.elcmd):
    """Command to print a network file"""

    def __init__(self, elu):
        log.debug("elshow.__init__()")
        super(elshow, self).__init__(elu, "show")

        self.new_parser(
            description="""Print the header of a network file and the network it holds""",
            epilog="""E.g.
  elulab show runs/elu/seed0/network.bin
  elulab show -x runs/elu/seed0/network.bin""")
        self.parser.add_argument(
            "path", help="Network file written by the train or trace command"
        )
        self.parser.add_argument(
            "-x", "--hexdump", dest="hexdump", action="store_true", default=False,
            help="Hexdump the header bytes"
        )
        self.parser.add_argument(
            "-v", "--verbose", dest="verbose", action="count", default=0,
            help="Also print per-layer weight statistics"
        )

    @h.catch_exceptions
    @elcmd.elcmd.init_and_cleanup
    def invoke(self, argv):
        log.debug("elshow.invoke()")

        f = nf.network_file.load(self.args.path)
        print(f)
        if self.args.hexdump:
            for line in hexdump.hexdump(f.mem[:f.header_size], result="generator"):
                print(line)
        if self.args.verbose > 0:
            print(f.to_network())
        return h.EXIT_OK
