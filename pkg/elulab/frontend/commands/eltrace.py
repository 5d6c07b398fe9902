import logging

from elulab.frontend import helpers as h
from elulab.frontend import printutils as pu
from elulab.frontend.commands import elcmd
from elulab.frontend.commands import eltrain

log = logging.getLogger("elulab")
log.trace("eltrace.py")

class eltrace(eltrain.eltrain):
    """Command to measure how much the per-unit medians vary during training"""

    section = "Trace"

    def __init__(self, elu):
        log.debug("eltrace.__init__()")
        super(eltrace, self).__init__(elu, name="trace")

        self.parser.description = """Track the median activation of every unit and its variance across epochs

Trains a deeper, wider classifier (default 256x5) and records the per-unit
medians on a probe set (default: the first 10000 training examples) after
every epoch. Per seed, writes <out>/<activation>/seed<seed>/ with trace.csv,
summary.csv, metrics.csv, network.bin and variance.csv: per unit, the variance
of its median across epochs and the variance of its epoch-to-epoch changes"""
        self.parser.epilog = """E.g.
  elulab trace --activation relu --seeds 0-4
  elulab trace --activation elu --hidden 64x5 --epochs 5 --limit 2000"""
        self.parser.set_defaults(out="traces")

    @h.catch_exceptions
    @elcmd.elcmd.init_and_cleanup
    def invoke(self, argv):
        log.debug("eltrace.invoke()")
        for result in h.map_jobs(eltrain.run_classifier, self.jobs(variance=True), self.args.jobs):
            self.print_result(result)
            for level, mean in result["layer_means"]:
                pu.print_header("{:<20}".format(f"  level {level}"), end="")
                print(f"mean variance of median {mean:.6g}")
        return h.EXIT_OK
