import argparse
import logging
import os

import numpy as np

from elulab.frontend import artifacts as ar
from elulab.frontend import helpers as h
from elulab.frontend import printutils as pu
from elulab.frontend.commands import elcmd
from elulab.nn import data as dt
from elulab.nn import errors as e
from elulab.nn import fisher as fi
from elulab.nn import network as nw
from elulab.nn import network_file as nf
from elulab.nn import optimizer as op

log = logging.getLogger("elulab")
log.trace("elnatgrad.py")

DATA_SOURCES = ["mnist", "synthetic"]

# Gradients the bias shift is reported for
MINIBATCH = "minibatch"
FULL = "full"

def default_units(net, per_level):
    """The first per_level units of every level from 2 up to the output

    Level 1 is skipped when deeper levels exist: its incoming activations are
    the raw inputs, whose constant pixels make Var_q(a) singular.
    """
    levels = list(range(2, len(net.layers) + 1)) or [1]
    units = []
    for level in levels:
        width = net.layers[level - 1].fan_out
        units += [nw.unit_ref(level, i) for i in range(min(per_level, width))]
    return units

def check_units(value):
    try:
        return [nw.unit_ref.parse(u) for u in value.split(",") if u.strip()]
    except e.ConfigError as err:
        raise argparse.ArgumentTypeError(str(err))

def unit_gradient(net, data, unit):
    trace = nw.forward(net, data.inputs)
    grads = nw.backprop_loss(net, trace, op.targets_for(net, data))
    return grads.unit(unit)

def check_unit(net, unit, data, batch, delta_mode, mc_samples, seed):
    """Fisher estimate and bias shift reports of one unit

    :return: list of JSON entries, one per gradient (minibatch, full data)
    """
    fisher = fi.estimate_unit_fisher(net, unit, data, delta_mode, mc_samples, seed)
    entries = []
    for label, source in ((MINIBATCH, batch), (FULL, data)):
        g, g0 = unit_gradient(net, source, unit)
        report = fi.bias_shift_report(fisher, g, g0)
        entry = report.to_json()
        entry["gradient"] = label
        entry["delta_mode"] = delta_mode
        entries.append(entry)
    return entries

class elnatgrad(elcmd.elcmd):
    """Command to check the unit natural gradient identities on a trained network"""

    section = "Fisher"

    def __init__(self, elu):
        log.debug("elnatgrad.__init__()")
        super(elnatgrad, self).__init__(elu, "natgrad-check")

        self.new_parser(
            description="""Estimate unit Fisher matrices of a trained classifier and report the bias shift

For every selected unit, reports k and the bias shift under the plain and the
natural gradient, for the first mini-batch gradient and the full-data
gradient. Exits with 0 only if every identity holds (bias shift
decomposition, variance vs dual form of k). Units whose deltas are all zero
are skipped and recorded as such.""",
            epilog="""E.g.
  elulab natgrad-check runs/elu/seed0/network.bin
  elulab natgrad-check runs/relu/seed0/network.bin --units 2:0,2:1,9:3
  elulab natgrad-check net.bin --data synthetic --delta-mode model-sampled --mc-samples 4""")
        self.parser.add_argument(
            "network", help="Network file written by the train command"
        )
        self.parser.add_argument(
            "--data", dest="data", choices=DATA_SOURCES, default="mnist",
            help="Examples the expectations are taken over (default: %(default)s)"
        )
        self.parser.add_argument(
            "--units", dest="units", type=check_units, default=None,
            help="Comma separated level:index list (default: the first units of every level above 1)"
        )
        self.parser.add_argument(
            "--delta-mode", dest="delta_mode", choices=fi.DELTA_MODES, default=None,
            help="Observed labels (empirical Fisher) or labels sampled from the model"
        )
        self.parser.add_argument(
            "--mc-samples", dest="mc_samples", type=h.check_positive, default=None,
            help="Sampled labels per example with --delta-mode model-sampled"
        )
        self.parser.add_argument(
            "--samples", dest="samples", type=h.check_positive, default=None,
            help="Number of examples (default: 2048)"
        )
        self.parser.add_argument(
            "--batch-size", dest="batch_size", type=h.check_positive, default=None,
            help="Size of the mini-batch gradient (default: the [Train] batch size)"
        )
        self.parser.add_argument(
            "--seed", dest="seed", type=int, default=0,
            help="Seed of the synthetic data and of the sampled labels (default: %(default)s)"
        )
        self.parser.add_argument(
            "-o", "--out", dest="out", type=str, default=None,
            help="JSON report (default: next to the network file)"
        )
        self.add_mnist_argument()
        self.add_config_argument()

    def dataset(self, net):
        samples = self.settings.get(self.section, "samples", self.args.samples, convert=int)
        if self.args.data == "synthetic":
            separation = self.settings.get(self.section, "synthetic_separation", None, convert=float)
            return dt.synthetic_two_gaussians(samples + samples % 2, net.layers[0].fan_in,
                                              separation, self.args.seed)
        mnist_dir = self.settings.mnist_dir(self.args.mnist_dir)
        return dt.subset(elcmd.load_mnist(mnist_dir, "train"), samples)

    @h.catch_exceptions
    @elcmd.elcmd.init_and_cleanup
    def invoke(self, argv):
        log.debug("elnatgrad.invoke()")

        net = nf.load(self.args.network)
        if net.loss != nw.CROSS_ENTROPY:
            raise e.ConfigError(f"{self.args.network} is not a classifier, the deltas need a softmax output")
        delta_mode = self.settings.get(self.section, "delta_mode", self.args.delta_mode)
        if delta_mode not in fi.DELTA_MODES:
            raise e.ConfigError(f"unknown delta mode '{delta_mode}'")
        mc_samples = self.settings.get(self.section, "mc_samples", self.args.mc_samples, convert=int)
        batch_size = self.settings.get("Train", "batch_size", self.args.batch_size, convert=int)
        per_level = self.settings.get(self.section, "units_per_layer", None, convert=int)
        units = self.args.units or default_units(net, per_level)
        for unit in units:
            try:
                unit.check(net)
            except IndexError as err:
                raise e.ConfigError(str(err))

        data = self.dataset(net)
        batch = dt.subset(data, batch_size)

        entries = []
        failed = 0
        for unit in units:
            try:
                unit_entries = check_unit(net, unit, data, batch, delta_mode, mc_samples, self.args.seed)
            except e.DegenerateFisherError as err:
                log.warning(f"unit {unit} skipped: {err}")
                entries.append({"unit": unit.index, "layer": unit.level, "skipped": "degenerate-fisher"})
                pu.print_header("{:<20}".format(f"unit {unit}"), end="")
                print("skipped (all deltas are zero)")
                continue
            except (e.SingularMatrixError, e.NotPositiveDefiniteError) as err:
                failed += 1
                entries.append({"unit": unit.index, "layer": unit.level, "error": str(err)})
                pu.print_header("{:<20}".format(f"unit {unit}"), end="")
                print(pu.red(f"error: {err}"))
                continue
            for entry in unit_entries:
                if not entry["identities_ok"]:
                    failed += 1
                pu.print_header("{:<20}".format(f"unit {unit} {entry['gradient']}"), end="")
                print(f"k {entry['k']:+.6f}  plain {entry['shift_plain']:+.4g}  "
                      f"natural {entry['shift_natural']:+.4g}  {pu.status(entry['identities_ok'])}")
            entries += unit_entries

        checked = [x["k"] for x in entries if "k" in x and x["gradient"] == FULL]
        if checked:
            pu.print_header("{:<20}".format("mean |k - 1|"), end="")
            print(f"{float(np.mean(np.abs(np.array(checked) - 1.0))):.6g} over {len(checked)} units")

        out = self.args.out or os.path.splitext(self.args.network)[0] + ".natgrad.json"
        ar.write_json(out, entries)
        print(out)
        return h.EXIT_FAILURE if failed else h.EXIT_OK
