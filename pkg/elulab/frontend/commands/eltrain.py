import logging
import os

from elulab.frontend import artifacts as ar
from elulab.frontend import helpers as h
from elulab.frontend import printutils as pu
from elulab.frontend.commands import elcmd
from elulab.nn import activations as act
from elulab.nn import data as dt
from elulab.nn import diagnostics as dg
from elulab.nn import network as nw
from elulab.nn import network_file as nf
from elulab.nn import optimizer as op

log = logging.getLogger("elulab")
log.trace("eltrain.py")

MNIST_CLASSES = 10

def run_classifier(job):
    """Train one MNIST classifier for one seed and write its artifacts

    Module level so worker processes can run it. job is a dict of plain
    values (see eltrain.jobs()); the median trace is recorded after every
    epoch on the first probe_size training examples.

    :return: dict with the output directory and the last epoch metrics
    """
    kind = act.activation_kind.parse(job["activation"])
    train, validation = elcmd.mnist_train_split(
        job["mnist_dir"], job["validation_size"], job["split_seed"], job["limit"]
    )
    sizes = [train.dims] + job["hidden"] + [MNIST_CLASSES]
    net = nw.init_he(sizes, kind, seed=job["seed"])
    cfg = op.train_config(**job["train"])
    tracker = dg.median_tracker(net, dt.subset(train, job["probe_size"]))
    log.info(f"seed {job['seed']}: {kind} {'-'.join(str(s) for s in sizes)} on {train}")

    net, history = op.train(net, train, validation, cfg, hooks=[tracker])

    out = job["out"]
    ar.write_csv(os.path.join(out, "metrics.csv"), [op.METRICS_HEADER] + [m.row() for m in history])
    ar.write_csv(os.path.join(out, "trace.csv"), tracker.trace.rows())
    ar.write_csv(os.path.join(out, "summary.csv"), dg.summary_rows(tracker.trace))
    ar.write_atomic(os.path.join(out, "network.bin"), nf.to_bytes(net))
    result = {"seed": job["seed"], "out": out, "last": history[-1]}
    if job.get("variance"):
        summary = dg.median_variance(tracker.trace)
        ar.write_csv(os.path.join(out, "variance.csv"), summary.rows())
        result["layer_means"] = summary.layer_means()
    return result

class eltrain(elcmd.elcmd):
    """Command to train the MNIST classifiers"""

    section = "Train"

    def __init__(self, elu, name="train"):
        log.debug("eltrain.__init__()")
        super(eltrain, self).__init__(elu, name)

        self.new_parser(
            description="""Train deep MNIST classifiers and record the median unit activation

Per seed, writes <out>/<activation>/seed<seed>/ with metrics.csv, trace.csv
(per-unit medians after every epoch), summary.csv and network.bin""",
            epilog="""E.g.
  elulab train --activation elu --seeds 0-4
  elulab train --activation relu --epochs 1 --limit 1000 --out /tmp/runs""")
        self.add_training_arguments()
        self.parser.add_argument(
            "--hidden", dest="hidden", type=h.check_hidden, default=None,
            help="Hidden layers as WIDTHxCOUNT or a comma list of widths (default: elulab.cfg)"
        )
        self.parser.add_argument(
            "--probe-size", dest="probe_size", type=h.check_positive, default=None,
            help="Number of training examples the medians are taken over"
        )
        self.add_mnist_argument()
        self.add_config_argument()

    def jobs(self, variance=False):
        kind = self.activation(self.section)
        mnist_dir = self.settings.mnist_dir(self.args.mnist_dir)
        hidden = self.settings.get(self.section, "hidden", self.args.hidden, convert=h.check_hidden)
        probe_size = self.settings.get(self.section, "probe_size", self.args.probe_size, convert=int)
        jobs = []
        for seed in self.seeds(self.section):
            cfg = self.train_config(self.section, seed)
            jobs.append({
                "activation": kind.tag,
                "mnist_dir": mnist_dir,
                "validation_size": self.settings.get("Data", "validation_size", None, convert=int),
                "split_seed": self.settings.get("Data", "split_seed", None, convert=int),
                "limit": self.args.limit,
                "hidden": hidden,
                "probe_size": probe_size,
                "seed": seed,
                "train": vars(cfg),
                "out": os.path.join(self.args.out, elcmd.run_label(kind), f"seed{seed}"),
                "variance": variance,
            })
        return jobs

    def print_result(self, result):
        pu.print_header("{:<20}".format(f"seed {result['seed']}"), end="")
        print(f"{result['last']} -> {result['out']}")

    @h.catch_exceptions
    @elcmd.elcmd.init_and_cleanup
    def invoke(self, argv):
        log.debug("eltrain.invoke()")
        for result in h.map_jobs(run_classifier, self.jobs(), self.args.jobs):
            self.print_result(result)
        return h.EXIT_OK
