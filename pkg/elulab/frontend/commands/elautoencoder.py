import logging
import os

from elulab.frontend import artifacts as ar
from elulab.frontend import helpers as h
from elulab.frontend import printutils as pu
from elulab.frontend.commands import elcmd
from elulab.nn import activations as act
from elulab.nn import data as dt
from elulab.nn import network as nw
from elulab.nn import optimizer as op

log = logging.getLogger("elulab")
log.trace("elautoencoder.py")

RECONSTRUCTION_HEADER = ["epoch", "train_mse", "test_mse"]

def autoencoder_sizes(inputs, encoder):
    """[784, 1000, 500, 250, 30] -> 784-1000-500-250-30-250-500-1000-784"""
    return [inputs] + list(encoder) + list(encoder[-2::-1]) + [inputs]

def run_autoencoder(job):
    """Train one autoencoder (one learning rate, one seed) and write reconstruction.csv

    Every hidden layer, code layer included, uses the activation; the output
    layer is linear and the loss is the mean squared reconstruction error,
    so train_loss is exactly the training set reconstruction error.
    """
    kind = act.activation_kind.parse(job["activation"])
    train = elcmd.load_mnist(job["mnist_dir"], "train")
    test = elcmd.load_mnist(job["mnist_dir"], "t10k")
    if job["limit"]:
        train = dt.subset(train, job["limit"])
        test = dt.subset(test, job["limit"])
    train = dt.dataset(train.inputs, name=train.name)
    test = dt.dataset(test.inputs, name=test.name)

    sizes = autoencoder_sizes(train.dims, job["encoder"])
    net = nw.init_he(sizes, kind, seed=job["seed"], loss=nw.MSE)
    cfg = op.train_config(**job["train"])
    log.info(f"lr {cfg.learning_rate!r} seed {job['seed']}: {kind} {'-'.join(str(s) for s in sizes)}")

    net, history = op.train(net, train, test, cfg)

    rows = [RECONSTRUCTION_HEADER]
    rows += [[str(m.epoch), repr(m.train_loss), repr(m.eval_loss)] for m in history]
    ar.write_csv(os.path.join(job["out"], "reconstruction.csv"), rows)
    return {"seed": job["seed"], "lr": cfg.learning_rate, "out": job["out"], "last": history[-1]}

class elautoencoder(elcmd.elcmd):
    """Command to train the deep MNIST autoencoders"""

    section = "Autoencoder"

    def __init__(self, elu):
        log.debug("elautoencoder.__init__()")
        super(elautoencoder, self).__init__(elu, "autoencoder")

        self.new_parser(
            description="""Train deep MNIST autoencoders at several learning rates

The encoder is 1000-500-250-30 and the decoder mirrors it, the output layer is
linear with a mean squared error loss. Per learning rate and seed, writes
<out>/<activation>/lr<lr>/seed<seed>/reconstruction.csv with the train and
test reconstruction error after every epoch""",
            epilog="""E.g.
  elulab autoencoder --activation elu
  elulab autoencoder --activation srelu --lr 0.01 --epochs 1 --limit 1000""")
        self.add_training_arguments(lr_list=True)
        self.parser.set_defaults(out="autoencoders")
        self.add_mnist_argument()
        self.add_config_argument()

    def jobs(self):
        kind = self.activation(self.section)
        mnist_dir = self.settings.mnist_dir(self.args.mnist_dir)
        rates = self.settings.get(self.section, "learning_rates", self.args.lr, convert=h.check_float_list)
        encoder = self.settings.get(self.section, "encoder", None, convert=h.check_hidden)
        jobs = []
        for lr in rates:
            for seed in self.seeds(self.section):
                cfg = self.train_config(self.section, seed, learning_rate=lr)
                jobs.append({
                    "activation": kind.tag,
                    "mnist_dir": mnist_dir,
                    "limit": self.args.limit,
                    "encoder": encoder,
                    "seed": seed,
                    "train": vars(cfg),
                    "out": os.path.join(self.args.out, elcmd.run_label(kind), f"lr{lr:g}", f"seed{seed}"),
                })
        return jobs

    @h.catch_exceptions
    @elcmd.elcmd.init_and_cleanup
    def invoke(self, argv):
        log.debug("elautoencoder.invoke()")
        for result in h.map_jobs(run_autoencoder, self.jobs(), self.args.jobs):
            pu.print_header("{:<20}".format(f"lr {result['lr']:g} seed {result['seed']}"), end="")
            print(f"train_mse {result['last'].train_loss:.6f}, test_mse {result['last'].eval_loss:.6f} -> {result['out']}")
        return h.EXIT_OK
