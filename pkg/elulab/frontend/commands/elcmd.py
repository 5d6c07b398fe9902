import argparse
import logging
from functools import lru_cache
from functools import wraps

from elulab import logger
from elulab.frontend import helpers as h
from elulab.frontend import settings as st
from elulab.nn import activations as act
from elulab.nn import data as dt
from elulab.nn import optimizer as op

log = logging.getLogger("elulab")
log.trace("elcmd.py")

@lru_cache(maxsize=4)
def load_mnist(mnist_dir, kind):
    """MNIST sets are loaded once per process, several seeds share them"""
    return dt.load_mnist(mnist_dir, kind)

def mnist_train_split(mnist_dir, validation_size, split_seed, limit=None):
    """(train, validation) from the MNIST training file

    validation_size examples go to validation, the rest is trained on; both
    keep the file order. limit caps each of them at its first limit examples.
    """
    data = load_mnist(mnist_dir, "train")
    train, validation = dt.split(data, validation_size / len(data), split_seed)
    if limit:
        train = dt.subset(train, limit)
        validation = dt.subset(validation, limit)
    return train, validation

def run_label(kind):
    """Output directory name of an activation, e.g. "elu" or "lrelu0.2" """
    if kind.alpha is None or kind.alpha == act.DEFAULT_ALPHAS.get(kind.name):
        return kind.name
    return f"{kind.name}{kind.alpha:g}"

class elcmd:
    """This is a super class with convenience methods shared by all the commands to:
    - parse the command's arguments/options
    - set/reset a logging level (debugging only)
    - resolve options from the flags, the --config JSON file and elulab.cfg
    """

    def __init__(self, elu, name):
        self.elu = elu
        self.name = name
        self.old_level = None
        self.parser = None      # ArgumentParser
        self.description = None # Only use if not in the parser
        self.args = None
        self.settings = None

    def new_parser(self, description, epilog):
        self.parser = argparse.ArgumentParser(
            prog=f"elulab {self.name}",
            description=description,
            formatter_class=argparse.RawTextHelpFormatter,
            add_help=False,
            epilog=epilog)
        self.parser.add_argument(
            "-h", "--help", dest="help", action="store_true", default=False,
            help="Show this help"
        )
        # allows to enable a different log level during development/debugging
        self.parser.add_argument(
            "--loglevel", dest="loglevel", default=None,
            help=argparse.SUPPRESS
        )
        return self.parser

    def add_config_argument(self):
        self.parser.add_argument(
            "--config", dest="config", type=str, default=None,
            help="JSON file overriding elulab.cfg, e.g. {\"Train\": {\"epochs\": 300}}"
        )

    def add_mnist_argument(self):
        self.parser.add_argument(
            "--mnist-dir", dest="mnist_dir", type=str, default=None,
            help=f"Directory holding the MNIST IDX files (default: ${st.MNIST_DIR_ENV})"
        )

    def add_training_arguments(self, lr_list=False):
        """Activation, SGD and seed flags shared by train, autoencoder and trace"""
        group = self.parser.add_argument_group("training arguments")
        group.add_argument(
            "-a", "--activation", dest="activation", type=h.check_activation, default=None,
            help=f"Activation of the hidden layers ({h.prepare_list(act.KINDS)}), optionally with :alpha"
        )
        group.add_argument(
            "--alpha", dest="alpha", type=float, default=None,
            help="Alpha of ELU or LReLU (default: 1.0 and 0.1)"
        )
        if lr_list:
            group.add_argument(
                "--lr", dest="lr", type=h.check_float_list, default=None,
                help="Comma separated learning rates, one run each"
            )
        else:
            group.add_argument(
                "--lr", dest="lr", type=h.check_positive_float, default=None,
                help="Learning rate"
            )
        group.add_argument(
            "--momentum", dest="momentum", type=float, default=None,
            help="Momentum in [0, 1), 0 is plain SGD"
        )
        group.add_argument(
            "--batch-size", dest="batch_size", type=h.check_positive, default=None,
            help="Mini-batch size"
        )
        group.add_argument(
            "--epochs", dest="epochs", type=h.check_positive, default=None,
            help="Number of epochs"
        )
        group.add_argument(
            "--seeds", dest="seeds", type=h.check_seeds, default=None,
            help="Seeds to run, e.g. 0,1,2 or 0-4"
        )
        group.add_argument(
            "--limit", dest="limit", type=h.check_positive, default=None,
            help="Only use the first N training (and evaluation) examples"
        )
        group.add_argument(
            "-j", "--jobs", dest="jobs", type=h.check_positive, default=1,
            help="Worker processes running seeds in parallel (default: %(default)s)"
        )
        group.add_argument(
            "-o", "--out", dest="out", type=str, default="runs",
            help="Output directory (default: %(default)s)"
        )
        return group

    def activation(self, section):
        """Activation kind from the flags or the configuration, --alpha applied"""
        kind = self.settings.get(section, "activation", self.args.activation,
                                 convert=h.check_activation)
        if self.args.alpha is not None:
            kind = act.activation_kind(kind.name, self.args.alpha)
        return kind

    def seeds(self, section):
        return self.settings.get(section, "seeds", self.args.seeds, convert=h.check_seeds)

    def train_config(self, section, seed, learning_rate=None):
        lr = learning_rate if learning_rate is not None else self.args.lr
        return op.train_config(
            learning_rate=self.settings.get(section, "learning_rate", lr, convert=float),
            momentum=self.settings.get(section, "momentum", self.args.momentum, convert=float, default="0"),
            batch_size=self.settings.get(section, "batch_size", self.args.batch_size, convert=int),
            epochs=self.settings.get(section, "epochs", self.args.epochs, convert=int),
            shuffle_seed=seed,
            log_every=self.settings.get(section, "log_every", None, convert=int, default="1"),
        )

    def set_loglevel(self, loglevel):
        """Change the logging level. This is changed temporarily for the duration
        of the command since reset_loglevel() is called at the end after the command is executed
        """
        if loglevel != None:
            numeric_level = logger.parse_level(loglevel)
            if numeric_level is None:
                log.warning(f"invalid log level: {loglevel}")
                return
            self.old_level = log.getEffectiveLevel()
            log.setLevel(numeric_level)

    def reset_loglevel(self):
        """Reset the logging level to the previous one"""
        if self.old_level != None:
            log.setLevel(self.old_level)
            self.old_level = None

    def init_and_cleanup(f):
        """Decorator for a command's invoke() method

        This allows:
        - not having to duplicate the argument parsing in all commands
        - not having to reset the log level before each of the "return"
          in the invoke() of each command
        - building the effective settings once per run
        """

        @wraps(f)
        def _init_and_cleanup(self, argv):
            try:
                self.args = self.parser.parse_args(argv)
            except SystemExit as err:
                # argparse already printed the usage error
                return err.code
            if self.args.help:
                self.parser.print_help()
                return h.EXIT_OK
            self.set_loglevel(self.args.loglevel)
            try:
                self.settings = st.settings(self.elu.config)
                if getattr(self.args, "config", None):
                    self.settings.overlay_json(self.args.config)
                return f(self, argv) # Call actual invoke()
            finally:
                self.reset_loglevel()
        return _init_and_cleanup
