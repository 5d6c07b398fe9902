import logging

import numpy as np

from elulab.nn import data as dt
from elulab.nn import errors as e
from elulab.nn import linalg as la
from elulab.nn import network as nw

log = logging.getLogger("elulab")
log.trace("optimizer.py")

# Rows evaluated per forward pass when computing epoch metrics
EVAL_CHUNK = 4096

METRICS_HEADER = ["epoch", "train_loss", "eval_loss", "accuracy", "median_activation"]

class train_config:
    """Mini-batch SGD settings

    :param learning_rate: > 0
    :param momentum: in [0, 1), 0 is plain SGD
    :param batch_size: >= 1, the last partial batch is kept
    :param epochs: >= 1
    :param shuffle_seed: epoch e shuffles with the stream seeded by (shuffle_seed, e)
    :param log_every: log a metrics line every that many epochs
    """

    def __init__(self, learning_rate=0.01, momentum=0.0, batch_size=64, epochs=20,
                 shuffle_seed=0, log_every=1):
        self.learning_rate = float(learning_rate)
        self.momentum = float(momentum)
        self.batch_size = int(batch_size)
        self.epochs = int(epochs)
        self.shuffle_seed = int(shuffle_seed)
        self.log_every = max(1, int(log_every))

        if not self.learning_rate > 0:
            raise e.ConfigError(f"learning rate must be > 0, got {self.learning_rate}")
        if not 0 <= self.momentum < 1:
            raise e.ConfigError(f"momentum must be in [0, 1), got {self.momentum}")
        if self.batch_size < 1:
            raise e.ConfigError(f"batch size must be >= 1, got {self.batch_size}")
        if self.epochs < 1:
            raise e.ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.shuffle_seed < 0:
            raise e.ConfigError(f"shuffle seed must be >= 0, got {self.shuffle_seed}")

class epoch_metrics:
    def __init__(self, epoch, train_loss, eval_loss=None, accuracy=None, median_activation=None):
        self.epoch = epoch
        self.train_loss = train_loss
        self.eval_loss = eval_loss
        self.accuracy = accuracy
        self.median_activation = median_activation

    def row(self):
        """CSV row, empty cells for absent values"""
        cells = [self.epoch, self.train_loss, self.eval_loss, self.accuracy, self.median_activation]
        return ["" if c is None else repr(c) for c in cells]

    def __str__(self):
        txt = f"epoch {self.epoch}: train_loss {self.train_loss:.6f}"
        if self.eval_loss is not None:
            txt += f", eval_loss {self.eval_loss:.6f}"
        if self.accuracy is not None:
            txt += f", accuracy {self.accuracy:.4f}"
        if self.median_activation is not None:
            txt += f", median_activation {self.median_activation:+.5f}"
        return txt

class sgd_state:
    """Momentum buffers (velocities), one pair per layer, created on first use"""

    def __init__(self):
        self.v_weights = None
        self.v_bias = None

    def ensure(self, net):
        if self.v_weights is None:
            self.v_weights = [np.zeros_like(l.weights) for l in net.layers]
            self.v_bias = [np.zeros_like(l.bias) for l in net.layers]

def sgd_step(net, grads, state, cfg):
    """One update in velocity form: v <- momentum v - lr g; w <- w + v

    The network is updated in place (the training loop is the only writer).

    :raises DivergenceError: a gradient entry or an updated parameter is not
                             finite, nothing is updated
    """
    for i in range(len(net.layers)):
        if grads.d_weights[i].shape != net.layers[i].weights.shape or \
                grads.d_bias[i].shape != net.layers[i].bias.shape:
            raise e.ShapeError(f"gradient of layer {i} does not match", net.layers[i].weights.shape,
                               grads.d_weights[i].shape)
        if not (np.all(np.isfinite(grads.d_weights[i])) and np.all(np.isfinite(grads.d_bias[i]))):
            raise e.DivergenceError(i)

    state.ensure(net)
    updates = []
    with np.errstate(over="ignore", invalid="ignore"):
        for i, l in enumerate(net.layers):
            vw = cfg.momentum * state.v_weights[i] - cfg.learning_rate * grads.d_weights[i]
            vb = cfg.momentum * state.v_bias[i] - cfg.learning_rate * grads.d_bias[i]
            w = l.weights + vw
            b = l.bias + vb
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise e.DivergenceError(i, what="weight")
            updates.append((vw, vb, w, b))

    for i, (vw, vb, w, b) in enumerate(updates):
        state.v_weights[i] = vw
        state.v_bias[i] = vb
        net.layers[i].weights[...] = w
        net.layers[i].bias[...] = b
    return net, state

def targets_for(net, data):
    """Training targets: one-hot labels for classifiers, the inputs themselves for MSE (autoencoders)"""
    if net.loss == nw.CROSS_ENTROPY:
        if data.labels is None:
            raise e.ConfigError(f"{data.name} has no labels to train a classifier on")
        return dt.one_hot(data.labels, net.layers[-1].fan_out)
    return data.inputs

def evaluate(net, data):
    """Mean loss and accuracy (classifiers only, else None) over a whole dataset"""
    n = len(data)
    if n == 0:
        return None, None
    targets = targets_for(net, data)
    total = 0.0
    correct = 0
    for start in range(0, n, EVAL_CHUNK):
        stop = min(start + EVAL_CHUNK, n)
        trace = nw.forward(net, data.inputs[start:stop])
        total += nw.loss_value(net, trace, targets[start:stop]) * (stop - start)
        if net.loss == nw.CROSS_ENTROPY:
            correct += int(np.sum(np.argmax(trace.output, axis=1) == data.labels[start:stop]))
    accuracy = correct / n if net.loss == nw.CROSS_ENTROPY else None
    return total / n, accuracy

def epoch_order(cfg, epoch, n):
    return la.seeded_rng(cfg.shuffle_seed, epoch).permutation(n)

def train(net, data, eval_data, cfg, hooks=()):
    """Train with mini-batch SGD

    :param eval_data: dataset for eval_loss/accuracy, may be None or empty
    :param hooks: callables hook(epoch, net, metrics) run after every epoch,
                  they may fill in metrics.median_activation
    :return: (net, list of epoch_metrics)
    """
    n = len(data)
    if n == 0:
        raise e.ConfigError(f"{data.name} is empty")
    if data.dims != net.layers[0].fan_in:
        raise e.ShapeError("dataset does not match the network input", data.inputs.shape,
                           net.layers[0].weights.shape)
    targets = targets_for(net, data)
    state = sgd_state()
    history = []
    log.debug(f"optimizer.train({data.name}, epochs={cfg.epochs}, lr={cfg.learning_rate}, batch={cfg.batch_size})")

    for epoch in range(1, cfg.epochs + 1):
        order = epoch_order(cfg, epoch, n)
        for batch, start in enumerate(range(0, n, cfg.batch_size)):
            idx = order[start:start + cfg.batch_size]
            try:
                with np.errstate(over="ignore", invalid="ignore"):
                    trace = nw.forward(net, data.inputs[idx])
                    grads = nw.backprop_loss(net, trace, targets[idx])
                sgd_step(net, grads, state, cfg)
            except e.DivergenceError as err:
                raise err.at(epoch, batch)

        eval_loss, eval_accuracy = (None, None)
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                train_loss, train_accuracy = evaluate(net, data)
                if eval_data is not None:
                    eval_loss, eval_accuracy = evaluate(net, eval_data)
        except e.DivergenceError as err:
            raise err.at(epoch, None)
        if not np.isfinite(train_loss):
            raise e.DivergenceError(len(net.layers) - 1, what="loss").at(epoch, None)
        accuracy = eval_accuracy if eval_loss is not None else train_accuracy
        metrics = epoch_metrics(epoch, train_loss, eval_loss, accuracy)
        for hook in hooks:
            hook(epoch, net, metrics)
        history.append(metrics)
        if epoch % cfg.log_every == 0 or epoch == cfg.epochs:
            log.info(str(metrics))

    return net, history
