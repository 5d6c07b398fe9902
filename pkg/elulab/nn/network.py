import logging

import numpy as np

from elulab.frontend import printutils as pu
from elulab.nn import activations as act
from elulab.nn import errors as e
from elulab.nn import linalg as la

log = logging.getLogger("elulab")
log.trace("network.py")

SOFTMAX = "softmax"
LINEAR = "linear"

CROSS_ENTROPY = "cross-entropy"
MSE = "mse"
LOSSES = [CROSS_ENTROPY, MSE]

class layer:
    """One dense layer: net = a W^T + b, then the activation

    :param weights: (fan_out, fan_in) matrix
    :param bias: (fan_out,) vector
    :param activation: activation_kind, or SOFTMAX for a classifier output layer
    """

    def __init__(self, weights, bias, activation):
        self.weights = la.as_matrix(weights, "weights")
        self.bias = la.as_vector(bias, "bias")
        if self.bias.shape[0] != self.weights.shape[0]:
            raise e.ShapeError("bias does not match weights", self.weights.shape, self.bias.shape)
        if activation != SOFTMAX and not isinstance(activation, act.activation_kind):
            activation = act.activation_kind.parse(activation)
        self.activation = activation

    @property
    def fan_in(self):
        return self.weights.shape[1]

    @property
    def fan_out(self):
        return self.weights.shape[0]

    @property
    def tag(self):
        if self.activation == SOFTMAX:
            return SOFTMAX
        return self.activation.tag

class network:
    """Fully connected multi-layer perceptron

    Activation levels are numbered from the input: level 0 is the input,
    level l (l >= 1) is the output of layers[l - 1]. The last level is the
    network output.
    """

    def __init__(self, layers, loss):
        if len(layers) == 0:
            raise e.ConfigError("a network needs at least one layer")
        if loss not in LOSSES:
            raise e.ConfigError(f"unknown loss '{loss}'")
        for i in range(1, len(layers)):
            if layers[i].fan_in != layers[i - 1].fan_out:
                raise e.ShapeError(
                    f"layer {i} does not chain with layer {i - 1}",
                    layers[i - 1].weights.shape, layers[i].weights.shape
                )
        for i, l in enumerate(layers[:-1]):
            if l.activation == SOFTMAX:
                raise e.ConfigError(f"softmax is only allowed on the output layer, not layer {i}")
        last = layers[-1].activation
        if (loss == CROSS_ENTROPY) != (last == SOFTMAX):
            raise e.ConfigError(f"output activation '{layers[-1].tag}' does not match loss '{loss}'")
        self.layers = layers
        self.loss = loss

    @property
    def sizes(self):
        return [self.layers[0].fan_in] + [l.fan_out for l in self.layers]

    @property
    def hidden_levels(self):
        """Levels holding hidden units, i.e. every level but the input and the output"""
        return list(range(1, len(self.layers)))

    def parameter_count(self):
        return sum(l.weights.size + l.bias.size for l in self.layers)

    def copy(self):
        return network(
            [layer(l.weights.copy(), l.bias.copy(), l.activation) for l in self.layers],
            self.loss,
        )

    def __str__(self):
        txt = pu.color_title("network {")
        txt += "\n{:16} = ".format("sizes")
        txt += pu.color_value("-".join(str(s) for s in self.sizes))
        txt += "\n{:16} = ".format("loss")
        txt += pu.color_value(self.loss)
        txt += "\n{:16} = ".format("parameters")
        txt += pu.color_value(self.parameter_count())
        for i, l in enumerate(self.layers):
            txt += "\n{:16} = ".format(f"layers[{i}]")
            txt += pu.color_value(
                f"{l.fan_in}->{l.fan_out} {l.tag} "
                f"(w mean {l.weights.mean():+.4f}, std {l.weights.std():.4f})"
            )
        txt += "\n}"
        return txt

class unit_ref:
    """One unit: its activation level (>= 1) and its index within that level"""

    def __init__(self, level, index):
        self.level = int(level)
        self.index = int(index)

    @staticmethod
    def parse(text):
        """Parse "level:index" """
        try:
            level, index = text.split(":")
            return unit_ref(int(level), int(index))
        except ValueError:
            raise e.ConfigError(f"invalid unit '{text}', expected level:index")

    def check(self, net):
        if not 1 <= self.level <= len(net.layers):
            raise IndexError(f"unit level {self.level} outside 1..{len(net.layers)}")
        if not 0 <= self.index < net.layers[self.level - 1].fan_out:
            raise IndexError(f"unit index {self.index} outside level {self.level}")

    def __str__(self):
        return f"{self.level}:{self.index}"

class forward_trace:
    """Per-layer net inputs and activations of one batch

    net_inputs[i] and activations[i] belong to layers[i], i.e. to level i + 1
    """

    def __init__(self, inputs, net_inputs, activations):
        self.inputs = inputs
        self.net_inputs = net_inputs
        self.activations = activations

    @property
    def output(self):
        return self.activations[-1]

    def level(self, level):
        """Activation matrix (batch x units) of a level, level 0 being the inputs"""
        if level == 0:
            return self.inputs
        return self.activations[level - 1]

class gradients:
    def __init__(self, d_weights, d_bias):
        self.d_weights = d_weights
        self.d_bias = d_bias

    def unit(self, ref):
        """(g, g0): gradient w.r.t. the incoming weights and the bias of one unit"""
        i = ref.level - 1
        return self.d_weights[i][ref.index].copy(), float(self.d_bias[i][ref.index])

def init_he(layer_sizes, activations, seed, loss=CROSS_ENTROPY):
    """Build a network with He-initialized weights and zero biases

    :param layer_sizes: [inputs, hidden..., outputs]
    :param activations: one activation_kind per hidden layer (or a single one
                        used for all of them); the output layer follows the loss
    :param seed: same seed, same weights (bit-identical)
    """
    if len(layer_sizes) < 2:
        raise e.ConfigError(f"need at least 2 layer sizes, got {list(layer_sizes)}")
    if any(int(s) < 1 for s in layer_sizes):
        raise e.ConfigError(f"layer sizes must be positive: {list(layer_sizes)}")
    hidden = len(layer_sizes) - 2
    if isinstance(activations, act.activation_kind):
        activations = [activations] * hidden
    if len(activations) != hidden:
        raise e.ConfigError(f"{hidden} hidden layers but {len(activations)} activations")

    rng = la.seeded_rng(seed)
    output = SOFTMAX if loss == CROSS_ENTROPY else act.activation_kind(LINEAR)
    layers = []
    for i in range(len(layer_sizes) - 1):
        fan_in, fan_out = int(layer_sizes[i]), int(layer_sizes[i + 1])
        w = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(fan_out, fan_in))
        kind = activations[i] if i < hidden else output
        layers.append(layer(w, np.zeros(fan_out), kind))
    log.debug(f"network.init_he({list(layer_sizes)}, seed={seed})")
    return network(layers, loss)

def softmax(z):
    z = z - np.max(z, axis=1, keepdims=True)
    ez = np.exp(z)
    return ez / np.sum(ez, axis=1, keepdims=True)

def log_softmax(z):
    z = z - np.max(z, axis=1, keepdims=True)
    return z - np.log(np.sum(np.exp(z), axis=1, keepdims=True))

def _activate(l, z):
    if l.activation == SOFTMAX:
        return softmax(z)
    return act.forward(l.activation, z)

def forward(net, inputs):
    """Forward pass keeping every layer's net inputs and activations

    :param inputs: (batch, fan_in of the first layer) matrix
    :raises DivergenceError: a net input overflowed (weights blown up by training)
    """
    inputs = la.as_matrix(inputs, "inputs")
    if inputs.shape[1] != net.layers[0].fan_in:
        raise e.ShapeError("inputs do not match the first layer", inputs.shape, net.layers[0].weights.shape)
    net_inputs = []
    activations = []
    a = inputs
    for i, l in enumerate(net.layers):
        z = a @ l.weights.T + l.bias
        if not np.all(np.isfinite(z)):
            raise e.DivergenceError(i, what="net input")
        a = _activate(l, z)
        net_inputs.append(z)
        activations.append(a)
    return forward_trace(inputs, net_inputs, activations)

def _check_targets(trace, targets):
    targets = la.as_matrix(targets, "targets")
    if targets.shape != trace.output.shape:
        raise e.ShapeError("targets do not match the network output", trace.output.shape, targets.shape)
    return targets

def loss_value(net, trace, targets):
    """Mean loss over the batch

    cross-entropy: -mean_n sum_k t_nk ln softmax_nk
    mse: mean over examples and output dimensions of (out - t)^2
    """
    targets = _check_targets(trace, targets)
    if net.loss == CROSS_ENTROPY:
        return float(-np.mean(np.sum(targets * log_softmax(trace.net_inputs[-1]), axis=1)))
    return float(np.mean((trace.output - targets) ** 2))

def _backward(net, trace, delta, stop):
    """Push an output-layer delta down to layer index `stop`

    :return: dict layer index -> delta (batch x units) for every layer >= stop
    """
    deltas = {len(net.layers) - 1: delta}
    for i in range(len(net.layers) - 1, stop, -1):
        l = net.layers[i - 1]
        delta = (delta @ net.layers[i].weights) * act.derivative(l.activation, trace.net_inputs[i - 1])
        deltas[i - 1] = delta
    return deltas

def output_delta(net, trace, targets):
    """Derivative of the mean batch loss w.r.t. the output layer's net inputs"""
    batch = trace.output.shape[0]
    if net.loss == CROSS_ENTROPY:
        return (trace.output - targets) / batch
    return 2.0 * (trace.output - targets) / trace.output.size

def backprop_loss(net, trace, targets):
    """Exact gradient of the mean batch loss w.r.t. every weight and bias"""
    targets = _check_targets(trace, targets)
    deltas = _backward(net, trace, output_delta(net, trace, targets), 0)
    d_weights = []
    d_bias = []
    for i in range(len(net.layers)):
        d_weights.append(deltas[i].T @ trace.level(i))
        d_bias.append(deltas[i].sum(axis=0))
    return gradients(d_weights, d_bias)

def backprop_logprob_delta(net, trace, labels, unit):
    """Per-example derivative of ln p(y | z; w) w.r.t. one unit's net input

    This is the log-output probability, not the loss: at the output layer
    delta_i = 1{y = i} - softmax_i.

    :param labels: class index per example (observed or sampled)
    :param unit: unit_ref
    :return: vector (batch,)
    """
    if net.loss != CROSS_ENTROPY:
        raise e.ConfigError("log-probability deltas need a softmax cross-entropy network")
    unit.check(net)
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (trace.output.shape[0],):
        raise e.ShapeError("one label per example expected", trace.output.shape, labels.shape)
    top = -trace.output.copy()
    top[np.arange(labels.shape[0]), labels] += 1.0
    deltas = _backward(net, trace, top, unit.level - 1)
    return deltas[unit.level - 1][:, unit.index].copy()
