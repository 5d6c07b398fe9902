import csv
import logging

import numpy as np

from elulab.nn import errors as e
from elulab.nn import network as nw
from elulab.nn import optimizer as op

log = logging.getLogger("elulab")
log.trace("diagnostics.py")

SUMMARY_HEADER = ["epoch", "median_of_medians", "mean_of_means"]
VARIANCE_HEADER = ["layer", "unit", "variance_of_median", "variance_of_changes"]

class activation_trace:
    """Per-epoch median (and mean) activation of every hidden unit

    Columns are the hidden units of all hidden levels, level by level;
    layer_offsets[i] is the first column of levels[i], with a final entry
    equal to the column count.
    """

    def __init__(self, levels, widths):
        self.levels = list(levels)
        self.layer_offsets = [0]
        for w in widths:
            self.layer_offsets.append(self.layer_offsets[-1] + int(w))
        self.epochs = []
        self.medians = []
        self.means = []

    @staticmethod
    def for_network(net):
        levels = net.hidden_levels
        return activation_trace(levels, [net.layers[l - 1].fan_out for l in levels])

    @property
    def units(self):
        return self.layer_offsets[-1]

    @property
    def per_unit_medians(self):
        """(epochs x units) matrix"""
        return np.array(self.medians, dtype=np.float64).reshape(len(self.medians), self.units)

    @property
    def per_unit_means(self):
        return np.array(self.means, dtype=np.float64).reshape(len(self.means), self.units)

    def unit_names(self):
        names = []
        for i, level in enumerate(self.levels):
            width = self.layer_offsets[i + 1] - self.layer_offsets[i]
            names += [f"u{level}_{j}" for j in range(width)]
        return names

    def append(self, epoch, medians, means=None):
        medians = np.asarray(medians, dtype=np.float64)
        if medians.shape != (self.units,):
            raise e.ShapeError("medians do not match the trace", (self.units,), medians.shape)
        if not np.all(np.isfinite(medians)):
            raise e.DomainError(f"non-finite median activation at epoch {epoch}")
        self.epochs.append(epoch)
        self.medians.append(medians)
        self.means.append(medians if means is None else np.asarray(means, dtype=np.float64))

    def rows(self):
        """Trace CSV: header then one row per epoch, values written with repr() so they read back exactly"""
        yield ["epoch"] + self.unit_names()
        for epoch, medians in zip(self.epochs, self.medians):
            yield [str(epoch)] + [repr(float(v)) for v in medians]

class median_variance_summary:
    """Per hidden level, the variance over epochs of every unit's median

    per_layer: list of (level, variances) with the (n-1) denominator
    per_layer_changes: same for the epoch-to-epoch changes of the medians
                       (None with fewer than 3 epochs)
    """

    def __init__(self, per_layer, per_layer_changes):
        self.per_layer = per_layer
        self.per_layer_changes = per_layer_changes

    def layer_means(self):
        return [(level, float(np.mean(v))) for level, v in self.per_layer]

    def rows(self):
        yield list(VARIANCE_HEADER)
        changes = dict(self.per_layer_changes) if self.per_layer_changes else {}
        for level, variances in self.per_layer:
            for j, v in enumerate(variances):
                c = changes.get(level)
                yield [str(level), str(j), repr(float(v)), "" if c is None else repr(float(c[j]))]

def _check_probe(probe):
    if len(probe) == 0:
        raise e.ConfigError("the probe set is empty")

def hidden_activations(net, probe):
    """(examples x hidden units) activations of all hidden levels side by side"""
    _check_probe(probe)
    trace = nw.forward(net, probe.inputs)
    if not net.hidden_levels:
        return np.zeros((len(probe), 0))
    return np.hstack([trace.level(l) for l in net.hidden_levels])

def unit_medians(net, probe):
    """Median activation of every hidden unit over the probe examples

    An even number of examples gives the mean of the two middle values.
    """
    return np.median(hidden_activations(net, probe), axis=0)

def unit_means(net, probe):
    return np.mean(hidden_activations(net, probe), axis=0)

def trace_summary(trace):
    """Per epoch, the median across units of the per-unit medians"""
    if not trace.epochs:
        raise e.ConfigError("the activation trace is empty")
    return np.median(trace.per_unit_medians, axis=1)

def trace_mean_of_means(trace):
    if not trace.epochs:
        raise e.ConfigError("the activation trace is empty")
    return np.mean(trace.per_unit_means, axis=1)

def summary_rows(trace):
    yield list(SUMMARY_HEADER)
    for epoch, median, mean in zip(trace.epochs, trace_summary(trace), trace_mean_of_means(trace)):
        yield [str(epoch), repr(float(median)), repr(float(mean))]

def median_variance(trace):
    """Variance across epochs of each unit's median, grouped per hidden level"""
    if len(trace.epochs) < 2:
        raise e.ConfigError(f"need at least 2 recorded epochs, got {len(trace.epochs)}")
    medians = trace.per_unit_medians
    changes = np.diff(medians, axis=0)
    per_layer = []
    per_layer_changes = [] if changes.shape[0] >= 2 else None
    for i, level in enumerate(trace.levels):
        cols = slice(trace.layer_offsets[i], trace.layer_offsets[i + 1])
        per_layer.append((level, np.var(medians[:, cols], axis=0, ddof=1)))
        if per_layer_changes is not None:
            per_layer_changes.append((level, np.var(changes[:, cols], axis=0, ddof=1)))
    return median_variance_summary(per_layer, per_layer_changes)

def reconstruction_error(net, data):
    """Mean over examples and dimensions of (output - input)^2"""
    if net.layers[-1].fan_out != data.dims:
        raise e.ShapeError("network output does not match its input", data.inputs.shape,
                           net.layers[-1].weights.shape)
    if len(data) == 0:
        raise e.ConfigError(f"{data.name} is empty")
    total = 0.0
    for start in range(0, len(data), op.EVAL_CHUNK):
        chunk = data.inputs[start:start + op.EVAL_CHUNK]
        out = nw.forward(net, chunk).output
        total += float(np.sum((out - chunk) ** 2))
    return total / data.inputs.size

def read_trace_csv(path):
    """Read back a trace CSV written from activation_trace.rows()"""
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        rows = list(reader)
    levels = []
    widths = []
    for name in header[1:]:
        level = int(name[1:].split("_")[0])
        if not levels or levels[-1] != level:
            levels.append(level)
            widths.append(0)
        widths[-1] += 1
    trace = activation_trace(levels, widths)
    for row in rows:
        trace.append(int(row[0]), [float(v) for v in row[1:]])
    return trace

class median_tracker:
    """Training hook: record per-unit medians and means on a fixed probe set
    after every epoch and report the median of medians in the epoch metrics
    """

    def __init__(self, net, probe):
        _check_probe(probe)
        self.probe = probe
        self.trace = activation_trace.for_network(net)

    def record(self, epoch, net):
        acts = hidden_activations(net, self.probe)
        self.trace.append(epoch, np.median(acts, axis=0), np.mean(acts, axis=0))

    def __call__(self, epoch, net, metrics):
        self.record(epoch, net)
        metrics.median_activation = float(np.median(self.trace.medians[-1]))
