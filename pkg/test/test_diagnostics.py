import numpy as np
import pytest

from elulab.frontend import artifacts as ar
from elulab.nn import activations as act
from elulab.nn import data as dt
from elulab.nn import diagnostics as dg
from elulab.nn import errors as e
from elulab.nn import network as nw
from elulab.nn import optimizer as op

def trace_of(rows, levels=(1,), widths=None):
    rows = np.asarray(rows, dtype=np.float64)
    trace = dg.activation_trace(levels, widths or [rows.shape[1]])
    for epoch, r in enumerate(rows, 1):
        trace.append(epoch, r)
    return trace

def identity_autoencoder(d):
    layer = nw.layer(np.eye(d), np.zeros(d), "linear")
    return nw.network([layer], nw.MSE)

class TestMedians:

    def test_odd_count(self):
        net = nw.network([nw.layer([[1.0]], [0.0], "elu"), nw.layer([[1.0], [-1.0]], [0.0, 0.0], nw.SOFTMAX)],
                         nw.CROSS_ENTROPY)
        probe = dt.dataset([[1.0], [2.0], [3.0]])
        np.testing.assert_array_equal(dg.unit_medians(net, probe), [2.0])

    def test_even_count_averages_middle_values(self):
        net = nw.network([nw.layer([[1.0]], [0.0], "elu"), nw.layer([[1.0], [-1.0]], [0.0, 0.0], nw.SOFTMAX)],
                         nw.CROSS_ENTROPY)
        probe = dt.dataset([[1.0], [2.0], [3.0], [4.0]])
        np.testing.assert_array_equal(dg.unit_medians(net, probe), [2.5])

    def test_permutation_invariant(self, rng):
        net = nw.init_he([5, 8, 6, 2], act.activation_kind("elu"), seed=2)
        inputs = rng.normal(size=(41, 5))
        shuffled = inputs[rng.permutation(41)]
        np.testing.assert_array_equal(dg.unit_medians(net, dt.dataset(inputs)),
                                      dg.unit_medians(net, dt.dataset(shuffled)))

    def test_empty_probe(self):
        net = nw.init_he([3, 4, 2], act.activation_kind("elu"), seed=0)
        with pytest.raises(e.ConfigError):
            dg.unit_medians(net, dt.dataset(np.zeros((0, 3))))

    def test_relu_medians_are_non_negative(self, rng):
        net = nw.init_he([5, 8, 8, 2], act.activation_kind("relu"), seed=1)
        probe = dt.dataset(rng.normal(size=(64, 5)))
        assert np.all(dg.unit_medians(net, probe) >= 0.0)

    def test_one_column_per_hidden_unit(self, rng):
        net = nw.init_he([5, 8, 6, 2], act.activation_kind("elu"), seed=1)
        probe = dt.dataset(rng.normal(size=(10, 5)))
        assert dg.unit_medians(net, probe).shape == (14,)
        assert dg.unit_means(net, probe).shape == (14,)

class TestTrace:

    def test_summary(self):
        trace = trace_of([[1.0, 2.0, 3.0], [0.0, -1.0, 5.0]])
        np.testing.assert_array_equal(dg.trace_summary(trace), [2.0, 0.0])

    def test_empty_summary(self):
        with pytest.raises(e.ConfigError):
            dg.trace_summary(dg.activation_trace([1], [2]))

    def test_wrong_width(self):
        trace = dg.activation_trace([1, 2], [2, 3])
        with pytest.raises(e.ShapeError):
            trace.append(1, [0.0, 0.0])

    def test_non_finite_median(self):
        with pytest.raises(e.DomainError):
            trace_of([[np.nan]])

    def test_unit_names(self):
        trace = dg.activation_trace([1, 2], [2, 1])
        assert trace.unit_names() == ["u1_0", "u1_1", "u2_0"]

    def test_csv_reads_back_exactly(self, tmp_path, rng):
        trace = trace_of(rng.normal(size=(4, 5)), levels=(1, 2), widths=[3, 2])
        path = tmp_path / "trace.csv"
        ar.write_csv(path, trace.rows())
        back = dg.read_trace_csv(path)
        assert back.levels == [1, 2]
        assert back.epochs == trace.epochs
        assert back.per_unit_medians.tobytes() == trace.per_unit_medians.tobytes()

    def test_summary_rows(self):
        rows = list(dg.summary_rows(trace_of([[1.0, 3.0]])))
        assert rows[0] == dg.SUMMARY_HEADER
        assert rows[1] == ["1", "2.0", "2.0"]

class TestMedianVariance:

    def test_two_epochs(self):
        summary = dg.median_variance(trace_of([[0.0], [2.0]]))
        (level, variances), = summary.per_layer
        assert level == 1
        assert variances[0] == 2.0
        assert summary.per_layer_changes is None

    def test_changes(self):
        summary = dg.median_variance(trace_of([[0.0], [1.0], [3.0]]))
        (_, changes), = summary.per_layer_changes
        # changes are 1 and 2
        assert changes[0] == 0.5

    def test_needs_two_epochs(self):
        with pytest.raises(e.ConfigError):
            dg.median_variance(trace_of([[1.0]]))

    def test_grouped_per_level(self):
        trace = trace_of([[0.0, 0.0, 1.0], [0.0, 2.0, 1.0]], levels=(1, 2), widths=[2, 1])
        summary = dg.median_variance(trace)
        assert summary.layer_means() == [(1, 1.0), (2, 0.0)]

    def test_rows(self):
        rows = list(dg.median_variance(trace_of([[0.0], [2.0]])).rows())
        assert rows == [dg.VARIANCE_HEADER, ["1", "0", "2.0", ""]]

class TestTracker:

    def test_fills_metrics(self, rng):
        data = dt.synthetic_two_gaussians(40, 3, 2.0, seed=0)
        net = nw.init_he([3, 4, 4, 2], act.activation_kind("elu"), seed=0)
        tracker = dg.median_tracker(net, dt.subset(data, 16))
        _, history = op.train(net, data, None, op.train_config(epochs=3, batch_size=8), hooks=[tracker])
        assert tracker.trace.epochs == [1, 2, 3]
        assert tracker.trace.per_unit_medians.shape == (3, 8)
        for m, medians in zip(history, tracker.trace.medians):
            assert m.median_activation == float(np.median(medians))

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
    def test_elu_summary_stays_above_saturation(self, alpha):
        kind = act.activation_kind("elu", alpha)
        data = dt.synthetic_two_gaussians(64, 4, 2.0, seed=1)
        net = nw.init_he([4, 8, 8, 8, 2], kind, seed=1)
        tracker = dg.median_tracker(net, dt.subset(data, 32))
        op.train(net, data, None, op.train_config(learning_rate=0.05, epochs=5, batch_size=8), hooks=[tracker])
        summary = dg.trace_summary(tracker.trace)
        assert len(summary) == 5
        assert np.all(np.asarray(summary) > act.saturation_limit(kind))

class TestReconstruction:

    def test_identity_network(self, rng):
        data = dt.dataset(rng.uniform(size=(20, 6)))
        assert dg.reconstruction_error(identity_autoencoder(6), data) == 0.0

    def test_known_error(self):
        net = nw.network([nw.layer(np.zeros((2, 2)), [0.5, 0.5], "linear")], nw.MSE)
        assert dg.reconstruction_error(net, dt.dataset([[0.0, 1.0], [1.0, 0.0]])) == 0.25

    def test_shape_mismatch(self):
        with pytest.raises(e.ShapeError):
            dg.reconstruction_error(identity_autoencoder(3), dt.dataset(np.zeros((2, 4))))
