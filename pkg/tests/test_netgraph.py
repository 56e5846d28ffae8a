import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nnspeech.errors import DigestMismatchError, GraphBuildError, GraphRuntimeError, ModelFileError
from nnspeech.netgraph.graph import backward, build_graph, forward, run_sequence
from nnspeech.netgraph.loss import weighted_euclidean
from nnspeech.netgraph.modelio import dumps_model, loads_model
from nnspeech.netgraph.normalize import TargetNormalizer, variance_weights
from nnspeech.netgraph.quantize import dequantize, quantize
from nnspeech.netgraph.saliency import tap_saliency
from nnspeech.netgraph.topology import parse_topology
from nnspeech.netgraph.train import Sequence, TrainingSchedule, train
from nnspeech.netgraph.quantize import BLOCK_HEADER, quantize_array
from nnspeech.netgraph.saliency import tap_ranges
from nnspeech.netgraph.topology import GraphSpec
from randgraph import built, gradient_check, random_data, random_spec


def linear_spec(n_in=4, n_out=2, seed=0, activation="linear"):
    g = GraphSpec(seed=seed)
    g.add("x", "input", width=n_in).add("d", "dense", inputs=n_in, width=n_out, activation=activation)
    g.add("y", "output", width=n_out)
    return g.connect("x", "d").connect("d", "y")


def test_single_layer_contract(rng):
    graph = build_graph(linear_spec())
    x = rng.normal(size=4)
    out, _ = forward(graph, {"x": x})
    d = graph.blocks["d"]
    assert np.allclose(out["y"][0], d.weights @ x + d.bias)


def test_width_mismatch_names_edge():
    g = GraphSpec()
    g.add("x", "input", width=4).add("d", "dense", inputs=3, width=2).add("y", "output", width=2)
    g.connect("x", "d").connect("d", "y")
    with pytest.raises(GraphBuildError, match="x -> d"):
        build_graph(g)


def test_cycle_without_recurrent_mark():
    g = GraphSpec()
    g.add("x", "input", width=2).add("c", "concat").add("d", "dense", inputs=4, width=2)
    g.add("y", "output", width=2)
    g.connect("x", "c").connect("d", "c").connect("c", "d").connect("d", "y")
    with pytest.raises(GraphBuildError, match="cycle"):
        build_graph(g)


def test_dangling_port_and_recurrent_rule():
    g = GraphSpec()
    g.add("x", "input", width=2).add("d", "dense", inputs=2, width=2).add("y", "output", width=2)
    g.connect("d", "y")
    with pytest.raises(GraphBuildError, match="dangling"):
        build_graph(g)
    g = linear_spec(2, 2)
    g.add("r", "recurrent_buffer", width=2).connect("y", "r")
    with pytest.raises(GraphBuildError, match="recurrent"):
        build_graph(g)


def test_deterministic_init():
    a, b = build_graph(linear_spec(seed=3)), build_graph(linear_spec(seed=3))
    assert np.array_equal(a.flat, b.flat)
    bound = 1 / np.sqrt(4)
    assert np.all(np.abs(a.flat) <= bound)


def test_zero_weights_sigmoid_half():
    graph = build_graph(linear_spec(activation="sigmoid"))
    graph.flat[:] = 0
    out, _ = forward(graph, {"x": np.ones(4)})
    assert np.all(out["y"] == 0.5)


def test_missing_input():
    graph = build_graph(linear_spec())
    with pytest.raises(GraphRuntimeError):
        forward(graph, {})


def test_delay_line_shift():
    g = GraphSpec()
    g.add("x", "input", width=1).add("dl", "delay_line", width=1, depth=3)
    g.add("y", "output", width=3, loss=False)
    graph = build_graph(g.connect("x", "dl").connect("dl", "y"))
    outs, _ = run_sequence(graph, {"x": np.array([[1.0], [2.0], [3.0]])})
    assert outs["y"][2].tolist() == [1.0, 2.0, 3.0]


def test_recurrent_buffer_one_step_delay():
    g = GraphSpec()
    g.add("x", "input", width=1).add("r", "recurrent_buffer", width=1)
    g.add("c", "concat").add("y", "output", width=2, loss=False)
    g.connect("x", "c").connect("r", "c").connect("c", "y").connect("x", "r", recurrent=True)
    graph = build_graph(g)
    outs, _ = run_sequence(graph, {"x": np.array([[5.0], [7.0], [9.0]])})
    assert outs["y"][:, 1].tolist() == [0.0, 5.0, 7.0]


def test_sequence_equals_chained_steps(rng):
    for seed in range(5):
        graph = built(seed)
        inputs, _, _ = random_data(graph, rng, steps=6)
        outs, _ = run_sequence(graph, inputs)
        state = graph.zero_state(1)
        for t in range(6):
            preds, state = forward(graph, {k: v[t:t + 1] for k, v in inputs.items()}, state)
            assert np.array_equal(preds[graph.loss_output][0], outs[graph.loss_output][t])


def test_weighted_euclidean_examples():
    assert weighted_euclidean([1, 2], [1, 2], [1, 1]) == 0
    assert weighted_euclidean([1, 0], [0, 0], [2, 1]) == 2
    y, t = np.array([0.3, -1.0, 2.0]), np.array([1.0, 1.0, 1.0])
    assert weighted_euclidean(y, t, np.ones(3)) == pytest.approx(np.sum((y - t) ** 2))
    with pytest.raises(ValueError):
        weighted_euclidean([1, 2], [1], [1, 1])


@given(st.lists(st.floats(-10, 10), min_size=1, max_size=8), st.data())
def test_loss_nonnegative_zero_iff_equal(y, data):
    n = len(y)
    t = data.draw(st.lists(st.floats(-10, 10), min_size=n, max_size=n))
    w = data.draw(st.lists(st.floats(0.01, 5), min_size=n, max_size=n))
    loss = weighted_euclidean(y, t, w)
    assert loss >= 0
    assert (loss == 0) == (y == t) or loss < 1e-300


def test_linear_gradient_closed_form():
    g = GraphSpec()
    g.add("x", "input", width=1).add("d", "dense", inputs=1, width=1, activation="linear")
    g.add("y", "output", width=1).connect("x", "d").connect("d", "y")
    graph = build_graph(g)
    graph.flat[:] = [0.7, 0.0]
    x, t = 1.5, 2.0
    _, grads = backward(graph, {"x": np.array([[x]])}, np.array([[t]]), np.ones(1))
    assert grads[("d", "weights")][0, 0] == pytest.approx(2 * x * (0.7 * x - t))


def test_gradients_match_finite_differences(rng):
    for seed in range(10):
        graph = built(seed)
        inputs, targets, w = random_data(graph, rng)
        _, grads = backward(graph, inputs, targets, w)
        assert gradient_check(graph, inputs, targets, w, grads) < 1e-4


def test_zero_weight_dimension_is_ignored(rng):
    g = linear_spec(3, 2, activation="sigmoid")
    graph = build_graph(g)
    x = rng.normal(size=(3, 3))
    t = rng.normal(size=(3, 2))
    w = np.array([1.0, 0.0])
    _, g1 = backward(graph, {"x": x}, t, w)
    g1 = {k: v.copy() for k, v in g1.items()}
    t2 = t.copy()
    t2[:, 1] += 5.0
    _, g2 = backward(graph, {"x": x}, t2, w)
    for k in g1:
        assert np.array_equal(g1[k], g2[k])


def _linear_dataset(rng):
    x = rng.normal(size=(1, 4))
    return [Sequence({"x": x}, rng.normal(size=(1, 2)))]


def test_train_lr_zero_is_null(rng):
    graph = build_graph(linear_spec())
    before = graph.flat.copy()
    train(graph, _linear_dataset(rng), TrainingSchedule(epochs=5, lr0=0.0))
    assert np.array_equal(graph.flat, before)


def test_train_single_pair_converges(rng):
    graph = build_graph(linear_spec())
    res = train(graph, _linear_dataset(rng),
                TrainingSchedule(epochs=500, lr0=0.05, lr_decay=1.0, momentum0=0.5, momentum_decay=1.0))
    assert res.history[-1] < 1e-10


def test_train_deterministic_and_alternating(rng):
    data = [Sequence({"x": rng.normal(size=(5, 3))}, rng.normal(size=(5, 2))) for _ in range(3)]
    spec = random_spec(4)
    g = GraphSpec(seed=1)
    g.add("x", "input", width=3).add("d", "dense", inputs=3, width=2).add("y", "output", width=2)
    g.connect("x", "d").connect("d", "y")
    sched = TrainingSchedule(epochs=6, seed=5)
    a = train(build_graph(g), data, sched)
    b = train(build_graph(g), data, sched)
    assert a.history == b.history
    assert a.modes == ["sequential", "random"] * 3
    assert np.array_equal(a.graph.flat, b.graph.flat)
    del spec


def test_train_empty_dataset():
    with pytest.raises(GraphRuntimeError):
        train(build_graph(linear_spec()), [])


@given(st.floats(0.01, 1.0), st.floats(0.5, 0.999), st.integers(0, 50))
def test_schedule_decreasing(lr0, decay, e):
    s = TrainingSchedule(lr0=lr0, lr_decay=decay, momentum0=0.5, momentum_decay=decay)
    assert s.lr(e + 1) < s.lr(e)
    assert s.momentum(e + 1) < s.momentum(e)


def test_schedule_mode_mix_validation():
    with pytest.raises(ValueError):
        TrainingSchedule(mode_mix=1.5)
    s = TrainingSchedule(epochs=10, mode_mix=0.3)
    assert sum(s.is_sequential(e) for e in range(10)) == 3


def test_quantize_grid_exact_and_constant():
    graph = build_graph(linear_spec())
    # scale 0.01, zero point 100: codes 0 and 255 present so the range is exactly 2.55
    codes = np.array([0, 255, 3, 17, 100, 101, 250, 42, 99, 7])
    grid = 0.01 * (codes - 100)
    graph.flat[:] = grid
    back = dequantize(quantize(graph), graph.spec)
    assert np.allclose(back.flat, graph.flat, atol=1e-12)
    graph.flat[:] = 0.37
    q = quantize(graph)
    assert q.blocks[0].scale == 0.0
    assert np.array_equal(dequantize(q, graph.spec).flat, graph.flat)


@given(st.lists(st.floats(-100, 100), min_size=1, max_size=300))
def test_quantize_array_codes(values):
    scale, zp, const, codes = quantize_array(values)
    assert codes.dtype == np.uint8
    if scale > 0:
        err = np.abs(scale * (codes.astype(int) - zp) - np.asarray(values))
        assert err.max() <= scale  # half a step plus zero-point rounding


def test_quantize_size_law():
    for seed in range(5):
        graph = built(seed)
        q = quantize(graph)
        expected = sum(b.width * b.in_width + b.width + BLOCK_HEADER.size for b in graph.dense_blocks())
        assert q.nbytes() == expected == len(q.pack())


def test_quantized_forward_fidelity(rng):
    for seed in range(5):
        graph = built(seed)
        qgraph = dequantize(quantize(graph), graph.spec)
        inputs = {n: rng.normal(size=(200, w)) for n, w in graph.input_widths().items()}
        a, _ = forward(graph, inputs)
        b, _ = forward(qgraph, inputs)
        ya, yb = a[graph.loss_output], b[graph.loss_output]
        assert np.sqrt(np.mean((ya - yb) ** 2)) / np.sqrt(np.mean(ya ** 2)) < 0.02


def test_model_file_round_trip(tmp_path):
    graph = built(2)
    data = dumps_model(graph, {"note": 1})
    m = loads_model(data)
    assert m.meta == {"note": 1} and m.quantized is None
    assert np.allclose(m.graph.flat, graph.flat.astype(np.float32))
    q = loads_model(dumps_model(graph, quantized=True))
    assert q.quantized is not None
    assert dumps_model(q.graph, quantized=True, qweights=q.quantized) == dumps_model(graph, quantized=True)


def test_model_file_digest_mismatch():
    data = bytearray(dumps_model(built(2)))
    data[6] ^= 0xFF
    with pytest.raises(DigestMismatchError):
        loads_model(bytes(data))
    with pytest.raises(ModelFileError):
        loads_model(b"JUNK" + bytes(data[4:]))


def test_topology_ini_round_trip():
    spec = random_spec(7)
    again = parse_topology(spec.to_ini())
    assert again.digest() == spec.digest()


def _tap_graph(n_taps=3, width=2, seed=0):
    g = GraphSpec(seed=seed)
    g.add("x", "input", width=n_taps * width)
    g.add("h", "dense", inputs=n_taps * width, width=4)
    g.add("o", "dense", inputs=4, width=1, activation="linear").add("y", "output", width=1)
    return g.connect("x", "h").connect("h", "o").connect("o", "y")


def test_saliency_dead_tap(rng):
    graph = build_graph(_tap_graph())
    graph.blocks["h"].weights[:, 2:4] = 0.0
    data = [Sequence({"x": rng.normal(size=(10, 6))}, rng.normal(size=(10, 1)))]
    scores = tap_saliency(graph, data, tap_ranges(3, 2, "x"))
    assert scores[1] == 0.0 and scores.sum() == pytest.approx(1.0)


def test_saliency_symmetry(rng):
    graph = build_graph(_tap_graph())
    w = graph.blocks["h"].weights
    w[:, 4:6] = w[:, 0:2]
    x = rng.normal(size=(10, 6))
    mirrored = x.copy()
    mirrored[:, 0:2], mirrored[:, 4:6] = x[:, 4:6], x[:, 0:2]
    t = rng.normal(size=(10, 1))
    data = [Sequence({"x": x}, t), Sequence({"x": mirrored}, t)]
    scores = tap_saliency(graph, data, tap_ranges(3, 2, "x"))
    assert abs(scores[0] - scores[2]) < 1e-6


def test_saliency_center_tap_task(rng):
    graph = build_graph(_tap_graph(width=1, seed=3))
    x = rng.uniform(-1, 1, size=(200, 3))
    t = 0.8 * x[:, 1:2]
    data = [Sequence({"x": x}, t)]
    train(graph, data, TrainingSchedule(epochs=40, lr0=0.1, mode_mix=0.0))
    scores = tap_saliency(graph, data, tap_ranges(3, 1, "x"))
    assert scores[1] > scores[0] and scores[1] > scores[2]


def test_saliency_layout_mismatch():
    graph = build_graph(_tap_graph())
    with pytest.raises(GraphRuntimeError):
        tap_saliency(graph, [], tap_ranges(4, 2, "x"))


def test_normalizer_and_weights(rng):
    t = rng.normal(size=(50, 3))
    t[:, 2] = 4.0
    norm = TargetNormalizer.fit(t)
    y = norm.forward(t)
    assert np.allclose(y[:, :2].min(0), 0.1) and np.allclose(y[:, :2].max(0), 0.9)
    assert np.all(y[:, 2] == 0.5)
    assert np.allclose(norm.inverse(y), t)
    w = variance_weights(y)
    assert w.mean() == pytest.approx(1.0)
