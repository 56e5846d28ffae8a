"""Random block-graph topologies for gradient and quantization checks."""

import numpy as np

from nnspeech.netgraph.graph import build_graph, sequence_loss
from nnspeech.netgraph.topology import GraphSpec

FUNCTIONS = ("identity", "tanh", "sigmoid", "bipolar")


def random_spec(seed):
    """Input(s) -> [delay line] -> concat(+ recurrent feedback) -> dense stack -> output."""
    rng = np.random.default_rng(seed)
    g = GraphSpec(seed=seed)
    a = int(rng.integers(1, 4))
    g.add("x", "input", width=a)
    parts = []
    if rng.random() < 0.6:
        depth = int(rng.integers(2, 4))
        g.add("dl", "delay_line", width=a, depth=depth).connect("x", "dl")
        parts.append(("dl", depth * a))
    else:
        parts.append(("x", a))
    if rng.random() < 0.4:
        b = int(rng.integers(1, 3))
        g.add("z", "input", width=b)
        parts.append(("z", b))
    m = int(rng.integers(1, 4))
    recurrent = rng.random() < 0.7
    h = int(rng.integers(2, 5))
    if recurrent:
        depth = int(rng.integers(1, 3))
        source_is_output = rng.random() < 0.5
        rw = m if source_is_output else h
        g.add("rb", "recurrent_buffer", width=rw, depth=depth)
        parts.append(("rb", depth * rw))
    g.add("cat", "concat")
    for name, _ in parts:
        g.connect(name, "cat")
    width = sum(w for _, w in parts)
    g.add("h1", "dense", inputs=width, width=h).connect("cat", "h1")
    last = "h1"
    if rng.random() < 0.5:
        g.add("tf", "transform", width=h, function=str(rng.choice(FUNCTIONS))).connect("h1", "tf")
        last = "tf"
    if rng.random() < 0.5:
        h2 = int(rng.integers(2, 4))
        g.add("h2", "dense", inputs=h, width=h2).connect(last, "h2")
        last, h = "h2", h2
    g.add("o", "dense", inputs=h, width=m, activation=str(rng.choice(["linear", "sigmoid"])))
    g.connect(last, "o")
    g.add("y", "output", width=m).connect("o", "y")
    if recurrent:
        src = "y" if source_is_output else "h1"
        fw = m if source_is_output else g.block("h1").width
        g.add("fb", "transform", width=fw, function=str(rng.choice(FUNCTIONS)))
        g.connect(src, "fb").connect("fb", "rb", recurrent=True)
    return g


def random_data(graph, rng, steps=4):
    inputs = {n: rng.normal(size=(steps, w)) for n, w in graph.input_widths().items()}
    out_w = graph.blocks[graph.loss_output].width
    return inputs, rng.normal(size=(steps, out_w)), rng.uniform(0.0, 2.0, out_w)


def gradient_check(graph, inputs, targets, weights, analytic, eps=1e-4):
    """Worst relative error between analytic and central-difference gradients."""
    worst = 0.0
    for name, kind, arr in graph.params():
        flat = arr.reshape(-1)
        an = analytic[(name, kind)].reshape(-1)
        for i in range(flat.size):
            old = flat[i]
            flat[i] = old + eps
            lp = sequence_loss(graph, inputs, targets, weights)
            flat[i] = old - eps
            lm = sequence_loss(graph, inputs, targets, weights)
            flat[i] = old
            fd = (lp - lm) / (2 * eps)
            worst = max(worst, abs(fd - an[i]) / max(1e-6, abs(fd) + abs(an[i])))
    return worst


def built(seed):
    return build_graph(random_spec(seed))
