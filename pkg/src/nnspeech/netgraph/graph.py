"""Block-graph network: validation, stepwise forward pass and exact gradients.

All values carry a leading batch axis ``(B, width)``. Stateful blocks keep
their history in a state dict: a delay line of depth D stores the previous
D-1 inputs, a recurrent buffer of depth D stores the last D source values,
oldest first.
"""

from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from ..errors import GraphBuildError, GraphRuntimeError
from .loss import weighted_euclidean, weighted_euclidean_grad
from .topology import (ACTIVATIONS, CONCAT, DELAY_LINE, DENSE, INPUT, KINDS, OUTPUT,
                       RECURRENT_BUFFER, TRANSFORM, GraphSpec, parse_topology)


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


TRANSFORMS = {
    "identity": (lambda x: x, lambda x, y: np.ones_like(x)),
    "tanh": (np.tanh, lambda x, y: 1.0 - y * y),
    "sigmoid": (_sigmoid, lambda x, y: y * (1.0 - y)),
    # maps [0, 1] codes onto [-1, 1] so downstream layers see centred inputs
    "bipolar": (lambda x: 2.0 * x - 1.0, lambda x, y: np.full_like(x, 2.0)),
}


@dataclass
class Block:
    name: str
    kind: str
    width: int           # output width
    in_width: int = 0    # expected input width (0 for input / recurrent-buffer-less kinds)
    activation: str = "sigmoid"
    depth: int = 1
    function: str = "identity"
    loss: bool = False
    teacher_forcing: bool = False
    weights: np.ndarray = None
    bias: np.ndarray = None

    @property
    def n_params(self):
        return 0 if self.weights is None else self.weights.size + self.bias.size


class Gradients(dict):
    """Parameter gradients keyed by (block, 'weights'|'bias'); values are views of ``flat``."""

    def __init__(self, graph):
        super().__init__()
        self.flat = np.zeros(graph.flat.size)
        for (name, kind), (a, b, shape) in graph.layout.items():
            self[(name, kind)] = self.flat[a:b].reshape(shape)


@dataclass
class StepCache:
    values: dict
    predictions: dict
    state: dict
    teacher: bool
    batch: int


@dataclass
class BlockGraph:
    spec: GraphSpec
    blocks: dict
    sources: dict
    order: list
    stateful: list
    outputs: list
    loss_output: str = None
    state_weight_dependent: dict = field(default_factory=dict)
    # all dense weights and biases live in one buffer; block arrays are views
    flat: np.ndarray = None
    layout: dict = field(default_factory=dict)
    # whether a block's value depends on weights or recurrent state, i.e.
    # whether its gradient can matter for parameter updates
    trainable_upstream: dict = field(default_factory=dict)
    _grads: object = None

    # --- parameters ------------------------------------------------------

    def dense_blocks(self):
        return [b for b in self.blocks.values() if b.kind == DENSE]

    def params(self):
        """(block, 'weights'|'bias', array) triples in declaration order."""
        out = []
        for b in self.dense_blocks():
            out.append((b.name, "weights", b.weights))
            out.append((b.name, "bias", b.bias))
        return out

    def n_params(self):
        return sum(b.n_params for b in self.blocks.values())

    def copy(self):
        clone = build_graph(self.spec, init=False)
        clone.flat[:] = self.flat
        return clone

    def input_widths(self):
        return {n: b.width for n, b in self.blocks.items() if b.kind == INPUT}

    # --- state -----------------------------------------------------------

    def zero_state(self, batch=1):
        state = {}
        for name in self.stateful:
            b = self.blocks[name]
            slots = b.depth - 1 if b.kind == DELAY_LINE else b.depth
            state[name] = np.zeros((batch, slots, b.in_width))
        return state

    # --- forward ---------------------------------------------------------

    def step(self, inputs, state=None, targets=None, teacher=False):
        """One time step. Returns ``(predictions, new_state, cache)``.

        With ``teacher`` set, every consumer of a teacher-forced output block
        sees that block's target instead of its prediction.
        """
        batch = None
        for name, b in self.blocks.items():
            if b.kind == INPUT:
                if name not in inputs:
                    raise GraphRuntimeError(f"missing input for block {name!r}")
                x = np.asarray(inputs[name], dtype=float)
                if x.ndim == 1:
                    x = x[None, :]
                if x.shape[1] != b.width:
                    raise GraphRuntimeError(f"input {name!r} has width {x.shape[1]}, expected {b.width}")
                batch = x.shape[0] if batch is None else batch
        batch = batch or 1
        if state is None:
            state = self.zero_state(batch)
        values, preds = {}, {}
        for name in self.order:
            b = self.blocks[name]
            srcs = self.sources[name]
            if b.kind == INPUT:
                v = np.asarray(inputs[name], dtype=float).reshape(batch, b.width)
            elif b.kind == DENSE:
                z = values[srcs[0]] @ b.weights.T + b.bias
                v = _sigmoid(z) if b.activation == "sigmoid" else z
            elif b.kind == CONCAT:
                v = np.concatenate([values[s] for s in srcs], axis=1)
            elif b.kind == DELAY_LINE:
                v = np.concatenate([state[name].reshape(batch, -1), values[srcs[0]]], axis=1)
            elif b.kind == RECURRENT_BUFFER:
                v = state[name].reshape(batch, -1)
            elif b.kind == TRANSFORM:
                v = TRANSFORMS[b.function][0](values[srcs[0]])
            else:  # OUTPUT
                v = values[srcs[0]]
                preds[name] = v
                if teacher and b.teacher_forcing:
                    if targets is None or name not in targets:
                        raise GraphRuntimeError(f"teacher forcing needs targets for {name!r}")
                    v = np.asarray(targets[name], dtype=float).reshape(batch, b.width)
            values[name] = v
        new_state = {}
        for name in self.stateful:
            b = self.blocks[name]
            src_val = values[self.sources[name][0]]
            new_state[name] = np.concatenate([state[name][:, 1:], src_val[:, None, :]], axis=1) \
                if state[name].shape[1] > 0 else state[name]
        return preds, new_state, StepCache(values, preds, state, teacher, batch)

    # --- backward --------------------------------------------------------

    def step_backward(self, cache, d_preds, d_new_state=None, input_grads=False):
        """Gradients of one step given loss gradients on predictions and on the new state.

        Returns ``(param_grads, d_old_state, d_inputs)``; ``d_inputs`` is only
        filled when ``input_grads`` is set. ``param_grads`` is a buffer reused
        by the next call.
        """
        wanted = self.trainable_upstream
        if input_grads:
            wanted = dict.fromkeys(wanted, True)
        batch = cache.batch
        values = cache.values
        dv = defaultdict(lambda: 0.0)
        d_state = {n: np.zeros_like(cache.state[n]) for n in self.stateful}
        if d_new_state:
            for name in self.stateful:
                g = d_new_state.get(name)
                if g is None or g.shape[1] == 0:
                    continue
                d_state[name][:, 1:] += g[:, :-1]
                dv[self.sources[name][0]] = dv[self.sources[name][0]] + g[:, -1]
        if self._grads is None:
            self._grads = Gradients(self)
        grads = self._grads
        grads.flat.fill(0.0)
        d_inputs = {}
        for name in reversed(self.order):
            b = self.blocks[name]
            g = dv.pop(name, 0.0)
            if b.kind == OUTPUT:
                if cache.teacher and b.teacher_forcing:
                    g = 0.0
                if name in d_preds:
                    g = g + d_preds[name]
            if isinstance(g, float):
                if b.kind == INPUT and input_grads:
                    d_inputs[name] = np.zeros((batch, b.width))
                continue
            srcs = self.sources[name]
            if b.kind == INPUT:
                d_inputs[name] = g
            elif b.kind == DENSE:
                x = values[srcs[0]]
                dz = g * values[name] * (1.0 - values[name]) if b.activation == "sigmoid" else g
                gw = grads[(name, "weights")]
                nz = np.flatnonzero(x[0]) if batch == 1 else None
                if nz is not None and 4 * len(nz) < x.shape[1]:
                    # sparse (one-hot / binary) input: touch only the active columns
                    gw[:, nz] = np.outer(dz[0], x[0, nz])
                else:
                    np.matmul(dz.T, x, out=gw)
                grads[(name, "bias")][:] = dz.sum(axis=0)
                if wanted[srcs[0]]:
                    dv[srcs[0]] = dv[srcs[0]] + dz @ b.weights
            elif b.kind == CONCAT:
                pos = 0
                for s in srcs:
                    w = self.blocks[s].width
                    if wanted[s]:
                        dv[s] = dv[s] + g[:, pos:pos + w]
                    pos += w
            elif b.kind == DELAY_LINE:
                w = b.in_width
                hist = g[:, : (b.depth - 1) * w]
                d_state[name] += hist.reshape(batch, b.depth - 1, w)
                dv[srcs[0]] = dv[srcs[0]] + g[:, (b.depth - 1) * w:]
            elif b.kind == RECURRENT_BUFFER:
                d_state[name] += g.reshape(batch, b.depth, b.in_width)
            elif b.kind == TRANSFORM:
                if wanted[srcs[0]]:
                    x = values[srcs[0]]
                    dv[srcs[0]] = dv[srcs[0]] + g * TRANSFORMS[b.function][1](x, values[name])
            else:  # OUTPUT
                dv[srcs[0]] = dv[srcs[0]] + g
        return grads, d_state, d_inputs


# --- construction ------------------------------------------------------------

def _make_block(bs):
    if bs.kind not in KINDS:
        raise GraphBuildError(f"block {bs.name!r}: unknown kind {bs.kind!r}")
    if bs.kind == DENSE:
        if bs.activation not in ACTIVATIONS:
            raise GraphBuildError(f"block {bs.name!r}: unknown activation {bs.activation!r}")
        if bs.inputs <= 0 or bs.width <= 0:
            raise GraphBuildError(f"dense block {bs.name!r} needs positive inputs and width")
        return Block(bs.name, DENSE, bs.width, bs.inputs, activation=bs.activation)
    if bs.kind in (DELAY_LINE, RECURRENT_BUFFER):
        if bs.depth < 1 or bs.width <= 0:
            raise GraphBuildError(f"block {bs.name!r} needs depth >= 1 and positive width")
        return Block(bs.name, bs.kind, bs.depth * bs.width, bs.width, depth=bs.depth)
    if bs.kind == TRANSFORM and bs.function not in TRANSFORMS:
        raise GraphBuildError(f"block {bs.name!r}: unknown transform {bs.function!r}")
    if bs.kind != CONCAT and bs.width <= 0:
        raise GraphBuildError(f"block {bs.name!r} needs a positive width")
    in_width = 0 if bs.kind == INPUT else bs.width
    return Block(bs.name, bs.kind, bs.width, in_width, function=bs.function,
                 loss=bs.loss and bs.kind == OUTPUT,
                 teacher_forcing=bs.teacher_forcing and bs.kind == OUTPUT)


def _toposort(names, sources, recurrent):
    indeg = {n: 0 for n in names}
    consumers = defaultdict(list)
    for dst, srcs in sources.items():
        for s in srcs:
            if (s, dst) in recurrent:
                continue
            indeg[dst] += 1
            consumers[s].append(dst)
    ready = [n for n in names if indeg[n] == 0]
    order = []
    while ready:
        n = ready.pop(0)
        order.append(n)
        for c in consumers[n]:
            indeg[c] -= 1
            if indeg[c] == 0:
                ready.append(c)
    if len(order) != len(names):
        stuck = [n for n in names if indeg[n] > 0]
        edge = next((s, d) for d in stuck for s in sources[d]
                    if s in stuck and (s, d) not in recurrent)
        raise GraphBuildError(f"cycle without a recurrent edge through {edge[0]} -> {edge[1]}")
    return order


def _weight_dependence(graph):
    """Whether each stateful block's history depends on trainable weights under teacher forcing."""
    dep = {n: False for n in graph.blocks}
    for _ in range(len(graph.blocks) + 1):
        changed = False
        for name in graph.order:
            b = graph.blocks[name]
            srcs = graph.sources[name]
            if b.kind == INPUT:
                val = False
            elif b.kind == DENSE:
                val = True
            elif b.kind == OUTPUT and b.teacher_forcing:
                val = False
            elif b.kind in (DELAY_LINE, RECURRENT_BUFFER):
                val = dep[srcs[0]]
            else:
                val = any(dep[s] for s in srcs)
            if val != dep[name]:
                dep[name] = val
                changed = True
        if not changed:
            break
    return {n: dep[graph.sources[n][0]] for n in graph.stateful}


def _resolve_concats(blocks, sources):
    declared = {n: b.width for n, b in blocks.items() if b.kind == CONCAT}
    pending = set(declared)
    while pending:
        progress = False
        for name in sorted(pending):
            srcs = sources[name]
            if any(s in pending for s in srcs):
                continue
            total = sum(blocks[s].width for s in srcs)
            if declared[name] and declared[name] != total:
                raise GraphBuildError(
                    f"concat {name!r} declares width {declared[name]} but its edges carry {total}")
            blocks[name].width = blocks[name].in_width = total
            pending.discard(name)
            progress = True
        if not progress:
            name = sorted(pending)[0]
            src = next(s for s in sources[name] if s in pending)
            raise GraphBuildError(f"cycle without a recurrent edge through {src} -> {name}")


def build_graph(spec, init=True):
    """Validate a topology and create its blocks with seeded weights."""
    if isinstance(spec, str):
        spec = parse_topology(spec)
    blocks = {}
    for bs in spec.blocks:
        if bs.name in blocks:
            raise GraphBuildError(f"duplicate block name {bs.name!r}")
        blocks[bs.name] = _make_block(bs)
    sources = {n: [] for n in blocks}
    recurrent = set()
    for e in spec.edges:
        for end in (e.source, e.target):
            if end not in blocks:
                raise GraphBuildError(f"edge {e.source} -> {e.target} names unknown block {end!r}")
        dst = blocks[e.target]
        if dst.kind == INPUT:
            raise GraphBuildError(f"edge {e.source} -> {e.target}: input blocks take no edges")
        if e.recurrent != (dst.kind == RECURRENT_BUFFER):
            raise GraphBuildError(
                f"edge {e.source} -> {e.target}: recurrent edges must end at recurrent buffers "
                "and every recurrent-buffer input must be recurrent")
        sources[e.target].append(e.source)
        if e.recurrent:
            recurrent.add((e.source, e.target))
    for name, b in blocks.items():
        if b.kind != INPUT and not sources[name]:
            raise GraphBuildError(f"block {name!r} has a dangling input port")
        if b.kind not in (INPUT, CONCAT) and len(sources[name]) != 1:
            raise GraphBuildError(
                f"block {name!r} takes one edge; use a concat block for {sources[name]}")
    _resolve_concats(blocks, sources)
    for name, b in blocks.items():
        if b.kind in (INPUT, CONCAT):
            continue
        src = sources[name][0]
        if blocks[src].width != b.in_width:
            raise GraphBuildError(
                f"width mismatch on edge {src} -> {name}: {blocks[src].width} != {b.in_width}")
    names = list(blocks)
    order = _toposort(names, sources, recurrent)
    outputs = [n for n in names if blocks[n].kind == OUTPUT]
    loss_outputs = [n for n in outputs if blocks[n].loss]
    if len(loss_outputs) > 1:
        raise GraphBuildError(f"more than one loss-bearing output: {loss_outputs}")
    stateful = [n for n in names if blocks[n].kind in (DELAY_LINE, RECURRENT_BUFFER)]
    graph = BlockGraph(spec, blocks, sources, order, stateful, outputs,
                       loss_outputs[0] if loss_outputs else None)
    graph.state_weight_dependent = _weight_dependence(graph)
    up = {}
    for name in order:
        b = blocks[name]
        up[name] = b.kind in (DENSE, DELAY_LINE, RECURRENT_BUFFER) or any(up[s] for s in sources[name])
    graph.trainable_upstream = up
    pos = 0
    for b in graph.dense_blocks():
        for kind, shape in (("weights", (b.width, b.in_width)), ("bias", (b.width,))):
            n = int(np.prod(shape))
            graph.layout[(b.name, kind)] = (pos, pos + n, shape)
            pos += n
    graph.flat = np.zeros(pos)
    for b in graph.dense_blocks():
        for kind in ("weights", "bias"):
            a, e, shape = graph.layout[(b.name, kind)]
            setattr(b, kind, graph.flat[a:e].reshape(shape))
    if init:
        rng = np.random.default_rng(spec.seed)
        for b in graph.dense_blocks():
            bound = 1.0 / np.sqrt(b.in_width)
            b.weights[:] = rng.uniform(-bound, bound, size=(b.width, b.in_width))
            b.bias[:] = rng.uniform(-bound, bound, size=b.width)
    return graph


# --- public single-step / sequence API -----------------------------------------

def forward(graph, inputs, state=None):
    """One step: ``(outputs, new_state)``."""
    preds, new_state, _ = graph.step(inputs, state)
    return preds, new_state


def run_sequence(graph, inputs, initial_state=None):
    """Sequential forward over T steps; ``inputs`` maps block -> (T, width)."""
    steps = len(next(iter(inputs.values())))
    state = initial_state if initial_state is not None else graph.zero_state(1)
    outs = defaultdict(list)
    for t in range(steps):
        preds, state, _ = graph.step({k: v[t][None, :] for k, v in inputs.items()}, state)
        for k, v in preds.items():
            outs[k].append(v[0])
    return {k: np.array(v) for k, v in outs.items()}, state


def sequence_loss(graph, inputs, targets, weights, initial_state=None):
    outs, _ = run_sequence(graph, inputs, initial_state)
    y = outs[graph.loss_output]
    return float(sum(weighted_euclidean(y[t], targets[t], weights) for t in range(len(y))))


def backward(graph, inputs, targets, weights, initial_state=None):
    """Exact gradients of the summed weighted-Euclidean loss over a sequence.

    Backpropagates through time across delay lines and recurrent buffers;
    the initial state is treated as constant. Returns ``(loss, grads)`` with
    grads keyed by ``(block, 'weights'|'bias')``.
    """
    if graph.loss_output is None:
        raise GraphRuntimeError("graph has no loss-bearing output block")
    steps = len(targets)
    state = initial_state if initial_state is not None else graph.zero_state(1)
    caches, loss = [], 0.0
    for t in range(steps):
        preds, state, cache = graph.step({k: v[t][None, :] for k, v in inputs.items()}, state)
        caches.append(cache)
        loss += weighted_euclidean(preds[graph.loss_output][0], targets[t], weights)
    total = {key: np.zeros_like(arr) for key, arr in
             (((n, k), a) for n, k, a in graph.params())}
    d_state = None
    for t in reversed(range(steps)):
        y = caches[t].predictions[graph.loss_output]
        d_pred = {graph.loss_output: weighted_euclidean_grad(y, targets[t][None, :], weights)}
        grads, d_state, _ = graph.step_backward(caches[t], d_pred, d_state)
        for key, g in grads.items():
            total[key] += g
    return loss, total
