"""Per-step SGD with momentum, mixing sequential and shuffled epochs."""

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import GraphRuntimeError
from .loss import weighted_euclidean_grad


@dataclass(frozen=True)
class TrainingSchedule:
    epochs: int = 20
    lr0: float = 0.05
    lr_decay: float = 0.95
    momentum0: float = 0.5
    momentum_decay: float = 0.95
    mode_mix: float = 0.5   # fraction of epochs run sequentially
    seed: int = 0
    batch_size: int = 1     # frames per update in random epochs

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if not 0.0 <= self.mode_mix <= 1.0:
            raise ValueError("mode_mix must lie in [0, 1]")
        if self.lr0 < 0 or self.momentum0 < 0 or self.lr_decay <= 0 or self.momentum_decay <= 0:
            raise ValueError("rates must be non-negative and decays positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")

    def lr(self, epoch):
        return self.lr0 * self.lr_decay ** epoch

    def momentum(self, epoch):
        return self.momentum0 * self.momentum_decay ** epoch

    def is_sequential(self, epoch):
        # spreads round(mode_mix * epochs) sequential epochs evenly; 0.5 alternates
        m = self.mode_mix
        return math.ceil((epoch + 1) * m - 1e-9) - math.ceil(epoch * m - 1e-9) == 1


@dataclass
class Sequence:
    """One utterance: per-input-block arrays (T, width) and loss targets (T, width).

    ``teacher`` supplies values for teacher-forced outputs other than the
    loss output; the loss output is forced to ``targets``.
    """

    inputs: dict
    targets: np.ndarray
    teacher: dict = field(default_factory=dict)
    initial_state: dict = None

    def __len__(self):
        return len(self.targets)


@dataclass
class TrainResult:
    graph: object
    history: list
    modes: list


def _forced(graph, seq):
    forced = {}
    for name in graph.outputs:
        if graph.blocks[name].teacher_forcing:
            if name == graph.loss_output:
                forced[name] = seq.targets
            elif name in seq.teacher:
                forced[name] = seq.teacher[name]
            else:
                raise GraphRuntimeError(f"no teacher values for output {name!r}")
    return forced


def _slice(arrays, t):
    return {k: v[t:t + 1] for k, v in arrays.items()}


def _initial(graph, seq):
    state = graph.zero_state(1)
    if seq.initial_state:
        for k, v in seq.initial_state.items():
            state[k] = np.asarray(v, dtype=float).reshape(state[k].shape)
    return state


def collect_states(graph, dataset):
    """Teacher-forced sequential pass recording the state seen at every frame."""
    frames = []
    for s_i, seq in enumerate(dataset):
        forced = _forced(graph, seq)
        state = _initial(graph, seq)
        for t in range(len(seq)):
            frames.append((s_i, t, state))
            _, state, _ = graph.step(_slice(seq.inputs, t), state, _slice(forced, t), teacher=True)
    return frames


class _Optimizer:
    def __init__(self, graph):
        self.graph = graph
        self.velocity = np.zeros_like(graph.flat)

    def update(self, grads, lr, mom, scale=1.0):
        v = self.velocity
        v *= mom
        g = grads.flat
        g *= lr * scale
        v -= g
        self.graph.flat += v


def _step(graph, opt, inputs, state, forced, target, weights, lr, mom):
    preds, new_state, cache = graph.step(inputs, state, forced, teacher=True)
    y = preds[graph.loss_output]
    err = y - target
    loss = float(np.sum(weights * err * err))
    grads, _, _ = graph.step_backward(cache, {graph.loss_output: weighted_euclidean_grad(y, target, weights)})
    opt.update(grads, lr, mom, 1.0 / len(target))
    return loss, new_state


def train(graph, dataset, schedule=TrainingSchedule(), weights=None, log=None):
    """Train ``graph`` in place; returns TrainResult with the mean loss per epoch.

    Gradients are taken per step: the recurrent state entering a step is
    treated as an input (teacher forcing keeps it exact for buffers fed from
    targets).
    """
    dataset = list(dataset)
    if not dataset or sum(len(s) for s in dataset) == 0:
        raise GraphRuntimeError("training dataset is empty")
    if graph.loss_output is None:
        raise GraphRuntimeError("graph has no loss-bearing output block")
    out_width = graph.blocks[graph.loss_output].width
    weights = np.ones(out_width) if weights is None else np.asarray(weights, dtype=float)
    if weights.shape != (out_width,):
        raise GraphRuntimeError(f"loss weights have shape {weights.shape}, expected ({out_width},)")
    forced = [_forced(graph, seq) for seq in dataset]
    rng = np.random.default_rng(schedule.seed)
    opt = _Optimizer(graph)
    static_states = not any(graph.state_weight_dependent.values())
    cached_frames = None
    history, modes = [], []
    n_frames = sum(len(s) for s in dataset)

    for epoch in range(schedule.epochs):
        lr, mom = schedule.lr(epoch), schedule.momentum(epoch)
        total = 0.0
        if schedule.is_sequential(epoch):
            modes.append("sequential")
            for seq, f in zip(dataset, forced):
                state = _initial(graph, seq)
                for t in range(len(seq)):
                    loss, state = _step(graph, opt, _slice(seq.inputs, t), state, _slice(f, t),
                                        seq.targets[t:t + 1], weights, lr, mom)
                    total += loss
        else:
            modes.append("random")
            if cached_frames is None or not static_states:
                cached_frames = collect_states(graph, dataset)
            order = rng.permutation(len(cached_frames))
            bs = schedule.batch_size
            for start in range(0, len(order), bs):
                picks = [cached_frames[i] for i in order[start:start + bs]]
                inputs = {k: np.concatenate([dataset[s].inputs[k][t:t + 1] for s, t, _ in picks])
                          for k in dataset[0].inputs}
                fv = {k: np.concatenate([forced[s][k][t:t + 1] for s, t, _ in picks])
                      for k in forced[0]}
                state = {k: np.concatenate([st[k] for _, _, st in picks]) for k in graph.stateful}
                target = np.concatenate([dataset[s].targets[t:t + 1] for s, t, _ in picks])
                loss, _ = _step(graph, opt, inputs, state, fv, target, weights, lr, mom)
                total += loss
        history.append(total / n_frames)
        if log:
            log(epoch, modes[-1], history[-1])
    return TrainResult(graph, history, modes)
