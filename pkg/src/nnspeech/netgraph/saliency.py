"""How strongly a trained network relies on each tap of its input window."""

import numpy as np

from ..errors import GraphRuntimeError
from .loss import weighted_euclidean_grad
from .train import _forced, collect_states


def tap_ranges(n_taps, width, block, offset=0):
    """Tap layout for ``n_taps`` consecutive groups of ``width`` inputs in one block."""
    return [[(block, offset + i * width, offset + (i + 1) * width)] for i in range(n_taps)]


def tap_saliency(graph, dataset, taps, weights=None):
    """Mean L1 norm of the loss gradient with respect to each tap's inputs, normalized to sum 1.

    ``taps`` lists, per tap, the ``(input_block, start, stop)`` ranges that
    carry it. States come from a teacher-forced pass over ``dataset``.
    """
    widths = graph.input_widths()
    for t, ranges in enumerate(taps):
        for block, a, b in ranges:
            if block not in widths or not 0 <= a < b <= widths[block]:
                raise GraphRuntimeError(f"tap {t}: range {block}[{a}:{b}] does not fit the graph inputs")
    dataset = list(dataset)
    if not dataset:
        raise GraphRuntimeError("saliency dataset is empty")
    out_w = graph.blocks[graph.loss_output].width
    weights = np.ones(out_w) if weights is None else np.asarray(weights, dtype=float)
    scores = np.zeros(len(taps))
    frames = collect_states(graph, dataset)
    for s_i, t, state in frames:
        seq = dataset[s_i]
        forced = {k: v[t:t + 1] for k, v in _forced(graph, seq).items()}
        preds, _, cache = graph.step({k: v[t:t + 1] for k, v in seq.inputs.items()}, state,
                                     forced, teacher=True)
        y = preds[graph.loss_output]
        d = weighted_euclidean_grad(y, seq.targets[t:t + 1], weights)
        _, _, d_in = graph.step_backward(cache, {graph.loss_output: d}, input_grads=True)
        for k, ranges in enumerate(taps):
            scores[k] += sum(np.abs(d_in[block][0, a:b]).sum() for block, a, b in ranges)
    scores /= len(frames)
    total = scores.sum()
    return scores / total if total > 0 else scores
