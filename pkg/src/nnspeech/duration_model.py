"""Segment duration network.

Two input streams per segment: phone features pushed through a shift
register (one segment of look-ahead per side of the context window), and
phone identity plus prosody used only for the current segment. The
previous predicted log duration is fed back through a recurrent buffer.
"""

from dataclasses import asdict, dataclass

import numpy as np

from .encoding.context import EncodingConfig, SegmentIndex, encode_segment, segment_layout
from .errors import CorpusError, EncodingError, LabelParseError, ModelFileError, NNSpeechError
from .netgraph.graph import build_graph
from .netgraph.modelio import read_model, write_model
from .netgraph.normalize import TargetNormalizer
from .netgraph.topology import GraphSpec
from .netgraph.train import Sequence, TrainingSchedule, train
from .phones import PAD, default_table

STREAM2_FIELDS = ("features",)
STREAM3_FIELDS = ("phone", "stress", "word_class", "word_level", "boundary_distances", "tobi")


@dataclass(frozen=True)
class DurationNetConfig:
    context_k: int = 3
    hidden3: int = 64
    hidden4: int = 32
    hidden5: int = 16
    recurrent_depth: int = 2
    seed: int = 1

    def __post_init__(self):
        if self.recurrent_depth < 1:
            raise ValueError("recurrent depth must be >= 1")
        if self.context_k < 0:
            raise ValueError("context depth must be >= 0")


def stream_widths(enc=EncodingConfig()):
    layout = segment_layout(enc)
    return (sum(layout.field(n).width for n in STREAM2_FIELDS),
            sum(layout.field(n).width for n in STREAM3_FIELDS))


def duration_topology(config=DurationNetConfig(), enc=EncodingConfig()):
    w2, w3 = stream_widths(enc)
    depth = 2 * config.context_k + 1
    g = GraphSpec(seed=config.seed)
    g.add("1_stream2", "input", width=w2)
    g.add("2_stream3", "input", width=w3)
    g.add("shift", "delay_line", width=w2, depth=depth)
    g.add("3_dense", "dense", inputs=depth * w2, width=config.hidden3)
    g.add("4_merge", "concat")
    g.add("4_dense", "dense", inputs=config.hidden3 + w3 + config.recurrent_depth,
          width=config.hidden4)
    g.add("5_dense", "dense", inputs=config.hidden4, width=config.hidden5)
    g.add("5_out", "dense", inputs=config.hidden5, width=1, activation="linear")
    g.add("6_output", "output", width=1, teacher_forcing=True)
    g.add("7_tap", "transform", width=1)
    g.add("recurrent", "recurrent_buffer", width=1, depth=config.recurrent_depth)
    g.add("8_tap", "transform", width=config.recurrent_depth)
    for a, b in (("1_stream2", "shift"), ("shift", "3_dense"), ("3_dense", "4_merge"),
                 ("2_stream3", "4_merge"), ("8_tap", "4_merge"), ("4_merge", "4_dense"),
                 ("4_dense", "5_dense"), ("5_dense", "5_out"), ("5_out", "6_output"),
                 ("6_output", "7_tap"), ("recurrent", "8_tap")):
        g.connect(a, b)
    g.connect("7_tap", "recurrent", recurrent=True)
    return g


def build_duration_net(config=DurationNetConfig(), enc=EncodingConfig()):
    return build_graph(duration_topology(config, enc))


# longest segment duration predict_durations will emit, seconds
MAX_DURATION = 60.0


def duration_target(segment, sample_rate=16000):
    """Natural log of the segment duration in seconds (before normalization)."""
    return float(np.log(segment.length / sample_rate))


def quantize_duration(seconds, frame_s=0.01):
    """Round to the nearest whole frame, at least one frame."""
    frames = max(1, int(np.floor(seconds / frame_s + 0.5)))
    return frames


def segment_streams(segments, syntax, k=3, enc=EncodingConfig()):
    """Per-segment stream arrays plus the shift-register start state.

    Stream 2 at step i carries segment i+K, so once shifted in the register
    holds segments i-K .. i+K.
    """
    table = default_table()
    n = len(segments)
    index = SegmentIndex(segments, syntax)
    feats = [table.features[table.index(s.phone)] for s in segments]
    pad = table.features[table.index(PAD)]

    def feat(j):
        return feats[j] if 0 <= j < n else pad

    s3 = []
    for i in range(n):
        try:
            vec = encode_segment(i, segments, syntax, enc, index)
        except NNSpeechError as exc:
            raise EncodingError(f"segment {i}: {exc}") from None
        s3.append(vec.select(STREAM3_FIELDS))
    stream2 = np.array([feat(i + k) for i in range(n)]).reshape(n, -1)
    initial = np.array([feat(j) for j in range(-k, k)]).reshape(2 * k, -1)
    return {"1_stream2": stream2, "2_stream3": np.array(s3).reshape(n, -1)}, {"shift": initial}


class DurationModel:
    def __init__(self, graph, normalizer, config=DurationNetConfig(), enc=EncodingConfig(),
                 sample_rate=16000):
        self.graph = graph
        self.normalizer = normalizer
        self.config = config
        self.enc = enc
        self.sample_rate = sample_rate

    def meta(self):
        return {"kind": "duration", "normalizer": self.normalizer.to_dict(),
                "config": asdict(self.config), "sample_rate": self.sample_rate}

    def save(self, path, quantized=False):
        write_model(path, self.graph, self.meta(), quantized=quantized)

    @classmethod
    def load(cls, path, enc=EncodingConfig()):
        model = read_model(path)
        meta = model.meta
        if meta.get("kind") != "duration":
            raise ModelFileError(f"{path} is not a duration model")
        return cls(model.graph, TargetNormalizer.from_dict(meta["normalizer"]),
                   DurationNetConfig(**meta["config"]), enc, meta.get("sample_rate", 16000))

    def raw_log_durations(self, segments, syntax):
        """Sequential forward with the feedback buffer threaded; natural-log seconds."""
        inputs, initial = segment_streams(segments, syntax, self.config.context_k, self.enc)
        state = self.graph.zero_state(1)
        state["shift"] = initial["shift"][None]
        out = []
        for i in range(len(segments)):
            preds, state, _ = self.graph.step({k: v[i:i + 1] for k, v in inputs.items()}, state)
            out.append(preds["6_output"][0, 0])
        return self.normalizer.inverse(np.array(out)[:, None])[:, 0]


def make_sequences(utterances, normalizer, k=3, enc=EncodingConfig()):
    seqs = []
    for utt in utterances:
        inputs, initial = segment_streams(utt.segments, utt.syntax, k, enc)
        logs = np.array([[duration_target(s, utt.sample_rate)] for s in utt.segments])
        seqs.append(Sequence(inputs, normalizer.forward(logs), initial_state=initial))
    return seqs


def train_duration_model(utterances, config=DurationNetConfig(), schedule=None,
                         enc=EncodingConfig(), log=None):
    """Returns (model, loss history, report dict)."""
    utterances = list(utterances)
    if not utterances:
        raise CorpusError([])
    schedule = schedule or TrainingSchedule(epochs=30, lr0=0.05, lr_decay=0.95, momentum0=0.5,
                                            momentum_decay=0.97, mode_mix=0.5, seed=config.seed)
    logs = np.array([[duration_target(s, u.sample_rate)] for u in utterances for s in u.segments])
    normalizer = TargetNormalizer.fit(logs)
    graph = build_duration_net(config, enc)
    seqs = make_sequences(utterances, normalizer, config.context_k, enc)
    result = train(graph, seqs, schedule, log=log)
    model = DurationModel(graph, normalizer, config, enc, utterances[0].sample_rate)
    return model, result.history, evaluate_duration_model(model, utterances, logs)


def evaluate_duration_model(model, utterances, train_logs=None):
    """RMS log-duration error against the constant-mean predictor."""
    truth, pred = [], []
    for utt in utterances:
        truth += [duration_target(s, utt.sample_rate) for s in utt.segments]
        pred += list(model.raw_log_durations(utt.segments, utt.syntax))
    truth, pred = np.array(truth), np.array(pred)
    mean = float(np.mean(train_logs)) if train_logs is not None else float(truth.mean())
    return {
        "rms_log_error": float(np.sqrt(np.mean((pred - truth) ** 2))),
        "baseline_rms_log_error": float(np.sqrt(np.mean((mean - truth) ** 2))),
        "n_segments": int(truth.size),
    }


def predict_durations(segments, syntax, model):
    """Predicted durations in seconds, each a whole number of 10 ms frames (minimum one)."""
    frame_s = 0.01
    logs = np.minimum(model.raw_log_durations(segments, syntax), np.log(MAX_DURATION))
    return [quantize_duration(float(np.exp(v)), frame_s) * frame_s for v in logs]


def durations_to_frames(durations, frame_s=0.01):
    return [int(round(d / frame_s)) for d in durations]


def format_durations(segments, durations):
    return "".join(f"{i} {s.phone} {int(round(d * 1000))}\n"
                   for i, (s, d) in enumerate(zip(segments, durations)))


def parse_durations(text):
    """Lines of ``segment_index phone duration_ms`` -> list of (phone, seconds)."""
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 3:
            raise LabelParseError("expected 'index phone duration_ms'", lineno)
        try:
            idx, ms = int(parts[0]), float(parts[2])
        except ValueError:
            raise LabelParseError("bad number", lineno) from None
        if idx != len(out) or ms <= 0:
            raise LabelParseError("indices must count from 0 and durations be > 0", lineno)
        out.append((parts[1], ms / 1000.0))
    return out
