"""Frame-level phonetic network: phonetic context of a 10 ms frame -> coder parameters.

Phone identity and phone features are sampled at the taps of a 300 ms
window and feed separate spectral (5, 6) and excitation (21, 20) layers.
Duration/position and boundary-distance codes pass through unchanged
(7, 8). The last two output frames return through a recurrent buffer (15)
and its read-out (16).
"""

from dataclasses import asdict, dataclass

import numpy as np

from .corpus.frames import align_frames, retime
from .encoding.context import EncodingConfig, SegmentIndex, encode_frame, frame_layout
from .errors import CorpusError, EncodingError, FrameError, ModelFileError, NNSpeechError
from .netgraph.graph import build_graph
from .netgraph.modelio import read_model, write_model
from .netgraph.normalize import TargetNormalizer, variance_weights
from .netgraph.topology import GraphSpec
from .netgraph.train import Sequence, TrainingSchedule, train
from .vocoder.coder import AcousticFrame, VocoderConfig, analyze

INPUT_GROUPS = {
    "1_tap_phones": ("tap_phone",),
    "2_tap_features": ("tap_features",),
    "3_timing": ("duration", "position"),
    "4_context": ("frame_distances", "stress", "word_class", "word_level",
                  "boundary_distances", "tobi"),
}
OUTPUT = "24_output"
LSF_GAP = 0.005
VOICING_MARGIN = 20.0


@dataclass(frozen=True)
class PhoneticNetConfig:
    phone_spectral: int = 16     # block 5
    phone_excitation: int = 8    # block 21
    feature_spectral: int = 12   # block 6
    feature_excitation: int = 8  # block 20
    spectral: int = 64           # block 9
    excitation: int = 32         # block 17
    trunk: int = 128             # block 22
    trunk2: int = 64             # block 23
    recurrent_depth: int = 2
    # feed targets rather than predictions back during training
    teacher_forcing: bool = False
    # fixed function of blocks 7, 8 and 16
    code_transform: str = "bipolar"
    seed: int = 2


def input_widths(enc=EncodingConfig()):
    layout = frame_layout(enc)
    return {name: sum(layout.field(f).width for f in fields)
            for name, fields in INPUT_GROUPS.items()}


def phonetic_topology(config=PhoneticNetConfig(), enc=EncodingConfig(), vocoder=VocoderConfig()):
    if enc.taps.span_ms(vocoder.frame_ms) > 300:
        raise ValueError("tap schedule spans more than 300 ms")
    w = input_widths(enc)
    n_out = vocoder.n_params
    fb = n_out * config.recurrent_depth
    g = GraphSpec(seed=config.seed)
    for name, width in w.items():
        g.add(name, "input", width=width)
    g.add("5_phone_spectral", "dense", inputs=w["1_tap_phones"], width=config.phone_spectral)
    g.add("21_phone_excitation", "dense", inputs=w["1_tap_phones"], width=config.phone_excitation)
    g.add("6_feature_spectral", "dense", inputs=w["2_tap_features"], width=config.feature_spectral)
    g.add("20_feature_excitation", "dense", inputs=w["2_tap_features"],
          width=config.feature_excitation)
    g.add("7_timing", "transform", width=w["3_timing"], function=config.code_transform)
    g.add("8_distances", "transform", width=w["4_context"], function=config.code_transform)
    g.add("15_recurrent", "recurrent_buffer", width=n_out, depth=config.recurrent_depth)
    g.add("16_feedback", "transform", width=fb, function=config.code_transform)
    g.add("9_merge", "concat")
    g.add("17_merge", "concat")
    shared = w["3_timing"] + w["4_context"] + fb
    g.add("9_spectral", "dense", inputs=config.phone_spectral + config.feature_spectral + shared,
          width=config.spectral)
    g.add("17_excitation", "dense",
          inputs=config.phone_excitation + config.feature_excitation + shared,
          width=config.excitation)
    g.add("22_merge", "concat")
    g.add("22_trunk", "dense", inputs=config.spectral + config.excitation, width=config.trunk)
    g.add("23_trunk", "dense", inputs=config.trunk, width=config.trunk2)
    g.add("24_linear", "dense", inputs=config.trunk2, width=n_out, activation="linear")
    g.add(OUTPUT, "output", width=n_out, teacher_forcing=config.teacher_forcing)
    g.add("14_tap", "transform", width=n_out)
    edges = [
        ("1_tap_phones", "5_phone_spectral"), ("1_tap_phones", "21_phone_excitation"),
        ("2_tap_features", "6_feature_spectral"), ("2_tap_features", "20_feature_excitation"),
        ("3_timing", "7_timing"), ("4_context", "8_distances"), ("15_recurrent", "16_feedback"),
        ("5_phone_spectral", "9_merge"), ("6_feature_spectral", "9_merge"),
        ("7_timing", "9_merge"), ("8_distances", "9_merge"), ("16_feedback", "9_merge"),
        ("21_phone_excitation", "17_merge"), ("20_feature_excitation", "17_merge"),
        ("7_timing", "17_merge"), ("8_distances", "17_merge"), ("16_feedback", "17_merge"),
        ("9_merge", "9_spectral"), ("17_merge", "17_excitation"),
        ("9_spectral", "22_merge"), ("17_excitation", "22_merge"), ("22_merge", "22_trunk"),
        ("22_trunk", "23_trunk"), ("23_trunk", "24_linear"), ("24_linear", OUTPUT),
        (OUTPUT, "14_tap"),
    ]
    for a, b in edges:
        g.connect(a, b)
    g.connect("14_tap", "15_recurrent", recurrent=True)
    return g


def build_phonetic_net(config=PhoneticNetConfig(), enc=EncodingConfig(), vocoder=VocoderConfig()):
    return build_graph(phonetic_topology(config, enc, vocoder))


def tap_layout(enc=EncodingConfig()):
    """Per-tap input ranges, for saliency analysis."""
    from .phones import FEATURE_WIDTH, default_table
    n_ph = len(default_table())
    return [[("1_tap_phones", i * n_ph, (i + 1) * n_ph),
             ("2_tap_features", i * FEATURE_WIDTH, (i + 1) * FEATURE_WIDTH)]
            for i in range(len(enc.taps))]


def frame_inputs(segments, syntax, frame_labels, enc=EncodingConfig()):
    """Input arrays (T, width) per input block for a frame grid."""
    index = SegmentIndex(segments, syntax)
    rows = {name: [] for name in INPUT_GROUPS}
    for i in range(len(frame_labels)):
        try:
            vec = encode_frame(i, frame_labels, segments, syntax, enc, index)
        except NNSpeechError as exc:
            raise EncodingError(f"frame {i}: {exc}") from None
        for name, fields in INPUT_GROUPS.items():
            rows[name].append(vec.select(fields))
    widths = input_widths(enc)
    return {name: np.array(r).reshape(len(frame_labels), widths[name]) for name, r in rows.items()}


def acoustic_targets(utterance, config=VocoderConfig(), frames=None):
    """Raw (un-normalized) per-frame coder vectors aligned with the label frame grid."""
    hop = config.hop
    labels = align_frames(utterance.segments, hop)
    end = utterance.segments[-1].end
    if frames is None:
        frames = analyze(np.asarray(utterance.samples)[:end], config)
    if len(frames) != len(labels):
        raise FrameError(f"{utterance.name}: audio gives {len(frames)} frames, "
                         f"labels give {len(labels)}")
    return np.array([f.vector() for f in frames]).reshape(len(frames), config.n_params)


def project_frame(vec, config=VocoderConfig()):
    """Repair a raw parameter vector into a valid AcousticFrame."""
    vec = np.asarray(vec, dtype=float)
    p = config.order
    lsf = np.sort(np.clip(vec[:p], LSF_GAP, np.pi - LSF_GAP))
    for i in range(1, p):
        lsf[i] = max(lsf[i], lsf[i - 1] + LSF_GAP)
    if lsf[-1] > np.pi - LSF_GAP:
        lsf[-1] = np.pi - LSF_GAP
        for i in range(p - 2, -1, -1):
            lsf[i] = min(lsf[i], lsf[i + 1] - LSF_GAP)
    f0 = float(np.clip(vec[p], config.f0_min, config.clamp_f0))
    power = float(vec[p + 1])
    boundary = float(np.clip(vec[p + 2], 0.0, config.nyquist))
    voiced = f0 < config.clamp_f0 - VOICING_MARGIN
    if not voiced:
        f0, boundary = float(config.clamp_f0), 0.0
    return AcousticFrame(lsf, f0, power, boundary, voiced)


class AcousticModel:
    def __init__(self, graph, normalizer, config=PhoneticNetConfig(), enc=EncodingConfig(),
                 vocoder=VocoderConfig()):
        self.graph = graph
        self.normalizer = normalizer
        self.config = config
        self.enc = enc
        self.vocoder = vocoder

    def meta(self):
        return {"kind": "acoustic", "normalizer": self.normalizer.to_dict(),
                "config": asdict(self.config)}

    def save(self, path, quantized=False):
        write_model(path, self.graph, self.meta(), quantized=quantized)

    @classmethod
    def load(cls, path, enc=EncodingConfig(), vocoder=VocoderConfig()):
        model = read_model(path)
        if model.meta.get("kind") != "acoustic":
            raise ModelFileError(f"{path} is not an acoustic model")
        return cls(model.graph, TargetNormalizer.from_dict(model.meta["normalizer"]),
                   PhoneticNetConfig(**model.meta["config"]), enc, vocoder)

    def raw_outputs(self, segments, syntax, frame_labels):
        """De-normalized network outputs, one row per frame, before projection."""
        inputs = frame_inputs(segments, syntax, frame_labels, self.enc)
        state = self.graph.zero_state(1)
        out = []
        for t in range(len(frame_labels)):
            preds, state, _ = self.graph.step({k: v[t:t + 1] for k, v in inputs.items()}, state)
            out.append(preds[OUTPUT][0])
        out = np.array(out).reshape(len(frame_labels), self.vocoder.n_params)
        return self.normalizer.inverse(out)


def predict_frames(segments, syntax, durations, model):
    """AcousticFrames for segments lasting ``durations`` whole frames each."""
    frame_counts = [int(d) for d in durations]
    if len(frame_counts) != len(segments) or any(c < 0 for c in frame_counts):
        raise FrameError("need one non-negative frame count per segment")
    hop = model.vocoder.hop
    new_segments, new_syntax = retime(segments, syntax, frame_counts, hop)
    kept = [s for s in new_segments if s.end > s.start]
    if not kept:
        return []
    labels = align_frames(kept, hop)
    raw = model.raw_outputs(kept, new_syntax, labels)
    return [project_frame(row, model.vocoder) for row in raw]


def make_sequences(utterances, normalizer, targets, enc=EncodingConfig(), hop=160):
    seqs = []
    for utt, raw in zip(utterances, targets):
        labels = align_frames(utt.segments, hop)
        seqs.append(Sequence(frame_inputs(utt.segments, utt.syntax, labels, enc),
                             normalizer.forward(raw)))
    return seqs


def train_acoustic_model(utterances, config=PhoneticNetConfig(), schedule=None,
                         enc=EncodingConfig(), vocoder=VocoderConfig(), targets=None,
                         loss_weights=None, log=None):
    """Returns (model, loss history, report dict).

    ``targets`` may hold precomputed raw coder vectors per utterance.
    """
    utterances = list(utterances)
    if not utterances:
        raise CorpusError([])
    schedule = schedule or TrainingSchedule(epochs=20, lr0=0.02, lr_decay=0.95, momentum0=0.5,
                                            momentum_decay=0.97, mode_mix=0.5, seed=config.seed)
    if targets is None:
        targets = [acoustic_targets(u, vocoder) for u in utterances]
    normalizer = TargetNormalizer.fit(np.concatenate(targets))
    normalized = normalizer.forward(np.concatenate(targets))
    weights = variance_weights(normalized) if loss_weights is None else np.asarray(loss_weights)
    graph = build_phonetic_net(config, enc, vocoder)
    seqs = make_sequences(utterances, normalizer, targets, enc, vocoder.hop)
    result = train(graph, seqs, schedule, weights=weights, log=log)
    model = AcousticModel(graph, normalizer, config, enc, vocoder)
    report = evaluate_acoustic_model(model, utterances, targets, weights)
    report["final_train_loss"] = result.history[-1] if result.history else None
    return model, result.history, report


def evaluate_acoustic_model(model, utterances, targets, weights=None):
    """Free-running weighted loss per frame against the constant-mean predictor."""
    norm = model.normalizer
    truth = norm.forward(np.concatenate(targets))
    weights = np.ones(truth.shape[1]) if weights is None else np.asarray(weights, dtype=float)
    hop = model.vocoder.hop
    pred = np.concatenate([norm.forward(model.raw_outputs(u.segments, u.syntax,
                                                          align_frames(u.segments, hop)))
                           for u in utterances])
    mean = truth.mean(axis=0)
    return {
        "final_loss": float(np.mean(np.sum(weights * (pred - truth) ** 2, axis=1))),
        "baseline_loss": float(np.mean(np.sum(weights * (mean - truth) ** 2, axis=1))),
        "n_frames": int(len(truth)),
        "loss_weights": [float(x) for x in weights],
    }
