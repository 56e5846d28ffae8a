import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nnspeech.acoustic_model import (OUTPUT, AcousticModel, PhoneticNetConfig, acoustic_targets,
                                     build_phonetic_net, frame_inputs, phonetic_topology,
                                     predict_frames, project_frame)
from nnspeech.corpus.frames import align_frames, natural_frame_counts
from nnspeech.corpus.labels import PhoneSegment, SyntacticAnnotation
from nnspeech.corpus.utterance import Utterance
from nnspeech.encoding.context import EncodingConfig
from nnspeech.encoding.taps import TapSchedule
from nnspeech.errors import FrameError
from nnspeech.netgraph.normalize import TargetNormalizer
from nnspeech.netgraph.quantize import quantize
from nnspeech.netgraph.topology import OUTPUT as OUTPUT_KIND
from nnspeech.vocoder.coder import VocoderConfig

CFG = VocoderConfig()


@pytest.fixture(scope="module")
def random_model(small_corpus):
    _, frames = small_corpus
    targets = np.array([f.vector() for fr in frames for f in fr])
    return AcousticModel(build_phonetic_net(), TargetNormalizer.fit(targets))


def test_structure():
    graph = build_phonetic_net()
    outs = [b for b in graph.blocks.values() if b.kind == OUTPUT_KIND]
    assert len(outs) == 1 and outs[0].width == CFG.n_params == 13
    rec = [e for e in graph.spec.edges if e.recurrent]
    assert rec and all(graph.blocks[e.target].kind == "recurrent_buffer" for e in rec)
    assert quantize(graph).nbytes() < 100 * 1024


def test_tap_span_guard():
    wide = EncodingConfig(taps=TapSchedule((-20, 0, 20)))
    with pytest.raises(ValueError):
        phonetic_topology(enc=wide)


def test_cold_start(random_model, small_corpus):
    utts, _ = small_corpus
    u = utts[0]
    labels = align_frames(u.segments, CFG.hop)[:1]
    out = random_model.raw_outputs(u.segments, u.syntax, labels)
    assert out.shape == (1, 13) and np.all(np.isfinite(out))


@settings(max_examples=200)
@given(st.lists(st.floats(-1e4, 1e4, allow_nan=False), min_size=13, max_size=13))
def test_projection_contract(vec):
    project_frame(np.array(vec)).validate()


@settings(max_examples=5, deadline=None)
@given(st.integers(0, 1000))
def test_projection_with_random_weights(small_corpus, seed):
    utts, frames = small_corpus
    graph = build_phonetic_net(PhoneticNetConfig(seed=seed))
    graph.flat[:] = np.random.default_rng(seed).normal(scale=2.0, size=graph.flat.size)
    targets = np.array([f.vector() for f in frames[0]])
    model = AcousticModel(graph, TargetNormalizer.fit(targets))
    u = utts[0]
    counts = natural_frame_counts(u.segments, CFG.hop)[:4]
    for f in predict_frames(u.segments[:4], u.syntax, counts, model):
        f.validate()


@settings(max_examples=5, deadline=None)
@given(st.lists(st.integers(0, 4), min_size=4, max_size=4))
def test_frame_count_conservation(random_model, small_corpus, counts):
    utts, _ = small_corpus
    u = utts[1]
    frames = predict_frames(u.segments[:4], u.syntax, counts, random_model)
    assert len(frames) == sum(counts)


def test_predict_frames_deterministic(random_model, small_corpus):
    utts, _ = small_corpus
    u = utts[2]
    counts = natural_frame_counts(u.segments, CFG.hop)
    a = predict_frames(u.segments, u.syntax, counts, random_model)
    b = predict_frames(u.segments, u.syntax, counts, random_model)
    assert all(np.array_equal(x.vector(), y.vector()) for x, y in zip(a, b))
    with pytest.raises(FrameError):
        predict_frames(u.segments, u.syntax, counts[:-1], random_model)


def test_targets_silence_and_count():
    n = CFG.sample_rate
    u = Utterance(np.zeros(n, dtype=np.int16), [PhoneSegment(0, n, "h#")],
                  SyntacticAnnotation(), name="quiet")
    t = acoustic_targets(u)
    assert t.shape == (100, 13)
    assert np.all(t[:, 10] == CFG.clamp_f0) and np.all(t[:, 12] == 0.0)
    norm = TargetNormalizer.fit(t)
    assert np.allclose(norm.inverse(norm.forward(t)), t, atol=1e-9)


def test_targets_frame_mismatch(small_corpus):
    utts, frames = small_corpus
    with pytest.raises(FrameError):
        acoustic_targets(utts[0], frames=frames[0][:-1])


def locality_check(utt, enc=EncodingConfig()):
    """Edit one phone's identity; frames beyond the window edge must keep their encoding."""
    segs = list(utt.segments)
    i = len(segs) // 2
    replacement = "z" if segs[i].phone != "z" else "v"
    edited = segs[:i] + [PhoneSegment(segs[i].start, segs[i].end, replacement)] + segs[i + 1:]
    labels = align_frames(segs, CFG.hop)
    a = frame_inputs(segs, utt.syntax, labels, enc)
    b = frame_inputs(edited, utt.syntax, align_frames(edited, CFG.hop), enc)
    reach = max(abs(o) for o in enc.taps.offsets)
    lo, hi = segs[i].start // CFG.hop, (segs[i].end - 1) // CFG.hop
    far = [t for t in range(len(labels)) if t < lo - reach or t > hi + reach]
    near = [t for t in range(len(labels)) if lo - reach <= t <= hi + reach]
    unchanged = all(np.array_equal(a[k][t], b[k][t]) for k in a for t in far)
    changed_inside = any(not np.array_equal(a[k][t], b[k][t]) for k in a for t in near)
    return unchanged, changed_inside, len(far)


def test_locality(small_corpus):
    utts, _ = small_corpus
    unchanged, changed_inside, n_far = locality_check(utts[0])
    assert unchanged and changed_inside and n_far > 0
