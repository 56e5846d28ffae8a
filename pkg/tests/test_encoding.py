import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nnspeech.corpus.frames import align_frames, natural_frame_counts, retime
from nnspeech.corpus.labels import PhoneSegment, SyntacticAnnotation, Word
from nnspeech.encoding.codes import FeatureVector, bar_code, one_of_n, phone_features, phone_id
from nnspeech.encoding.context import (EncodingConfig, SegmentIndex, encode_frame, encode_segment,
                                       frame_layout, segment_layout)
from nnspeech.encoding.taps import TapSchedule, default_tap_schedule
from nnspeech.errors import EncodingError, InventoryError
from nnspeech.phones import FEATURE_FIELDS, PAD, SILENCE, default_table


def test_one_of_n_examples():
    assert one_of_n(0, 3).tolist() == [1, 0, 0]
    assert one_of_n(2, 3).tolist() == [0, 0, 1]
    with pytest.raises(EncodingError):
        one_of_n(3, 3)


def test_bar_code_examples():
    assert bar_code(0, 4).tolist() == [0, 0, 0, 0]
    assert bar_code(3, 4).tolist() == [1, 1, 1, 0]
    assert bar_code(4, 4).tolist() == [1, 1, 1, 1]
    with pytest.raises(EncodingError):
        bar_code(5, 4)


@given(st.integers(0, 20), st.integers(0, 20))
def test_bar_code_monotone(a, b):
    a, b = min(a, b), max(a, b)
    assert np.all(bar_code(a, 20) <= bar_code(b, 20))


def _feature_field(vec, name):
    pos = 0
    for n, w in FEATURE_FIELDS:
        if n == name:
            return vec[pos:pos + w]
        pos += w


def test_silence_features():
    f = phone_features(SILENCE)
    assert _feature_field(f, "silence")[0] == 1.0
    assert f.sum() == 1.0


def test_sh_zh_differ_only_in_voicing():
    diff = np.nonzero(phone_features("sh") != phone_features("zh"))[0]
    assert diff.tolist() == [0]
    assert _feature_field(phone_features("zh"), "voiced")[0] == 1.0


def test_inventory_vectors_distinct():
    table = default_table()
    rows = {tuple(np.concatenate([phone_id(p), phone_features(p)])) for p in table.phones}
    assert len(rows) == len(table)
    assert len(table) == 62


def test_unknown_phone():
    with pytest.raises(InventoryError):
        phone_features("qq")


def _word(phones, syllable_stress=1, length=1600):
    """One word of 160-sample segments inside a sentence, with leading/trailing silence."""
    segs, t = [PhoneSegment(0, 160, SILENCE)], 160
    for p in phones:
        segs.append(PhoneSegment(t, t + length, p))
        t += length
    start, end = 160, t
    segs.append(PhoneSegment(t, t + 160, SILENCE))
    syn = SyntacticAnnotation(syllables=[(start, end)], stress=[syllable_stress],
                              words=[Word(start, end, "content", 3)], phrases=[(start, end)],
                              clauses=[(start, end)], sentences=[(start, end)])
    return segs, syn


def _boundary_bars(vec, kind_index, sat=7):
    part = vec["boundary_distances"].reshape(-1, sat)
    return part[2 * kind_index], part[2 * kind_index + 1]


def test_encode_segment_middle_of_five_segment_word():
    segs, syn = _word(["s", "aa", "m", "iy", "t"])
    vec = encode_segment(3, segs, syn)
    vec.check()
    left, right = _boundary_bars(vec, 1)
    # oracle: scan outward to the word edges
    word = syn.words[0]
    mids = [(s.start + s.end) / 2 for s in segs]
    inside = [i for i, m in enumerate(mids) if word.start <= m < word.end]
    assert left.sum() == 3 - inside[0] == 2
    assert right.sum() == inside[-1] - 3 == 2
    assert vec["stress"].tolist() == [0, 1, 0]
    assert vec["word_level"].sum() == 3


def test_encode_segment_initial_and_padding():
    segs, syn = _word(["s", "aa"])
    vec = encode_segment(1, segs, syn)
    left, _ = _boundary_bars(vec, 4)
    assert left.sum() == 0
    first = encode_segment(0, segs, syn)
    pad = phone_features(PAD)
    w = len(pad)
    neighbors = first["neighbors"].reshape(-1, w)
    assert all(np.array_equal(neighbors[i], pad) for i in range(3))


def test_encode_segment_range():
    segs, syn = _word(["s"])
    with pytest.raises(EncodingError):
        encode_segment(len(segs), segs, syn)


def test_encode_frame_constant_context_and_edge_padding():
    segs, syn = _word(["aa"], length=160 * 40)
    labels = align_frames(segs, 160)
    table = default_table()
    n = len(table)
    cfg = EncodingConfig()
    mid = encode_frame(21, labels, segs, syn, cfg)
    taps = mid["tap_phone"].reshape(len(cfg.taps), n)
    assert all(np.argmax(row) == table.index("aa") for row in taps)
    first = encode_frame(0, labels, segs, syn, cfg)
    taps = first["tap_phone"].reshape(len(cfg.taps), n)
    past = [i for i, o in enumerate(cfg.taps.offsets) if o < 0]
    assert all(np.argmax(taps[i]) == table.index(PAD) for i in past)


def test_position_fraction_at_segment_middle():
    segs, syn = _word(["aa"])
    labels = align_frames(segs, 160)
    frames = [l for l in labels if l.segment == 1]
    middle = frames[len(frames) // 2]
    vec = encode_frame(middle.index, labels, segs, syn)
    assert vec["position"][0] == pytest.approx(middle.fraction)
    assert abs(vec["position"][0] - 0.5) <= 1.0 / len(frames)


def test_default_tap_schedule():
    taps = default_tap_schedule(300, 10)
    assert taps.offsets == (-15, -10, -6, -3, -1, 0, 1, 3, 6, 10, 15)
    assert taps.span_ms(10) == 300
    assert default_tap_schedule(10, 10).offsets == (0,)


@given(st.integers(1, 100), st.sampled_from([5.0, 10.0, 20.0]))
def test_tap_schedule_invariants(n, frame_ms):
    window = n * frame_ms
    taps = default_tap_schedule(window, frame_ms)
    assert 0 in taps.offsets
    assert all(b > a for a, b in zip(taps.offsets, taps.offsets[1:]))
    assert taps.span * frame_ms <= window


def test_tap_schedule_rejects_bad_offsets():
    with pytest.raises(ValueError):
        TapSchedule((-1, 1))
    with pytest.raises(ValueError):
        TapSchedule((0, 0))


def test_feature_vector_check():
    layout = segment_layout()
    with pytest.raises(EncodingError):
        FeatureVector(np.zeros(3), layout)
    bad = FeatureVector(np.zeros(layout.width), layout)
    with pytest.raises(EncodingError):
        bad.check()


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_encoder_widths_on_synthetic_corpora(seed):
    from nnspeech.corpus.synthetic import generate_synthetic_corpus
    utt = generate_synthetic_corpus(seed, 1)[0]
    index = SegmentIndex(utt.segments, utt.syntax)
    sw, fw = segment_layout().width, frame_layout().width
    for i in range(len(utt.segments)):
        v = encode_segment(i, utt.segments, utt.syntax, index=index)
        assert len(v.values) == sw
        v.check()
    labels = align_frames(utt.segments, 160)
    for t in range(0, len(labels), 7):
        v = encode_frame(t, labels, utt.segments, utt.syntax, index=index)
        assert len(v.values) == fw
        v.check()


def test_encode_frame_translation_consistent(small_corpus):
    utts, _ = small_corpus
    u = utts[0]
    counts = natural_frame_counts(u.segments, 160)
    segs_a, syn_a = retime(u.segments, u.syntax, counts, 160)
    segs_b, syn_b = retime(u.segments, u.syntax, [counts[0] + 1] + counts[1:], 160)
    la, lb = align_frames(segs_a, 160), align_frames(segs_b, 160)
    ia, ib = SegmentIndex(segs_a, syn_a), SegmentIndex(segs_b, syn_b)
    first_speech = counts[0]
    checked = 0
    for t in range(first_speech + 20, len(la) - 20):
        a = encode_frame(t, la, segs_a, syn_a, index=ia)
        b = encode_frame(t + 1, lb, segs_b, syn_b, index=ib)
        assert np.array_equal(a.values, b.values), t
        checked += 1
    assert checked > 10
