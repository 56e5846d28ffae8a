"""Segment- and frame-level context encodings."""

import bisect
from dataclasses import dataclass, field

import numpy as np

from ..corpus.labels import MAX_WORD_LEVEL, UNIT_KINDS
from ..errors import EncodingError
from ..phones import FEATURE_WIDTH, PAD, default_table
from .codes import BAR, BINARY, ONE_HOT, REAL, FeatureVector, Field, Layout, one_of_n, saturating_bar
from .taps import TapSchedule, default_tap_schedule

DEFAULT_TOBI = ("H*", "L*", "L+H*", "L*+H", "H+!H*", "!H*", "L-", "H-", "L%", "H%")


@dataclass(frozen=True)
class EncodingConfig:
    context_k: int = 3
    saturation: int = 7
    tobi_labels: tuple = DEFAULT_TOBI
    frame_len: int = 160
    # frame-level boundary distances are counted in units of this many frames
    distance_unit_frames: int = 2
    duration_levels: int = 15
    taps: TapSchedule = field(default_factory=default_tap_schedule)


def _n_phones():
    return len(default_table())


def _distance_field(name, n_kinds, config):
    return Field(name, n_kinds * 2 * config.saturation, BAR, groups=n_kinds * 2)


def prosody_fields(config):
    return (
        Field("stress", 3, ONE_HOT),
        Field("word_class", 1, BINARY),
        Field("word_level", MAX_WORD_LEVEL, BAR),
        _distance_field("boundary_distances", len(UNIT_KINDS), config),
        Field("tobi", len(config.tobi_labels), BINARY),
    )


def segment_layout(config=EncodingConfig()):
    k = config.context_k
    return Layout((
        Field("phone", _n_phones(), ONE_HOT),
        Field("features", FEATURE_WIDTH, BINARY),
        Field("neighbors", 2 * k * FEATURE_WIDTH, BINARY),
    ) + prosody_fields(config))


FRAME_KINDS = ("phone",) + UNIT_KINDS


def frame_layout(config=EncodingConfig()):
    n_taps = len(config.taps)
    return Layout((
        Field("tap_phone", n_taps * _n_phones(), ONE_HOT, groups=n_taps),
        Field("tap_features", n_taps * FEATURE_WIDTH, BINARY),
        Field("duration", config.duration_levels, BAR),
        Field("position", 1, REAL),
        _distance_field("frame_distances", len(FRAME_KINDS), config),
    ) + prosody_fields(config))


class SegmentIndex:
    """Containment lookups of segments within syntactic units, computed once per utterance."""

    def __init__(self, segments, syntax):
        self.segments = segments
        self.syntax = syntax
        self.mid = np.array([(s.start + s.end) / 2.0 for s in segments])
        self.ends = [s.end for s in segments]
        self.spans = {kind: syntax.spans(kind) for kind in UNIT_KINDS}
        self.cache = {}

    @staticmethod
    def _containing(spans, t):
        for j, (s, e) in enumerate(spans):
            if s <= t < e:
                return j
        return None

    def unit_range(self, kind, i):
        """Segment index range [a, b) of the unit containing segment i, or None."""
        j = self._containing(self.spans[kind], self.mid[i])
        if j is None:
            return None
        s, e = self.spans[kind][j]
        inside = np.nonzero((self.mid >= s) & (self.mid < e))[0]
        return int(inside[0]), int(inside[-1]) + 1

    def syllable_of(self, i):
        return self._containing(self.syntax.syllables, self.mid[i])

    def word_of(self, i):
        return self._containing(self.spans["word"], self.mid[i])

    def tobi_of(self, i):
        # a mark at p belongs to the segment covering (start, end], so boundary
        # tones at a unit's end attach to its last segment
        out = []
        for pos, label in self.syntax.tobi_marks:
            k = min(bisect.bisect_left(self.ends, pos), len(self.segments) - 1)
            if k == i:
                out.append(label)
        return out


def _prosody(i, index, config):
    key = (i, config)
    cached = index.cache.get(key)
    if cached is None:
        cached = index.cache[key] = _prosody_uncached(i, index, config)
    return cached


def _prosody_uncached(i, index, config):
    syn = index.syntax
    parts = []
    j = index.syllable_of(i) if i >= 0 else None
    parts.append(one_of_n(syn.stress[j] if j is not None else 0, 3))
    w = index.word_of(i) if i >= 0 else None
    word = syn.words[w] if w is not None else None
    parts.append(np.array([1.0 if word is not None and word.word_class == "content" else 0.0]))
    parts.append(saturating_bar(word.level if word is not None else 0, MAX_WORD_LEVEL))
    for kind in UNIT_KINDS:
        rng = index.unit_range(kind, i) if i >= 0 else None
        left, right = (i - rng[0], rng[1] - 1 - i) if rng is not None else (0, 0)
        parts.append(saturating_bar(left, config.saturation))
        parts.append(saturating_bar(right, config.saturation))
    labels = index.tobi_of(i) if i >= 0 else []
    parts.append(np.array([1.0 if lab in labels else 0.0 for lab in config.tobi_labels]))
    return np.concatenate(parts)


def _phone_at(segments, i):
    return segments[i].phone if 0 <= i < len(segments) else PAD


def encode_segment(segment_index, segments, syntax, config=EncodingConfig(), index=None):
    """Duration-network context of one segment, laid out per ``segment_layout``."""
    if not 0 <= segment_index < len(segments):
        raise EncodingError(f"segment index {segment_index} outside 0..{len(segments) - 1}")
    table = default_table()
    index = index or SegmentIndex(segments, syntax)
    i = segment_index
    phone = segments[i].phone
    k = config.context_k
    neighbors = [table.features[table.index(_phone_at(segments, i + d))]
                 for d in list(range(-k, 0)) + list(range(1, k + 1))]
    values = np.concatenate([
        one_of_n(table.index(phone), len(table)),
        table.features[table.index(phone)],
        np.concatenate(neighbors) if neighbors else np.zeros(0),
        _prosody(i, index, config),
    ])
    return FeatureVector(values, segment_layout(config))


def duration_level(n_frames, levels):
    if n_frames <= 1.0:
        return 0
    return int(min(levels, round(2.0 * np.log2(n_frames))))


def encode_frame(frame_index, frame_labels, segments, syntax, config=EncodingConfig(), index=None):
    """Acoustic-network context of one frame, laid out per ``frame_layout``."""
    table = default_table()
    index = index or SegmentIndex(segments, syntax)
    n = len(frame_labels)
    parts = []
    tap_phones = [frame_labels[frame_index + o].phone if 0 <= frame_index + o < n else PAD
                  for o in config.taps.offsets]
    parts.append(np.concatenate([one_of_n(table.index(p), len(table)) for p in tap_phones]))
    parts.append(np.concatenate([table.features[table.index(p)] for p in tap_phones]))

    label = frame_labels[frame_index]
    seg_i = label.segment
    flen = config.frame_len
    if seg_i >= 0:
        seg = segments[seg_i]
        parts.append(saturating_bar(duration_level(seg.length / flen, config.duration_levels),
                                    config.duration_levels))
    else:
        parts.append(np.zeros(config.duration_levels))
    parts.append(np.array([label.fraction]))

    centre = frame_index * flen + flen / 2.0
    unit = config.distance_unit_frames * flen
    for kind in FRAME_KINDS:
        if kind == "phone":
            span = (segments[seg_i].start, segments[seg_i].end) if seg_i >= 0 else None
        else:
            j = index._containing(index.spans[kind], centre)
            span = index.spans[kind][j] if j is not None else None
        if span is None:
            left = right = 0
        else:
            left, right = int((centre - span[0]) // unit), int((span[1] - centre) // unit)
        parts.append(saturating_bar(left, config.saturation))
        parts.append(saturating_bar(right, config.saturation))
    parts.append(_prosody(seg_i, index, config) if seg_i >= 0 else _empty_prosody(config))
    return FeatureVector(np.concatenate(parts), frame_layout(config))


def _empty_prosody(config):
    width = sum(f.width for f in prosody_fields(config))
    out = np.zeros(width)
    out[0] = 1.0  # stress "none"
    return out
