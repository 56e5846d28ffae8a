"""Frame grid helpers: frame labelling, power normalization and retiming."""

import bisect
from dataclasses import dataclass, replace

import numpy as np

from ..phones import SILENCE
from .labels import PhoneSegment, Word


@dataclass(frozen=True)
class FrameLabel:
    index: int
    phone: str
    fraction: float
    segment: int  # -1 when no segment covers the frame centre


def align_frames(segments, frame_len):
    """Label each frame with the segment containing its centre sample.

    Segments are half-open, so a boundary falling exactly on a frame centre
    belongs to the segment that starts there.
    """
    if frame_len <= 0:
        raise ValueError("frame_len must be positive")
    if not segments:
        return []
    starts = [s.start for s in segments]
    n_frames = segments[-1].end // frame_len
    labels = []
    for i in range(n_frames):
        centre = i * frame_len + frame_len / 2.0
        k = bisect.bisect_right(starts, centre) - 1
        if k >= 0 and centre < segments[k].end:
            seg = segments[k]
            labels.append(FrameLabel(i, seg.phone, (centre - seg.start) / seg.length, k))
        else:
            labels.append(FrameLabel(i, SILENCE, 0.0, -1))
    return labels


def frame_powers(samples, frame_len):
    x = np.asarray(samples, dtype=float)
    n = len(x) // frame_len
    if n == 0:
        return np.array([np.mean(x ** 2)])
    return np.mean(x[: n * frame_len].reshape(n, frame_len) ** 2, axis=1)


def normalize_power(samples, silence_threshold_db=-40.0, target_power=1.0, frame_len=160):
    """Scale a waveform so its mean power over non-silent frames equals ``target_power``.

    A frame is silent when its power lies more than ``silence_threshold_db``
    below the loudest frame. Power is the mean square in the input's units.
    Returns a float array; all-silent input comes back unchanged.
    """
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise ValueError("empty waveform")
    powers = frame_powers(x, frame_len)
    peak = powers.max()
    if peak <= 0.0:
        return x.copy()
    active = powers >= peak * 10.0 ** (silence_threshold_db / 10.0)
    gain = np.sqrt(target_power / powers[active].mean())
    return x * gain


def natural_frame_counts(segments, frame_len):
    """Whole-frame durations by rounding each boundary to the frame grid.

    Rounding boundaries rather than lengths keeps the total equal to the
    rounded utterance length; very short segments may get zero frames.
    """
    bounds = [segments[0].start] + [s.end for s in segments]
    grid = [int(np.floor(b / frame_len + 0.5)) for b in bounds]
    return [b - a for a, b in zip(grid[:-1], grid[1:])]


def retime(segments, syntax, frame_counts, frame_len):
    """Move segments onto a new whole-frame timeline, carrying the syntax marks along.

    Syntax times are mapped piecewise-linearly between the old and new segment
    boundaries. Segments start at sample 0 on the new timeline.
    """
    old = np.array([segments[0].start] + [s.end for s in segments], dtype=float)
    new = np.concatenate([[0], np.cumsum(frame_counts)]).astype(float) * frame_len
    new_segments = [PhoneSegment(int(a), int(b), s.phone)
                    for s, a, b in zip(segments, new[:-1], new[1:])]

    def move(t):
        return int(round(float(np.interp(t, old, new))))

    def move_spans(spans):
        return [(move(s), move(e)) for s, e in spans]

    moved = replace(
        syntax,
        syllables=move_spans(syntax.syllables),
        stress=list(syntax.stress),
        words=[Word(move(w.start), move(w.end), w.word_class, w.level) for w in syntax.words],
        phrases=move_spans(syntax.phrases),
        clauses=move_spans(syntax.clauses),
        sentences=move_spans(syntax.sentences),
        tobi_marks=[(move(p), label) for p, label in syntax.tobi_marks],
    )
    return new_segments, moved
