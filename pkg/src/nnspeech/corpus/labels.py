"""Phone (.phn) and syntax (.syn) label files."""

from dataclasses import dataclass, field

from ..errors import LabelParseError, StructureError
from ..phones import default_table

STRESS_NONE, STRESS_PRIMARY, STRESS_SECONDARY = 0, 1, 2
WORD_CLASSES = ("function", "content")
MAX_WORD_LEVEL = 15


@dataclass(frozen=True)
class PhoneSegment:
    start: int
    end: int
    phone: str

    @property
    def length(self):
        return self.end - self.start


@dataclass(frozen=True)
class Word:
    start: int
    end: int
    word_class: str
    level: int


@dataclass
class SyntacticAnnotation:
    syllables: list = field(default_factory=list)
    stress: list = field(default_factory=list)
    words: list = field(default_factory=list)
    phrases: list = field(default_factory=list)
    clauses: list = field(default_factory=list)
    sentences: list = field(default_factory=list)
    tobi_marks: list = field(default_factory=list)

    def spans(self, kind):
        """(start, end) pairs of one unit kind: syllable/word/phrase/clause/sentence."""
        if kind == "word":
            return [(w.start, w.end) for w in self.words]
        return list(getattr(self, {"syllable": "syllables", "phrase": "phrases",
                                    "clause": "clauses", "sentence": "sentences"}[kind]))


UNIT_KINDS = ("syllable", "word", "phrase", "clause", "sentence")


def parse_phone_labels(text, table=None):
    table = table or default_table()
    segments = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        tokens = line.split()
        if not tokens:
            continue
        if len(tokens) != 3:
            raise LabelParseError(f"expected 'start end label', got {line!r}", lineno)
        try:
            start, end = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise LabelParseError(f"non-integer sample index in {line!r}", lineno) from None
        table.index(tokens[2])
        segments.append(PhoneSegment(start, end, tokens[2]))
    check_segments(segments)
    return segments


def check_segments(segments, n_samples=None):
    prev = None
    for i, seg in enumerate(segments):
        if seg.start < 0 or seg.start >= seg.end:
            raise StructureError(f"segment {i} has invalid span ({seg.start}, {seg.end})")
        if prev is not None and seg.start != prev.end:
            kind = "overlap" if seg.start < prev.end else "gap"
            raise StructureError(
                f"{kind} between segment {i - 1} and {i}: {prev.end} != {seg.start}")
        prev = seg
    if n_samples is not None and segments and segments[-1].end > n_samples:
        raise StructureError(f"labels end at {segments[-1].end} beyond {n_samples} samples")


def format_phone_labels(segments):
    return "".join(f"{s.start} {s.end} {s.phone}\n" for s in segments)


def _keyvals(tokens, lineno):
    out = {}
    for tok in tokens:
        key, sep, value = tok.partition("=")
        if not sep:
            raise LabelParseError(f"expected key=value, got {tok!r}", lineno)
        out[key] = value
    return out


def _span(tokens, lineno):
    try:
        start, end = int(tokens[1]), int(tokens[2])
    except (IndexError, ValueError):
        raise LabelParseError(f"bad span in {' '.join(tokens)!r}", lineno) from None
    return start, end


def parse_syntax_labels(text, n_samples=None):
    ann = SyntacticAnnotation()
    for lineno, line in enumerate(text.splitlines(), start=1):
        tokens = line.split()
        if not tokens:
            continue
        tag = tokens[0]
        if tag == "TOBI":
            if len(tokens) != 3:
                raise LabelParseError("expected 'TOBI pos LABEL'", lineno)
            try:
                pos = int(tokens[1])
            except ValueError:
                raise LabelParseError(f"bad ToBI position {tokens[1]!r}", lineno) from None
            ann.tobi_marks.append((pos, tokens[2]))
            continue
        start, end = _span(tokens, lineno)
        extra = _keyvals(tokens[3:], lineno)
        if tag == "SYL":
            code = extra.get("stress", "0")
            if code not in ("0", "1", "2"):
                raise StructureError(f"line {lineno}: unknown stress code {code!r}")
            ann.syllables.append((start, end))
            ann.stress.append(int(code))
        elif tag == "WRD":
            word_class = extra.get("class")
            if word_class not in WORD_CLASSES:
                raise StructureError(f"line {lineno}: unknown word class {word_class!r}")
            try:
                level = int(extra.get("level", "0"))
            except ValueError:
                raise LabelParseError(f"bad level {extra.get('level')!r}", lineno) from None
            if not 0 <= level <= MAX_WORD_LEVEL:
                raise StructureError(f"line {lineno}: word level {level} outside 0..{MAX_WORD_LEVEL}")
            ann.words.append(Word(start, end, word_class, level))
        elif tag == "PHR":
            ann.phrases.append((start, end))
        elif tag == "CLS":
            ann.clauses.append((start, end))
        elif tag == "SEN":
            ann.sentences.append((start, end))
        else:
            raise LabelParseError(f"unknown record type {tag!r}", lineno)
    check_annotation(ann, n_samples)
    return ann


def _inside(inner, outer):
    return outer[0] <= inner[0] and inner[1] <= outer[1]


def check_annotation(ann, n_samples=None):
    limit = n_samples if n_samples is not None else float("inf")
    for kind in UNIT_KINDS:
        for start, end in ann.spans(kind):
            if not (0 <= start < end <= limit):
                raise StructureError(f"{kind} span ({start}, {end}) invalid or outside utterance")
    for pos, _ in ann.tobi_marks:
        if not 0 <= pos <= limit:
            raise StructureError(f"ToBI mark at {pos} outside utterance")
    if len(ann.stress) != len(ann.syllables):
        raise StructureError("stress list length differs from syllable count")
    words = ann.spans("word")
    for syl in ann.syllables:
        owners = sum(_inside(syl, w) for w in words)
        if owners != 1:
            raise StructureError(f"syllable {syl} lies within {owners} words (crosses a word boundary?)")
    for w in words:
        owners = sum(_inside(w, s) for s in ann.sentences)
        if owners != 1:
            raise StructureError(f"word {w} lies within {owners} sentences")


def format_syntax_labels(ann):
    lines = []
    for (s, e), code in zip(ann.syllables, ann.stress):
        lines.append(f"SYL {s} {e} stress={code}")
    for w in ann.words:
        lines.append(f"WRD {w.start} {w.end} class={w.word_class} level={w.level}")
    lines += [f"PHR {s} {e}" for s, e in ann.phrases]
    lines += [f"CLS {s} {e}" for s, e in ann.clauses]
    lines += [f"SEN {s} {e}" for s, e in ann.sentences]
    lines += [f"TOBI {p} {label}" for p, label in ann.tobi_marks]
    return "".join(line + "\n" for line in lines)
