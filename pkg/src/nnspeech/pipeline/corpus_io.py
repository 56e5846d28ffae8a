"""Corpus directories: ``stem.wav`` + ``stem.phn`` + ``stem.syn`` per utterance."""

import os

from ..corpus.labels import format_phone_labels, format_syntax_labels, parse_phone_labels, parse_syntax_labels
from ..corpus.utterance import Utterance
from ..errors import CorpusError, NNSpeechError
from .wavio import read_wav, write_wav

EXTENSIONS = (".wav", ".phn", ".syn")


def read_labels(phn_path):
    """Phone segments and syntax for ``stem.phn`` (syntax from ``stem.syn``)."""
    stem = os.path.splitext(phn_path)[0]
    with open(phn_path) as f:
        segments = parse_phone_labels(f.read())
    with open(stem + ".syn") as f:
        syntax = parse_syntax_labels(f.read())
    return segments, syntax


def load_corpus(directory, sample_rate=16000):
    """All utterances in ``directory``; every problem found is reported at once."""
    if not os.path.isdir(directory):
        raise CorpusError([(directory, "not a directory")])
    stems = sorted({os.path.splitext(n)[0] for n in os.listdir(directory)
                    if os.path.splitext(n)[1] in EXTENSIONS})
    problems, utterances = [], []
    for stem in stems:
        base = os.path.join(directory, stem)
        missing = [ext for ext in EXTENSIONS if not os.path.isfile(base + ext)]
        if missing:
            problems.append((base, "missing " + ", ".join(missing)))
            continue
        try:
            samples = read_wav(base + ".wav", sample_rate)
            with open(base + ".phn") as f:
                segments = parse_phone_labels(f.read())
            with open(base + ".syn") as f:
                syntax = parse_syntax_labels(f.read())
            utt = Utterance(samples, segments, syntax, sample_rate, stem)
            utt.validate()
        except NNSpeechError as exc:
            problems.append((base, exc.line()))
            continue
        utterances.append(utt)
    if problems or not utterances:
        raise CorpusError(problems)
    return utterances


def write_corpus(directory, utterances):
    os.makedirs(directory, exist_ok=True)
    for utt in utterances:
        base = os.path.join(directory, utt.name)
        write_wav(base + ".wav", utt.samples, utt.sample_rate)
        with open(base + ".phn", "w") as f:
            f.write(format_phone_labels(utt.segments))
        with open(base + ".syn", "w") as f:
            f.write(format_syntax_labels(utt.syntax))
