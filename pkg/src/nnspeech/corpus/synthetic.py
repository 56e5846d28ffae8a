"""Rule-driven synthetic corpora.

Every phone has a fixed duration class and a fixed spectrum, so models
trained on the corpus can be checked against the rules that produced it.
"""

from dataclasses import dataclass, field

import numpy as np

from ..phones import SILENCE
from ..vocoder.coder import AcousticFrame, VocoderConfig, flat_lsf, synthesize
from ..vocoder.lpc import lpc_to_lsf
from ..vocoder.signals import resonator_poly
from .labels import PhoneSegment, SyntacticAnnotation, Word
from .utterance import Utterance

# phone -> (formants, bandwidths, voiced, power_db, voicing_boundary)
DEFAULT_SPECTRA = {
    "iy": ((270, 2290, 3010, 3800, 4800), (60, 90, 200, 400, 600), True, -18.0, 8000.0),
    "aa": ((730, 1090, 2440, 3600, 4700), (80, 90, 200, 400, 600), True, -16.0, 8000.0),
    "uw": ((300, 870, 2240, 3500, 4600), (60, 80, 200, 400, 600), True, -19.0, 8000.0),
    "eh": ((530, 1840, 2480, 3600, 4700), (70, 100, 200, 400, 600), True, -17.0, 8000.0),
    "ae": ((660, 1720, 2410, 3500, 4600), (80, 100, 200, 400, 600), True, -16.0, 8000.0),
    "m": ((250, 1100, 2200, 3300, 4500), (100, 200, 300, 400, 600), True, -26.0, 4000.0),
    "n": ((250, 1700, 2600, 3400, 4500), (100, 200, 300, 400, 600), True, -26.0, 4000.0),
    "l": ((360, 1300, 2700, 3500, 4600), (80, 150, 250, 400, 600), True, -24.0, 5000.0),
    "s": ((900, 2500, 4500, 5500, 6800), (600, 600, 300, 400, 500), False, -30.0, 0.0),
    "sh": ((900, 2000, 2800, 4200, 6000), (600, 500, 300, 400, 600), False, -28.0, 0.0),
    "f": ((1000, 2200, 3400, 5000, 6500), (800, 800, 800, 800, 800), False, -36.0, 0.0),
}
SILENCE_POWER_DB = -100.0


@dataclass
class Rulebook:
    """Duration and spectrum rules for synthetic utterances.

    Durations are in whole frames: consonants last ``consonant_frames``, vowels
    ``vowel_ratio`` times that (rounded), silences ``silence_frames``.
    """

    vowels: tuple = ("iy", "aa", "uw", "eh", "ae")
    consonants: tuple = ("m", "n", "l", "s", "sh", "f")
    consonant_frames: int = 6
    vowel_ratio: float = 2.0
    silence_frames: int = 10
    spectra: dict = field(default_factory=lambda: dict(DEFAULT_SPECTRA))
    f0_start: float = 130.0
    f0_end: float = 100.0
    words: tuple = (2, 5)
    tobi_accent: str = "H*"
    tobi_final: str = "L%"

    def duration_frames(self, phone):
        if phone == SILENCE:
            return self.silence_frames
        if phone in self.vowels:
            return int(round(self.consonant_frames * self.vowel_ratio))
        return self.consonant_frames

    def template(self, phone, config=VocoderConfig()):
        """The fixed acoustic frame for a phone (f0 filled per frame later)."""
        if phone == SILENCE:
            return AcousticFrame(flat_lsf(config.order), config.clamp_f0, SILENCE_POWER_DB, 0.0, False)
        formants, bandwidths, voiced, power, boundary = self.spectra[phone]
        n_res = config.order // 2
        poly = resonator_poly(formants[:n_res], bandwidths[:n_res], config.sample_rate)
        lsf = lpc_to_lsf(-poly[1:])
        if voiced:
            return AcousticFrame(lsf, self.f0_start, power, boundary, True)
        return AcousticFrame(lsf, config.clamp_f0, power, 0.0, False)


def _syllable(rng, book):
    shape = rng.integers(0, 3)  # CV, CVC, V
    vowel = str(rng.choice(book.vowels))
    if shape == 2:
        return [vowel]
    onset = [str(rng.choice(book.consonants))]
    coda = [str(rng.choice(book.consonants))] if shape == 1 else []
    return onset + [vowel] + coda


def _frames_for(segments, frame_counts, book, config):
    frames = []
    total = sum(frame_counts)
    t = 0
    for seg, count in zip(segments, frame_counts):
        base = book.template(seg.phone, config)
        for _ in range(count):
            f0 = base.f0
            if base.voiced:
                f0 = book.f0_start + (book.f0_end - book.f0_start) * t / max(total - 1, 1)
            frames.append(AcousticFrame(base.lsf.copy(), float(f0), base.power,
                                        base.voicing_boundary, base.voiced))
            t += 1
    return frames


def _one_utterance(rng, book, config, name):
    hop = config.hop
    phones, syllables, words = [SILENCE], [], []
    n_words = int(rng.integers(book.words[0], book.words[1] + 1))
    for _ in range(n_words):
        content = bool(rng.integers(0, 2))
        level = int(rng.integers(0, 16)) if content else int(rng.integers(0, 4))
        n_syl = int(rng.integers(1, 3)) if content else 1
        first = len(syllables)
        for s in range(n_syl):
            start = len(phones)
            phones += _syllable(rng, book)
            if content:
                stress = 1 if s == 0 else int(rng.choice([0, 2]))
            else:
                stress = 0
            syllables.append((start, len(phones), stress))
        words.append((syllables[first][0], len(phones), "content" if content else "function", level))
    phones.append(SILENCE)

    counts = [book.duration_frames(p) for p in phones]
    bounds = np.concatenate([[0], np.cumsum(counts)]) * hop
    segments = [PhoneSegment(int(bounds[i]), int(bounds[i + 1]), p) for i, p in enumerate(phones)]

    def span(i, j):
        return int(bounds[i]), int(bounds[j])

    ann = SyntacticAnnotation()
    for start, end, stress in syllables:
        ann.syllables.append(span(start, end))
        ann.stress.append(stress)
    for start, end, wclass, level in words:
        ann.words.append(Word(*span(start, end), wclass, level))
        if wclass == "content":
            syl = next(s for s in syllables if s[0] == start)
            ann.tobi_marks.append(((int(bounds[syl[0]]) + int(bounds[syl[1]])) // 2, book.tobi_accent))
    split = int(rng.integers(1, n_words)) if n_words > 1 else n_words
    first_words, last_words = words[:split], words[split:]
    for group in (first_words, last_words):
        if group:
            ann.phrases.append(span(group[0][0], group[-1][1]))
    sentence = span(words[0][0], words[-1][1])
    ann.clauses.append(sentence)
    ann.sentences.append(sentence)
    ann.tobi_marks.append((sentence[1], book.tobi_final))

    frames = _frames_for(segments, counts, book, config)
    wave = synthesize(frames, config)
    samples = np.clip(np.round(wave * 32767.0), -32768, 32767).astype(np.int16)
    return Utterance(samples, segments, ann, config.sample_rate, name), frames


def generate_synthetic_corpus(seed, n_utterances, rulebook=None, config=VocoderConfig(),
                              return_frames=False):
    """Deterministic rulebook corpus; optionally also the per-frame rule spectra."""
    if n_utterances <= 0:
        raise ValueError("n_utterances must be positive")
    book = rulebook or Rulebook()
    rng = np.random.default_rng(seed)
    utterances, rule_frames = [], []
    for i in range(n_utterances):
        utt, frames = _one_utterance(rng, book, config, f"syn{seed:04d}_{i:04d}")
        utterances.append(utt)
        rule_frames.append(frames)
    if return_frames:
        return utterances, rule_frames
    return utterances
