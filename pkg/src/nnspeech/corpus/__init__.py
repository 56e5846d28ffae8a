from .frames import FrameLabel, align_frames, natural_frame_counts, normalize_power, retime
from .labels import (PhoneSegment, SyntacticAnnotation, Word, format_phone_labels,
                     format_syntax_labels, parse_phone_labels, parse_syntax_labels)
from .synthetic import Rulebook, generate_synthetic_corpus
from .utterance import Utterance

__all__ = [
    "FrameLabel", "PhoneSegment", "Rulebook", "SyntacticAnnotation", "Utterance", "Word",
    "align_frames", "format_phone_labels", "format_syntax_labels", "generate_synthetic_corpus",
    "natural_frame_counts", "normalize_power", "parse_phone_labels", "parse_syntax_labels",
    "retime",
]
