from dataclasses import dataclass

import numpy as np

from ..errors import StructureError
from ..phones import default_table
from .labels import SyntacticAnnotation, check_annotation, check_segments


@dataclass
class Utterance:
    samples: np.ndarray
    segments: list
    syntax: SyntacticAnnotation
    sample_rate: int = 16000
    name: str = ""

    @property
    def n_samples(self):
        return len(self.samples)

    def validate(self, table=None):
        table = table or default_table()
        if np.asarray(self.samples).dtype != np.int16:
            raise StructureError("samples must be 16-bit integers")
        for seg in self.segments:
            table.index(seg.phone)
        check_segments(self.segments, self.n_samples)
        check_annotation(self.syntax, self.n_samples)
