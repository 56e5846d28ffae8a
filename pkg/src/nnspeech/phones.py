"""Phone inventory and articulatory feature table.

The table lives in ``data/phone_features.tsv``: one row per TIMIT phone plus a
reserved padding entry used beyond utterance edges.
"""

import csv
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import numpy as np

from .errors import InventoryError

SILENCE = "h#"
PAD = "<pad>"

MANNERS = ("stop", "affricate", "fricative", "nasal", "lateral", "rhotic",
           "glide", "aspirate", "flap", "vowel")
PLACES = ("bilabial", "labiodental", "dental", "alveolar", "postalveolar",
          "palatal", "velar", "glottal")
HEIGHTS = ("high", "mid", "low")
BACKNESS = ("front", "central", "back")
BINARY_FIELDS = ("rounded", "syllabic", "closure", "release", "silence", "pad")

# (field name, width); categorical fields are one-hot or all-zero
FEATURE_FIELDS = (
    ("voiced", 1),
    ("manner", len(MANNERS)),
    ("place", len(PLACES)),
    ("height", len(HEIGHTS)),
    ("backness", len(BACKNESS)),
) + tuple((name, 1) for name in BINARY_FIELDS)

FEATURE_WIDTH = sum(w for _, w in FEATURE_FIELDS)

_CATEGORIES = {"manner": MANNERS, "place": PLACES, "height": HEIGHTS,
               "backness": BACKNESS}


@dataclass(frozen=True)
class PhoneTable:
    phones: tuple
    features: np.ndarray
    rows: dict

    def index(self, phone):
        try:
            return self.rows[phone]
        except KeyError:
            raise InventoryError(phone) from None

    def __contains__(self, phone):
        return phone in self.rows

    def __len__(self):
        return len(self.phones)

    def is_vowel(self, phone):
        return self.features[self.index(phone), _offset("manner") + MANNERS.index("vowel")] == 1.0

    def is_silence(self, phone):
        return self.features[self.index(phone), _offset("silence")] == 1.0


def _offset(field):
    pos = 0
    for name, width in FEATURE_FIELDS:
        if name == field:
            return pos
        pos += width
    raise KeyError(field)


def _row_vector(record):
    vec = np.zeros(FEATURE_WIDTH)
    vec[_offset("voiced")] = float(record["voiced"])
    for field, values in _CATEGORIES.items():
        value = record[field]
        if value != "-":
            vec[_offset(field) + values.index(value)] = 1.0
    for field in BINARY_FIELDS:
        vec[_offset(field)] = float(record[field])
    return vec


def read_phone_table(path_or_file):
    if hasattr(path_or_file, "read"):
        lines = path_or_file.read().splitlines()
    else:
        with open(path_or_file, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    reader = csv.DictReader(lines, delimiter="\t")
    phones, vectors = [], []
    for record in reader:
        phones.append(record["phone"])
        vectors.append(_row_vector(record))
    if SILENCE not in phones or PAD not in phones:
        raise ValueError("feature table must define the silence and padding rows")
    features = np.vstack(vectors)
    features.setflags(write=False)
    return PhoneTable(tuple(phones), features, {p: i for i, p in enumerate(phones)})


@lru_cache(maxsize=1)
def default_table():
    with resources.files("nnspeech").joinpath("data").joinpath("phone_features.tsv").open(encoding="utf-8") as fh:
        return read_phone_table(fh)
