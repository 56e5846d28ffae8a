"""Primitive input codes and the layout descriptor that fixes vector widths."""

from dataclasses import dataclass

import numpy as np

from ..errors import EncodingError
from ..phones import default_table

ONE_HOT = "one_hot"
BAR = "bar"
BINARY = "binary"
REAL = "real"


def one_of_n(index, n):
    if not 0 <= index < n:
        raise EncodingError(f"index {index} outside 0..{n - 1}")
    out = np.zeros(n)
    out[index] = 1.0
    return out


def bar_code(value, max_value):
    """Thermometer code: ``value`` leading ones in a vector of length ``max_value``."""
    if not 0 <= value <= max_value:
        raise EncodingError(f"value {value} outside 0..{max_value}")
    out = np.zeros(max_value)
    out[:value] = 1.0
    return out


def saturating_bar(value, max_value):
    return bar_code(int(min(max(value, 0), max_value)), max_value)


def phone_features(phone, table=None):
    table = table or default_table()
    return table.features[table.index(phone)].copy()


def phone_id(phone, table=None):
    table = table or default_table()
    return one_of_n(table.index(phone), len(table))


@dataclass(frozen=True)
class Field:
    name: str
    width: int
    kind: str = BINARY
    # for repeated one-hot/bar groups (e.g. one code per tap)
    groups: int = 1


@dataclass(frozen=True)
class Layout:
    fields: tuple

    @property
    def width(self):
        return sum(f.width for f in self.fields)

    def names(self):
        return [f.name for f in self.fields]

    def field(self, name):
        for f in self.fields:
            if f.name == name:
                return f
        raise KeyError(name)

    def slice(self, name):
        pos = 0
        for f in self.fields:
            if f.name == name:
                return slice(pos, pos + f.width)
            pos += f.width
        raise KeyError(name)

    def subset(self, names):
        return Layout(tuple(self.field(n) for n in names))

    def describe(self):
        return "".join(f"{f.name}\t{f.width}\t{f.kind}\n" for f in self.fields)


@dataclass
class FeatureVector:
    values: np.ndarray
    layout: Layout

    def __post_init__(self):
        if len(self.values) != self.layout.width:
            raise EncodingError(f"vector width {len(self.values)} != layout width {self.layout.width}")

    def __getitem__(self, name):
        return self.values[self.layout.slice(name)]

    def select(self, names):
        return np.concatenate([self[n] for n in names]) if names else np.zeros(0)

    def check(self):
        """Verify value range and the one-hot / thermometer shape of each field."""
        if np.any(self.values < 0.0) or np.any(self.values > 1.0):
            raise EncodingError("values outside [0, 1]")
        for f in self.layout.fields:
            part = self[f.name].reshape(f.groups, -1)
            if f.kind == ONE_HOT and not np.all(part.sum(axis=1) == 1.0):
                raise EncodingError(f"field {f.name} is not a 1-of-n code")
            if f.kind == BAR and np.any(np.diff(part, axis=1) > 0.0):
                raise EncodingError(f"field {f.name} is not a thermometer code")
