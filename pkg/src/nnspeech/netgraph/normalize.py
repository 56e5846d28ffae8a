import numpy as np

LOW, HIGH = 0.1, 0.9


class TargetNormalizer:
    """Per-dimension affine map of training targets onto [0.1, 0.9]."""

    def __init__(self, lo, hi):
        self.lo = np.asarray(lo, dtype=float)
        self.hi = np.asarray(hi, dtype=float)

    @classmethod
    def fit(cls, targets):
        t = np.asarray(targets, dtype=float)
        return cls(t.min(axis=0), t.max(axis=0))

    def _span(self):
        span = self.hi - self.lo
        return np.where(span > 0, span, 1.0)

    def forward(self, x):
        x = np.asarray(x, dtype=float)
        y = LOW + (HIGH - LOW) * (x - self.lo) / self._span()
        return np.where(self.hi > self.lo, y, 0.5)

    def inverse(self, y):
        y = np.asarray(y, dtype=float)
        x = self.lo + (y - LOW) / (HIGH - LOW) * self._span()
        return np.where(self.hi > self.lo, x, self.lo)

    def to_dict(self):
        return {"lo": self.lo.tolist(), "hi": self.hi.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(d["lo"], d["hi"])


def variance_weights(normalized_targets, floor=0.01):
    """Inverse per-dimension variance, floored and scaled to mean 1."""
    var = np.var(np.asarray(normalized_targets, dtype=float), axis=0)
    w = 1.0 / np.maximum(var, floor)
    return w / w.mean()
