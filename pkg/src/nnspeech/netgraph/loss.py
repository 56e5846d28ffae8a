import numpy as np


def weighted_euclidean(y, t, w):
    """sum_i w_i (y_i - t_i)^2"""
    y, t, w = (np.asarray(a, dtype=float) for a in (y, t, w))
    if y.shape[-1] != t.shape[-1] or y.shape[-1] != w.shape[-1]:
        raise ValueError(f"length mismatch: {y.shape[-1]}, {t.shape[-1]}, {w.shape[-1]}")
    if np.any(w < 0):
        raise ValueError("loss weights must be non-negative")
    return float(np.sum(w * (y - t) ** 2))


def weighted_euclidean_grad(y, t, w):
    return 2.0 * np.asarray(w) * (np.asarray(y) - np.asarray(t))
