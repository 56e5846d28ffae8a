"""Linear prediction and line spectral frequencies.

Sign convention: A(z) = 1 - sum_k a_k z^-k, so ``coefficients`` are the
predictor weights a_1..a_P.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from ..errors import NumericalError


@dataclass
class LpcModel:
    coefficients: np.ndarray
    gain: float = 1.0

    @property
    def order(self):
        return len(self.coefficients)

    def polynomial(self):
        """Coefficients of A(z) in powers of z^-1, leading 1 included."""
        return np.concatenate([[1.0], -np.asarray(self.coefficients, dtype=float)])


def autocorrelate(frame, order, window=False):
    x = np.asarray(frame, dtype=float)
    if len(x) < order + 1:
        raise ValueError(f"block of {len(x)} samples too short for order {order}")
    if window:
        x = x * np.hamming(len(x))
    return np.array([np.dot(x[: len(x) - k], x[k:]) for k in range(order + 1)])


def levinson_durbin(r, order):
    """Solve the Toeplitz normal equations by the Levinson-Durbin recursion.

    Returns ``(LpcModel, reflection)``; ``gain**2`` is the final prediction
    error energy.
    """
    r = np.asarray(r, dtype=float)
    if r[0] <= 0.0:
        raise NumericalError("r[0] must be positive")
    a = np.zeros(order)
    reflection = np.zeros(order)
    err = r[0]
    for i in range(order):
        acc = r[i + 1] - np.dot(a[:i], r[i:0:-1])
        k = acc / err
        if not abs(k) < 1.0:
            raise NumericalError(f"reflection coefficient {k:.6g} has magnitude >= 1", stage=i + 1)
        a[:i] = a[:i] - k * a[:i][::-1]
        a[i] = k
        reflection[i] = k
        err *= 1.0 - k * k
    return LpcModel(a, float(np.sqrt(err))), reflection


def _split_polynomials(poly):
    """Sum and difference polynomials with their trivial roots at z = +-1 removed."""
    p = np.concatenate([poly, [0.0]])
    sym = p + p[::-1]
    anti = p - p[::-1]
    if len(poly) % 2 == 1:  # even order
        sym = np.polydiv(sym, [1.0, 1.0])[0]
        anti = np.polydiv(anti, [1.0, -1.0])[0]
    else:
        anti = np.polydiv(anti, [1.0, 0.0, -1.0])[0]
    return sym, anti


def _cosine_series(sym_poly):
    """Real-valued zero-phase form of a symmetric polynomial: c0 + 2*sum c_k cos(k w)."""
    m = (len(sym_poly) - 1) // 2
    centre = sym_poly[m]
    tail = sym_poly[m + 1:]
    return centre, tail


def _eval_series(centre, tail, w):
    k = np.arange(1, len(tail) + 1)
    return centre + 2.0 * np.cos(np.multiply.outer(w, k)) @ tail


def _roots_on_circle(sym_poly, expected, grids=(2048, 16384, 131072)):
    if expected == 0:
        return np.array([])
    centre, tail = _cosine_series(sym_poly)
    for n in grids:
        w = np.linspace(0.0, np.pi, n + 1)
        f = _eval_series(centre, tail, w)
        sign = np.signbit(f)
        idx = np.nonzero(sign[:-1] != sign[1:])[0]
        if len(idx) == expected:
            break
    else:
        raise NumericalError(f"could not bracket {expected} line spectral roots (found {len(idx)})")
    roots = []
    for i in idx:
        lo, hi = w[i], w[i + 1]
        if f[i] == 0.0:
            roots.append(lo)
        elif f[i + 1] == 0.0:
            roots.append(hi)
        else:
            roots.append(brentq(lambda x: _eval_series(centre, tail, np.array([x]))[0],
                                lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps))
    return np.array(roots)


def lpc_to_lsf(model):
    coeffs = model.coefficients if isinstance(model, LpcModel) else np.asarray(model, dtype=float)
    order = len(coeffs)
    poly = np.concatenate([[1.0], -np.asarray(coeffs, dtype=float)])
    sym, anti = _split_polynomials(poly)
    n_sym = (order + 1) // 2
    lsf = np.sort(np.concatenate([_roots_on_circle(sym, n_sym),
                                  _roots_on_circle(anti, order - n_sym)]))
    if len(lsf) != order or not (np.all(np.diff(lsf) > 0) and 0 < lsf[0] and lsf[-1] < np.pi):
        raise NumericalError("line spectral frequencies are not interlaced; filter is not minimum phase")
    return lsf


def check_lsf(lsf):
    lsf = np.asarray(lsf, dtype=float)
    if lsf.ndim != 1 or len(lsf) == 0:
        raise ValueError("LSF vector must be one-dimensional and non-empty")
    if not (lsf[0] > 0.0 and lsf[-1] < np.pi and np.all(np.diff(lsf) > 0.0)):
        raise ValueError("LSFs must be strictly increasing inside (0, pi)")
    return lsf


def _product(freqs):
    poly = np.array([1.0])
    for w in freqs:
        poly = np.convolve(poly, [1.0, -2.0 * np.cos(w), 1.0])
    return poly


def lsf_to_lpc(lsf):
    """Rebuild predictor coefficients from line spectral frequencies."""
    lsf = check_lsf(lsf)
    order = len(lsf)
    sym = _product(lsf[0::2])
    anti = _product(lsf[1::2])
    if order % 2 == 0:
        sym = np.convolve(sym, [1.0, 1.0])
        anti = np.convolve(anti, [1.0, -1.0])
    else:
        anti = np.convolve(anti, [1.0, 0.0, -1.0])
    poly = 0.5 * (sym + anti)
    return -poly[1: order + 1]


def lpc_response(coefficients, freqs):
    """Magnitude of 1/A(e^jw) at the given angular frequencies."""
    poly = np.concatenate([[1.0], -np.asarray(coefficients, dtype=float)])
    z = np.exp(-1j * np.multiply.outer(np.asarray(freqs, dtype=float), np.arange(len(poly))))
    return 1.0 / np.abs(z @ poly)
