"""Truncated Laurent/Taylor series with complex coefficients.

A :class:`TruncatedSeries` stores ``coeffs[j]`` as the coefficient of
``z**(lowest_index + j)``; everything above ``order`` is unknown, and every
operation returns a result whose retained coefficients are exact (up to
rounding) for the operands' retained coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IncompatibleIndex

# below this length direct convolution is faster than the FFT
FFT_THRESHOLD = 64


def _next_pow2(n: int) -> int:
    return 1 << max(0, (n - 1).bit_length())


def convolve(a, b, n=None, method="auto"):
    """First ``n`` coefficients of the product of coefficient vectors."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    full = len(a) + len(b) - 1
    if n is None:
        n = full
    if len(a) == 0 or len(b) == 0 or n <= 0:
        return np.zeros(max(n, 0), dtype=complex)
    a = a[:n]
    b = b[:n]
    if method == "auto":
        method = "direct" if min(len(a), len(b)) < FFT_THRESHOLD else "fft"
    if method == "direct":
        out = np.convolve(a, b)
    elif method == "fft":
        size = _next_pow2(len(a) + len(b) - 1)
        out = np.fft.ifft(np.fft.fft(a, size) * np.fft.fft(b, size))
    else:
        raise ValueError(f"unknown convolution method {method!r}")
    res = np.zeros(n, dtype=complex)
    m = min(n, len(a) + len(b) - 1)
    res[:m] = out[:m]
    return res


def reciprocal_coeffs(u, n):
    """First ``n`` Taylor coefficients of ``1/u`` (requires ``u[0] != 0``)."""
    u = np.asarray(u, dtype=complex)
    if len(u) == 0 or u[0] == 0:
        raise IncompatibleIndex("reciprocal of a series with zero leading coefficient")
    v = np.array([1.0 / u[0]], dtype=complex)
    prec = 1
    while prec < n:
        prec = min(2 * prec, n)
        uv = convolve(u[:prec], v, prec)
        uv = -uv
        uv[0] += 2.0
        v = convolve(v, uv, prec)
    return v[:n]


@dataclass(frozen=True, eq=False)
class TruncatedSeries:
    coeffs: np.ndarray
    lowest_index: int = 0

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.ndim != 1 or len(c) == 0:
            raise ValueError("coeffs must be a non-empty 1-d sequence")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    # --- construction -------------------------------------------------
    @classmethod
    def zeros(cls, order, lowest_index=0):
        return cls(np.zeros(order - lowest_index + 1, dtype=complex), lowest_index)

    @classmethod
    def monomial(cls, power, order, coeff=1.0):
        s = np.zeros(order + 1, dtype=complex)
        s[power] = coeff
        return cls(s, 0)

    @classmethod
    def constant(cls, value, order):
        return cls.monomial(0, order, value)

    # --- basic properties -------------------------------------------
    @property
    def order(self) -> int:
        return self.lowest_index + len(self.coeffs) - 1

    def coeff(self, power):
        j = power - self.lowest_index
        if j < 0:
            return 0j
        if j >= len(self.coeffs):
            raise IndexError(f"coefficient of z^{power} beyond truncation order {self.order}")
        return complex(self.coeffs[j])

    def truncate(self, order):
        if order > self.order:
            raise IncompatibleIndex(f"cannot extend order {self.order} to {order}")
        return TruncatedSeries(self.coeffs[: order - self.lowest_index + 1], self.lowest_index)

    def taylor(self, order=None):
        """Coefficient vector from ``z**0`` upward (requires no negative powers)."""
        if self.lowest_index < 0:
            raise IncompatibleIndex("series has negative powers")
        order = self.order if order is None else order
        out = np.zeros(order + 1, dtype=complex)
        src = self.coeffs[: max(0, order - self.lowest_index + 1)]
        out[self.lowest_index : self.lowest_index + len(src)] = src
        return out

    def valuation(self, tol=0.0):
        nz = np.nonzero(np.abs(self.coeffs) > tol)[0]
        return None if len(nz) == 0 else self.lowest_index + int(nz[0])

    # --- arithmetic ---------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, TruncatedSeries):
            other = TruncatedSeries.constant(other, self.order)
        lo = min(self.lowest_index, other.lowest_index)
        hi = min(self.order, other.order)
        out = np.zeros(hi - lo + 1, dtype=complex)
        for s in (self, other):
            c = s.coeffs[: max(0, hi - s.lowest_index + 1)]
            out[s.lowest_index - lo : s.lowest_index - lo + len(c)] += c
        return TruncatedSeries(out, lo)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries(-self.coeffs, self.lowest_index)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries):
            return TruncatedSeries(self.coeffs * complex(other), self.lowest_index)
        return self.mul(other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, TruncatedSeries):
            return self * other.reciprocal()
        return TruncatedSeries(self.coeffs / complex(other), self.lowest_index)

    def mul(self, other, method="auto"):
        lo = self.lowest_index + other.lowest_index
        hi = min(self.order + other.lowest_index, other.order + self.lowest_index)
        n = hi - lo + 1
        return TruncatedSeries(convolve(self.coeffs, other.coeffs, n, method), lo)

    def reciprocal(self):
        if self.coeffs[0] == 0:
            raise IncompatibleIndex("reciprocal needs a nonzero leading coefficient; strip zeros first")
        n = len(self.coeffs)
        return TruncatedSeries(reciprocal_coeffs(self.coeffs, n), -self.lowest_index)

    def derivative(self):
        powers = np.arange(self.lowest_index, self.order + 1)
        c = self.coeffs * powers
        if self.lowest_index == 0:
            if len(c) == 1:
                return TruncatedSeries([0.0], 0)
            return TruncatedSeries(c[1:], 0)
        return TruncatedSeries(c, self.lowest_index - 1)

    def dilate(self, p):
        """``f(z**p)`` truncated at the same order."""
        if self.lowest_index < 0:
            raise IncompatibleIndex("dilation implemented for Taylor series only")
        K = self.order
        out = np.zeros(K + 1, dtype=complex)
        src = self.taylor()
        m = K // p
        out[: p * m + 1 : p] = src[: m + 1]
        return TruncatedSeries(out, 0)

    def scale(self, r):
        """``f(r z)``."""
        powers = np.arange(self.lowest_index, self.order + 1)
        return TruncatedSeries(self.coeffs * complex(r) ** powers, self.lowest_index)

    def compose(self, inner):
        """``self(inner(z))`` by truncated Horner; ``inner`` must vanish at 0."""
        if inner.lowest_index < 1 and inner.coeff(0) != 0:
            raise IncompatibleIndex("inner series must have zero constant term")
        if self.lowest_index < 0:
            raise IncompatibleIndex("outer series must be Taylor")
        K = min(self.order, inner.order)
        f = self.taylor(K)
        h = inner.taylor(K)
        acc = np.zeros(K + 1, dtype=complex)
        acc[0] = f[K]
        for k in range(K - 1, -1, -1):
            acc = convolve(acc, h, K + 1)
            acc[0] += f[k]
        return TruncatedSeries(acc, 0)

    # --- evaluation ---------------------------------------------------
    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        acc = np.zeros_like(z)
        for c in self.coeffs[::-1]:
            acc = acc * z + c
        if self.lowest_index:
            acc = acc * z ** self.lowest_index
        return acc if acc.ndim else complex(acc)

    def allclose(self, other, atol=1e-12):
        lo = min(self.lowest_index, other.lowest_index)
        hi = min(self.order, other.order)
        return all(abs(self.coeff(p) - other.coeff(p)) <= atol for p in range(lo, hi + 1))

    def __repr__(self):
        return f"TruncatedSeries(lowest_index={self.lowest_index}, order={self.order})"

    # --- serialization ------------------------------------------------
    def to_json(self, **extra):
        d = dict(extra)
        d.update(
            lowest_index=self.lowest_index,
            order=self.order,
            coeffs=[[float(c.real), float(c.imag)] for c in self.coeffs],
        )
        return d

    @classmethod
    def from_json(cls, d):
        c = np.array([complex(re, im) for re, im in d["coeffs"]])
        s = cls(c, int(d["lowest_index"]))
        if "order" in d and int(d["order"]) != s.order:
            raise ValueError("order field inconsistent with coefficient count")
        return s
