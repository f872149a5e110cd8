"""Exact Laurent q-series arithmetic over big rationals.

Series are truncated expansions in q = e^{2 pi i z}: coefficients are known
for all exponents m < truncation and unknown (not zero!) beyond it.  All
arithmetic is exact (gmpy2.mpq), so results are bit-for-bit reproducible.
"""

from __future__ import annotations

import threading

from gmpy2 import mpq, mpz

__all__ = [
    "QSeries",
    "EtaQuotientSpec",
    "eta_series",
    "e2_series",
    "mul",
    "inv",
    "f_coefficients",
    "F_ETA_QUOTIENT",
]


class QSeries:
    """A truncated Laurent series sum_{m >= valuation} coeffs[m - valuation] q^m.

    Immutable.  `truncation` is the first exponent whose coefficient is NOT
    known; every operation propagates the tightest truncation it can justify.
    """

    __slots__ = ("valuation", "coeffs", "truncation")

    def __init__(self, valuation, coeffs, truncation):
        coeffs = [mpq(c) for c in coeffs]
        if valuation + len(coeffs) > truncation:
            raise ValueError("more coefficients than the truncation order allows")
        # strip leading zeros so the leading coefficient is nonzero (or the
        # series is identically zero on its known range)
        while coeffs and coeffs[0] == 0:
            coeffs.pop(0)
            valuation += 1
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        if not coeffs:
            valuation = truncation
        object.__setattr__(self, "valuation", valuation)
        object.__setattr__(self, "coeffs", tuple(coeffs))
        object.__setattr__(self, "truncation", truncation)

    def __setattr__(self, name, value):
        raise AttributeError("QSeries is immutable")

    def __repr__(self):
        head = ", ".join(
            f"q^{self.valuation + i}*{c}" for i, c in enumerate(self.coeffs[:4])
        )
        return f"QSeries({head}{', ...' if len(self.coeffs) > 4 else ''}; O(q^{self.truncation}))"

    def __eq__(self, other):
        if not isinstance(other, QSeries):
            return NotImplemented
        return (
            self.valuation == other.valuation
            and self.coeffs == other.coeffs
            and self.truncation == other.truncation
        )

    def __hash__(self):
        return hash((self.valuation, self.coeffs, self.truncation))

    def is_zero(self):
        return not self.coeffs

    def coefficient(self, m):
        """Exact coefficient of q^m; m must be below the truncation order."""
        if m >= self.truncation:
            raise IndexError(f"coefficient q^{m} is beyond truncation O(q^{self.truncation})")
        i = m - self.valuation
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return mpq(0)

    def restrict(self, truncation):
        """The same series truncated at a smaller order."""
        if truncation > self.truncation:
            raise ValueError("cannot extend a series by restricting it")
        n = max(0, truncation - self.valuation)
        return QSeries(self.valuation, self.coeffs[:n], truncation)

    def shift(self, k):
        """Multiply by q^k."""
        return QSeries(self.valuation + k, self.coeffs, self.truncation + k)

    def scale(self, r):
        """Multiply every coefficient by the exact rational r."""
        r = mpq(r)
        if r == 0:
            return QSeries(self.truncation, [], self.truncation)
        return QSeries(self.valuation, [r * c for c in self.coeffs], self.truncation)

    def __add__(self, other):
        if not isinstance(other, QSeries):
            return NotImplemented
        trunc = min(self.truncation, other.truncation)
        if self.is_zero():
            return other.restrict(trunc)
        if other.is_zero():
            return self.restrict(trunc)
        val = min(self.valuation, other.valuation)
        out = [mpq(0)] * max(0, trunc - val)
        for s in (self, other):
            for i, c in enumerate(s.coeffs):
                m = s.valuation + i
                if m < trunc:
                    out[m - val] += c
        return QSeries(val, out, trunc)

    def __sub__(self, other):
        return self + other.scale(-1)

    def __mul__(self, other):
        if isinstance(other, QSeries):
            return mul(self, other)
        return self.scale(other)

    __rmul__ = __mul__

    def all_integer(self):
        return all(c.denominator == 1 for c in self.coeffs)


def one(truncation):
    return QSeries(0, [1], truncation)


def mul(s, t):
    """Exact Cauchy product, schoolbook, skipping zero coefficients.

    The product coefficient at exponent m needs every split m = i + j with
    i < s.truncation and j < t.truncation, so the result is only known below
    min(s.truncation + t.valuation, t.truncation + s.valuation).
    """
    trunc = min(s.truncation + t.valuation, t.truncation + s.valuation)
    if s.is_zero() or t.is_zero():
        return QSeries(trunc, [], trunc)
    # iterate over the sparser operand's nonzero entries
    a, b = (s, t) if _nonzero_count(s) <= _nonzero_count(t) else (t, s)
    val = s.valuation + t.valuation
    as_int = a.all_integer() and b.all_integer()
    zero = 0 if as_int else mpq(0)
    bco = [int(c) for c in b.coeffs] if as_int else b.coeffs
    out = [zero] * max(0, trunc - val)
    for i, ca in enumerate(a.coeffs):
        if ca == 0:
            continue
        ca = int(ca) if as_int else ca
        ma = a.valuation + i
        jmax = min(len(bco), trunc - ma - b.valuation)
        base = ma + b.valuation - val
        for j in range(jmax):
            cb = bco[j]
            if cb:
                out[base + j] += ca * cb
    return QSeries(val, out, trunc)


def _nonzero_count(s):
    return sum(1 for c in s.coeffs if c)


# Above this length, the integral division path packs polynomials into big
# integers so gmpy2's sub-quadratic multiply does the convolution work.
_KRONECKER_CUTOFF = 512


def _poly_mul_int(xs, ys, length):
    """First `length` coefficients of the product of two integer coefficient
    lists, via Kronecker substitution (evaluate at 2**B, multiply, unpack).

    Negative coefficients are handled by splitting each operand into its
    positive and negative parts, so every packed integer is non-negative.
    """
    xs = xs[:length]
    ys = ys[:length]
    mx = max((abs(v) for v in xs), default=0)
    my = max((abs(v) for v in ys), default=0)
    if not mx or not my:
        return [0] * length
    bits = mx.bit_length() + my.bit_length() + min(len(xs), len(ys)).bit_length() + 1
    bits += (-bits) % 8  # whole bytes per slot keeps packing linear-time
    slot = bits // 8

    def pack(vals):
        pos = bytearray(slot * len(vals))
        neg = bytearray(slot * len(vals))
        for i, v in enumerate(vals):
            if v > 0:
                pos[i * slot : i * slot + slot] = v.to_bytes(slot, "little")
            elif v:
                neg[i * slot : i * slot + slot] = (-v).to_bytes(slot, "little")
        return int.from_bytes(pos, "little"), int.from_bytes(neg, "little")

    xp, xn = pack(xs)
    yp, yn = pack(ys)
    mask = (1 << (bits * length)) - 1
    plus = int((mpz(xp) * yp + mpz(xn) * yn) & mask).to_bytes(slot * length, "little")
    minus = int((mpz(xp) * yn + mpz(xn) * yp) & mask).to_bytes(slot * length, "little")
    return [
        int.from_bytes(plus[i * slot : i * slot + slot], "little")
        - int.from_bytes(minus[i * slot : i * slot + slot], "little")
        for i in range(length)
    ]


def _int_series_inv(d, length):
    """Reciprocal of an integer power series with d[0] == 1, by Newton
    iteration with Kronecker multiplies; exact (agrees with long division)."""
    assert d and d[0] == 1
    r = [1]
    k = 1
    while k < length:
        k = min(2 * k, length)
        e = _poly_mul_int(d[:k], r, k)
        e[0] -= 2
        r = _poly_mul_int(r, [-v for v in e], k)
    return r


def inv(s):
    """Exact power-series reciprocal of s to the provable truncation order.

    Writing s = c q^v (1 + u) with u of positive valuation, the reciprocal is
    known below truncation - 2*valuation.
    """
    if s.is_zero():
        raise ZeroDivisionError("cannot invert a series with zero leading coefficient")
    return div(one(s.truncation - s.valuation), s)


def div(num, den):
    """Exact series quotient num/den by long division (one quadratic pass).

    The quotient is known below min(num.truncation - den.valuation,
    den.truncation - 2*den.valuation + num.valuation).  When both operands are
    integral with unit lead, large orders switch to Kronecker-packed Newton
    inversion: identical exact integers, one big-int multiply per step.
    """
    if den.is_zero():
        raise ZeroDivisionError("cannot divide by a series with zero leading coefficient")
    vd = den.valuation
    trunc = min(num.truncation - vd, den.truncation - 2 * vd + num.valuation)
    if num.is_zero():
        return QSeries(trunc, [], trunc)
    vq = num.valuation - vd
    length = trunc - vq
    if length <= 0:
        raise ZeroDivisionError("series too short to divide")
    dlen = min(len(den.coeffs), length)
    if num.all_integer() and den.all_integer() and abs(den.coeffs[0]) == 1:
        # pure-int fast path; exactness is automatic since the lead is a unit
        lead = int(den.coeffs[0])
        d = [lead * int(den.coefficient(vd + j)) for j in range(min(dlen, length))]
        nu = [lead * int(num.coefficient(num.valuation + k)) for k in range(length)]
        if length >= _KRONECKER_CUTOFF:
            f = _poly_mul_int(nu, _int_series_inv(d, length), length)
            return QSeries(vq, f, trunc)
        f = [0] * length
        for k in range(length):
            acc = nu[k]
            for j in range(1, min(k, dlen - 1) + 1):
                dj = d[j]
                if dj:
                    acc -= dj * f[k - j]
            f[k] = acc
        return QSeries(vq, f, trunc)
    lead = den.coeffs[0]
    d = [den.coefficient(vd + j) for j in range(dlen)]
    f = [mpq(0)] * length
    for k in range(length):
        acc = num.coefficient(num.valuation + k)
        for j in range(1, min(k, dlen - 1) + 1):
            dj = d[j]
            if dj:
                acc -= dj * f[k - j]
        f[k] = acc / lead
    return QSeries(vq, f, trunc)


def eta_series(d, order):
    """Integral-exponent part of eta(d z): prod_{n>=1} (1 - q^{dn}) to the
    given order, by the pentagonal number theorem.  The fractional exponent
    q^{d/24} is the caller's responsibility.
    """
    if d < 1 or order < 1:
        raise ValueError("eta_series requires d >= 1 and order >= 1")
    co = [0] * order
    co[0] = 1
    k = 1
    while d * k * (3 * k - 1) // 2 < order:
        sign = 1 if k % 2 == 0 else -1
        for e in (d * k * (3 * k - 1) // 2, d * k * (3 * k + 1) // 2):
            if e < order:
                co[e] += sign
        k += 1
    return QSeries(0, co, order)


def e2_series(d, order):
    """Quasimodular Eisenstein series E2(d z) = 1 - 24 sum sigma_1(n) q^{dn}."""
    if d < 1 or order < 1:
        raise ValueError("e2_series requires d >= 1 and order >= 1")
    nmax = (order - 1) // d
    sig = _sigma1_table(nmax)
    co = [0] * order
    co[0] = 1
    for n in range(1, nmax + 1):
        co[d * n] = -24 * sig[n]
    return QSeries(0, co, order)


def _sigma1_table(nmax):
    sig = [0] * (nmax + 1)
    for d in range(1, nmax + 1):
        for n in range(d, nmax + 1, d):
            sig[n] += d
    return sig


class EtaQuotientSpec:
    """Symbolic description of an eta quotient with an Eisenstein numerator.

    eisenstein_part is a list of (scale d, integer weight) pairs standing for
    sum weight * E2(d z); eta_factors is a list of (scale d, exponent e) pairs
    in the denominator convention exponent e means eta(d z)^e; prefactor is a
    global exact rational.
    """

    def __init__(self, eta_factors, eisenstein_part, prefactor):
        for d, e in eta_factors:
            if d < 1 or e == 0:
                raise ValueError("eta factors need positive scale and nonzero exponent")
        for d, _w in eisenstein_part:
            if d < 1:
                raise ValueError("Eisenstein scales must be positive")
        self.eta_factors = tuple(eta_factors)
        self.eisenstein_part = tuple(eisenstein_part)
        self.prefactor = mpq(prefactor)

    def fractional_exponent_24(self):
        """24 times the total fractional q-exponent carried by the eta factors."""
        return sum(d * e for d, e in self.eta_factors)

    def expand(self, order):
        """Exact q-expansion (prefactor * Eisenstein part * eta product), with
        the eta fractional exponent absorbed into the valuation.  Requires the
        total fractional exponent to be an integer multiple of 1/24... i.e.
        fractional_exponent_24() divisible by 24.
        """
        frac24 = self.fractional_exponent_24()
        if frac24 % 24 != 0:
            raise ValueError("eta quotient has a genuinely fractional exponent")
        shift = frac24 // 24
        # generous internal order; trimmed by the final restrict
        work = order + abs(shift) + 1
        num = QSeries(0, [], work)
        for d, w in self.eisenstein_part:
            num = num + e2_series(d, work).scale(w)
        if not self.eisenstein_part:
            num = one(work)
        # keep all eta factors (sparse, tiny coefficients) on one side and do a
        # single long-division pass instead of inverting dense big series
        den = one(work)
        for d, e in self.eta_factors:
            base = eta_series(d, work)
            for _ in range(e, 0, -1):
                num = mul(num, base)
            for _ in range(e, 0):
                den = mul(den, base)
        out = div(num, den).scale(self.prefactor).shift(shift)
        return out.restrict(min(out.truncation, order))


# F(z) = (1/2) (E2(z) - 2 E2(2z) - 3 E2(3z) + 6 E2(6z)) / (eta(z) eta(2z) eta(3z) eta(6z))^2
# The eta exponents sum to -2(1+2+3+6)/24 = -1, giving the q^{-1} principal part.
F_ETA_QUOTIENT = EtaQuotientSpec(
    eta_factors=[(1, -2), (2, -2), (3, -2), (6, -2)],
    eisenstein_part=[(1, 1), (2, -2), (3, -3), (6, 6)],
    prefactor=mpq(1, 2),
)

_f_lock = threading.Lock()
_f_memo = {"series": None}


def f_coefficients(order, cache=None):
    """Exact Fourier coefficients of F as a QSeries with valuation -1,
    known for all exponents m < order.

    Memoizes the largest expansion computed so far in-process; an optional
    cache object (see maasspart.cache) persists it across processes.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    with _f_lock:
        s = _f_memo["series"]
        if s is not None and s.truncation >= order:
            return s.restrict(order)
        if cache is not None:
            s = cache.read(order)
            if s is not None:
                _f_memo["series"] = s
                return s.restrict(order)
        s = F_ETA_QUOTIENT.expand(order)
        assert s.valuation == -1 and s.coefficient(-1) == 1
        _f_memo["series"] = s
        if cache is not None:
            cache.write(s)
        return s.restrict(order)


def clear_f_memo():
    with _f_lock:
        _f_memo["series"] = None
