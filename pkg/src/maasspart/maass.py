"""Certified arbitrary-precision evaluation of the weight -2 form F, of the
weight-0 weak Maass form P = (1/4 pi) R_{-2} F, and of the raised series of a
general weight -2 input, at points in the upper half-plane.

Certification is two-tier: "heuristic" folds a coefficient-growth tail model
into the error bound; "double-checked" additionally requires an M-term and a
2M-term evaluation to agree within their combined bounds.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import gmpy2
from gmpy2 import mpc, mpfr, mpq

from .qseries import QSeries

__all__ = [
    "CertifiedValue",
    "MaassEvalSpec",
    "CoefficientGrowthModel",
    "PrecisionError",
    "CertificationError",
    "GROWTH_RATE",
    "MIN_IM",
    "F_SIGNS",
    "choose_truncation",
    "eval_F",
    "eval_P",
    "eval_partial_f",
    "raised_expansion",
]

log = logging.getLogger(__name__)

# circle-method heuristic growth rate for a pole of order 1 at the cusps of
# level 6: |c(m)| <= C * exp(GROWTH_RATE * sqrt(m))
GROWTH_RATE = 4.0 * math.pi / math.sqrt(6.0)

GROWTH_SAFETY = 16.0
DEFAULT_GUARD_BITS = 32

# points this close to the real axis would need astronomically many terms
MIN_IM = 1e-6

# Atkin-Lehner character of F at level 6: invariant under the Fricke
# involution W6, negated by W3 (and hence by W2).
F_SIGNS = {1: 1, 2: -1, 3: -1, 6: 1}


class PrecisionError(RuntimeError):
    """The requested accuracy is infeasible with the available data."""


class CertificationError(RuntimeError):
    """An M-vs-2M double check failed; the growth model was raised."""


@dataclass(frozen=True)
class CertifiedValue:
    """An arbitrary-precision complex value with an absolute error bound."""

    value: mpc
    err: float
    certified: str = "heuristic"  # or "double-checked"

    def __post_init__(self):
        if self.err < 0:
            raise ValueError("error bound must be nonnegative")

    def flip_sign(self, s):
        if s == 1:
            return self
        with gmpy2.context(precision=max(self.value.precision)):
            return CertifiedValue(-self.value, self.err, self.certified)

    def __add__(self, other):
        cert = "double-checked" if "double-checked" == self.certified == other.certified else "heuristic"
        prec = max(*self.value.precision, *other.value.precision)
        with gmpy2.context(precision=prec):
            return CertifiedValue(self.value + other.value, self.err + other.err, cert)


class CoefficientGrowthModel:
    """Tail model |c(m)| <= C exp(K sqrt(m)) with C fitted from computed
    coefficients times a safety factor.  The constant can be raised when a
    double check fails.
    """

    def __init__(self, log_c, rate=GROWTH_RATE):
        self.log_c = log_c
        self.rate = rate

    @classmethod
    def fit(cls, series, sample=100, safety=GROWTH_SAFETY):
        best = -math.inf
        for m in range(series.valuation, min(series.truncation, series.valuation + sample + 1)):
            c = series.coefficient(m)
            if c == 0:
                continue
            best = max(best, _log_abs_mpq(c) - GROWTH_RATE * math.sqrt(max(m, 0)))
        if best == -math.inf:
            raise ValueError("cannot fit a growth model to the zero series")
        return cls(best + math.log(safety))

    def raise_constant(self, factor_bits=16):
        self.log_c += factor_bits * math.log(2.0)

    def log_coeff_bound(self, m):
        return self.log_c + self.rate * math.sqrt(max(m, 0))

    def log_tail(self, M, y):
        """log of an upper bound for sum_{m >= M} C e^{K sqrt m} (m+1) e^{-2 pi m y}.

        Uses sqrt(m) <= sqrt(M) + (m-M)/(2 sqrt M); finite only when the
        resulting geometric ratio is < 1.
        """
        if M < 1:
            return math.inf
        log_rho = self.rate / (2.0 * math.sqrt(M)) - 2.0 * math.pi * y
        if log_rho >= -1e-12:
            return math.inf
        rho = math.exp(log_rho)
        head = self.log_c + self.rate * math.sqrt(M) - 2.0 * math.pi * M * y
        series_sum = (M + 1) / (1.0 - rho) + rho / (1.0 - rho) ** 2
        return head + math.log(series_sum)

    def tail(self, M, y):
        lt = self.log_tail(M, y)
        if lt == math.inf:
            return math.inf
        return math.exp(min(lt, 700.0))


def _log_abs_mpq(c):
    num, den = abs(c.numerator), c.denominator
    return _log_abs_int(num) - _log_abs_int(den)


def _log_abs_int(n):
    n = abs(int(n))
    if n == 0:
        return -math.inf
    if n.bit_length() <= 900:
        return math.log(n)
    k = n.bit_length() - 64
    return math.log(n >> k) + k * math.log(2.0)


@dataclass
class MaassEvalSpec:
    """Evaluation data for a weight -2 input: its Fourier coefficients at the
    cusp at infinity, the (squarefree) level, and its Atkin-Lehner character.
    `truncation` and `precision_bits` override the automatic choices.
    """

    coefficients: QSeries
    level: int = 6
    atkin_lehner_signs: dict = None
    truncation: int = None
    precision_bits: int = None
    growth: CoefficientGrowthModel = field(default=None, repr=False)

    def __post_init__(self):
        from .quadform import _squarefree

        if not _squarefree(self.level):
            raise ValueError(f"level {self.level} is not squarefree")
        if self.atkin_lehner_signs is not None:
            from .quadform import _check_character

            _check_character(self.atkin_lehner_signs, self.level)

    def growth_model(self):
        if self.growth is None:
            self.growth = CoefficientGrowthModel.fit(self.coefficients)
        return self.growth


def choose_truncation(im_min, target_bits, guard_bits=DEFAULT_GUARD_BITS, model=None, im_max=None):
    """Truncation order M and working precision P so the modeled tail
    sum_{m > M} |c(m)| (m+1) e^{-2 pi m im_min} stays below 2^{-target_bits-guard}.
    """
    if im_min <= 0:
        raise ValueError("im_min must be positive")
    if im_min < MIN_IM:
        raise PrecisionError(f"im(z) = {im_min} below the supported minimum {MIN_IM}")
    if model is None:
        model = CoefficientGrowthModel(math.log(GROWTH_SAFETY))
    goal = -(target_bits + guard_bits) * math.log(2.0)
    lo = max(16, int((model.rate / (4.0 * math.pi * im_min)) ** 2) + 1)
    hi = lo
    while model.log_tail(hi, im_min) >= goal:
        hi *= 2
        if hi > 1 << 34:
            raise PrecisionError("truncation budget infeasible for the requested accuracy")
    while lo < hi:
        mid = (lo + hi) // 2
        if model.log_tail(mid, im_min) < goal:
            hi = mid
        else:
            lo = mid + 1
    M = hi
    if im_max is None:
        im_max = im_min
    # headroom: number of summed terms plus the principal-part magnitude
    prec = (
        target_bits
        + guard_bits
        + M.bit_length()
        + max(0, math.ceil(2.0 * math.pi * im_max / math.log(2.0)))
        + 8
    )
    return M, prec


# integer views are recomputed per evaluation point otherwise; keyed by series
# identity (QSeries is immutable), bounded, evicted oldest-first
_PREP_CACHE = {}
_PREP_CACHE_MAX = 8


def _prepared_coefficients(series, M):
    """Common-denominator integer view of the coefficients up to exponent M.

    Trailing zero coefficients may be omitted; callers treat the list as
    sparse starting at the valuation.
    """
    if series.truncation < M:
        raise PrecisionError(
            f"need coefficients below q^{M} but the series stops at q^{series.truncation}"
        )
    entry = _PREP_CACHE.get(id(series))
    if entry is None or entry[0] is not series:
        den = 1
        for c in series.coeffs:
            den = math.lcm(den, int(c.denominator))
        ints = [int(c * den) for c in series.coeffs]
        while len(_PREP_CACHE) >= _PREP_CACHE_MAX:
            _PREP_CACHE.pop(next(iter(_PREP_CACHE)))
        entry = (series, ints, den)
        _PREP_CACHE[id(series)] = entry
    _series, ints, den = entry
    return ints[: max(M - series.valuation, 0)], den


def _eval_sums(series, z, M, precision):
    """S0 = sum c(m) q^m and S1 = sum m c(m) q^m over valuation <= m < M,
    plus a float bound on the accumulated rounding error of both sums.
    """
    ints, den = _prepared_coefficients(series, M)
    v = series.valuation
    with gmpy2.context(precision=precision):
        pi = gmpy2.const_pi()
        z = mpc(z)
        y = float(z.imag)
        q = gmpy2.exp(2j * pi * z)
        qpow = q**v
        s0 = mpc(0)
        s1 = mpc(0)
        mag = 0.0  # upper bound on sum of |terms|, for the rounding budget
        log2e_2pi_y = 2.0 * math.pi * y / math.log(2.0)
        for i, cm in enumerate(ints):
            m = v + i
            if cm:
                s0 += cm * qpow
                s1 += (m * cm) * qpow
                mag += 2.0 ** min(1000.0, cm.bit_length() - log2e_2pi_y * m)
            qpow *= q
        rounding = (6.0 * (M - v) + 32.0) * math.ldexp(max(mag, 1.0), -precision)
        return s0, s1, den, rounding


def _check_point(z):
    y = float(mpc(z).imag)
    if y <= 0:
        raise ValueError("evaluation point must lie in the upper half-plane")
    if y < MIN_IM:
        raise PrecisionError(f"im(z) = {y} below the supported minimum {MIN_IM}")
    return y


def _resolve(spec, z):
    y = _check_point(z)
    M = spec.truncation if spec.truncation is not None else spec.coefficients.truncation
    M = min(M, spec.coefficients.truncation)
    if spec.precision_bits is not None:
        prec = spec.precision_bits + DEFAULT_GUARD_BITS
    else:
        prec = 64 + M.bit_length() + DEFAULT_GUARD_BITS + max(0, math.ceil(2 * math.pi * y / math.log(2)))
    return y, M, prec


def eval_F(z, spec, double_check=False):
    """Evaluate the q-expansion sum_{m} c(m) e^{2 pi i m z}."""

    def once(M):
        y, _M0, prec = _resolve(spec, z)
        s0, _s1, den, rounding = _eval_sums(spec.coefficients, z, M, prec)
        tail = spec.growth_model().tail(M, y)
        return CertifiedValue(s0 / den, tail + rounding)

    return _maybe_double_check(once, spec, z, double_check)


def eval_partial_f(z, spec, double_check=False):
    """Evaluate the raised weight-0 series sum c(m) (-m - 1/(2 pi y)) e^{2 pi i m z}.

    The input must have a nontrivial principal part: a weight -2 weakly
    holomorphic form with no pole is identically zero.
    """
    if spec.coefficients.valuation >= 0:
        raise ValueError(
            "input has no principal part; it is not a nontrivial weight -2 object"
        )

    def once(M):
        y, _M0, prec = _resolve(spec, z)
        s0, s1, den, rounding = _eval_sums(spec.coefficients, z, M, prec)
        with gmpy2.context(precision=prec):
            two_pi_y = 2 * gmpy2.const_pi() * mpc(z).imag
            value = (-s1 - s0 / two_pi_y) / den
        tail = spec.growth_model().tail(M, y) * (1.0 + 1.0 / (2.0 * math.pi * y))
        rounding *= max(float(M), 1.0 / (2.0 * math.pi * y)) + 2.0
        return CertifiedValue(value, tail + rounding)

    return _maybe_double_check(once, spec, z, double_check)


def eval_P(z, spec, double_check=False):
    """Evaluate the weak Maass form P at z; spec must carry F's coefficients."""
    return eval_partial_f(z, spec, double_check=double_check)


def _maybe_double_check(once, spec, z, double_check):
    y, M, _prec = _resolve(spec, z)
    if not double_check:
        return _with_M(once, spec, M)
    M2 = 2 * M
    if spec.coefficients.truncation < M2:
        raise PrecisionError(
            f"double check needs coefficients below q^{M2}, have q^{spec.coefficients.truncation}"
        )
    v1 = _with_M(once, spec, M)
    v2 = _with_M(once, spec, M2)
    # half-precision slack: the float error bounds can underflow to 0.0
    slack = math.ldexp(max(1.0, float(abs(v2.value))), -(max(v2.value.precision) // 2))
    if abs(v1.value - v2.value) > v1.err + v2.err + slack:
        log.warning(
            "certification failure at z=%s: |Delta|=%s > %s; raising growth constant",
            z,
            abs(v1.value - v2.value),
            v1.err + v2.err,
        )
        spec.growth_model().raise_constant()
        raise CertificationError("M-vs-2M truncation check failed")
    return CertifiedValue(v2.value, v2.err, "double-checked")


def _with_M(once, spec, M):
    saved = spec.truncation
    try:
        spec.truncation = M
        return once(M)
    finally:
        spec.truncation = saved


def raised_expansion(series):
    """Exact coefficient pairs of the raised series: the term at q^m is
    A_m q^m + B_m (1/(2 pi y)) q^m with A_m = -m c(m) and B_m = -c(m).

    This is the symbolic application of -( (1/2 pi i) d/dz + 1/(2 pi y) ) and
    is an exact rational identity, assertable without floats.
    """
    out = []
    for m in range(series.valuation, series.truncation):
        c = series.coefficient(m)
        if c:
            out.append((m, mpq(-m) * c, -c))
    return out
