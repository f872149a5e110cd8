"""Traces over Heegner points: exact p(n), the rational partition polynomials,
integrality diagnostics, and the generalized trace of raised weight -2 inputs.

The correctness certificate everywhere is the rounding margin: a value is
accepted as an integer (after scaling by the proved denominator bound) only
when its distance to the nearest integer plus its propagated error bound is
below 1/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import gmpy2
from gmpy2 import mpc, mpfr, mpq

from . import maass, qseries
from .maass import CertifiedValue, CertificationError, MaassEvalSpec, F_SIGNS
from .quadform import (
    Discriminant,
    QuadForm,
    atkin_lehner_relocate,
    gkz_representatives,
    heegner_point,
    trace_representatives,
)

__all__ = [
    "TraceReport",
    "PartitionPolynomial",
    "IntegralityReport",
    "UncertifiedResult",
    "trace_bruinier_ono",
    "partition",
    "hn_polynomial",
    "integrality_report",
    "general_trace",
    "make_f_spec",
    "initial_target_bits",
    "MAX_RETRIES",
]

MAX_RETRIES = 4

# The theorem behind general_trace states tr(m,h) = -(1/2m) * (Heegner sum with
# stabilizer weights); we return the bare sum and leave the normalization to
# callers, because the multiplicity dictionary between the two index sets is
# level-dependent bookkeeping, not part of the sum itself.
GENERAL_TRACE_NORMALIZATION_NOTE = (
    "general_trace returns sum of partial_f over representatives; multiply by "
    "-1/(2m) and the level's multiplicity factor yourself if you need the "
    "Fourier-coefficient normalization"
)


class UncertifiedResult(RuntimeError):
    """Adaptive precision ran out of retries without a rounding certificate."""


@dataclass
class TraceReport:
    n: int
    D: int
    forms: list
    values: list
    trace: CertifiedValue
    p_n: int | None
    rounding_margin: float
    certified: bool


@dataclass
class PartitionPolynomial:
    n: int
    degree: int
    coefficients: list  # exact mpq, descending powers, leading 1
    denominators_bound_used: int

    def __call__(self, x):
        acc = 0
        for c in self.coefficients:
            acc = acc * x + c
        return acc


@dataclass
class IntegralityReport:
    n: int
    D: int
    strict_scale: int  # 6(24n-1): must certify
    strict_distances: list
    exploratory_scale: int  # 24n-1: reported only
    exploratory_distances: list
    certified: bool


def initial_target_bits(n, h):
    """Adaptive precision schedule seed: enough bits for the polynomial
    denominator bound (6(24n-1))^h plus the size of p(n) itself."""
    d6 = 6 * (24 * n - 1)
    return 64 + h * (d6 - 1).bit_length() + math.ceil(math.pi * math.sqrt(2 * n / 3.0) / math.log(2.0))


def _round_up_pow2(m, floor=64):
    k = max(m, floor)
    return 1 << (k - 1).bit_length()


def _evaluate_points(disc, target_bits, cache=None, relocation=False, deterministic_sum=True,
                     signs=None, coefficient_source=None, forms=None):
    """Shared fan-out: representatives, their (optionally relocated) Heegner
    points, and the raised-series values there.  Returns (forms, values, spec).
    """
    if forms is None:
        forms = gkz_representatives(disc)
    if not forms:
        raise ValueError(f"no representatives for discriminant {disc}")
    if disc.D in (3, 4):
        raise ValueError("discriminants -3 and -4 have nontrivial stabilizers; rejected")
    if deterministic_sum:
        forms = sorted(forms)
    signs = signs if signs is not None else F_SIGNS
    source = coefficient_source or (
        lambda order: qseries.f_coefficients(_round_up_pow2(order), cache=cache)
    )

    model = maass.CoefficientGrowthModel.fit(source(101))
    # a provisional precision just to pick relocation targets exactly
    points = [heegner_point(f, 64) for f in forms]
    if relocation:
        points = [atkin_lehner_relocate(pt, signs, N=disc.N, precision_bits=64) for pt in points]
    # per-point truncation: points high in the upper half-plane need far fewer
    # terms; only the lowest point dictates the series length
    per_point = []
    M = 0
    prec = 0
    for pt in points:
        y = math.sqrt(disc.D) / (2.0 * pt.source.a)
        M_i, p_i = maass.choose_truncation(y, target_bits, model=model, im_max=y)
        per_point.append(M_i)
        M = max(M, M_i)
        prec = max(prec, p_i)
    series = source(M + 1)
    if series.truncation < M:
        raise maass.PrecisionError(
            f"coefficient source stops at q^{series.truncation}, need q^{M}"
        )
    series = series.restrict(M)
    spec = MaassEvalSpec(series, level=disc.N, atkin_lehner_signs=signs,
                         truncation=M, precision_bits=prec, growth=model)
    values = []
    for f, M_i in zip(forms, per_point):
        pt = heegner_point(f, prec)
        if relocation:
            pt = atkin_lehner_relocate(pt, signs, N=disc.N, precision_bits=prec)
        spec.truncation = M_i
        values.append(maass.eval_partial_f(pt.z(), spec).flip_sign(pt.sign))
    spec.truncation = M
    return forms, values, spec


def _sum_values(values):
    total = values[0]
    for v in values[1:]:
        total = total + v
    return total


def trace_bruinier_ono(n, target_bits=None, cache=None, relocation=False, deterministic_sum=True):
    """Tr(n) = sum of P over the level-6 representatives of discriminant
    1 - 24n, with p(n) = Tr(n)/(24n-1) and its rounding certificate.

    The sum runs over ALL Gamma_0(6)-orbits, imprimitive ones included: when
    24n - 1 has a square factor the extra orbits contribute a nonzero amount
    (first visible at n = 174, where they shift the trace by -2505) and the
    quotient is an integer only with them in.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    D = 24 * n - 1
    disc = Discriminant.for_partition(n)
    forms = trace_representatives(disc)
    if target_bits is None:
        target_bits = initial_target_bits(n, len(forms))
    forms, values, spec = _evaluate_points(
        disc, target_bits, cache=cache, relocation=relocation,
        deterministic_sum=deterministic_sum, forms=forms,
    )
    trace = _sum_values(values)
    with gmpy2.context(precision=spec.precision_bits):
        # err can underflow float to 0.0 at high precision; allow the usual
        # half-precision slack so a ~1e-340 residual does not fail the check
        slack = math.ldexp(max(1.0, float(abs(trace.value.real))), -(spec.precision_bits // 2))
        imag_ok = abs(trace.value.imag) <= trace.err + slack
        ratio = trace.value.real / D
        p_candidate = int(gmpy2.rint(ratio))
        margin = float(abs(ratio - p_candidate)) + trace.err / D
    certified = bool(imag_ok and margin < 0.5)
    return TraceReport(
        n=n,
        D=D,
        forms=forms,
        values=values,
        trace=trace,
        p_n=p_candidate if certified else None,
        rounding_margin=margin,
        certified=certified,
    )


def partition(n, cache=None, relocation=False):
    """Certified p(n); doubles the precision target until the rounding
    certificate holds."""
    disc = Discriminant.for_partition(n)
    target = initial_target_bits(n, len(trace_representatives(disc)))
    for _ in range(MAX_RETRIES + 1):
        try:
            report = trace_bruinier_ono(n, target_bits=target, cache=cache, relocation=relocation)
        except CertificationError:
            report = None
        if report is not None and report.certified:
            return report.p_n
        target *= 2
    raise UncertifiedResult(f"p({n}) failed to certify after {MAX_RETRIES} retries")


def _reconstruct_polynomial(values, strict_scale, precision_bits):
    """Expand prod (x - v_i) with per-coefficient error propagation, then round
    each strict_scale^k-scaled coefficient to the certified nearest integer.

    Returns (ok, coefficients, strict margins, strict distances).
    """
    with gmpy2.context(precision=precision_bits):
        poly = [(mpc(1), 0.0)]  # coefficient of x^{h-k} at index k, with err
        for v in values:
            nxt = [(mpc(0), 0.0)] * (len(poly) + 1)
            for k, (c, e) in enumerate(poly):
                # multiply by (x - v): shift plus -v * coefficient
                c1, e1 = nxt[k]
                nxt[k] = (c1 + c, e1 + e)
                c2, e2 = nxt[k + 1]
                mag_c = float(abs(c))
                mag_v = float(abs(v.value))
                nxt[k + 1] = (c2 - c * v.value, e2 + e * (mag_v + v.err) + mag_c * v.err)
            poly = nxt
        h = len(values)
        coeffs = [mpq(1)]
        margins = []
        distances = []
        ok = True
        sk = 1
        for k in range(1, h + 1):
            sk *= strict_scale
            c, e = poly[k]
            if abs(float(c.imag)) > e + math.ldexp(1.0, -precision_bits // 2):
                ok = False
            scaled = c.real * sk
            nearest = int(gmpy2.rint(scaled))
            dist = float(abs(scaled - nearest))
            # sk can exceed float range; keep the margin in mpfr
            margin_x = abs(scaled - nearest) + mpfr(e) * sk
            margin = float(min(margin_x, mpfr(1e300)))
            margins.append(margin)
            distances.append(dist)
            if margin_x >= 0.5:
                ok = False
            coeffs.append(mpq(nearest, sk))
        return ok, coeffs, margins, distances


def _hn_attempt(n, target_bits, cache=None, relocation=False):
    D = 24 * n - 1
    disc = Discriminant.for_partition(n)
    forms, values, spec = _evaluate_points(disc, target_bits, cache=cache, relocation=relocation)
    ok, coeffs, margins, dists = _reconstruct_polynomial(values, 6 * D, spec.precision_bits)
    return forms, values, spec, ok, coeffs, margins, dists


def hn_polynomial(n, cache=None, relocation=False):
    """The monic degree-h(1-24n) polynomial with the P-singular-moduli as
    roots, with exact rational coefficients recovered from the proved
    denominator bound (6(24n-1))^k."""
    if n < 1:
        raise ValueError("n must be >= 1")
    D = 24 * n - 1
    disc = Discriminant.for_partition(n)
    h = len(gkz_representatives(disc))
    target = initial_target_bits(n, h)
    for _ in range(MAX_RETRIES + 1):
        try:
            _forms, _values, _spec, ok, coeffs, _margins, _d = _hn_attempt(
                n, target, cache=cache, relocation=relocation
            )
        except CertificationError:
            ok = False
        if ok:
            poly = PartitionPolynomial(
                n=n, degree=h, coefficients=coeffs, denominators_bound_used=6 * D
            )
            assert poly.coefficients[0] == 1
            return poly
        target *= 2
    raise UncertifiedResult(f"H_{n} coefficients failed to certify after {MAX_RETRIES} retries")


def integrality_report(n, cache=None):
    """Distances of the scaled elementary symmetric functions from integers.

    The 6(24n-1) scaling is the proved bound and must certify; the (24n-1)
    scaling addresses an open question and is reported as exploratory data.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    D = 24 * n - 1
    disc = Discriminant.for_partition(n)
    h = len(gkz_representatives(disc))
    target = initial_target_bits(n, h)
    for _ in range(MAX_RETRIES + 1):
        try:
            forms, values, spec, ok, _coeffs, _margins, dists = _hn_attempt(n, target, cache=cache)
        except CertificationError:
            ok = False
        if ok:
            _ok2, _c2, _m2, dists_explore = _reconstruct_polynomial(values, D, spec.precision_bits)
            return IntegralityReport(
                n=n,
                D=D,
                strict_scale=6 * D,
                strict_distances=dists,
                exploratory_scale=D,
                exploratory_distances=dists_explore,
                certified=True,
            )
        target *= 2
    raise UncertifiedResult(f"integrality report for n={n} failed to certify")


def general_trace(spec, disc, target_bits=96, relocation=False):
    """Bare Heegner-point sum of the raised series of `spec` over the level-N
    representatives of `disc`, as a certified value.

    Stabilizer weights are all 1 because D in {3, 4} is rejected.  See
    GENERAL_TRACE_NORMALIZATION_NOTE for the external normalization factors.
    """
    if disc.D in (3, 4):
        raise ValueError("discriminants -3 and -4 have nontrivial stabilizers; rejected")
    if spec.coefficients.valuation >= 0:
        raise ValueError("input has no principal part")

    def source(order):
        return spec.coefficients.restrict(min(order, spec.coefficients.truncation))

    _forms, values, _spec = _evaluate_points(
        disc,
        target_bits,
        relocation=relocation,
        signs=spec.atkin_lehner_signs,
        coefficient_source=source,
    )
    return _sum_values(values)


def make_f_spec(order, cache=None, precision_bits=None):
    """A MaassEvalSpec carrying the exact coefficients of F to the given order."""
    series = qseries.f_coefficients(order, cache=cache)
    return MaassEvalSpec(
        series, level=6, atkin_lehner_signs=dict(F_SIGNS), precision_bits=precision_bits
    )
