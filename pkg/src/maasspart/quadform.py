"""Binary quadratic forms: reduction, class enumeration, level lifting,
Heegner points, and Atkin-Lehner relocation.

Forms are [a, b, c] = a x^2 + b x y + c y^2, positive definite throughout
(a > 0, b^2 - 4ac < 0).  The lifting step turns SL2(Z) class representatives
into level-N representatives with N | a and b = r (mod 2N), one per class.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import gmpy2
from gmpy2 import gcdext, mpfr

__all__ = [
    "QuadForm",
    "Discriminant",
    "HeegnerPoint",
    "NotPositiveDefinite",
    "SearchBoundExhausted",
    "discriminant",
    "reduce_form",
    "reduce_with_witness",
    "enumerate_reduced",
    "class_number",
    "gkz_representatives",
    "trace_representatives",
    "heegner_point",
    "atkin_lehner_matrix",
    "atkin_lehner_relocate",
    "exact_divisors",
]


class NotPositiveDefinite(ValueError):
    pass


class SearchBoundExhausted(RuntimeError):
    """The congruence-lift search bound ran out before all classes were hit.

    This signals a bound bug, not a mathematical failure: the lifting
    correspondence guarantees a representative exists in every class.
    """


@dataclass(frozen=True, order=True)
class QuadForm:
    a: int
    b: int
    c: int

    def discriminant(self):
        return self.b * self.b - 4 * self.a * self.c

    def is_positive_definite(self):
        return self.a > 0 and self.discriminant() < 0

    def is_primitive(self):
        return math.gcd(self.a, math.gcd(self.b, self.c)) == 1

    def __call__(self, x, y):
        return self.a * x * x + self.b * x * y + self.c * y * y

    def transform(self, p, q, r, s):
        """The form Q(px + qy, rx + sy); det(p q; r s) = 1 preserves the class."""
        a, b, c = self.a, self.b, self.c
        return QuadForm(
            a * p * p + b * p * r + c * r * r,
            2 * a * p * q + b * (p * s + q * r) + 2 * c * r * s,
            a * q * q + b * q * s + c * s * s,
        )

    def __str__(self):
        return f"[{self.a},{self.b},{self.c}]"


def discriminant(form):
    return form.discriminant()


def _require_posdef(form):
    if not form.is_positive_definite():
        raise NotPositiveDefinite(f"{form} is not positive definite")


def reduce_with_witness(form):
    """SL2(Z)-reduce a positive definite form.

    Returns (reduced, (p, q, r, s)) with reduced == form.transform(p, q, r, s)
    and ps - qr = 1.  Reduced means |b| <= a <= c with b >= 0 when |b| = a or
    a = c.
    """
    _require_posdef(form)
    a, b, c = form.a, form.b, form.c
    p, q, r, s = 1, 0, 0, 1  # accumulated witness, acting on the right
    while True:
        if a > c:
            # swap via (x, y) -> (-y, x)
            a, b, c = c, -b, a
            p, q, r, s = -q, p, -s, r
        if b > a or b <= -a:
            # translate (x, y) -> (x + ky, y); floor division puts b + 2ak in (-a, a]
            k = (a - b) // (2 * a)
            b2 = b + 2 * a * k
            c = a * k * k + b * k + c
            b = b2
            q, s = p * k + q, r * k + s
            continue
        if a == c and b < 0:
            a, b, c = c, -b, a
            p, q, r, s = -q, p, -s, r
        break
    reduced = QuadForm(int(a), int(b), int(c))
    assert reduced == form.transform(p, q, r, s)
    return reduced, (p, q, r, s)


def reduce_form(form):
    return reduce_with_witness(form)[0]


def _is_reduced(form):
    a, b, c = form.a, form.b, form.c
    if not (-a < b <= a <= c):
        return False
    if a == c and b < 0:
        return False
    return True


def enumerate_reduced(D):
    """All primitive reduced forms of discriminant -D, sorted.

    Their count is the class number h(-D).
    """
    if D <= 0 or (-D) % 4 not in (0, 1):
        raise ValueError(f"-{D} is not a negative discriminant (need -D = 0,1 mod 4)")
    out = []
    bmax = math.isqrt(D // 3)
    for b in range(D % 2, bmax + 1, 2):
        t4 = b * b + D
        if t4 % 4:
            continue
        t = t4 // 4  # a*c
        a = max(b, 1)
        while a * a <= t:
            if t % a == 0:
                c = t // a
                f = QuadForm(a, b, c)
                if f.is_primitive():
                    out.append(f)
                    if 0 < b < a < c:
                        out.append(QuadForm(a, -b, c))
            a += 1
    out.sort()
    return out


def class_number(D):
    return len(enumerate_reduced(D))


def _squarefree(n):
    if n < 1:
        return False
    d = 2
    while d * d <= n:
        if n % (d * d) == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class Discriminant:
    """Discriminant data (-D, r, N): r^2 = -D (mod 4N), N squarefree.

    The partition pipeline uses N = 6, r = 1, D = 24n - 1.
    """

    D: int
    r: int
    N: int

    def __post_init__(self):
        if self.D <= 0:
            raise ValueError("D must be positive (the form discriminant is -D)")
        if not _squarefree(self.N):
            raise ValueError(f"level {self.N} is not squarefree")
        if (self.r * self.r + self.D) % (4 * self.N) != 0:
            raise ValueError(f"r^2 + D = {self.r**2 + self.D} is not 0 mod 4N = {4*self.N}")

    @classmethod
    def for_partition(cls, n):
        if n < 1:
            raise ValueError("n must be >= 1")
        return cls(24 * n - 1, 1, 6)


def gkz_representatives(disc, max_doublings=6):
    """One Gamma_0(N) representative per SL2(Z) class of discriminant -D,
    satisfying N | a and b = r (mod 2N).

    Candidates are scanned in increasing a, then increasing b within
    [r mod 2N, r mod 2N + 2a); the first candidate whose SL2-reduction hits a
    new class wins, so representatives have minimal a.  The search bound
    starts at 12 * ceil(sqrt(D/3)) and doubles on exhaustion.
    """
    D, r, N = disc.D, disc.r, disc.N
    target = {f: None for f in enumerate_reduced(D)}
    missing = len(target)
    found = {}
    r0 = r % (2 * N)
    a_max = 12 * math.isqrt((D + 2) // 3 + 1)
    a_max += (-a_max) % N
    a = N
    doublings = 0
    while missing:
        if a > a_max:
            if doublings >= max_doublings:
                raise SearchBoundExhausted(
                    f"no representative below a = {a_max} for {missing} classes of D = {D}"
                )
            a_max *= 2
            doublings += 1
        for b in range(r0, r0 + 2 * a, 2 * N):
            t = b * b + D
            if t % (4 * a):
                continue
            c = t // (4 * a)
            if c <= 0:
                continue
            f = QuadForm(a, b, c)
            if not f.is_primitive():
                continue
            key = reduce_form(f)
            if key in target and key not in found:
                found[key] = f
                missing -= 1
        a += N
    return sorted(found.values())


def trace_representatives(disc):
    """One representative per Gamma_0(N)-orbit of ALL integral forms of
    discriminant -D with N | a, b = r (mod 2N), a > 0 -- imprimitive forms
    included.

    A form of content f is f times a primitive form of discriminant -D/f^2
    with residue f^{-1} r (mod 2N), so every square divisor f^2 of D with
    gcd(f, 2N) = 1 contributes the primitive classes of -D/f^2.  When D is
    squarefree this is exactly gkz_representatives; when it is not, trace
    formulas over the full orbit set need the extra classes.
    """
    out = list(gkz_representatives(disc))
    f = 2
    while f * f <= disc.D:
        if disc.D % (f * f) == 0:
            g = math.gcd(f, 2 * disc.N)
            if g != 1:
                if disc.r % g == 0:
                    raise ValueError(
                        f"content {f} shares a factor with 2N = {2 * disc.N}; unsupported"
                    )
                f += 1
                continue
            d2 = disc.D // (f * f)
            r2 = pow(f, -1, 2 * disc.N) * disc.r % (2 * disc.N)
            if (r2 * r2 + d2) % (4 * disc.N) == 0:
                if d2 in (3, 4):
                    raise ValueError(
                        f"content {f} leaves discriminant -{d2}, which has nontrivial stabilizers"
                    )
                sub = Discriminant(d2, r2, disc.N)
                out.extend(QuadForm(f * q.a, f * q.b, f * q.c) for q in gkz_representatives(sub))
        f += 1
    return sorted(out)


@dataclass(frozen=True)
class HeegnerPoint:
    """CM point alpha_Q = (-b + i sqrt(D)) / (2a) in the upper half-plane.

    `sign` records the accumulated Atkin-Lehner character value when the
    point was relocated; weight-0 evaluation at the point times `sign`
    equals evaluation at the original point.
    """

    re: mpfr
    im: mpfr
    source: QuadForm
    sign: int = 1

    def z(self):
        prec = max(self.re.precision, self.im.precision)
        return gmpy2.mpc(self.re, self.im, precision=(prec, prec))


def heegner_point(form, precision_bits, sign=1):
    _require_posdef(form)
    with gmpy2.context(precision=precision_bits + 16):
        d = -form.discriminant()
        re = mpfr(-form.b) / (2 * form.a)
        im = gmpy2.sqrt(mpfr(d)) / (2 * form.a)
    return HeegnerPoint(re=re, im=im, source=form, sign=sign)


def exact_divisors(N):
    """Divisors Q of N with gcd(Q, N/Q) = 1; all of them when N is squarefree."""
    return [q for q in range(1, N + 1) if N % q == 0 and math.gcd(q, N // q) == 1]


def atkin_lehner_matrix(Q, N):
    """An integral matrix [[Q u, -v], [N, Q]] of determinant Q representing
    the Atkin-Lehner involution W_Q at level N (u Q + v (N/Q) = 1)."""
    if N % Q or math.gcd(Q, N // Q) != 1:
        raise ValueError(f"{Q} is not an exact divisor of {N}")
    _g, u, v = gcdext(Q, N // Q)
    return (int(Q * u), int(-v), N, Q)


def _apply_to_form(form, mat):
    """Exact action on forms: Q' = Q o adj(g) / det(g), root moves by g."""
    p, q, r, s = mat
    det = p * s - q * r
    a, b, c = form.a, form.b, form.c
    a2 = Fraction(a * s * s - b * r * s + c * r * r, det)
    b2 = Fraction(-2 * a * q * s + b * (p * s + q * r) - 2 * c * p * r, det)
    c2 = Fraction(a * q * q - b * p * q + c * p * p, det)
    if a2.denominator != 1 or b2.denominator != 1 or c2.denominator != 1:
        raise ValueError(f"Atkin-Lehner image of {form} under {mat} is not integral")
    return QuadForm(int(a2), int(b2), int(c2))


def _translate_normalize(form):
    """Translate so the root's real part -b/(2a) lies in [-1/2, 1/2)."""
    a, b, c = form.a, form.b, form.c
    k = (a - b) // (2 * a)  # b + 2ak in (-a, a]
    return QuadForm(a, b + 2 * a * k, a * k * k + b * k + c)


def atkin_lehner_relocate(pt, signs, N=None, precision_bits=None):
    """Move a Heegner point to the maximal-imaginary-part member of its orbit
    under the Atkin-Lehner involutions W_Q combined with integer translations.

    `signs` maps each exact divisor Q | N to the character value of W_Q (it
    must be multiplicative under Q * Q' / gcd(Q, Q')^2).  The returned point's
    sign is multiplied by the sign of the involution applied, so weight-0
    evaluation at the output times its sign equals evaluation at the input.
    """
    if N is None:
        N = _level_from_signs(signs)
    _check_character(signs, N)
    if precision_bits is None:
        precision_bits = max(gmpy2.get_context().precision, 64)
    form = pt.source
    best = (_translate_normalize(form), 1)
    for Q in exact_divisors(N):
        if Q == 1:
            continue
        img = _translate_normalize(_apply_to_form(form, atkin_lehner_matrix(Q, N)))
        # larger imaginary part = smaller leading coefficient
        if img.a < best[0].a:
            best = (img, signs[Q])
    newform, s = best
    return heegner_point(newform, precision_bits, sign=pt.sign * s)


def _level_from_signs(signs):
    N = 1
    for q in signs:
        N = N * q // math.gcd(N, q)
    return N


def _check_character(signs, N):
    divs = exact_divisors(N)
    for q in divs:
        if q not in signs or signs[q] not in (1, -1):
            raise ValueError(f"signs must assign +-1 to every exact divisor of {N}")
    for q1 in divs:
        for q2 in divs:
            q3 = q1 * q2 // math.gcd(q1, q2) ** 2
            if signs[q1] * signs[q2] != signs[q3]:
                raise ValueError("signs do not form a character on exact divisors")
