"""Frozen reference values used across the test suite.

Everything here is an exact constant: known partition numbers, the expected
class representatives for small discriminants, the exact rational
coefficients of the first partition polynomials, and high-precision CM
values with their closed forms.  Tests compare against these; nothing in
this file is computed by the code under test.
"""

from gmpy2 import mpq

# p(n) spot values
P_100 = 190569292
P_1000 = 24061467864032622473692149727991

# (24n-1) p(n) for n = 1..4
TRACE_TIMES_D = {1: 23, 2: 94, 3: 213, 4: 475}

# level-6 representatives of discriminants -23 and -47 (minimal-a, b = 1 mod 12)
Q1_FORMS = [(6, 1, 1), (12, 13, 4), (18, 25, 9)]
Q2_FORMS = [(6, 1, 2), (12, 1, 1), (18, 13, 3), (24, 25, 7), (36, 49, 17)]

# H_n coefficients, descending powers, exact rationals
H_EXPECTED = {
    1: [mpq(1), mpq(-23), mpq(3592, 23), mpq(-419)],
    2: [
        mpq(1),
        mpq(-94),
        mpq(169659, 47),
        mpq(-65838),
        mpq(1092873176, 47**2),
        mpq(1454023, 47),
    ],
    3: [
        mpq(1),
        mpq(-213),
        mpq(1312544, 71),
        mpq(-723721),
        mpq(44648582886, 71**2),
        mpq(9188934683, 71),
        mpq(166629520876208, 71**3),
        mpq(2791651635293, 71**2),
    ],
    4: [
        mpq(1),
        mpq(-475),
        mpq(9032603, 95),
        mpq(-9455070),
        mpq(3949512899743, 95**2),
        mpq(-97215753021, 19),
        mpq(9776785708507683, 95**3),
        mpq(-53144327916296, 19**2),
        mpq(-134884469547631, 5**4 * 19),
    ],
}

# CM values at the n=1 Heegner points, 9 decimal places
P_ALPHA_Q1 = "13.965486281"
P_ALPHA_Q2_RE = "4.517256859"
P_ALPHA_Q2_IM = "-3.097890591"

# closed forms: with beta = 161529092 + 18648492 sqrt(69),
#   P(alpha_Q1) = beta^(1/3)/138 + 2782/(3 beta^(1/3)) + 23/3
#   P(alpha_Q2) = -beta^(1/3)/276 - 1391/(3 beta^(1/3)) + 23/3
#                 - (sqrt(-3)/2) (beta^(1/3)/138 - 2782/(3 beta^(1/3)))
BETA_INT = 161529092
BETA_SQRT69 = 18648492

# first coefficients of F: 2c(m) for m = -1..4 (c(-1) = 1, then halves)
TWO_C = [2, -20, -58, -208, -546]
