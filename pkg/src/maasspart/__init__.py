"""Partition numbers as finite algebraic traces of Maass singular moduli.

The pipeline: enumerate level-6 Heegner forms of discriminant 1 - 24n,
evaluate the weight-0 weak Maass form P (the raised eta-quotient F) at their
CM points with certified precision, sum, and divide by 24n - 1.  The same
values reconstruct the rational partition polynomial H_n(x) exactly.
"""

from .maass import CertifiedValue, MaassEvalSpec, choose_truncation, eval_F, eval_P, eval_partial_f
from .oracle import partition_pentagonal, partitions_brute
from .qseries import QSeries, e2_series, eta_series, f_coefficients
from .quadform import (
    Discriminant,
    HeegnerPoint,
    QuadForm,
    atkin_lehner_relocate,
    class_number,
    enumerate_reduced,
    gkz_representatives,
    heegner_point,
    reduce_form,
    trace_representatives,
)
from .trace import (
    PartitionPolynomial,
    TraceReport,
    general_trace,
    hn_polynomial,
    integrality_report,
    partition,
    trace_bruinier_ono,
)

__version__ = "0.1.0"
