"""Command-line surface: certified p(n), partition polynomials, class
representatives, oracle cross-checks, and point evaluation.

Exact quantities are always printed as exact decimal strings (JSON included);
approximate quantities always travel with an explicit error bound.
"""

from __future__ import annotations

import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

import click
import gmpy2

from . import maass, oracle, qseries, trace
from .cache import CoefficientCache, default_cache_dir
from .maass import F_SIGNS
from .quadform import Discriminant, QuadForm, gkz_representatives, heegner_point

log = logging.getLogger(__name__)


@dataclass
class RunConfig:
    precision_bits: int | None = None
    truncation: int | None = None
    guard_bits: int = 32
    cache_dir: Path | None = None
    output_format: str = "text"
    relocation_enabled: bool = False
    deterministic_sum: bool = True

    def __post_init__(self):
        if self.precision_bits is not None and self.precision_bits <= 0:
            raise ValueError("precision override must be positive")
        if self.truncation is not None and self.truncation <= 0:
            raise ValueError("truncation override must be positive")
        if self.guard_bits <= 0:
            raise ValueError("guard bits must be positive")
        if self.output_format not in ("text", "json"):
            raise ValueError("output format must be text or json")

    def cache(self):
        return CoefficientCache(self.cache_dir or default_cache_dir())


def _mpfr_str(x):
    return gmpy2.mpfr(x).__format__(".30g")


def _cv_json(cv):
    return {
        "re": _mpfr_str(cv.value.real),
        "im": _mpfr_str(cv.value.imag),
        "err": repr(cv.err),
        "certified": cv.certified,
    }


def _emit(data, text, config):
    if config.output_format == "json":
        click.echo(json.dumps(data, indent=2))
    else:
        click.echo(text)


@click.group()
@click.option("--prec-bits", type=int, default=None, help="target precision override, in bits")
@click.option("--terms", type=int, default=None, help="truncation order override")
@click.option("--guard-bits", type=int, default=32, show_default=True)
@click.option("--cache-dir", type=click.Path(path_type=Path), default=None,
              help=f"coefficient cache directory (default ${'MAASSPART_CACHE_DIR'} or ~/.cache/maasspart)")
@click.option("--format", "output_format", type=click.Choice(["text", "json"]), default="text")
@click.option("--relocation/--no-relocation", default=False,
              help="relocate Heegner points by Atkin-Lehner involutions (optimization; results must not change)")
@click.option("--deterministic-sum/--no-deterministic-sum", default=True)
@click.option("-v", "--verbose", count=True)
@click.pass_context
def main(ctx, prec_bits, terms, guard_bits, cache_dir, output_format, relocation, deterministic_sum, verbose):
    """Partition numbers as finite traces of Maass singular moduli."""
    logging.basicConfig(level=logging.DEBUG if verbose > 1 else logging.INFO if verbose else logging.WARNING)
    ctx.obj = RunConfig(
        precision_bits=prec_bits,
        truncation=terms,
        guard_bits=guard_bits,
        cache_dir=cache_dir,
        output_format=output_format,
        relocation_enabled=relocation,
        deterministic_sum=deterministic_sum,
    )


def _positive_n(n):
    if n < 1:
        raise click.UsageError("n must be a positive integer")


@main.command()
@click.argument("n", type=int)
@click.pass_obj
def pn(config, n):
    """Compute p(N) with a rounding certificate."""
    _positive_n(n)
    cache = config.cache()
    report = None
    target = config.precision_bits
    retries = 0 if config.precision_bits is not None else trace.MAX_RETRIES
    for _ in range(retries + 1):
        report = trace.trace_bruinier_ono(
            n, target_bits=target, cache=cache,
            relocation=config.relocation_enabled,
            deterministic_sum=config.deterministic_sum,
        )
        if report.certified:
            break
        target = (target or trace.initial_target_bits(n, len(report.forms))) * 2
    data = {
        "n": str(n),
        "D": str(report.D),
        "p": str(report.p_n) if report.p_n is not None else None,
        "trace_times_D": str(report.D * report.p_n) if report.p_n is not None else None,
        "trace": _cv_json(report.trace),
        "rounding_margin": repr(report.rounding_margin),
        "certified": report.certified,
    }
    text = (
        f"p({n}) = {report.p_n}\n"
        f"trace = (24n-1) p(n) = {report.D * report.p_n if report.p_n is not None else 'uncertified'}"
        f"  [margin {report.rounding_margin:.3e}, err {report.trace.err:.3e}]"
    )
    _emit(data, text, config)
    if not report.certified:
        raise SystemExit(2)


@main.command()
@click.argument("n", type=int)
@click.pass_obj
def poly(config, n):
    """Partition polynomial H_N(x) with exact rational coefficients."""
    _positive_n(n)
    p = trace.hn_polynomial(n, cache=config.cache(), relocation=config.relocation_enabled)
    coeffs = [
        {"numerator": str(c.numerator), "denominator": str(c.denominator)}
        for c in p.coefficients
    ]
    data = {
        "n": str(n),
        "degree": str(p.degree),
        "coefficients_descending": coeffs,
        "denominators_bound_used": str(p.denominators_bound_used),
    }
    terms = []
    for k, c in enumerate(p.coefficients):
        power = p.degree - k
        terms.append(f"({c}) x^{power}" if power else f"({c})")
    _emit(data, f"H_{n}(x) = " + " + ".join(terms), config)


@main.command()
@click.argument("n", type=int)
@click.pass_obj
def forms(config, n):
    """Level-6 class representatives and their Heegner points for N."""
    _positive_n(n)
    disc = Discriminant.for_partition(n)
    reps = gkz_representatives(disc)
    prec = config.precision_bits or 64
    rows = []
    for f in reps:
        pt = heegner_point(f, prec)
        rows.append(
            {
                "form": [str(f.a), str(f.b), str(f.c)],
                "alpha_re": _mpfr_str(pt.re),
                "alpha_im": _mpfr_str(pt.im),
            }
        )
    data = {"n": str(n), "D": str(disc.D), "class_number": str(len(reps)), "forms": rows}
    lines = [f"discriminant -{disc.D}, class number {len(reps)}"]
    for row in rows:
        a, b, c = row["form"]
        lines.append(f"  [{a},{b},{c}]  alpha = {row['alpha_re']} + {row['alpha_im']} i")
    _emit(data, "\n".join(lines), config)


def _parse_range(spec):
    try:
        lo, hi = spec.split("..")
        lo, hi = int(lo), int(hi)
    except ValueError:
        raise click.UsageError("range must look like 1..20")
    if lo < 1 or hi < lo:
        raise click.UsageError("range must be 1 <= a <= b")
    return lo, hi


@main.command()
@click.argument("range_spec", metavar="A..B")
@click.option("--perturb", is_flag=True, hidden=True,
              help="flip one bit of one trace result to exercise mismatch reporting")
@click.pass_obj
def verify(config, range_spec, perturb):
    """Compare trace-computed p(n) against the pentagonal-recurrence oracle."""
    lo, hi = _parse_range(range_spec)
    table = oracle.partition_pentagonal(hi)
    cache = config.cache()
    rows = []
    mismatches = 0
    for n in range(lo, hi + 1):
        got = trace.partition(n, cache=cache, relocation=config.relocation_enabled)
        if perturb and n == lo:
            got ^= 1
        want = table[n]
        ok = got == want
        mismatches += 0 if ok else 1
        rows.append({"n": str(n), "trace_p": str(got), "oracle_p": str(want), "match": ok})
    data = {
        "range": f"{lo}..{hi}",
        "matches": str(len(rows) - mismatches),
        "total": str(len(rows)),
        "rows": rows,
    }
    lines = [f"{r['n']:>5}  {r['trace_p']:>24}  {r['oracle_p']:>24}  {'ok' if r['match'] else 'MISMATCH'}"
             for r in rows]
    lines.append(f"{len(rows) - mismatches}/{len(rows)} matches")
    _emit(data, "\n".join(lines), config)
    if mismatches:
        raise SystemExit(1)


@main.command(name="eval")
@click.argument("a", type=int)
@click.argument("b", type=int)
@click.argument("c", type=int)
@click.pass_obj
def eval_point(config, a, b, c):
    """Evaluate P at the Heegner point of the form [A, B, C]."""
    form = QuadForm(a, b, c)
    if not form.is_positive_definite():
        raise click.UsageError(f"{form} is not positive definite")
    target = config.precision_bits or 64
    cache = config.cache()
    series = qseries.f_coefficients(128, cache=cache)
    model = maass.CoefficientGrowthModel.fit(series)
    pt = heegner_point(form, target + config.guard_bits)
    M, prec = maass.choose_truncation(
        float(pt.im), target, guard_bits=config.guard_bits, model=model, im_max=float(pt.im)
    )
    if config.truncation is not None:
        M = config.truncation
    spec = maass.MaassEvalSpec(
        qseries.f_coefficients(M + 1, cache=cache).restrict(M),
        level=6,
        atkin_lehner_signs=dict(F_SIGNS),
        truncation=M,
        precision_bits=prec,
        growth=model,
    )
    value = maass.eval_P(pt.z(), spec)
    data = {
        "form": [str(a), str(b), str(c)],
        "alpha_re": _mpfr_str(pt.re),
        "alpha_im": _mpfr_str(pt.im),
        "P": _cv_json(value),
        "terms": str(M),
    }
    text = (
        f"alpha = {_mpfr_str(pt.re)} + {_mpfr_str(pt.im)} i\n"
        f"P(alpha) = {value.value}  (err <= {value.err:.3e}, {M} terms)"
    )
    _emit(data, text, config)


if __name__ == "__main__":
    main()
