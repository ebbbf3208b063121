"""The `wg` command line: partition families, exact Gram/Weingarten tables,
Haar integrals, cumulant transforms, finite-group oracles, Monte Carlo
checks, de Finetti gaps, and named invariant suites.

All exact values are printed as rational strings, never floats.  Validation
problems exit with status 2 and a machine-readable error object; `wg verify`
exits 1 when a suite finds a violation.
"""

from __future__ import annotations

import csv as _csv
import functools
import json
import random
import sys
from fractions import Fraction

import click

from . import cumulants as cm
from . import models as md
from . import partitions as pt
from . import weingarten as wgn
from .errors import WgError

_CAT_CHOICES = [c.value for c in pt.Category]
_SPECIES_CHOICES = [s.value for s in cm.Species]


def _parse_word(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise WgError(f"bad word {text!r}; expected comma separated integers") from None


def _parse_rationals(text: str) -> list[Fraction]:
    try:
        return [Fraction(x) for x in text.split(",")]
    except (ValueError, ZeroDivisionError):
        raise WgError(f"bad rational list {text!r}") from None


def _emit(fmt: str, payload: dict, rows=None, header=None) -> None:
    if fmt == "json":
        click.echo(json.dumps(payload))
        return
    writer = _csv.writer(sys.stdout)
    if rows is None:
        header = ("key", "value")
        rows = [(k, v) for k, v in payload.items()]
    writer.writerow(header)
    writer.writerows(rows)


def _matrix_rows(partitions, matrix):
    return [
        (str(pa), str(pb), str(matrix[a][b]))
        for a, pa in enumerate(partitions)
        for b, pb in enumerate(partitions)
    ]


def _guarded(f):
    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except WgError as exc:
            click.echo(
                json.dumps({"error": {"type": type(exc).__name__, "message": str(exc)}})
            )
            sys.exit(2)

    return wrapper


_format_option = click.option(
    "--format", "fmt", type=click.Choice(["json", "csv"]), default="json",
    help="Output format.",
)
_cat_option = click.option(
    "--cat", "cat_tag", type=click.Choice(_CAT_CHOICES), required=True,
    help="Easy quantum group category.",
)


@click.group()
@click.option("--kmax", type=int, default=None, help="Override the ground-set size limit.")
def main(kmax):
    """Exact combinatorics of easy quantum groups: partitions, Weingarten
    calculus, cumulants, and desk-scale de Finetti checks."""
    if kmax is not None:
        pt.set_k_max(kmax)


@main.command("partitions")
@_cat_option
@click.option("--k", type=int, required=True)
@_format_option
@_guarded
def cmd_partitions(cat_tag, k, fmt):
    """List the partition family D(k) in enumeration order."""
    cat = pt.Category.from_tag(cat_tag)
    parts = pt.enumerate_family(cat, k)
    payload = {"category": cat.value, "k": k, "partitions": [str(p) for p in parts]}
    rows = [(str(p),) for p in parts]
    _emit(fmt, payload, rows, ("partition",))


@main.command("gram")
@_cat_option
@click.option("--k", type=int, required=True)
@click.option("--n", type=int, required=True)
@_format_option
@_guarded
def cmd_gram(cat_tag, k, n, fmt):
    """Exact Gram matrix n^{|pi v sigma|} over D(k)."""
    cat = pt.Category.from_tag(cat_tag)
    g = wgn.gram(cat, k, n)
    parts = pt.enumerate_family(cat, k)
    payload = {
        "category": cat.value,
        "k": k,
        "n": n,
        "partitions": [str(p) for p in parts],
        "gram": [[str(Fraction(v)) for v in row] for row in g],
    }
    _emit(fmt, payload, _matrix_rows(parts, g), ("pi", "sigma", "value"))


@main.command("invert")
@_cat_option
@click.option("--k", type=int, required=True)
@click.option("--n", type=int, required=True)
@_format_option
@_guarded
def cmd_invert(cat_tag, k, n, fmt):
    """Exact Weingarten table: Gram matrix, inverse, and Mobius matrix."""
    cat = pt.Category.from_tag(cat_tag)
    table = wgn.weingarten_table(cat, k, n)
    _emit(
        fmt,
        table.to_json_dict(),
        _matrix_rows(table.partitions, table.weingarten),
        ("pi", "sigma", "value"),
    )


@main.command("integrate")
@_cat_option
@click.option("--n", type=int, required=True)
@click.option("--i", "i_text", required=True, help="Row word, comma separated.")
@click.option("--j", "j_text", required=True, help="Column word, comma separated.")
@_format_option
@_guarded
def cmd_integrate(cat_tag, n, i_text, j_text, fmt):
    """Haar-state integral of u_{i1 j1} ... u_{ik jk}."""
    cat = pt.Category.from_tag(cat_tag)
    value = wgn.haar_integral(cat, n, _parse_word(i_text), _parse_word(j_text))
    _emit(fmt, {"value": str(value)})


@main.command("transform")
@click.option("--species", type=click.Choice(_SPECIES_CHOICES), required=True)
@click.option("--direction", type=click.Choice(["m2c", "c2m"]), required=True)
@click.option("--moments", default=None, help="Moment sequence m1,m2,... (for m2c).")
@click.option("--cumulants", "cumulants_text", default=None,
              help="Cumulant sequence c1,c2,... (for c2m).")
@_format_option
@_guarded
def cmd_transform(species, direction, moments, cumulants_text, fmt):
    """Single-variable moment/cumulant transform for one species."""
    sp = cm.Species.from_tag(species)
    if direction == "m2c":
        if moments is None:
            raise WgError("--moments is required for m2c")
        m = cm.MomentFunctional.from_sequence(_parse_rationals(moments))
        out = cm.moments_to_cumulants(sp, m).sequence()
        payload = {"cumulants": [str(v) for v in out]}
    else:
        if cumulants_text is None:
            raise WgError("--cumulants is required for c2m")
        c = cm.CumulantFamily.from_sequence(sp, _parse_rationals(cumulants_text))
        out = cm.cumulants_to_moments(sp, c).sequence()
        payload = {"moments": [str(v) for v in out]}
    rows = [(idx + 1, str(v)) for idx, v in enumerate(out)]
    _emit(fmt, payload, rows, ("order", "value"))


@main.command("oracle")
@click.option("--group", type=click.Choice(["S", "H"]), required=True)
@click.option("--n", type=int, required=True)
@click.option("--i", "i_text", required=True)
@click.option("--j", "j_text", required=True)
@_format_option
@_guarded
def cmd_oracle(group, n, i_text, j_text, fmt):
    """Exact coordinate-monomial average over S_n or H_n by enumeration."""
    spec = md.FiniteGroupSpec(group, n)
    value = md.group_integral_exact(spec, _parse_word(i_text), _parse_word(j_text))
    _emit(fmt, {"value": str(value)})


@main.command("mc")
@click.option("--group", type=click.Choice(["O", "B"]), required=True)
@click.option("--n", type=int, required=True)
@click.option("--i", "i_text", required=True)
@click.option("--j", "j_text", required=True)
@click.option("--samples", type=int, required=True)
@click.option("--seed", type=int, required=True)
@_format_option
@_guarded
def cmd_mc(group, n, i_text, j_text, samples, seed, fmt):
    """Monte Carlo coordinate-monomial average over O_n or B_n."""
    cfg = md.MCConfig(samples, seed)
    est = md.group_integral_mc(group, n, _parse_word(i_text), _parse_word(j_text), cfg)
    payload = {
        "estimate": est.estimate,
        "std_error": est.std_error,
        "samples": samples,
        "seed": seed,
    }
    _emit(fmt, payload)


@main.group("gap")
def cmd_gap():
    """Finite de Finetti gaps for the classical models."""


@cmd_gap.command("urn")
@click.option("--values", required=True, help="Urn contents, comma separated rationals.")
@click.option("--word", required=True)
@_format_option
@_guarded
def cmd_gap_urn(values, word, fmt):
    """Without-replacement moment vs the i.i.d. prediction."""
    urn = md.UrnSpec(_parse_rationals(values))
    report = md.urn_definetti_gap(urn, _parse_word(word))
    _emit(fmt, {"lhs": str(report.lhs), "rhs": str(report.rhs), "gap": str(report.gap)})


@cmd_gap.command("sphere")
@click.option("--n", type=int, required=True)
@click.option("--word", required=True)
@_format_option
@_guarded
def cmd_gap_sphere(n, word, fmt):
    """Radius sqrt(n) sphere moment vs the standard Gaussian prediction."""
    report = md.sphere_definetti_gap(n, _parse_word(word))
    _emit(fmt, {"lhs": str(report.lhs), "rhs": str(report.rhs), "gap": str(report.gap)})


@main.command("ck")
@_cat_option
@click.option("--k", type=int, required=True)
@click.option("--nmax", type=int, required=True)
@click.option("--trace", is_flag=True, default=False, help="Include the per-n trace.")
@_format_option
@_guarded
def cmd_ck(cat_tag, k, nmax, trace, fmt):
    """Scanned approximation constant max_n n * sum |W n^{|pi|} - mu|."""
    cat = pt.Category.from_tag(cat_tag)
    scan = wgn.ck_constant(cat, k, nmax)
    payload = {"ck": str(scan.value), "argmax_n": scan.argmax_n}
    if trace:
        payload["trace"] = [[n, str(v)] for n, v in scan.trace]
        payload["skipped"] = list(scan.skipped)
    _emit(fmt, payload)


# ---------------------------------------------------------------------------
# verify suites


def _cats(cat_tag: str | None) -> list[pt.Category]:
    if cat_tag is None:
        return list(pt.Category)
    return [pt.Category.from_tag(cat_tag)]


def _grid(nmax: int) -> list[int]:
    return [n for n in (8, 16, 32, 64) if n <= nmax]


def _suite_west(cats, k, nmax):
    checks = []
    grid = _grid(nmax)
    if len(grid) < 2:
        raise WgError(f"--nmax {nmax} leaves fewer than two grid points")
    for cat in cats:
        res = [wgn.asymptotic_residual(cat, k, n).max_residual for n in grid]
        decay = res[-1] < res[-2] or (res[-1] == 0 and res[-2] == 0)
        checks.append(
            {
                "name": f"{cat.value} k={k} residual decay",
                "ok": decay,
                "detail": f"residuals {[str(r) for r in res]} on n={grid}",
            }
        )
        scaled = [n * r for n, r in zip(grid, res)]
        bounded = scaled[-1] <= max(scaled[:-1]) or scaled[-1] == 0
        checks.append(
            {
                "name": f"{cat.value} k={k} scaled residual bounded",
                "ok": bounded,
                "detail": f"n*residual {[str(s) for s in scaled]}",
            }
        )
        ob = [max(wgn.order_bound_table(cat, k, n).values(), default=Fraction(0))
              for n in grid]
        ob_ok = ob[-1] <= max(ob[:-1]) or ob[-1] == 0
        checks.append(
            {
                "name": f"{cat.value} k={k} order bound",
                "ok": ob_ok,
                "detail": f"scaled magnitudes {[str(v) for v in ob]}",
            }
        )
    return checks


def _suite_inverse(cats, k, n):
    checks = []
    for cat in cats:
        try:
            table = wgn.weingarten_table(cat, k, n)
        except WgError as exc:
            checks.append(
                {"name": f"{cat.value} k={k} n={n} inverse", "ok": True,
                 "detail": f"skipped: {exc}"}
            )
            continue
        d = len(table.partitions)
        ok = True
        for a in range(d):
            for b in range(d):
                entry = sum(
                    table.weingarten[a][t] * table.gram[t][b] for t in range(d)
                )
                if entry != (1 if a == b else 0):
                    ok = False
        checks.append(
            {"name": f"{cat.value} k={k} n={n} inverse", "ok": ok,
             "detail": f"{d}x{d} product vs identity"}
        )
    return checks


def _suite_moebius(cats, k):
    checks = []
    for cat in cats:
        parts = pt.enumerate_family(cat, k)
        ambient = cat.ambient
        ok = True
        for pa in parts:
            for pb in parts:
                if pt.is_refinement(pa, pb):
                    if pt.mobius(cat, k, pa, pb) != pt.mobius(ambient, k, pa, pb):
                        ok = False
        checks.append(
            {"name": f"{cat.value} k={k} mobius restriction", "ok": ok,
             "detail": f"ambient {ambient.value}, {len(parts)} partitions"}
        )
    return checks


def _suite_fixedpoint(cats, k, n):
    checks = []
    for cat in cats:
        ok = True
        detail = ""
        for kk in range(1, k + 1):
            family = pt.enumerate_family(cat, kk)
            j_classes = [
                _canonical_word(p) for p in pt.enumerate_all(kk) if p.block_count <= n
            ]
            for pi in family:
                for j in j_classes:
                    expected = (
                        Fraction(1) if pt.is_refinement(pi, pt.kernel(j)) else Fraction(0)
                    )
                    total = Fraction(0)
                    for assign in _block_assignments(pi, n):
                        total += wgn.haar_integral(cat, n, assign, j)
                    if total != expected:
                        ok = False
                        detail = f"pi={pi} j={j} k={kk}: got {total}, want {expected}"
        checks.append(
            {"name": f"{cat.value} k<={k} n={n} integrated fixed point", "ok": ok,
             "detail": detail or "all identities hold"}
        )
    return checks


def _canonical_word(p: pt.SetPartition) -> tuple[int, ...]:
    idx = p.block_index()
    return tuple(idx[pos] + 1 for pos in range(1, p.ground_size + 1))


def _block_assignments(pi: pt.SetPartition, n: int):
    import itertools

    k = pi.ground_size
    idx = pi.block_index()
    for letters in itertools.product(range(1, n + 1), repeat=pi.block_count):
        yield tuple(letters[idx[pos]] for pos in range(1, k + 1))


def _suite_counts(kmax_check):
    import math

    checks = []
    bell = [1, 1, 2, 5, 15, 52, 203, 877, 4140]
    for k in range(1, min(kmax_check, 8) + 1):
        got = len(pt.enumerate_all(k))
        checks.append(
            {"name": f"|P({k})| = Bell({k})", "ok": got == bell[k],
             "detail": f"{got} vs {bell[k]}"}
        )
    for m in range(1, min(kmax_check // 2, 4) + 1):
        k = 2 * m
        pairs = len(pt.enumerate_family(pt.Category.O, k))
        dfact = 1
        for t in range(1, m + 1):
            dfact *= 2 * t - 1
        checks.append(
            {"name": f"|P2({k})| = {2*m-1}!!", "ok": pairs == dfact,
             "detail": f"{pairs} vs {dfact}"}
        )
        ncp = len(pt.enumerate_family(pt.Category.O_PLUS, k))
        catal = math.comb(2 * m, m) // (m + 1)
        checks.append(
            {"name": f"|NC2({k})| = Catalan({m})", "ok": ncp == catal,
             "detail": f"{ncp} vs {catal}"}
        )
        bal = len(pt.enumerate_family(pt.Category.O_STAR, k))
        checks.append(
            {"name": f"|E2({k})| = {m}!", "ok": bal == math.factorial(m),
             "detail": f"{bal} vs {math.factorial(m)}"}
        )
    for k in range(1, min(kmax_check, 8) + 1):
        nc = len(pt.enumerate_family(pt.Category.S_PLUS, k))
        catal = math.comb(2 * k, k) // (k + 1)
        checks.append(
            {"name": f"|NC({k})| = Catalan({k})", "ok": nc == catal,
             "detail": f"{nc} vs {catal}"}
        )
    return checks


def _suite_roundtrip(species, order, letters, cases, seed):
    sp = cm.Species.from_tag(species)
    rng = random.Random(seed)
    checks = []

    def rand_fraction():
        return Fraction(rng.randint(-8, 8), rng.randint(1, 6))

    for case in range(cases):
        if sp is cm.Species.HALF or letters > 1:
            # Generate through cumulants so the functional is valid for the
            # species; for half, mixed-word cumulants must be zero.
            values = {}
            for word in cm.all_words(letters, order):
                if sp is cm.Species.HALF:
                    values[word] = (
                        rand_fraction()
                        if len(set(word)) == 1 and len(word) % 2 == 0
                        else Fraction(0)
                    )
                else:
                    values[word] = rand_fraction()
            family = cm.CumulantFamily.build(sp, order, values, letters=letters)
            m = cm.cumulants_to_moments(sp, family)
            back = cm.moments_to_cumulants(sp, m)
            ok = all(
                back.cumulant(w) == family.cumulant(w)
                for w in cm.all_words(letters, order)
            )
            again = cm.cumulants_to_moments(sp, back)
            ok = ok and all(
                again.moment(w) == m.moment(w) for w in cm.all_words(letters, order)
            )
        else:
            moments = [rand_fraction() for _ in range(order)]
            m = cm.MomentFunctional.from_sequence(moments)
            c = cm.moments_to_cumulants(sp, m)
            back = cm.cumulants_to_moments(sp, c)
            ok = back.sequence() == m.sequence()
        if not ok:
            checks.append(
                {"name": f"{species} case {case}", "ok": False, "detail": "round trip broke"}
            )
    checks.append(
        {
            "name": f"{species} round trips ({cases} cases, order {order},"
            f" {letters} letters)",
            "ok": not any(not c["ok"] for c in checks),
            "detail": "exact equality both directions",
        }
    )
    return checks


def _suite_halfmodel(order):
    checks = []
    rayleigh = md.HalfModelSpec(
        {1: _rayleigh_moments(order), 2: _rayleigh_moments(order)}
    )
    other = md.HalfModelSpec(
        {1: _rayleigh_moments(order), 2: [Fraction(1), Fraction(3), Fraction(15)][: (order + 1) // 2]}
    )
    for name, spec in (("rayleigh pair", rayleigh), ("mixed laws", other)):
        result = md.half_model_vs_cumulants(spec, order)
        checks.append(
            {
                "name": f"half model vs cumulants, {name}, order {order}",
                "ok": result.ok,
                "detail": "exact agreement" if result.ok else f"witness {result.witness}",
            }
        )
    return checks


def _rayleigh_moments(order):
    import math

    return [Fraction(math.factorial(a)) for a in range(1, order // 2 + 1)]


@main.group("verify")
def cmd_verify():
    """Named invariant suites; exits 1 on any violation."""


def _run_suite(fmt, suite_name, checks):
    ok = all(c["ok"] for c in checks)
    payload = {"suite": suite_name, "ok": ok, "checks": checks}
    rows = [(c["name"], "ok" if c["ok"] else "FAIL", c["detail"]) for c in checks]
    _emit(fmt, payload, rows, ("check", "status", "detail"))
    if not ok:
        sys.exit(1)


@cmd_verify.command("west")
@click.option("--cat", "cat_tag", type=click.Choice(_CAT_CHOICES), default=None)
@click.option("--k", type=int, required=True)
@click.option("--nmax", type=int, default=64)
@_format_option
@_guarded
def verify_west(cat_tag, k, nmax, fmt):
    """Weingarten asymptotics: residual decay and bounded scaled entries."""
    _run_suite(fmt, "west", _suite_west(_cats(cat_tag), k, nmax))


@cmd_verify.command("inverse")
@click.option("--cat", "cat_tag", type=click.Choice(_CAT_CHOICES), default=None)
@click.option("--k", type=int, required=True)
@click.option("--n", type=int, required=True)
@_format_option
@_guarded
def verify_inverse(cat_tag, k, n, fmt):
    """weingarten * gram = identity, exactly."""
    _run_suite(fmt, "inverse", _suite_inverse(_cats(cat_tag), k, n))


@cmd_verify.command("moebius")
@click.option("--cat", "cat_tag", type=click.Choice(_CAT_CHOICES), default=None)
@click.option("--k", type=int, required=True)
@_format_option
@_guarded
def verify_moebius(cat_tag, k, fmt):
    """Family Mobius function equals the ambient one on comparable pairs."""
    _run_suite(fmt, "moebius", _suite_moebius(_cats(cat_tag), k))


@cmd_verify.command("fixedpoint")
@click.option("--cat", "cat_tag", type=click.Choice(_CAT_CHOICES), default=None)
@click.option("--k", type=int, default=3)
@click.option("--n", type=int, default=4)
@_format_option
@_guarded
def verify_fixedpoint(cat_tag, k, n, fmt):
    """Integrated fixed-point identity: constrained sums of Haar integrals."""
    _run_suite(fmt, "fixedpoint", _suite_fixedpoint(_cats(cat_tag), k, n))


@cmd_verify.command("counts")
@click.option("--k", type=int, default=8)
@_format_option
@_guarded
def verify_counts(k, fmt):
    """Counting laws: Bell, double factorial, Catalan, m! family sizes."""
    _run_suite(fmt, "counts", _suite_counts(k))


@cmd_verify.command("roundtrip")
@click.option("--species", type=click.Choice(_SPECIES_CHOICES), required=True)
@click.option("--order", type=int, default=6)
@click.option("--letters", type=int, default=1)
@click.option("--cases", type=int, default=25)
@click.option("--seed", type=int, default=0)
@_format_option
@_guarded
def verify_roundtrip(species, order, letters, cases, seed, fmt):
    """Moment/cumulant round trips on random rational inputs."""
    _run_suite(fmt, "roundtrip", _suite_roundtrip(species, order, letters, cases, seed))


@cmd_verify.command("halfmodel")
@click.option("--order", type=int, default=6)
@_format_option
@_guarded
def verify_halfmodel(order, fmt):
    """2x2 matrix model moments vs half-liberated cumulant predictions."""
    _run_suite(fmt, "halfmodel", _suite_halfmodel(order))


if __name__ == "__main__":
    main()
