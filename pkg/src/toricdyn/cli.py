"""Command line front end.

Reports are JSON (``"schema": 1``) or CSV, deterministic for a given
configuration, with every float printed to 12 significant digits.

Exit codes: 0 success, 2 a property check failed, 1 usage error.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import click

from . import act, equidist, oracle, support, surface, tmap, trop
from .lattice_fan import as_matrix, p2_fan

SCHEMA = 1
PROPERTY_FAILURE = 2
USAGE_ERROR = 1


class UsageFailure(click.UsageError):
    def __init__(self, module: str, message: str):
        super().__init__(f"error[{module}]: {message}")


def version_hash() -> str:
    h = hashlib.sha256()
    for p in sorted(Path(__file__).parent.glob("*.py")):
        h.update(p.name.encode())
        h.update(p.read_bytes())
    return h.hexdigest()[:16]


def _clean(x):
    """Make a report JSON friendly with 12 significant digits."""
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else int(x)
    if isinstance(x, float):
        if math.isnan(x) or math.isinf(x):
            return str(x)
        return float(f"{x:.12g}")
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    return str(x)


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def _emit(ctx: click.Context, report: dict, rows: list[dict] | None = None, columns: list[str] | None = None):
    opts = ctx.obj
    report = {"schema": SCHEMA, "version": version_hash(), "config": opts["config"], **report}
    if opts["format"] == "csv" and rows is not None:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(columns)
        for r in rows:
            wr.writerow([_fmt(r[c]) for c in columns])
        text = buf.getvalue()
    else:
        text = json.dumps(_clean(report), indent=2, sort_keys=True) + "\n"
    if opts["out"]:
        Path(opts["out"]).write_text(text)
    else:
        click.echo(text, nl=False)


def _parse(word: str) -> tmap.ToricWord:
    try:
        return tmap.parse_word(word)
    except tmap.WordParseError as e:
        raise UsageFailure("tmap.parse", str(e)) from None


def _parse_matrix(text: str):
    s = text.strip().strip("[]")
    try:
        rows = [[int(x) for x in r.split(",")] for r in s.split(";")]
        return as_matrix(rows)
    except (ValueError, TypeError):
        raise UsageFailure("cli.matrix", f"cannot read matrix {text!r}; use 'a,b;c,d'") from None


def _config(ctx: click.Context, **extra) -> None:
    cfg = {"command": ctx.info_name, **{k: v for k, v in ctx.obj["global"].items()}, **extra}
    ctx.obj["config"] = cfg


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--budget-rays", default=act.DEFAULT_RAY_BUDGET,
              type=click.IntRange(min=1), show_default=True, help="Fan ray budget for class iteration.")
@click.option("--budget-degree", default=oracle.DEFAULT_DEGREE_BUDGET, type=click.IntRange(min=1),
              show_default=True, help="Degree budget for full symbolic composition.")
@click.option("--tol", default=1e-2, type=float, show_default=True, help="Tolerance for numeric checks.")
@click.option("--mode", type=click.Choice(["exact", "numeric"]), default="exact", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write the report here.")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True)
@click.pass_context
def cli(ctx, budget_rays, budget_degree, tol, mode, out, fmt):
    """Toric surface map dynamics: invariants, degree growth, rotation
    numbers and equidistribution."""
    ctx.ensure_object(dict)
    ctx.obj.update(out=out, format=fmt, budget_rays=budget_rays, budget_degree=budget_degree, tol=tol, mode=mode)
    ctx.obj["global"] = {"budget_rays": budget_rays, "budget_degree": budget_degree, "tol": tol, "mode": mode,
                         "format": fmt}


@cli.command()
@click.argument("word")
@click.option("--n", default=50, type=click.IntRange(min=1), show_default=True, help="Stability iteration budget.")
@click.pass_context
def analyze(ctx, word, n):
    """Profile of WORD: rho, dtop, tropicalization, exc/ind, stability and regime."""
    _config(ctx, word=word, n=n)
    w = _parse(word)
    prof = tmap.profile(w)
    try:
        stab = tmap.is_internally_stable(w, N=n, prof=prof).to_json()
    except tmap.WordError as e:
        stab = {"verdict": "unverified", "n": None, "reason": str(e)}
    reg = tmap.classify_regime(w, n_degrees=6, budget_rays=ctx.obj["budget_rays"], prof=prof)
    rep = {"profile": prof.to_json(), "stability": stab, "regime": reg.to_json(),
           "covering_degree": trop.covering_degree(prof.trop), "homeomorphism": trop.is_homeomorphism(prof.trop)}
    _emit(ctx, rep)
    return 0


def _oracle_table(w, n):
    return oracle.oracle_degrees(tmap.oracle_maps(w), n)


@cli.command()
@click.argument("word")
@click.option("--n", default=5, type=click.IntRange(min=1), show_default=True)
@click.option("--oracle-check", is_flag=True, help="Compare with symbolic degrees.")
@click.pass_context
def degrees(ctx, word, n, oracle_check):
    """Degree sequence of WORD.  CSV columns: n,deg,ratio,root
    (plus oracle,match with --oracle-check)."""
    _config(ctx, word=word, n=n, oracle_check=oracle_check)
    w = _parse(word)
    try:
        seq = act.degree_sequence(w, n, budget_rays=ctx.obj["budget_rays"])
        budget_hit = False
    except act.RayBudgetError as e:
        seq, budget_hit = e.partial, True
    except act.ActError as e:
        raise UsageFailure("act", str(e)) from None
    rows = []
    degs = seq.degrees
    for i, d in enumerate(degs):
        rows.append({"n": i + 1, "deg": d, "ratio": float(d / degs[i - 1]) if i else float(d),
                     "root": float(d) ** (1.0 / (i + 1))})
    status = 0
    columns = ["n", "deg", "ratio", "root"]
    rep = {"word": str(w), "stability": seq.stability, "flags": seq.flags + (["ray budget exceeded"] if budget_hit else []),
           "rows": rows}
    if oracle_check:
        try:
            cert = _oracle_table(w, len(degs))
        except oracle.OracleError as e:
            raise UsageFailure("oracle", str(e)) from None
        for r, od in zip(rows, cert.degrees):
            r["oracle"] = od
            r["match"] = od == r["deg"]
        columns += ["oracle", "match"]
        rep["oracle_agree_across_runs"] = cert.agree
        if not all(r["match"] for r in rows):
            status = PROPERTY_FAILURE
    if len(degs) >= 3:
        prof = tmap.profile(w)
        est = act.dyn_degree_estimate(degs, prof.dtop)
        rep["estimate"] = {"ratio": est.ratios[-1], "root": est.roots[-1], "sqrt_dtop": est.lower,
                           "within_bounds": est.within_bounds}
    _emit(ctx, rep, rows, columns)
    return status


@cli.command()
@click.argument("word")
@click.option("--n", default=10000, type=click.IntRange(min=1), show_default=True)
@click.pass_context
def rotation(ctx, word, n):
    """Rotation number of the tropicalization of WORD."""
    _config(ctx, word=word, n=n)
    w = _parse(word)
    T = tmap.word_trop(w)
    rep: dict = {"word": str(w), "homeomorphism": trop.is_homeomorphism(T), "orientation": trop.orientation(T)}
    if T.is_linear:
        v = trop.rotation_is_rational_linear(T.matrix)
        rep["verdict"] = v.kind
        rep["value"] = v.value
    try:
        est, err = trop.rotation_number(T, n)
        rep["estimate"], rep["error_bound"] = est, err
        if T.is_linear and rep["verdict"] == "rational":
            d = abs(est - float(rep["value"]))
            rep["agrees"] = min(d, 1 - d) <= err
    except trop.TropError as e:
        rep["estimate"] = None
        rep["note"] = str(e)
    _emit(ctx, rep)
    return 0 if rep.get("agrees", True) else PROPERTY_FAILURE


@cli.command()
@click.argument("word")
@click.option("--n", default=50, type=click.IntRange(min=1), show_default=True)
@click.pass_context
def stability(ctx, word, n):
    """Internal stability verdict for WORD."""
    _config(ctx, word=word, n=n)
    w = _parse(word)
    try:
        v = tmap.is_internally_stable(w, N=n)
    except tmap.WordError as e:
        raise UsageFailure("tmap.stability", str(e)) from None
    _emit(ctx, {"word": str(w), **v.to_json()})
    return 0


def _psi(name: str):
    if name == "line":
        return support.PLFunction(p2_fan(), (0, 0, 1))
    if name == "norm":
        return support.euclidean_norm()
    try:
        return support.newton_support(name)
    except ValueError:
        raise UsageFailure("cli.psi", f"unknown psi {name!r}: use line, norm or a Laurent polynomial") from None


@cli.command("equidist")
@click.option("--A", "A_text", default="1,-2;2,1", show_default=True, help="Matrix 'a,b;c,d'.")
@click.option("--psi", default="line", show_default=True, help="line, norm or a Laurent polynomial.")
@click.option("--n", default=10000, type=click.IntRange(min=10), show_default=True)
@click.option("--directions", default=360, type=click.IntRange(min=1), show_default=True)
@click.pass_context
def equidist_cmd(ctx, A_text, psi, n, directions):
    """Cesaro averages against c*||v||_A.  CSV columns: n,e_n."""
    _config(ctx, A=A_text, psi=psi, n=n, directions=directions)
    A = _parse_matrix(A_text)
    f = _psi(psi)
    try:
        rep = equidist.convergence_report(f, A, directions=directions, n_max=n)
    except equidist.EquidistError as e:
        raise UsageFailure("equidist", str(e)) from None
    rows = [{"n": k, "e_n": e} for k, e in zip(rep.n_grid, rep.errors)]
    ok = rep.passes(ctx.obj["tol"])
    _emit(ctx, {"cstar": rep.cstar, "final": rep.final, "decreasing": rep.decreasing, "passes": ok, "rows": rows},
          rows, ["n", "e_n"])
    return 0 if ok else PROPERTY_FAILURE


@cli.command("oracle-check")
@click.argument("word")
@click.option("--n", default=5, type=click.IntRange(min=1), show_default=True)
@click.pass_context
def oracle_check(ctx, word, n):
    """Class-machinery degrees against symbolic degrees.  CSV columns: n,class,oracle,match."""
    _config(ctx, word=word, n=n)
    w = _parse(word)
    try:
        seq = act.degree_sequence(w, n, budget_rays=ctx.obj["budget_rays"])
        cert = _oracle_table(w, n)
    except (act.ActError, oracle.OracleError) as e:
        raise UsageFailure("oracle", str(e)) from None
    rows = [{"n": i + 1, "class": d, "oracle": od, "match": d == od}
            for i, (d, od) in enumerate(zip(seq.degrees, cert.degrees))]
    ok = all(r["match"] for r in rows)
    _emit(ctx, {"word": str(w), "stability": seq.stability, "rows": rows, "all_match": ok,
                "oracle_agree_across_runs": cert.agree}, rows, ["n", "class", "oracle", "match"])
    return 0 if ok else PROPERTY_FAILURE


@cli.command()
@click.argument("poly")
@click.pass_context
def newton(ctx, poly):
    """Newton polygon, pole intersection numbers and curve class of POLY."""
    _config(ctx, poly=poly)
    try:
        P = support.LaurentPolynomial.parse(poly)
        cls, numbers = surface.curve_class_from_newton(P)
    except (ValueError, surface.SurfaceError) as e:
        raise UsageFailure("surface.newton", str(e)) from None
    verts = support.newton_polygon(P.support)
    numeric = ctx.obj["mode"] == "numeric"
    coeffs = [float(c) if numeric else c for c in cls.coeffs]
    rows = [{"ray": f"{v[0]} {v[1]}", "length": k} for v, k in sorted(numbers.items())]
    rep = {"poly": str(P), "vertices": [list(v) for v in verts],
           "intersections": [{"ray": list(v), "length": k} for v, k in sorted(numbers.items())],
           "balance": list(surface.balance(numbers)),
           "class": {"rays": [list(r) for r in cls.surface.fan.rays], "coeffs": coeffs},
           "degree": float(cls.degree) if numeric else cls.degree}
    _emit(ctx, rep, rows, ["ray", "length"])
    return 0


@cli.command()
@click.argument("poly")
@click.option("--n", default=64, type=click.IntRange(min=16), show_default=True, help="Quadrature size.")
@click.option("--directions", default=64, type=click.IntRange(min=1), show_default=True)
@click.pass_context
def ronkin(ctx, poly, n, directions):
    """Homogenized Ronkin function of POLY against its Newton support function.
    CSV columns: theta,homogenized,newton,diff."""
    _config(ctx, poly=poly, n=n, directions=directions)
    try:
        P = support.LaurentPolynomial.parse(poly)
    except ValueError as e:
        raise UsageFailure("support.ronkin", str(e)) from None
    R = support.homogenize(support.ronkin_function(P, n))
    S = support.newton_support(P)
    rows = []
    for k, v in enumerate(support.unit_directions(directions)):
        a, b = R(v), float(S(v))
        rows.append({"theta": 2 * math.pi * k / directions, "homogenized": a, "newton": b, "diff": abs(a - b)})
    worst = max(r["diff"] for r in rows)
    ok = worst <= ctx.obj["tol"]
    _emit(ctx, {"poly": str(P), "max_diff": worst, "passes": ok, "rows": rows},
          rows, ["theta", "homogenized", "newton", "diff"])
    return 0 if ok else PROPERTY_FAILURE


_GLOBAL_OPTS = ("--budget-rays", "--budget-degree", "--tol", "--mode", "--out", "--format")


def _hoist_globals(argv: list[str]) -> list[str]:
    """Let group options appear after the subcommand as well."""
    head, rest, i = [], [], 0
    while i < len(argv):
        a = argv[i]
        name = a.split("=", 1)[0]
        if name in _GLOBAL_OPTS:
            if "=" in a or i + 1 == len(argv):
                head.append(a)
                i += 1
            else:
                head += argv[i:i + 2]
                i += 2
            continue
        rest.append(a)
        i += 1
    return head + rest


def main(argv=None) -> int:
    argv = _hoist_globals(list(sys.argv[1:] if argv is None else argv))
    try:
        rc = cli.main(args=argv, prog_name="toricdyn", standalone_mode=False)
    except click.exceptions.UsageError as e:
        e.show()
        return USAGE_ERROR
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return USAGE_ERROR
    except click.exceptions.Exit as e:
        return e.exit_code
    return rc if isinstance(rc, int) else 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
