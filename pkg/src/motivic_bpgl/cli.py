"""Command-line interface."""
from __future__ import annotations

import json
import re
import sys

import click

from .grading import ConfigurationError, FieldSpec, legendre


def _spec(field: str, prime: int) -> FieldSpec:
    return FieldSpec.parse(field, prime)


_RANGE = re.compile(r"^\s*([sfw])\s*=\s*(-?\d+)\s*\.\.\s*(-?\d+)\s*$")


def parse_window(text: str | None) -> dict | None:
    """``s=a..b,f=c..d,w=e..g`` (any subset) into a window dict."""
    if not text:
        return None
    out = {}
    for part in text.split(","):
        m = _RANGE.match(part)
        if not m:
            raise click.BadParameter(f"cannot read window component {part!r}")
        lo, hi = int(m.group(2)), int(m.group(3))
        if lo > hi:
            raise click.BadParameter(f"empty range in {part!r}")
        out[m.group(1)] = (lo, hi)
    return out


def _emit(ctx: click.Context, text: str) -> None:
    out = ctx.obj.get("out")
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        click.echo(text.rstrip("\n"))


def _module(spec: FieldSpec, text: str, algebra: str):
    from .comodules import _pair, brown_gitler, lightning_flash, unit_module

    n = {"E0": 0, "E1": 1}.get(algebra)
    if n is None:
        raise ConfigurationError(f"unknown algebra {algebra!r}")
    parts = text.split(":")
    kind, nums = parts[0], parts[1:]
    try:
        nums = [int(x) for x in nums]
    except ValueError as exc:
        raise ConfigurationError(f"bad module {text!r}") from exc
    if kind == "M" and not nums:
        return unit_module(_pair(spec, n))
    if kind == "L" and len(nums) == 1:
        return lightning_flash(spec, nums[0]).restrict(n)
    if kind == "BG" and len(nums) == 2:
        M = brown_gitler(spec, nums[0], nums[1])
        if n > M.n:
            raise ConfigurationError(f"B_{nums[0]}(k) carries an E({M.n})-action only")
        return M.restrict(n)
    raise ConfigurationError(f"unsupported module {text!r}")


class _Group(click.Group):
    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except click.exceptions.Exit:
            raise
        except (click.ClickException, click.exceptions.Abort):
            raise
        except Exception as exc:  # every computation failure becomes an error document
            click.echo(json.dumps({"error": type(exc).__name__, "message": str(exc)}))
            ctx.exit(1)


def _load_config(ctx, param, value):
    if value:
        with open(value, encoding="utf-8") as fh:
            ctx.default_map = json.load(fh)
    return value


@click.group(cls=_Group)
@click.option("--config", type=click.Path(exists=True, dir_okay=False), callback=_load_config, is_eager=True,
              expose_value=False, help="JSON document whose keys mirror the command options.")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write the result here.")
@click.pass_context
def main(ctx: click.Context, out: str | None) -> None:
    """Ext, Adams spectral sequences and cooperations for motivic BPGL<n>."""
    ctx.ensure_object(dict)
    ctx.obj["out"] = out


field_opt = click.option("--field", "field", default="C", show_default=True, help="C, R or Fq:<q>.")
prime_opt = click.option("--prime", type=int, default=2, show_default=True)
window_opt = click.option("--window", default=None, help="e.g. s=0..12,f=0..8,w=-6..6")


@main.command()
@field_opt
@prime_opt
@click.option("--algebra", type=click.Choice(["E0", "E1"]), default="E1", show_default=True)
@click.pass_context
def coefficients(ctx, field, prime, algebra):
    """The coefficient ring, the algebra relations and the closed form of Ext(M_p)."""
    from .closed_forms import coefficient_families
    from .comodules import _pair

    spec = _spec(field, prime)
    n = int(algebra[1])
    pair = _pair(spec, n)
    ring = pair.ring
    fams = coefficient_families(spec, n, "corrected")
    body = {"spec": spec.to_dict(), "algebra": algebra,
            "generators": [{"name": g.name, "degree": list(g.deg), "square_zero": g.nilpotent} for g in ring.gens],
            "ring_relations": ring.relations(), "algebra_relations": pair.relations(),
            "ext_families": [{"label": F.label.replace("@", "(b)"), "base": list(F.base),
                              "step": list(F.step) if F.step else None, "v0": F.v0, "v1_max": F.v1_max}
                             for F in fams[:8]]}
    _emit(ctx, json.dumps(body, indent=1))


@main.command()
@field_opt
@prime_opt
@click.option("--module", "module", default="M", show_default=True, help="M, L:k, BG:n:k or LL:k:m.")
@click.option("--algebra", type=click.Choice(["E0", "E1"]), default="E1", show_default=True)
@window_opt
@click.option("--products/--no-products", default=True, show_default=True)
@click.pass_context
def ext(ctx, field, prime, module, algebra, window, products):
    """Ext chart as a chart/v1 JSON document."""
    from .chartio import document_from_chart
    from .ext import ext_bimodule, ext_chart

    spec = _spec(field, prime)
    win = parse_window(window)
    if module.startswith("LL:"):
        if algebra != "E1":
            raise ConfigurationError("LL:k:m is an E(1) computation")
        try:
            k, m = (int(x) for x in module.split(":")[1:])
        except ValueError as exc:
            raise ConfigurationError(f"bad module {module!r}") from exc
        chart = ext_bimodule(spec, k, m, win, products)
    else:
        chart = ext_chart(_module(spec, module, algebra), win, products)
    doc = document_from_chart(chart)
    doc.meta["module"] = module
    _emit(ctx, doc.to_json())


@main.command()
@field_opt
@prime_opt
@click.option("--k", "k", type=int, required=True)
@click.option("--n", "n", type=click.IntRange(-1, 0), default=0, show_default=True, help="B_n(k).")
@click.pass_context
def decompose(ctx, field, prime, k, n):
    """Split B_n(k) into free summands and a core, and compare the core with L(nu_p(k!))."""
    from .comodules import brown_gitler, lightning_flash
    from .margolis import margolis_homology, split_free_summands

    spec = _spec(field, prime)
    B = brown_gitler(spec, n, k)
    sp = split_free_summands(B)
    core = sp.core
    body = {"spec": spec.to_dict(), "module": B.tag, "rank": B.rank, "core_rank": core.rank,
            "free": [[d.s, d.w] for d in sp.free],
            "margolis": {f"Q{i}": {f"{d.s},{d.w}": v for d, v in margolis_homology(core, i).dims().items()}
                         for i in range(core.n + 1)}}
    if n == 0:
        m = legendre(k, prime)
        L = lightning_flash(spec, m, core.ring)
        same = core.rank == L.rank and all(margolis_homology(core, i).dims() == margolis_homology(L, i).dims()
                                           for i in (0, 1))
        body["core"] = f"L({m})" if same else "unmatched"
    else:
        body["core"] = "M_p" if core.rank == 1 else ("0" if core.rank == 0 else "unmatched")
    _emit(ctx, json.dumps(body, indent=1))


@main.command()
@click.argument("target", type=click.Choice(["BPGL0", "BPGL1"]))
@field_opt
@prime_opt
@window_opt
@click.option("--format", "fmt", type=click.Choice(["tsv", "json"]), default="tsv", show_default=True)
@click.option("--variant", type=click.Choice(["corrected", "literal"]), default="corrected", show_default=True)
@click.pass_context
def homotopy(ctx, target, field, prime, window, fmt, variant):
    """Homotopy groups of BPGL<0> or BPGL<1>."""
    from .adams import homotopy as run

    table = run(_spec(field, prime), target, parse_window(window), variant)
    _emit(ctx, table.to_tsv() if fmt == "tsv" else json.dumps(table.to_dict(), indent=1))


@main.command()
@click.argument("target", type=click.Choice(["BPGL0", "BPGL1"]))
@field_opt
@prime_opt
@window_opt
@click.option("--k-max", type=int, default=4, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["tsv", "json"]), default="tsv", show_default=True)
@click.pass_context
def cooperations(ctx, target, field, prime, window, k_max, fmt):
    """Homotopy of BPGL<n> ^ BPGL<n>, one summand per weight stratum k."""
    from .adams import cooperations as run

    table = run(target, _spec(field, prime), k_max, parse_window(window))
    _emit(ctx, table.to_tsv() if fmt == "tsv" else json.dumps(table.to_dict(), indent=1))


@main.command()
@click.option("--n", "n", type=int, required=True)
@field_opt
@prime_opt
@window_opt
@click.option("--max-total", type=int, default=None, help="Largest |I| considered.")
@click.option("--format", "fmt", type=click.Choice(["tsv", "json"]), default="tsv", show_default=True)
@click.pass_context
def nline(ctx, n, field, prime, window, max_total, fmt):
    """The n-line of the BPGL<1> Adams-Novikov-type spectral sequence, by I."""
    from .adams import n_line

    table = n_line(n, _spec(field, prime), parse_window(window), max_total)
    if fmt == "json":
        body = table.to_dict()
        body["summands"] = {",".join(map(str, I)): part.meta.get("label") for I, part in table.parts.items()}
        _emit(ctx, json.dumps(body, indent=1))
    else:
        _emit(ctx, table.to_tsv())


@main.command()
@click.argument("source", type=click.Path(exists=True, dir_okay=False))
@click.option("--unit", type=int, default=40, show_default=True)
@click.option("--no-collapse", is_flag=True, help="Draw every weight separately.")
@click.pass_context
def render(ctx, source, unit, no_collapse):
    """Render a chart/v1 JSON document to SVG."""
    from .chartio import ChartDocument, render_svg

    with open(source, encoding="utf-8") as fh:
        doc = ChartDocument.from_json(fh.read())
    _emit(ctx, render_svg(doc, unit=unit, collapse_weight=not no_collapse))


SUITES = ("oracle", "closed-forms", "bockstein", "collapse", "soule")


@main.command()
@click.argument("suite", type=click.Choice(SUITES + ("all",)), default="all")
@field_opt
@prime_opt
@window_opt
@click.pass_context
def verify(ctx, suite, field, prime, window):
    """Cross-checks on one field: resolution vs cobar, closed forms, Bockstein path,
    collapse degrees and (over F_q) the Soule groups.  Exit status 1 on any mismatch."""
    from . import verify as checks

    spec = _spec(field, prime)
    win = parse_window(window)
    names = SUITES if suite == "all" else (suite,)
    report = {name: checks.run(name, spec, win) for name in names}
    report = {k: v for k, v in report.items() if v is not None}
    _emit(ctx, json.dumps(report, indent=1, default=str))
    if any(not v["ok"] for v in report.values()):
        ctx.exit(1)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
