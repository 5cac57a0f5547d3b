"""
CLI for projflow.

Commands:
    projflow verify      Check the translation equation of a flow
    projflow vf          Vector field of a flow
    projflow conj        Conjugate a flow or field by a birational map
    projflow ode         Radical solution of the fundamental ODE of a field
    projflow orbit       Orbit integral of a field, optional level-set samples
    projflow construct   Univariate flow from an orbit integral
    projflow extrude     Extrude a flow by a homogeneous integral
    projflow classify    Level, solenoidality and symmetry report
    projflow numcheck    RK4, area and volume cross-checks
    projflow catalog     Named flow families

Reports are JSON on stdout. Exit codes: 0 ok, 1 verification failed,
2 parse or domain error (with {"error": ...} on stdout).
"""

from __future__ import annotations

import json
import logging
from collections.abc import Sequence
from pathlib import Path
from typing import Any

import click
import numpy as np
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from projflow.algebra.parser import parse_expr, parse_tuple, split_components
from projflow.analyzers.classify import classify_field, classify_flow, solenoidal_search
from projflow.analyzers.numeric import (
    Curve2,
    Surface3,
    area_check,
    orbit_samples,
    rk4_flow,
    volume_check,
    write_csv,
)
from projflow.analyzers.odeorbit import (
    OdeSolution,
    OrbitIntegral,
    flow_from_integral_univariate,
    fundamental_ode,
    orbit_integral,
    orbit_integral_from_q,
    solve_ode_radical,
    verify_orbit,
)
from projflow.config import ProjflowConfig
from projflow.errors import DomainError, ProjflowError
from projflow.flows.catalog import catalog as build_catalog
from projflow.flows.catalog import catalog_list
from projflow.flows.conjugation import (
    BirMap,
    BirMap1H,
    LinMap,
    TupleBirMap,
    conjugate_flow,
    conjugate_vf,
    conjugate_vf_linear,
)
from projflow.flows.core import (
    FlowMap,
    VectorField,
    shifted_numeric,
    vector_field,
    verify_translation,
)
from projflow.flows.extrude import Integral3, extrude_flow
from projflow.models import VerdictResult, VerificationMode

console = Console(stderr=True)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_ERROR = 2


def emit(payload: dict[str, Any]) -> None:
    click.echo(json.dumps(payload, indent=2, ensure_ascii=False))


class ProjflowGroup(click.Group):
    """Maps library and usage errors to exit code 2 with a JSON payload."""

    def invoke(self, ctx: click.Context) -> Any:
        try:
            return super().invoke(ctx)
        except ProjflowError as e:
            emit(e.to_dict())
            ctx.exit(EXIT_ERROR)
        except click.UsageError as e:
            emit({"error": e.format_message()})
            ctx.exit(EXIT_ERROR)


def _config(ctx: click.Context) -> ProjflowConfig:
    cfg = ctx.find_root().obj
    assert isinstance(cfg, ProjflowConfig)
    return cfg


# -- argument resolution -----------------------------------------------------------


def _definition(kind: str, table: dict[str, Any], text: str) -> Any:
    name = text[1:]
    if name not in table:
        raise DomainError(f"no {kind} named '{name}' in the config file", {"known": sorted(table)})
    return table[name]


def resolve_flow(cfg: ProjflowConfig, text: str) -> FlowMap:
    if text.startswith("@"):
        parts = _definition("flow", cfg.definitions.flows, text)
        return FlowMap.of(parse_tuple(parts), name=text[1:])
    return FlowMap.of(parse_tuple(text))


def resolve_field(cfg: ProjflowConfig, text: str) -> VectorField:
    if text.startswith("@"):
        parts = _definition("field", cfg.definitions.vector_fields, text)
        return VectorField.of(parse_tuple(parts), name=text[1:])
    return VectorField.of(parse_tuple(text))


def resolve_integral(cfg: ProjflowConfig, text: str) -> OrbitIntegral | Integral3:
    declared = None
    if text.startswith("@"):
        spec = _definition("integral", cfg.definitions.integrals, text)
        text, declared = spec.W, spec.N
    W = parse_expr(text)
    names = {s.name for s in W.free_symbols}
    integral: OrbitIntegral | Integral3
    if names <= {"x", "y"}:
        integral = OrbitIntegral.of(W)
    else:
        integral = Integral3.of(W)
    if declared is not None and integral.degree != declared:
        raise DomainError(f"W = {text} has degree {integral.degree}, declared {declared}")
    return integral


def resolve_map(cfg: ProjflowConfig, bir: str | None, linear: str | None) -> BirMap:
    if (bir is None) == (linear is None):
        raise click.UsageError("give exactly one of --bir and --linear")
    if linear is not None:
        rows = [split_components(row) for row in linear.split(";")]
        return LinMap.of([[parse_expr(v) for v in row] for row in rows])
    assert bir is not None
    if bir.startswith("@"):
        spec = _definition("map", cfg.definitions.maps, bir)
        if spec.P is not None and spec.Q is not None:
            return BirMap1H.from_pq(parse_expr(spec.P), parse_expr(spec.Q))
        return TupleBirMap.of(parse_tuple(spec.forward or []), parse_tuple(spec.inverse or []))
    parts = split_components(bir)
    if len(parts) != 2:
        raise click.UsageError("--bir takes P,Q")
    return BirMap1H.from_pq(parse_expr(parts[0]), parse_expr(parts[1]))


def _floats(text: str, count: int, option: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError as e:
        raise click.UsageError(f"{option} takes {count} comma-separated numbers") from e
    if len(values) != count:
        raise click.UsageError(f"{option} takes {count} comma-separated numbers")
    return values


def _finish(ctx: click.Context, payload: dict[str, Any], passed: bool) -> None:
    emit(payload)
    if not passed:
        ctx.exit(EXIT_FAILED)


# -- commands --------------------------------------------------------------------


@click.group(cls=ProjflowGroup)
@click.version_option(version="0.1.0", prog_name="projflow")
@click.option("--config", type=click.Path(exists=True, dir_okay=False), help="Config file")
@click.option("--verbose", "-v", is_flag=True, help="Debug logging on stderr")
@click.pass_context
def main(ctx: click.Context, config: str | None, verbose: bool) -> None:
    """projflow - exact and numeric toolkit for projective flows."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        handlers=[RichHandler(console=console, show_path=False)],
        force=True,
    )
    ctx.obj = ProjflowConfig.load(Path(config) if config else None)


@main.command()
@click.option("--flow", "-f", "flow_text", required=True, help="Flow tuple or @name")
@click.option(
    "--mode",
    type=click.Choice([m.value for m in VerificationMode]),
    default=VerificationMode.EXACT.value,
)
@click.option("--order", type=int, help="Series order K")
@click.option("--tol", type=float, help="Numeric tolerance")
@click.option("--samples", type=int, help="Numeric sample count")
@click.option("--seed", type=int, help="Sampling seed")
@click.pass_context
def verify(
    ctx: click.Context,
    flow_text: str,
    mode: str,
    order: int | None,
    tol: float | None,
    samples: int | None,
    seed: int | None,
) -> None:
    """Check phi^w(phi^z(x)) = phi^(z+w)(x)."""
    cfg = _config(ctx)
    flow = resolve_flow(cfg, flow_text)
    report = verify_translation(
        flow,
        mode,
        order=order if order is not None else cfg.series_order,
        tol=tol if tol is not None else cfg.numeric_tol,
        samples=samples if samples is not None else cfg.numeric_samples,
        seed=seed if seed is not None else cfg.seed,
    )
    _finish(ctx, report.to_dict(), report.passed)


@main.command()
@click.option("--flow", "-f", "flow_text", required=True, help="Flow tuple or @name")
@click.pass_context
def vf(ctx: click.Context, flow_text: str) -> None:
    """Vector field of a flow."""
    flow = resolve_flow(_config(ctx), flow_text)
    emit(vector_field(flow).to_dict())


@main.command()
@click.option("--flow", "-f", "flow_text", help="Flow tuple or @name")
@click.option("--vf", "field_text", help="Vector field tuple or @name")
@click.option("--bir", help="P,Q of the map x·P/Q, or @name")
@click.option("--linear", help='Matrix rows, e.g. "a,b;c,d"')
@click.pass_context
def conj(
    ctx: click.Context,
    flow_text: str | None,
    field_text: str | None,
    bir: str | None,
    linear: str | None,
) -> None:
    """Conjugate by a map m: m^(-1)∘phi∘m, or the conjugated field."""
    cfg = _config(ctx)
    m = resolve_map(cfg, bir, linear)
    if (flow_text is None) == (field_text is None):
        raise click.UsageError("give exactly one of --flow and --vf")
    if flow_text is not None:
        result = conjugate_flow(resolve_flow(cfg, flow_text), m)
        emit({**result.to_dict(), "map": m.to_dict()})
        return
    assert field_text is not None
    field_ = resolve_field(cfg, field_text)
    if isinstance(m, LinMap):
        conjugated = conjugate_vf_linear(field_, m)
    elif isinstance(m, BirMap1H):
        conjugated = conjugate_vf(field_, m)
    else:
        raise DomainError("fields conjugate by x·P/Q or linear maps only")
    emit({**conjugated.to_dict(), "map": m.to_dict()})


def _rhs(cfg: ProjflowConfig, rhs: str | None) -> int:
    if rhs is None:
        return cfg.rhs
    if rhs.strip() not in ("+1", "1", "-1"):
        raise click.UsageError("--rhs takes +1 or -1")
    return int(rhs)


@main.command()
@click.option("--vf", "field_text", required=True, help="Plane vector field or @name")
@click.option("--rhs", help="+1 or -1")
@click.option("--max-deg", type=int, help="Numerator degree bound of the ansatz")
@click.pass_context
def ode(ctx: click.Context, field_text: str, rhs: str | None, max_deg: int | None) -> None:
    """Radical solution r + sigma·q^(1/N) of the fundamental ODE."""
    cfg = _config(ctx)
    equation = fundamental_ode(resolve_field(cfg, field_text), _rhs(cfg, rhs))
    result = solve_ode_radical(equation, max_deg if max_deg is not None else cfg.max_deg)
    payload = {"ode": equation.to_dict(), **result.to_dict()}
    if isinstance(result, OdeSolution):
        payload["W"] = orbit_integral_from_q(result.q, result.N).to_dict()["W"]
    emit(payload)


@main.command()
@click.option("--vf", "field_text", help="Plane vector field or @name")
@click.option("--q", "q_text", help="q(x) of the homogeneous solution")
@click.option("--N", "level", type=int, help="Level N paired with --q")
@click.option("--rhs", help="+1 or -1")
@click.option("--level-value", type=float, help="Sample the orbit W = C")
@click.option("--window", default="0.1,3,0.1,3", show_default=True, help="x0,x1,y0,y1")
@click.option("--count", type=int, default=50, show_default=True, help="Scan lines")
@click.option("--out", type=click.Path(dir_okay=False), help="CSV file for the samples")
@click.pass_context
def orbit(
    ctx: click.Context,
    field_text: str | None,
    q_text: str | None,
    level: int | None,
    rhs: str | None,
    level_value: float | None,
    window: str,
    count: int,
    out: str | None,
) -> None:
    """Orbit integral W of a field, or W = y^N/q(x/y)."""
    cfg = _config(ctx)
    if (field_text is None) == (q_text is None):
        raise click.UsageError("give exactly one of --vf and --q")
    payload: dict[str, Any]
    if q_text is not None:
        if level is None:
            raise click.UsageError("--q needs --N")
        integral = orbit_integral_from_q(parse_expr(q_text, ["x"]), level)
        payload = integral.to_dict()
    else:
        field_ = resolve_field(cfg, field_text or "")
        found = orbit_integral(field_, _rhs(cfg, rhs))
        if isinstance(found, VerdictResult):
            emit(found.to_dict())
            return
        integral = found
        payload = {**integral.to_dict(), "verified": verify_orbit(integral, field_)}

    if level_value is not None:
        x0, x1, y0, y1 = _floats(window, 4, "--window")
        points = orbit_samples(integral, level_value, (x0, x1, y0, y1), count)
        payload["samples"] = len(points)
        if out:
            write_csv(points, Path(out))
            payload["out"] = out
    emit(payload)


@main.command()
@click.option("--integral", "integral_text", required=True, help="W(x, y) or @name")
@click.option(
    "--univariate",
    is_flag=True,
    expose_value=False,
    help="Build U • y/(y+1), the default and only plane construction",
)
@click.option("--literal-square", is_flag=True, default=None, help="Second field slot +y^2")
@click.pass_context
def construct(ctx: click.Context, integral_text: str, literal_square: bool | None) -> None:
    """Flow U • y/(y+1) with W(U, y/(y+1)) = W(x, y)."""
    cfg = _config(ctx)
    integral = resolve_integral(cfg, integral_text)
    if not isinstance(integral, OrbitIntegral):
        raise DomainError("construct takes a plane integral W(x, y); use extrude in 3D")
    square = cfg.literal_square if literal_square is None else literal_square
    result = flow_from_integral_univariate(integral, literal_square=square)
    emit({**integral.to_dict(), **result.to_dict()})


@main.command()
@click.option("--flow", "-f", "flow_text", required=True, help="Flow tuple or @name")
@click.option("--integral", "integral_text", required=True, help="W in one more variable")
@click.pass_context
def extrude(ctx: click.Context, flow_text: str, integral_text: str) -> None:
    """Extend phi by T with W(phi(x), T) = W(x, z)."""
    cfg = _config(ctx)
    integral = resolve_integral(cfg, integral_text)
    if not isinstance(integral, Integral3):
        raise DomainError("extrusion needs an integral in one more variable than the flow")
    result = extrude_flow(resolve_flow(cfg, flow_text), integral)
    payload = {**integral.to_dict(), **result.to_dict()}
    if isinstance(result, FlowMap):
        payload.update(vector_field(result).to_dict())
    emit(payload)


@main.command()
@click.option("--vf", "field_text", help="Plane vector field or @name")
@click.option("--flow", "-f", "flow_text", help="Plane flow or @name")
@click.option("--search", "n_max", type=int, help="Solenoidal normal-form search up to N")
@click.option("--max-deg", type=int, help="Numerator degree bound for the level")
@click.pass_context
def classify(
    ctx: click.Context,
    field_text: str | None,
    flow_text: str | None,
    n_max: int | None,
    max_deg: int | None,
) -> None:
    """Level, solenoidality and i0 / i symmetry."""
    cfg = _config(ctx)
    given = [v for v in (field_text, flow_text, n_max) if v is not None]
    if len(given) != 1:
        raise click.UsageError("give exactly one of --vf, --flow and --search")
    if n_max is not None:
        hits = solenoidal_search(n_max)
        emit({"levels": sorted({h.N for h in hits}), "hits": [h.to_dict() for h in hits]})
        return
    bound = max_deg if max_deg is not None else cfg.max_deg
    if field_text is not None:
        report = classify_field(resolve_field(cfg, field_text), bound)
    else:
        report = classify_flow(resolve_flow(cfg, flow_text or ""), bound)
    emit(report.to_dict())


@main.group(cls=ProjflowGroup)
def numcheck() -> None:
    """Floating-point cross-checks."""


@numcheck.command("area")
@click.option("--flow", "-f", "flow_text", required=True, help="Plane flow or @name")
@click.option("--z", "z", type=float, default=0.3, show_default=True)
@click.option("--samples", type=int, default=4096, show_default=True)
@click.option("--radius", type=float, default=1.0, show_default=True)
@click.option("--center", default="0,0", show_default=True)
@click.option("--tol", type=float, default=1e-6, show_default=True)
@click.pass_context
def numcheck_area(
    ctx: click.Context,
    flow_text: str,
    z: float,
    samples: int,
    radius: float,
    center: str,
    tol: float,
) -> None:
    """Area enclosed by a circle before and after phi^z."""
    cx, cy = _floats(center, 2, "--center")
    curve = Curve2.circle(radius, (cx, cy), samples)
    check = area_check(resolve_flow(_config(ctx), flow_text), curve, z)
    conserved = check.difference <= tol
    _finish(ctx, {**check.to_dict(), "conserved": conserved}, conserved)


@numcheck.command("volume")
@click.option("--flow", "-f", "flow_text", required=True, help="3D flow or @name")
@click.option("--z", "z", type=float, default=0.25, show_default=True)
@click.option("--grid", type=int, default=256, show_default=True)
@click.option("--radius", type=float, default=1.0, show_default=True)
@click.option("--center", default="0,0,0", show_default=True)
@click.option("--tol", type=float, default=1e-4, show_default=True)
@click.pass_context
def numcheck_volume(
    ctx: click.Context,
    flow_text: str,
    z: float,
    grid: int,
    radius: float,
    center: str,
    tol: float,
) -> None:
    """Volume enclosed by a sphere before and after phi^z."""
    cx, cy, cw = _floats(center, 3, "--center")
    surface = Surface3.sphere(radius, (cx, cy, cw), (grid, grid))
    check = volume_check(resolve_flow(_config(ctx), flow_text), surface, z)
    conserved = check.difference <= tol
    _finish(ctx, {**check.to_dict(), "conserved": conserved}, conserved)


@numcheck.command("rk")
@click.option("--flow", "-f", "flow_text", help="Flow to compare against, or @name")
@click.option("--vf", "field_text", help="Vector field to integrate, or @name")
@click.option("--start", required=True, help="Comma-separated start point")
@click.option("--z", "z", type=float, default=0.25, show_default=True)
@click.option("--steps", type=int, default=250, show_default=True)
@click.option("--tol", type=float, default=1e-8, show_default=True)
@click.pass_context
def numcheck_rk(
    ctx: click.Context,
    flow_text: str | None,
    field_text: str | None,
    start: str,
    z: float,
    steps: int,
    tol: float,
) -> None:
    """RK4 integration of the field, compared with phi^z when a flow is given."""
    cfg = _config(ctx)
    flow = resolve_flow(cfg, flow_text) if flow_text else None
    if field_text:
        field_ = resolve_field(cfg, field_text)
    elif flow is not None:
        field_ = vector_field(flow)
    else:
        raise click.UsageError("give --vf or --flow")
    point = _floats(start, field_.dim, "--start")
    end = [float(v) for v in rk4_flow(field_, point, z, steps)]
    payload: dict[str, Any] = {"start": point, "z": z, "steps": steps, "rk4": end}
    if flow is None:
        emit(payload)
        return
    exact = shifted_numeric(flow.numeric(), np.array([z]), [np.array([p]) for p in point])
    closed = [float(v[0]) for v in exact]
    deviation = max(abs(a - b) for a, b in zip(end, closed))
    payload.update({"closed_form": closed, "deviation": deviation})
    _finish(ctx, payload, deviation <= tol)


@main.command("catalog")
@click.argument("name", required=False)
@click.option(
    "--params",
    "--param",
    "-p",
    "params",
    multiple=True,
    help="key=value pairs, repeatable or comma-separated",
)
@click.option("--list", "list_all", is_flag=True, help="List every family")
@click.option("--table", is_flag=True, help="Render the list as a table on stderr")
def catalog_command(
    name: str | None, params: tuple[str, ...], list_all: bool, table: bool
) -> None:
    """A named flow family member, or the list of families."""
    if list_all or name is None:
        families = catalog_list()
        if table:
            _show_catalog(families)
        emit(families)
        return
    values: dict[str, str] = {}
    for item in (part for text in params for part in text.split(",") if part.strip()):
        key, sep, value = item.partition("=")
        if not sep:
            raise click.UsageError(f"--params takes key=value, got {item!r}")
        values[key.strip()] = value.strip()
    flow = build_catalog(name, values)
    emit({**flow.to_dict(), **vector_field(flow).to_dict()})


def _show_catalog(families: dict[str, dict[str, Any]]) -> None:
    table = Table(title="Flow catalog")
    table.add_column("Family", style="cyan")
    table.add_column("Parameters", style="white")
    table.add_column("Description", style="dim")
    for name, info in families.items():
        params = ", ".join(f"{k}: {v}" for k, v in info["params"].items()) or "-"
        table.add_row(name, params, info["description"])
    console.print(table)


def run(argv: Sequence[str] | None = None) -> int:
    """Run the CLI and return its exit code."""
    try:
        result = main.main(args=list(argv) if argv is not None else None, standalone_mode=False)
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.ClickException as e:
        emit({"error": e.format_message()})
        return EXIT_ERROR
    except ProjflowError as e:
        emit(e.to_dict())
        return EXIT_ERROR
    return result if isinstance(result, int) else EXIT_OK


if __name__ == "__main__":
    main()
