"""
Catalog of named projective flows.

Each family is registered with its parameter schema; catalog() validates
parameters and returns a named FlowMap, catalog_list() describes every
family for the CLI.
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any

from sympy import Expr, Rational

from projflow.algebra.expr import as_expr, default_variables, homogeneity_degree, symbols
from projflow.algebra.parser import parse_expr, split_components
from projflow.errors import CatalogError, ProjflowError
from projflow.flows.conjugation import conjugate_flow, l0_map
from projflow.flows.core import FlowMap

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ParamSpec:
    """One family parameter: its kind and the domain shown to users."""

    kind: str  # int, rational, vector, form
    domain: str
    check: Callable[[Any], bool] | None = None


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    build: Callable[..., FlowMap]
    params: Mapping[str, ParamSpec] = field(default_factory=dict)
    description: str = ""

    def schema(self) -> dict[str, str]:
        return {key: spec.domain for key, spec in self.params.items()}


_REGISTRY: dict[str, CatalogEntry] = {}


def register(
    name: str, params: Mapping[str, ParamSpec] | None = None, description: str = ""
) -> Callable[[Callable[..., FlowMap]], Callable[..., FlowMap]]:
    def decorator(build: Callable[..., FlowMap]) -> Callable[..., FlowMap]:
        _REGISTRY[name] = CatalogEntry(name, build, dict(params or {}), description)
        return build

    return decorator


NONNEG_INT = ParamSpec("int", "int ≥ 0", lambda n: n >= 0)
POS_INT = ParamSpec("int", "int ≥ 1", lambda n: n >= 1)
ANY_INT = ParamSpec("int", "int")
RATIONAL = ParamSpec("rational", "rational")
NONZERO = ParamSpec("rational", "rational ≠ 0", lambda c: c != 0)

X, Y = symbols("xy")


def _plane(u: Expr, v: Expr) -> FlowMap:
    return FlowMap.of((u, v), (X, Y))


# -- canonical and symmetric plane flows -------------------------------------


@register("phi_N", {"N": NONNEG_INT}, "canonical rational flow of level N")
def phi_N(N: int) -> FlowMap:
    return _plane(X * (Y + 1) ** (N - 1), Y / (Y + 1))


@register("phi_hat_N", {"N": NONNEG_INT}, "phi_N conjugated by the coordinate swap")
def phi_hat_N(N: int) -> FlowMap:
    return _plane(X / (X + 1), Y * (X + 1) ** (N - 1))


@register("psi_N", {"N": POS_INT}, "i-symmetric rational flow of level N")
def psi_N(N: int) -> FlowMap:
    lead = (Y + 1) ** N * (X + Y)
    return _plane((lead + (X - Y)) / (lead - (X - Y)) * Y / (Y + 1), Y / (Y + 1))


@register("psi_prime_N", {"N": POS_INT}, "second i-symmetric rational flow of level N")
def psi_prime_N(N: int) -> FlowMap:
    lead = (Y + 1) ** N * (X - Y)
    return _plane((lead + (X + Y)) / (-lead + (X + Y)) * Y / (Y + 1), Y / (Y + 1))


@register("sym0_N", {"N": POS_INT}, "i0-symmetric flow l0∘psi_N∘l0^(-1)")
def sym0_N(N: int) -> FlowMap:
    return conjugate_flow(psi_N(N), l0_map().inverse())


@register("sym0_prime_N", {"N": POS_INT}, "i0-symmetric flow l0∘psi'_N∘l0^(-1)")
def sym0_prime_N(N: int) -> FlowMap:
    return conjugate_flow(psi_prime_N(N), l0_map().inverse())


@register("phi_1", description="level-1 i-symmetric flow")
def phi_1() -> FlowMap:
    top = 2 * X * Y**2 + X**2 + 2 * X * Y + Y**2
    return _plane(top * X / (X * Y + X + Y) ** 2, top * Y / ((Y**2 + X + Y) * (X * Y + X + Y)))


@register("psi_1", description="level-1 i-symmetric flow, psi_N at N = 1")
def psi_1() -> FlowMap:
    return _plane((X * Y + Y**2 + 2 * X) / ((2 + X + Y) * (Y + 1)), Y / (Y + 1))


@register("psi_prime_1", description="level-1 i-symmetric flow, psi'_N at N = 1")
def psi_prime_1() -> FlowMap:
    return _plane((X * Y - Y**2 + 2 * X) / ((2 - X + Y) * (Y + 1)), Y / (Y + 1))


@register("phi_prime_1", description="level-1 i-symmetric flow, phi_1 under (x, y) -> (x, -y)")
def phi_prime_1() -> FlowMap:
    top = 2 * X * Y**2 + X**2 - 2 * X * Y + Y**2
    return _plane(top * X / (X * Y - X + Y) ** 2, top * Y / ((Y**2 + X - Y) * (-X * Y + X - Y)))


# -- solenoidal plane flows ----------------------------------------------------


@register("phi_sph_inf", description="solenoidal level-1 flow with field (x-y)^2, (x-y)^2")
def phi_sph_inf() -> FlowMap:
    return _plane((X - Y) ** 2 + X, (X - Y) ** 2 + Y)


@register("phi_sph_1", description="flow with circular orbits through the origin")
def phi_sph_1() -> FlowMap:
    den = (X + 1) ** 2 + (Y + 1) ** 2
    return _plane((X**2 + Y**2 + 2 * X) / den, (X**2 + Y**2 + 2 * Y) / den)


@register("phi_sph_1_orth", description="phi_sph_1 conjugated by (x, y) -> (-x, y)")
def phi_sph_1_orth() -> FlowMap:
    den = (X - 1) ** 2 + (Y + 1) ** 2
    return _plane((-(X**2) - Y**2 + 2 * X) / den, (X**2 + Y**2 + 2 * Y) / den)


# -- shared-orbit normal forms -------------------------------------------------


@register("phi_cN", {"c": NONZERO, "N": NONNEG_INT}, "level-N flows sharing orbits with phi_N")
def phi_cN(c: Rational, N: int) -> FlowMap:
    return _plane(X * (c * Y + 1) ** (N - 1), Y / (c * Y + 1))


@register("phi_hat_dN", {"d": NONZERO}, "level-2 flows with orbits xy = const")
def phi_hat_dN(d: Rational) -> FlowMap:
    return _plane(X / (d * X + 1), Y * (d * X + 1))


@register("phi_a", {"a": RATIONAL}, "level-1 flow with field (x+ay)^2, 0")
def phi_a(a: Rational) -> FlowMap:
    return _plane((X + a * Y * X + a**2 * Y**2) / (1 - X - a * Y), Y)


@register("psi_0", description="level-1 flow with field y^2, 0")
def psi_0() -> FlowMap:
    return _plane(X + Y**2, Y)


# -- higher dimensions -----------------------------------------------------------


@register("psi_nm", {"n": ANY_INT, "m": ANY_INT}, "3D flow in x, y, w; solenoidal iff n+m = 4")
def psi_nm(n: int, m: int) -> FlowMap:
    x, y, w = symbols("xyw")
    return FlowMap.of((x * (w + 1) ** (n - 1), y * (w + 1) ** (m - 1), w / (w + 1)), (x, y, w))


@register("Phi_AB", {"A": ANY_INT, "B": ANY_INT}, "3D flow; solenoidal iff A = B = 2")
def Phi_AB(A: int, B: int) -> FlowMap:
    x, y, z = symbols("xyz")
    return FlowMap.of((x / (x + 1), y / (y + 1), z * (x + 1) ** A * (y + 1) ** B), (x, y, z))


@register("Phi_N", {"N": NONNEG_INT}, "3D extrusion of phi_hat_N with the integral z(x^2+xy)")
def Phi_N(N: int) -> FlowMap:
    x, y, z = symbols("xyz")
    third = z * (x + y) * (x + 1) ** 2 / (x + (x + 1) ** N * y)
    return FlowMap.of((x / (x + 1), y * (x + 1) ** (N - 1), third), (x, y, z))


@register(
    "phi_c_L",
    {
        "c": ParamSpec("vector", "nonzero rational vector"),
        "L": ParamSpec("form", "linear form with L(c) = 0"),
    },
    "solenoidal flow c·L(x)^2 + x",
)
def phi_c_L(c: Sequence[Rational], L: Expr) -> FlowMap:
    c = [Rational(v) for v in c]
    if all(v == 0 for v in c):
        raise CatalogError("c must be a nonzero vector")
    variables = default_variables(len(c))
    form = as_expr(L)
    extra = form.free_symbols - set(variables)
    if extra:
        raise CatalogError(f"L uses {sorted(s.name for s in extra)} outside {variables}")
    if not form.is_polynomial(*variables) or homogeneity_degree(form, variables) != 1:
        raise CatalogError(f"L = {form} is not a linear form")
    if form.xreplace(dict(zip(variables, c))) != 0:
        raise CatalogError(f"L(c) = {form.xreplace(dict(zip(variables, c)))}, must vanish")
    return FlowMap.of([ci * form**2 + v for ci, v in zip(c, variables)], variables)


# -- access ----------------------------------------------------------------------


def _convert(name: str, spec: ParamSpec, value: Any, arity_hint: int | None) -> Any:
    try:
        if spec.kind == "int":
            converted: Any = int(value)
            if isinstance(value, str) and str(converted) != value.strip().lstrip("+"):
                raise ValueError(value)
        elif spec.kind == "rational":
            converted = Rational(as_expr(value))
        elif spec.kind == "vector":
            items = split_components(value) if isinstance(value, str) else list(value)
            converted = [Rational(as_expr(v)) for v in items]
        else:
            names = [s.name for s in default_variables(arity_hint or 2)]
            converted = parse_expr(value, names) if isinstance(value, str) else as_expr(value)
    except ProjflowError:
        raise
    except (TypeError, ValueError) as e:
        raise CatalogError(f"parameter {name}: cannot read {value!r} as {spec.domain}") from e
    if spec.check is not None and not spec.check(converted):
        raise CatalogError(f"parameter {name} = {value} outside {spec.domain}")
    return converted


def catalog(name: str, params: Mapping[str, Any] | None = None, **kwargs: Any) -> FlowMap:
    """Build the named family member; params may be given as strings."""
    if name not in _REGISTRY:
        raise CatalogError(f"unknown catalog family '{name}'", {"known": sorted(_REGISTRY)})
    entry = _REGISTRY[name]
    given = {**(params or {}), **kwargs}
    missing = set(entry.params) - set(given)
    unknown = set(given) - set(entry.params)
    if missing or unknown:
        raise CatalogError(
            f"{name} takes parameters {sorted(entry.params)}",
            {"missing": sorted(missing), "unknown": sorted(unknown)},
        )
    arity = None
    if "c" in given and entry.params.get("c", RATIONAL).kind == "vector":
        c = given["c"]
        arity = len(split_components(c)) if isinstance(c, str) else len(c)
    values = {key: _convert(key, spec, given[key], arity) for key, spec in entry.params.items()}
    flow = entry.build(**values)
    label = ",".join(f"{k}={given[k]}" for k in entry.params)
    logger.debug(f"catalog {name}({label})")
    return flow.with_name(f"{name}({label})" if label else name)


def catalog_list() -> dict[str, dict[str, Any]]:
    """Every family with its parameter domains."""
    return {
        name: {"params": entry.schema(), "description": entry.description}
        for name, entry in sorted(_REGISTRY.items())
    }


def rational_catalog_flows(max_level: int = 4) -> list[FlowMap]:
    """A representative member of every rational plane family, for sweeps."""
    flows = [catalog("phi_N", N=n) for n in range(max_level + 1)]
    flows += [catalog("psi_N", N=n) for n in range(1, max_level + 1)]
    flows += [catalog("psi_prime_N", N=n) for n in range(1, max_level + 1)]
    flows += [catalog(n) for n in ("phi_sph_inf", "phi_sph_1", "phi_sph_1_orth", "psi_0")]
    flows += [catalog("phi_1"), catalog("psi_1"), catalog("psi_prime_1"), catalog("phi_prime_1")]
    flows += [catalog("phi_cN", c=2, N=3), catalog("phi_hat_dN", d=3), catalog("phi_a", a=2)]
    return flows


__all__ = [
    "CatalogEntry",
    "ParamSpec",
    "catalog",
    "catalog_list",
    "rational_catalog_flows",
]
