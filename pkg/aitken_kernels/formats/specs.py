"""
Declarative kernel spec files.

A spec names a construction, the catalog function φ, the recipes for the
G and H families (and the mixture, when the construction takes one) and the
dimensions. `load_spec` validates the JSON document, `resolve_spec` turns it
into family objects and `ResolvedSpec.build` into a MatrixKernel.
"""
from __future__ import annotations

import hashlib
import inspect
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Literal, Optional, Union

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..builders import (
    CONSTRUCTIONS,
    THEOREM_NAMES,
    MatrixKernel,
    PowerParam,
    build_cauchy_cross,
    build_gneiting_classic,
    build_gneiting_single,
    build_matern_cross,
    build_mixture_kernel,
    build_product_kernel,
    build_product_mixture_kernel,
    build_quadratic_kernel,
)
from ..domain.reports import CheckReport, SuiteReport
from ..domain.spaces import PointSpace, SpaceKind
from ..errors import CatalogMiss, ParamError, SchemaError
from ..families import (
    MatrixFieldFamily,
    MixtureSpec,
    ScalarCNDKernel,
    VectorFieldFamily,
    bernstein_of_sq_distance,
    cauchy_mixture,
    check_G_validity,
    check_H_validity,
    check_mixture_psd,
    check_scalar_cnd,
    check_strictness_condition,
    descriptor,
    first_coordinate_maps,
    gaussian_kernel,
    geodesic_distance,
    linear_maps,
    make_G_block_diagonal,
    make_G_constant,
    make_G_indexed_shift,
    make_G_kernel_diag,
    make_G_scalar_diag,
    make_G_sphere,
    make_G_sum,
    make_H_difference,
    make_H_zero,
    matern_mixture,
    mixture_from_atoms,
    shifted_norm_maps,
    shifted_power_distance,
    shifted_sq_distance,
    unit_mixture,
)
from ..scalar_cm import BernsteinFunction, CMFunction, bernstein_check, bernstein_get, catalog_get, cm_check

logger = structlog.get_logger()

# Spec files name constructions by these identifiers; builder names (quadratic, mixture,
# product, product_mixture) are accepted as aliases and normalized on load.
TheoremName = Literal[
    "thm21",
    "gneiting_single",
    "gneiting_classic",
    "thm31",
    "thm41",
    "thm42",
    "matern_cross",
    "cauchy_cross",
]

PRODUCT_CONSTRUCTIONS = {"gneiting_classic", "thm41", "thm42", "matern_cross", "cauchy_cross"}
MIXTURE_CONSTRUCTIONS = {"thm31", "thm42"}

REQUIRED_PARTS: Dict[str, List[str]] = {
    "thm21": ["phi", "family_G"],
    "gneiting_single": ["phi", "params.g"],
    "gneiting_classic": ["phi", "params.f", "params.r_exp"],
    "thm31": ["phi", "family_G", "mixture"],
    "thm41": ["phi", "family_G"],
    "thm42": ["phi", "family_G", "mixture"],
    "matern_cross": ["family_G", "params.v", "params.r"],
    "cauchy_cross": ["family_G", "params.v", "params.c", "params.gamma"],
}


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class FunctionRef(_Strict):
    """Catalog function by name."""
    name: str
    params: Dict[str, Any] = Field(default_factory=dict)


class RecipeRef(_Strict):
    """Family recipe by name."""
    recipe: str
    params: Dict[str, Any] = Field(default_factory=dict)


class Dims(_Strict):
    """Component count p, frequency dimension q and point spaces."""
    p: int = Field(1, ge=1)
    q: int = Field(1, ge=1)
    space: Optional[Dict[str, Any]] = None
    x_space: Optional[Dict[str, Any]] = None
    y_space: Optional[Dict[str, Any]] = None

    @field_validator("space", "x_space", "y_space")
    @classmethod
    def _known_space(cls, value: Optional[Dict[str, Any]]) -> Optional[Dict[str, Any]]:
        if value is not None:
            try:
                PointSpace.from_dict(value)
            except (ParamError, KeyError, TypeError, ValueError) as e:
                raise ValueError(f"invalid space descriptor {value}: {e}") from e
        return value


class ConstructionParams(_Strict):
    """Construction-specific parameters."""
    v: Optional[List[float]] = None
    r: Optional[Union[float, List[List[float]]]] = None
    c: Optional[float] = None
    gamma: Optional[float] = None
    f: Optional[FunctionRef] = None
    r_exp: Optional[float] = None
    g: Optional[RecipeRef] = None


class KernelSpecFile(_Strict):
    """Top-level spec document."""
    theorem: TheoremName
    phi: Optional[FunctionRef] = None
    family_G: Optional[RecipeRef] = None
    family_H: Optional[RecipeRef] = None
    mixture: Optional[RecipeRef] = None
    power_l: int = Field(1, ge=1)
    dims: Dims
    params: ConstructionParams = Field(default_factory=ConstructionParams)
    unsafe: bool = False

    @field_validator("theorem", mode="before")
    @classmethod
    def _builder_alias(cls, value: Any) -> Any:
        if isinstance(value, str) and value in CONSTRUCTIONS:
            return CONSTRUCTIONS[value].theorem
        return value

    @model_validator(mode="after")
    def _construction_parts(self) -> KernelSpecFile:
        missing = []
        for part in REQUIRED_PARTS[self.theorem]:
            owner, _, name = part.rpartition(".")
            if getattr(self.params if owner else self, name) is None:
                missing.append(part)
        if missing:
            raise ValueError(f"construction {self.theorem!r} needs {', '.join(missing)}")
        if self.mixture is not None and self.theorem not in MIXTURE_CONSTRUCTIONS:
            raise ValueError(f"construction {self.theorem!r} takes no mixture")

        dims = self.dims
        if self.theorem in PRODUCT_CONSTRUCTIONS:
            product = dims.space is not None and dims.space.get("kind") == "product"
            if not product and (dims.x_space is None or dims.y_space is None):
                raise ValueError(f"construction {self.theorem!r} needs a product space or x_space and y_space")
        elif dims.space is None:
            raise ValueError(f"construction {self.theorem!r} needs dims.space")
        return self


def spec_hash(spec: KernelSpecFile) -> str:
    """sha256 of the canonical JSON form of the validated spec."""
    canonical = json.dumps(spec.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def load_spec(path: Union[str, Path]) -> KernelSpecFile:
    """Parse and validate a spec file; every failure is a SchemaError."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(
            f"malformed JSON at line {e.lineno}, column {e.colno}: {e.msg}",
            witness={"line": e.lineno, "column": e.colno},
        ) from e
    try:
        return KernelSpecFile.model_validate(data)
    except ValidationError as e:
        errors = [{"loc": [str(part) for part in err["loc"]], "msg": err["msg"]} for err in e.errors()]
        raise SchemaError(f"spec file does not match the schema: {errors[0]['msg']}", witness={"errors": errors}) from e


@dataclass(frozen=True)
class _Context:
    p: int
    q: int
    domain: PointSpace
    x_space: PointSpace
    y_space: PointSpace
    seed: Optional[int]


def _call_recipe(registry: Dict[str, Callable[..., Any]], kind: str, ref: RecipeRef, *args: Any) -> Any:
    if ref.recipe not in registry:
        raise CatalogMiss(f"unknown {kind} recipe: {ref.recipe!r}", witness={"recipe": ref.recipe})
    recipe = registry[ref.recipe]
    try:
        inspect.signature(recipe).bind(*args, **ref.params)
    except TypeError as e:
        raise SchemaError(f"{kind} recipe {ref.recipe!r}: {e}", witness={"recipe": ref.recipe}) from e
    return recipe(*args, **ref.params)


def _parse_ref(model: type, data: Any) -> Any:
    if isinstance(data, model):
        return data
    try:
        return model.model_validate(data)
    except ValidationError as e:
        raise SchemaError(f"invalid nested reference {data!r}: {e.errors()[0]['msg']}") from e


def _require_count(values: List[Any], p: int, what: str) -> None:
    if len(values) != p:
        raise SchemaError(f"{what} has {len(values)} entries, dims.p is {p}")


# Scalar kernels of negative type

def _scalar_shifted_sq_distance(space: PointSpace, c: float = 1.0) -> ScalarCNDKernel:
    return shifted_sq_distance(c, space)


def _scalar_geodesic_distance(space: PointSpace) -> ScalarCNDKernel:
    if space.kind is not SpaceKind.SPHERE:
        raise SchemaError(f"geodesic_distance needs a sphere, got {space.kind.value}")
    return geodesic_distance(space.dim)


def _scalar_bernstein(space: PointSpace, f: Dict[str, Any]) -> ScalarCNDKernel:
    ref = _parse_ref(FunctionRef, f)
    return bernstein_of_sq_distance(bernstein_get(ref.name, ref.params), space)


def _scalar_shifted_power_distance(space: PointSpace, c: float, alpha: float) -> ScalarCNDKernel:
    return shifted_power_distance(c, alpha, space)


SCALAR_RECIPES: Dict[str, Callable[..., ScalarCNDKernel]] = {
    "shifted_sq_distance": _scalar_shifted_sq_distance,
    "geodesic_distance": _scalar_geodesic_distance,
    "bernstein_of_sq_distance": _scalar_bernstein,
    "shifted_power_distance": _scalar_shifted_power_distance,
}


def resolve_scalar(ref: Union[RecipeRef, Dict[str, Any]], space: PointSpace) -> ScalarCNDKernel:
    ref = _parse_ref(RecipeRef, ref)
    return _call_recipe(SCALAR_RECIPES, "scalar kernel", ref, space)


# G families

def _g_sum_shifted_norm(ctx: _Context, shifts: List[float]) -> MatrixFieldFamily:
    _require_count(shifts, ctx.p, "shifts")
    return make_G_sum(
        shifted_norm_maps(shifts, ctx.q), ctx.q, ctx.y_space,
        descriptor("sum_shifted_norm", shifts=list(shifts), q=ctx.q), seed=ctx.seed,
    )


def _g_scalar_diag(ctx: _Context, g: Dict[str, Any]) -> MatrixFieldFamily:
    return make_G_scalar_diag(resolve_scalar(g, ctx.y_space), ctx.q, ctx.p, ctx.y_space)


def _g_sphere(ctx: _Context, d: Optional[int] = None) -> MatrixFieldFamily:
    space = ctx.y_space
    if space.kind is not SpaceKind.SPHERE or (d is not None and d != space.dim):
        raise SchemaError(f"sphere recipe needs a sphere of dimension {d}, got {space.to_dict()}")
    return make_G_sphere(ctx.p, ctx.q, space.dim)


def _g_indexed_shift(ctx: _Context, offsets: List[float], base: Dict[str, Any]) -> MatrixFieldFamily:
    _require_count(offsets, ctx.p, "offsets")
    return make_G_indexed_shift(resolve_scalar(base, ctx.y_space), offsets, ctx.q, ctx.y_space)


def _g_constant(ctx: _Context, matrix: List[List[float]]) -> MatrixFieldFamily:
    if np.shape(matrix) != (ctx.q, ctx.q):
        raise SchemaError(f"constant matrix has shape {np.shape(matrix)}, expected ({ctx.q}, {ctx.q})")
    return make_G_constant(matrix, ctx.p, ctx.y_space)


def _g_kernel_diag(ctx: _Context, scale: float = 1.0) -> MatrixFieldFamily:
    return make_G_kernel_diag(
        gaussian_kernel(scale), ctx.q, ctx.p, ctx.y_space,
        descriptor("kernel_diag", kernel="gaussian", scale=scale, p=ctx.p, q=ctx.q),
    )


def _g_block_diagonal(ctx: _Context, g: List[Dict[str, Any]]) -> MatrixFieldFamily:
    _require_count(g, ctx.p, "g")
    return make_G_block_diagonal([resolve_scalar(ref, ctx.y_space) for ref in g], ctx.q, ctx.y_space)


G_RECIPES: Dict[str, Callable[..., MatrixFieldFamily]] = {
    "sum_shifted_norm": _g_sum_shifted_norm,
    "scalar_diag": _g_scalar_diag,
    "sphere": _g_sphere,
    "indexed_shift": _g_indexed_shift,
    "constant": _g_constant,
    "kernel_diag": _g_kernel_diag,
    "block_diagonal": _g_block_diagonal,
}


# H families

def _h_difference(ctx: _Context, matrices: List[Any], offsets: Optional[List[Any]] = None) -> VectorFieldFamily:
    _require_count(matrices, ctx.p, "matrices")
    desc = descriptor("difference", matrices=matrices, offsets=offsets)
    return make_H_difference(linear_maps(matrices, offsets), ctx.x_space, desc)


def _h_identity(ctx: _Context) -> VectorFieldFamily:
    if ctx.x_space.coord_dim != ctx.q:
        raise SchemaError(f"identity H needs q = {ctx.x_space.coord_dim} coordinates, dims.q is {ctx.q}")
    return make_H_difference(linear_maps([np.eye(ctx.q)] * ctx.p), ctx.x_space, descriptor("identity", q=ctx.q))


def _h_first_coordinate(ctx: _Context) -> VectorFieldFamily:
    maps = first_coordinate_maps(ctx.p, ctx.q, ctx.x_space.coord_dim)
    return make_H_difference(maps, ctx.x_space, descriptor("first_coordinate", p=ctx.p, q=ctx.q))


def _h_zero(ctx: _Context) -> VectorFieldFamily:
    return make_H_zero(ctx.p, ctx.q, ctx.x_space)


H_RECIPES: Dict[str, Callable[..., VectorFieldFamily]] = {
    "difference": _h_difference,
    "identity": _h_identity,
    "first_coordinate": _h_first_coordinate,
    "zero": _h_zero,
}


# Mixtures

def _mix_unit(ctx: _Context) -> MixtureSpec:
    return unit_mixture(ctx.p, ctx.domain)


def _mix_atoms(ctx: _Context, atoms: List[List[float]], coefficients: Optional[List[List[float]]] = None) -> MixtureSpec:
    coeff = np.ones((ctx.p, ctx.p)) if coefficients is None else np.asarray(coefficients, dtype=float)
    if coeff.shape != (ctx.p, ctx.p):
        raise SchemaError(f"coefficients have shape {coeff.shape}, expected ({ctx.p}, {ctx.p})")
    return mixture_from_atoms(
        atoms, lambda m, n, s, z, w: coeff[m, n], ctx.p, ctx.domain,
        descriptor("atoms", atoms=atoms, coefficients=coeff.tolist()),
    )


def _mix_matern(ctx: _Context, v: List[float], r: float, step: Optional[float] = None) -> MixtureSpec:
    _require_count(v, ctx.p, "v")
    return matern_mixture(v, r, ctx.domain, step)


def _mix_cauchy(ctx: _Context, v: List[float], c: float, nodes: Optional[int] = None) -> MixtureSpec:
    _require_count(v, ctx.p, "v")
    return cauchy_mixture(v, c, ctx.domain, nodes)


MIXTURE_RECIPES: Dict[str, Callable[..., MixtureSpec]] = {
    "unit": _mix_unit,
    "atoms": _mix_atoms,
    "matern": _mix_matern,
    "cauchy": _mix_cauchy,
}


@dataclass(frozen=True, eq=False)
class ResolvedSpec:
    """Spec file with every reference resolved to a catalog or family object."""
    spec: KernelSpecFile
    domain: PointSpace
    phi: Optional[CMFunction] = None
    G: Optional[MatrixFieldFamily] = None
    H: Optional[VectorFieldFamily] = None
    H_declared: bool = False
    mixture: Optional[MixtureSpec] = None
    g: Optional[ScalarCNDKernel] = None
    f: Optional[BernsteinFunction] = None

    @property
    def construction(self) -> str:
        """Builder name of the spec's construction."""
        return THEOREM_NAMES[self.spec.theorem]

    @property
    def anchor(self) -> str:
        return CONSTRUCTIONS[self.construction].anchor

    def build(self, seed: Optional[int] = None) -> MatrixKernel:
        """Run the construction; certificates use `seed`."""
        spec = self.spec
        power = PowerParam(spec.power_l)
        unsafe = spec.unsafe
        params = spec.params
        construction = self.construction

        if construction == "quadratic":
            return build_quadratic_kernel(self.phi, self.G, self.H, power, unsafe, seed)
        if construction == "gneiting_single":
            return build_gneiting_single(self.phi, self.g, self.H, spec.dims.q, power, unsafe, seed)
        if construction == "gneiting_classic":
            return build_gneiting_classic(
                self.phi, self.f, params.r_exp, self.domain.left.dim, self.domain.right.dim, unsafe
            )
        if construction == "mixture":
            return build_mixture_kernel(self.phi, self.G, self.H, self.mixture, power, unsafe, seed)
        if construction == "product":
            return build_product_kernel(self.phi, self.G, self.H, power, unsafe, seed)
        if construction == "product_mixture":
            return build_product_mixture_kernel(self.phi, self.G, self.H, self.mixture, power, unsafe, seed)
        if construction == "matern_cross":
            r = params.r
            r_matrix = np.full((spec.dims.p, spec.dims.p), float(r)) if np.isscalar(r) else np.asarray(r, dtype=float)
            return build_matern_cross(self.G, self.H, params.v, r_matrix, power, unsafe, seed)
        return build_cauchy_cross(self.G, self.H, params.c, params.gamma, params.v, power, unsafe, seed)


def _context(spec: KernelSpecFile, seed: Optional[int]) -> _Context:
    dims = spec.dims
    if spec.theorem in PRODUCT_CONSTRUCTIONS:
        if dims.space is not None:
            domain = PointSpace.from_dict(dims.space)
        else:
            domain = PointSpace.product(PointSpace.from_dict(dims.x_space), PointSpace.from_dict(dims.y_space))
        return _Context(dims.p, dims.q, domain, domain.left, domain.right, seed)
    domain = PointSpace.from_dict(dims.space)
    return _Context(dims.p, dims.q, domain, domain, domain, seed)


def resolve_spec(spec: KernelSpecFile, seed: Optional[int] = None) -> ResolvedSpec:
    """
    Resolve catalog names and recipes against the spec's dimensions.

    Unknown names raise CatalogMiss, mismatched dimensions SchemaError and
    out-of-range parameters ParamError.
    """
    ctx = _context(spec, seed)
    parts: Dict[str, Any] = {}

    if spec.phi is not None:
        parts["phi"] = catalog_get(spec.phi.name, spec.phi.params)
    if spec.family_G is not None:
        G = _call_recipe(G_RECIPES, "G family", spec.family_G, ctx)
        if G.p != ctx.p or G.q != ctx.q:
            raise SchemaError(f"G family is p={G.p}, q={G.q}; dims declare p={ctx.p}, q={ctx.q}")
        parts["G"] = G
    if spec.family_H is not None:
        H = _call_recipe(H_RECIPES, "H family", spec.family_H, ctx)
        if H.p != ctx.p or H.q != ctx.q:
            raise SchemaError(f"H family is p={H.p}, q={H.q}; dims declare p={ctx.p}, q={ctx.q}")
        parts["H"] = H
        parts["H_declared"] = True
    elif spec.theorem not in ("gneiting_classic",):
        parts["H"] = make_H_zero(ctx.p, ctx.q, ctx.x_space)
    if spec.mixture is not None:
        parts["mixture"] = _call_recipe(MIXTURE_RECIPES, "mixture", spec.mixture, ctx)
    if spec.params.g is not None:
        parts["g"] = resolve_scalar(spec.params.g, ctx.domain)
    if spec.theorem == "gneiting_classic":
        if ctx.x_space.kind is not SpaceKind.EUCLIDEAN or ctx.y_space.kind is not SpaceKind.EUCLIDEAN:
            raise SchemaError("gneiting_classic needs euclidean space and time factors")
        parts["f"] = bernstein_get(spec.params.f.name, spec.params.f.params)

    logger.debug("spec_resolved", construction=spec.theorem, parts=sorted(parts))
    return ResolvedSpec(spec=spec, domain=ctx.domain, **parts)


def _tagged(report: CheckReport, family: str) -> CheckReport:
    report.details = {**report.details, "family": family}
    return report


def validity_suite(
    resolved: ResolvedSpec,
    n_points: Optional[int] = None,
    n_freq: Optional[int] = None,
    seed: Optional[int] = None,
    strict: bool = False,
) -> SuiteReport:
    """Run every checker that applies to the spec's inputs."""
    suite = SuiteReport(suite="validity", seed=seed)
    if resolved.phi is not None:
        suite.add(_tagged(cm_check(resolved.phi), "phi"))
    if resolved.f is not None:
        suite.add(_tagged(bernstein_check(resolved.f), "f"))
    if resolved.g is not None:
        suite.add(_tagged(check_scalar_cnd(resolved.g, resolved.domain, n_points, seed), "g"))
    if resolved.G is not None:
        suite.add(_tagged(check_G_validity(resolved.G, None, n_points, n_freq, seed), "G"))
        if strict:
            suite.add(_tagged(check_strictness_condition(resolved.G, None, n_points, None, seed), "G"))
    if resolved.H_declared:
        suite.add(_tagged(check_H_validity(resolved.H, None, n_points, n_freq, seed), "H"))
    elif resolved.H is not None:
        suite.add(CheckReport(check="exp_pd_H", passed=None, seed=seed,
                              details={"family": "H", "reason": "no H family declared; H = 0"}))
    if resolved.mixture is not None:
        suite.add(_tagged(check_mixture_psd(resolved.mixture, None, n_points, seed), "mixture"))
    return suite
