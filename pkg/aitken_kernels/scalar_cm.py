"""
Catalog of bounded completely monotone functions, their representing
measures, finite-difference monotonicity checks and the Matérn integral.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional, Sequence, Tuple

import numpy as np
import scipy.special
import structlog

from .config import get_settings
from .domain.reports import CheckReport
from .errors import CatalogMiss, NoMeasure, ParamError, QuadratureError
from .quadrature import bracket_log_integrand, gen_laguerre, log_trapezoid

logger = structlog.get_logger()

CM_SLACK = 1e-6
MAX_ORDER = 4
MATERN_ZERO_LAG = 1e-12
DEFAULT_CM_GRID = (0.1, 0.5, 1.0, 2.0, 5.0, 10.0)


def gamma_fn(x: Any) -> Any:
    """Γ(x)."""
    return scipy.special.gamma(x)


@dataclass(frozen=True)
class QuadratureRule:
    """Generalized Gauss-Laguerre rule with exponent alpha; rate is the density's exponential rate."""
    family: str
    nodes: int
    alpha: float = 0.0
    rate: float = 1.0

    def to_dict(self) -> Dict[str, Any]:
        return {"family": self.family, "nodes": self.nodes, "alpha": self.alpha, "rate": self.rate}


@dataclass(frozen=True)
class RepresentingMeasure:
    """
    Finite positive measure σ on [0, ∞) with f(t) = ∫ e^{-ts} dσ(s).

    Either point masses (`atoms`) or a log-density paired with the rule used
    to integrate against it.
    """
    kind: str
    atoms: Tuple[Tuple[float, float], ...] = ()
    log_density: Optional[Callable[[np.ndarray], np.ndarray]] = None
    rule: Optional[QuadratureRule] = None

    @classmethod
    def point_masses(cls, atoms: Sequence[Tuple[float, float]]) -> RepresentingMeasure:
        atoms = tuple((float(s), float(w)) for s, w in atoms)
        if not atoms:
            raise ParamError("a point-mass measure needs at least one atom")
        for s, w in atoms:
            if s < 0 or w <= 0:
                raise ParamError(f"atom ({s}, {w}) needs location >= 0 and weight > 0")
        return cls(kind="point_masses", atoms=atoms)

    @classmethod
    def density(cls, log_density: Callable[[np.ndarray], np.ndarray], rule: QuadratureRule) -> RepresentingMeasure:
        return cls(kind="density_with_quadrature", log_density=log_density, rule=rule)

    def laplace(self, t: float, nodes: Optional[int] = None) -> float:
        """∫ e^{-ts} dσ(s)."""
        if self.kind == "point_masses":
            return math.fsum(w * math.exp(-t * s) for s, w in self.atoms)

        rule = self.rule
        x, w = gen_laguerre(nodes or rule.nodes, rule.alpha)
        beta = t + rule.rate
        s = x / beta
        log_g = -t * s + self.log_density(s) - math.log(beta) - rule.alpha * np.log(x) + x
        return math.fsum(w * np.exp(log_g))

    def total_mass(self) -> float:
        return self.laplace(0.0)

    def to_dict(self) -> Dict[str, Any]:
        if self.kind == "point_masses":
            return {"kind": self.kind, "atoms": [list(a) for a in self.atoms]}
        return {"kind": self.kind, "rule": self.rule.to_dict()}


@dataclass(frozen=True, eq=False)
class CMFunction:
    """A bounded completely monotone φ on [0, ∞)."""
    name: str
    params: Dict[str, float]
    func: Callable[[np.ndarray], np.ndarray]
    measure: Optional[RepresentingMeasure]
    bound_at_zero: float
    flags: Tuple[str, ...] = ()

    def __call__(self, t: Any) -> Any:
        value = self.func(np.asarray(t, dtype=float))
        return float(value) if np.ndim(value) == 0 else value

    def eval(self, t: Any) -> Any:
        return self(t)

    @property
    def is_constant(self) -> bool:
        return self.name == "constant"

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "params": dict(self.params)}


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ParamError(message)


def _known_params(name: str, params: Optional[Dict[str, Any]], schema: Dict[str, str]) -> None:
    unknown = sorted(set(params or {}) - set(schema))
    if unknown:
        raise ParamError(f"{name} takes no parameter(s) {', '.join(unknown)}; known: {sorted(schema) or 'none'}")


def _gamma_measure(shape: float, rate: float, nodes: int) -> RepresentingMeasure:
    """Gamma(shape, rate) density as a representing measure."""
    log_norm = shape * math.log(rate) - scipy.special.gammaln(shape)

    def log_density(s: np.ndarray) -> np.ndarray:
        return log_norm + (shape - 1.0) * np.log(s) - rate * s

    return RepresentingMeasure.density(
        log_density, QuadratureRule(family="gen_laguerre", nodes=nodes, alpha=shape - 1.0, rate=rate)
    )


def _exp_neg(params: Dict[str, Any], nodes: int) -> CMFunction:
    return CMFunction("exp_neg", {}, lambda t: np.exp(-t), RepresentingMeasure.point_masses([(1.0, 1.0)]), 1.0)


def _exp_neg_scaled(params: Dict[str, Any], nodes: int) -> CMFunction:
    lam = float(params.get("lam", 1.0))
    _require(lam > 0, f"lam must be positive, got {lam}")
    return CMFunction(
        "exp_neg_scaled", {"lam": lam}, lambda t: np.exp(-lam * t),
        RepresentingMeasure.point_masses([(lam, 1.0)]), 1.0,
    )


def _exp_neg_power(params: Dict[str, Any], nodes: int) -> CMFunction:
    gamma = float(params.get("gamma", 1.0))
    _require(0 < gamma <= 1, f"gamma must lie in (0, 1], got {gamma}")
    measure = RepresentingMeasure.point_masses([(1.0, 1.0)]) if gamma == 1.0 else None
    return CMFunction("exp_neg_power", {"gamma": gamma}, lambda t: np.exp(-np.power(t, gamma)), measure, 1.0)


def _gen_cauchy(params: Dict[str, Any], nodes: int) -> CMFunction:
    c = float(params.get("c", 1.0))
    nu = float(params.get("nu", 1.0))
    gamma = float(params.get("gamma", 1.0))
    _require(c > 0, f"c must be positive, got {c}")
    _require(nu > 0, f"nu must be positive for a bounded function, got {nu}")
    _require(0 < gamma <= 1, f"gamma must lie in (0, 1], got {gamma}")

    flags = ("nu_le_one",) if nu <= 1 else ()
    if flags:
        logger.info("gen_cauchy_small_nu", nu=nu)
    measure = _gamma_measure(nu, 1.0 / c, nodes) if gamma == 1.0 else None
    return CMFunction(
        "gen_cauchy", {"c": c, "nu": nu, "gamma": gamma},
        lambda t: np.power(1.0 + c * np.power(t, gamma), -nu),
        measure, 1.0, flags,
    )


def _cauchy(params: Dict[str, Any], nodes: int) -> CMFunction:
    nu = float(params.get("nu", 1.0))
    _require(nu > 0, f"nu must be positive for a bounded function, got {nu}")
    return CMFunction(
        "cauchy", {"nu": nu}, lambda t: np.power(1.0 + t, -nu), _gamma_measure(nu, 1.0, nodes), 1.0
    )


def _constant(params: Dict[str, Any], nodes: int) -> CMFunction:
    c = float(params.get("c", 1.0))
    _require(c > 0, f"constant must be positive, got {c}")
    return CMFunction(
        "constant", {"c": c}, lambda t: np.full_like(t, c, dtype=float),
        RepresentingMeasure.point_masses([(0.0, c)]), c,
    )


def _exp_mixture(params: Dict[str, Any], nodes: int) -> CMFunction:
    locations = np.asarray(params.get("locations", []), dtype=float)
    weights = np.asarray(params.get("weights", []), dtype=float)
    _require(locations.size > 0 and locations.shape == weights.shape,
             "locations and weights must be non-empty and of equal length")
    measure = RepresentingMeasure.point_masses(list(zip(locations, weights)))

    def func(t: np.ndarray) -> np.ndarray:
        return np.sum(weights * np.exp(-np.multiply.outer(t, locations)), axis=-1)

    return CMFunction(
        "exp_mixture", {"locations": locations.tolist(), "weights": weights.tolist()},
        func, measure, float(weights.sum()),
    )


CATALOG: Dict[str, Tuple[Callable[[Dict[str, Any], int], CMFunction], Dict[str, str]]] = {
    "exp_neg": (_exp_neg, {}),
    "exp_neg_scaled": (_exp_neg_scaled, {"lam": "> 0"}),
    "exp_neg_power": (_exp_neg_power, {"gamma": "(0, 1]"}),
    "gen_cauchy": (_gen_cauchy, {"c": "> 0", "nu": "> 0", "gamma": "(0, 1]"}),
    "cauchy": (_cauchy, {"nu": "> 0"}),
    "constant": (_constant, {"c": "> 0"}),
    "exp_mixture": (_exp_mixture, {"locations": "list >= 0", "weights": "list > 0"}),
}


def catalog_get(name: str, params: Optional[Dict[str, Any]] = None, nodes: Optional[int] = None) -> CMFunction:
    """Build a catalog function by name."""
    if name not in CATALOG:
        raise CatalogMiss(f"unknown completely monotone function: {name!r}")
    factory, schema = CATALOG[name]
    _known_params(name, params, schema)
    return factory(dict(params or {}), nodes or get_settings().quadrature.laguerre_nodes)


def central_difference(f: Callable[[Any], Any], t: float, order: int, h: float) -> float:
    """Order-n central difference quotient of f at t with step h."""
    offsets = (order / 2.0 - np.arange(order + 1)) * h
    coefficients = np.array([(-1) ** k * math.comb(order, k) for k in range(order + 1)], dtype=float)
    values = np.asarray([f(t + o) for o in offsets], dtype=float)
    return float(coefficients @ values) / h ** order


def _step(t: float) -> float:
    return max(1e-3, 1e-2 * t)


def _roundoff_floor(f: Callable[[Any], Any], t: float, order: int, h: float) -> float:
    """Magnitude below which an order-n difference quotient is float noise."""
    offsets = (order / 2.0 - np.arange(order + 1)) * h
    peak = max(abs(float(f(t + o))) for o in offsets)
    return 4.0 * 2.0 ** order * np.finfo(float).eps * peak / h ** order


def _check_grid(grid: Sequence[float]) -> None:
    for t in grid:
        if t < 5.0 * _step(t):
            raise ParamError(f"grid point {t} is closer than 5h to the origin")


def cm_check(f: Callable[[Any], Any], orders: int = MAX_ORDER, grid: Sequence[float] = DEFAULT_CM_GRID) -> CheckReport:
    """(-1)^n Δ^n f(t) ≥ 0 for n = 0..orders on the grid, up to slack."""
    if not 0 <= orders <= MAX_ORDER:
        raise ParamError(f"orders must lie in [0, {MAX_ORDER}], got {orders}")
    _check_grid(grid)

    worst: Optional[Dict[str, Any]] = None
    margin = np.inf
    for t in grid:
        h = _step(t)
        slack = CM_SLACK * abs(float(f(t)))
        for n in range(orders + 1):
            signed = (-1) ** n * (central_difference(f, t, n, h) if n else float(f(t)))
            room = signed + slack + _roundoff_floor(f, t, n, h)
            if room < margin:
                margin = room
                worst = {"order": n, "t": float(t), "value": signed}

    passed = bool(margin >= 0)
    name = getattr(f, "name", getattr(f, "__name__", "callable"))
    return CheckReport(
        check="complete_monotonicity",
        passed=passed,
        margin=float(margin),
        witness=None if passed else worst,
        details={"function": name, "orders": orders, "grid": list(map(float, grid))},
    )


def reconstruct_from_measure(f: CMFunction, t: float, nodes: Optional[int] = None) -> float:
    """Laplace transform of f's representing measure at t."""
    if f.measure is None:
        raise NoMeasure(f"{f.name} has no representing measure attached")
    return f.measure.laplace(float(t), nodes)


def matern_eval(nu: float, r: float, u: float, nodes: Optional[int] = None) -> float:
    """
    M_ν(r√u), normalized so M_ν(0) = 1, from its scale-mixture integral.

    With s = e^x the integrand exp(-u e^x - (r²/4) e^{-x} - νx) decays
    double-exponentially in both directions, so a plain trapezoid rule on a
    window around the peak converges geometrically. Nodes double until two
    successive values agree.
    """
    settings = get_settings().quadrature
    nodes = nodes or settings.matern_nodes
    if nu <= 0 or r <= 0 or u < 0:
        raise ParamError(f"matern parameters must be positive: nu={nu}, r={r}, u={u}")
    if nodes < 32:
        raise ParamError(f"matern quadrature needs at least 32 nodes, got {nodes}")
    if u <= MATERN_ZERO_LAG:
        return 1.0

    quarter_r2 = r * r / 4.0

    def log_f(x: np.ndarray) -> np.ndarray:
        return -u * np.exp(x) - quarter_r2 * np.exp(-x) - nu * x

    peak = math.log(2.0 * quarter_r2 / (nu + math.sqrt(nu * nu + u * r * r)))
    lo, hi = bracket_log_integrand(log_f, peak)
    log_prefactor = 2.0 * nu * math.log(r / 2.0) - scipy.special.gammaln(nu)

    previous = math.nan
    change = math.inf
    for _ in range(settings.matern_max_doublings + 1):
        scale, value = log_trapezoid(log_f, lo, hi, nodes)
        current = math.exp(log_prefactor + scale) * value
        change = abs(current - previous) / abs(current)
        if change <= 1e-12:
            return current
        previous = current
        nodes = 2 * nodes - 1

    if not change <= 1e-6:
        logger.error("matern_quadrature_failed", nu=nu, r=r, u=u, change=change)
        raise QuadratureError(
            f"matern quadrature did not converge at nu={nu}, r={r}, u={u}",
            witness={"nu": nu, "r": r, "u": u, "change": change},
        )
    logger.debug("matern_quadrature_capped", nu=nu, r=r, u=u, change=change)
    return current


@dataclass(frozen=True, eq=False)
class BernsteinFunction:
    """Positive function on [0, ∞) with a completely monotone derivative."""
    name: str
    params: Dict[str, float]
    func: Callable[[np.ndarray], np.ndarray]

    def __call__(self, t: Any) -> Any:
        value = self.func(np.asarray(t, dtype=float))
        return float(value) if np.ndim(value) == 0 else value

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "params": dict(self.params)}


def _affine(params: Dict[str, Any]) -> BernsteinFunction:
    a = float(params.get("a", 1.0))
    b = float(params.get("b", 1.0))
    _require(a > 0 and b >= 0, f"affine needs a > 0 and b >= 0, got a={a}, b={b}")
    return BernsteinFunction("affine", {"a": a, "b": b}, lambda t: a + b * t)


def _power(params: Dict[str, Any]) -> BernsteinFunction:
    a = float(params.get("a", 1.0))
    alpha = float(params.get("alpha", 1.0))
    beta = float(params.get("beta", 1.0))
    _require(a > 0, f"a must be positive, got {a}")
    _require(0 < alpha <= 1 and 0 < beta <= 1, f"alpha and beta must lie in (0, 1], got {alpha}, {beta}")
    return BernsteinFunction(
        "power", {"a": a, "alpha": alpha, "beta": beta},
        lambda t: np.power(1.0 + a * np.power(t, alpha), beta),
    )


def _log(params: Dict[str, Any]) -> BernsteinFunction:
    b = float(params.get("b", 1.0))
    _require(b >= 0, f"b must be non-negative, got {b}")
    return BernsteinFunction("log", {"b": b}, lambda t: 1.0 + b * np.log1p(t))


BERNSTEIN_CATALOG: Dict[str, Tuple[Callable[[Dict[str, Any]], BernsteinFunction], Dict[str, str]]] = {
    "affine": (_affine, {"a": "> 0", "b": ">= 0"}),
    "power": (_power, {"a": "> 0", "alpha": "(0, 1]", "beta": "(0, 1]"}),
    "log": (_log, {"b": ">= 0"}),
}


def bernstein_get(name: str, params: Optional[Dict[str, Any]] = None) -> BernsteinFunction:
    if name not in BERNSTEIN_CATALOG:
        raise CatalogMiss(f"unknown Bernstein function: {name!r}")
    factory, schema = BERNSTEIN_CATALOG[name]
    _known_params(name, params, schema)
    return factory(dict(params or {}))


def bernstein_check(
    f: Callable[[Any], Any],
    orders: int = MAX_ORDER - 1,
    grid: Sequence[float] = DEFAULT_CM_GRID,
) -> CheckReport:
    """
    f > 0 on the grid and f' completely monotone up to `orders`.

    The derivative is never formed: (-1)^(n-1) Δ^n f ≥ 0 for n = 1..orders+1
    is the same condition on difference quotients.
    """
    if not 0 <= orders < MAX_ORDER:
        raise ParamError(f"derivative orders must lie in [0, {MAX_ORDER - 1}], got {orders}")
    _check_grid(grid)

    worst: Optional[Dict[str, Any]] = None
    margin = np.inf
    positive = True
    for t in grid:
        value = float(f(t))
        if value <= 0:
            if positive or value < margin:
                worst = {"order": -1, "t": float(t), "value": value}
            positive = False
            margin = min(margin, value)
        h = _step(t)
        slack = CM_SLACK * abs(value)
        for n in range(1, orders + 2):
            signed = (-1) ** (n - 1) * central_difference(f, t, n, h)
            room = signed + slack + _roundoff_floor(f, t, n, h)
            if room < margin:
                margin = room
                if positive:
                    worst = {"order": n - 1, "t": float(t), "value": signed}

    passed = bool(positive and margin >= 0)
    return CheckReport(
        check="bernstein",
        passed=passed,
        margin=float(margin),
        witness=None if passed else worst,
        details={"function": getattr(f, "name", "callable"), "orders": orders},
    )
