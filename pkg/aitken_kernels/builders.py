"""
Matrix-valued kernel constructions.

Entry (m, n) of every kernel here is φ applied to the quadratic form
a = H_{m,n}ᵀ G_{m,n}⁻¹ H_{m,n}, scaled by (det G_{m,n})^{-l/2}. Mixture
constructions replace φ(a) by the ρ-weighted sum of φ(a·s)·P^s_{m,n}.
Builders refuse families whose certificate fails unless called with
unsafe=True, which is recorded in the provenance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Dict, Optional, Sequence, Tuple

import numpy as np
import structlog

from .domain.reports import CheckReport
from .domain.spaces import PointSpace
from .errors import (
    FamilyInvalid,
    IntegrabilityError,
    InvalidMatrix,
    KernelEvalError,
    NotPositiveDefinite,
    ParamError,
)
from .families import MatrixFieldFamily, MixtureSpec, ScalarCNDKernel, VectorFieldFamily, check_scalar_cnd
from .linalg import eig_sym, quadratic_form_inverse
from .scalar_cm import BernsteinFunction, CMFunction, bernstein_check, gamma_fn, matern_eval

logger = structlog.get_logger()


@dataclass(frozen=True)
class Construction:
    """A construction: its spec-file identifier, the result it realizes and its entry formula."""
    theorem: str
    anchor: str
    formula: str

    def to_dict(self) -> Dict[str, str]:
        return {"theorem": self.theorem, "anchor": self.anchor, "formula": self.formula}


CONSTRUCTIONS: Dict[str, Construction] = {
    "quadratic": Construction(
        "thm21", "Theorem 2.1",
        "K_mn(y,y') = phi(H^T G^-1 H) / sqrt(det G) on a single set Y",
    ),
    "gneiting_single": Construction(
        "gneiting_single", "Theorem 2.4",
        "K_mn(y,y') = g^(-q/2) phi(|H|^2 / g) with a positive CND scalar g",
    ),
    "gneiting_classic": Construction(
        "gneiting_classic", "Eq. 2 (classical Gneiting model)",
        "G_r((x,y),(x',y')) = f(|y-y'|^2)^(-r) phi(|x-x'|^2 / f(|y-y'|^2))",
    ),
    "mixture": Construction(
        "thm31", "Theorem 3.1",
        "K_mn = (det G)^(-1/2) sum_s rho(s) phi(s H^T G^-1 H) P^s_mn on Y",
    ),
    "product": Construction(
        "thm41", "Theorem 4.1",
        "quadratic construction with H on X and G on Y, nonseparable on X x Y",
    ),
    "product_mixture": Construction(
        "thm42", "Theorem 4.2",
        "mixture construction on X x Y with P^s indexed by product pairs",
    ),
    "matern_cross": Construction(
        "matern_cross", "Example 5.1",
        "K_mn = Gamma(v_mn) (det G)^(-1/2) M_v_mn(r_mn sqrt(H^T G^-1 H))",
    ),
    "cauchy_cross": Construction(
        "cauchy_cross", "Example 5.2",
        "K_mn = Gamma(v_m+v_n) (det G)^(-1/2) (1 + c (H^T G^-1 H)^gamma)^-(v_m+v_n)",
    ),
}

# spec-file identifier -> builder construction name
THEOREM_NAMES: Dict[str, str] = {c.theorem: name for name, c in CONSTRUCTIONS.items()}

DET_POWER_ANCHOR = "Section 5 (determinant power l/2)"



@dataclass(frozen=True)
class PowerParam:
    """Exponent l of the determinant factor (det G)^{-l/2}."""
    l: int = 1

    def __post_init__(self) -> None:
        if isinstance(self.l, bool) or not isinstance(self.l, (int, np.integer)) or self.l < 1:
            raise ParamError(f"power l must be a positive integer, got {self.l!r}")


@dataclass(frozen=True, eq=False)
class MatrixKernel:
    """p×p matrix-valued kernel on `domain`."""
    p: int
    domain: PointSpace
    func: Callable[[np.ndarray, np.ndarray], np.ndarray]
    provenance: Dict[str, Any]

    def __call__(self, z: Any, z_prime: Any) -> np.ndarray:
        return self.func(np.asarray(z, dtype=float), np.asarray(z_prime, dtype=float))


Certifier = Callable[[Optional[int]], CheckReport]


def _certify(
    certifiers: Dict[str, Certifier],
    unsafe: bool,
    seed: Optional[int],
    provenance: Dict[str, Any],
) -> None:
    summary = {}
    failures = []
    for role, certify in certifiers.items():
        report = certify(seed)
        summary[role] = {"check": report.check, "pass": report.passed, "margin": float(report.margin),
                         "seed": report.seed}
        if not report.passed:
            failures.append((role, report))
    provenance["certificates"] = summary
    if not failures:
        return
    if not unsafe:
        role, report = failures[0]
        logger.error("family_certificate_failed", role=role, check=report.check, margin=report.margin)
        raise FamilyInvalid(f"{role} failed its {report.check} certificate", witness=report.to_dict())
    logger.warning("uncertified_family", roles=[role for role, _ in failures])
    provenance["unsafe"] = True


def _check_families(G: MatrixFieldFamily, H: VectorFieldFamily, mix: Optional[MixtureSpec] = None) -> None:
    if not G.builder_input:
        raise FamilyInvalid(f"{G.descriptor['recipe']} families are checker inputs only",
                            witness={"G": G.descriptor})
    if G.p != H.p or G.q != H.q:
        raise ParamError(f"G is {G.p}x{G.p} of {G.q}x{G.q} fields, H is {H.p}x{H.p} of {H.q}-vectors")
    if mix is not None and mix.p != G.p:
        raise ParamError(f"mixture has p={mix.p}, families have p={G.p}")


def _provenance(construction: str, power: PowerParam, **inputs: Any) -> Dict[str, Any]:
    provenance: Dict[str, Any] = {
        "construction": construction,
        "theorem": CONSTRUCTIONS[construction].theorem,
        "anchor": CONSTRUCTIONS[construction].anchor,
        "power_l": int(power.l),
    }
    if power.l != 1:
        provenance["power_anchor"] = DET_POWER_ANCHOR
    flags = []
    for role, value in inputs.items():
        if hasattr(value, "to_dict"):
            provenance[role] = value.to_dict()
        elif hasattr(value, "descriptor"):
            provenance[role] = value.descriptor
        else:
            provenance[role] = value
        flags.extend(getattr(value, "flags", ()))
    if flags:
        provenance["flags"] = sorted(set(flags))
    return provenance


def _kernel(
    p: int,
    domain: PointSpace,
    entry: Callable[[int, int, np.ndarray, np.ndarray], float],
    provenance: Dict[str, Any],
) -> MatrixKernel:
    def func(z: np.ndarray, z_prime: np.ndarray) -> np.ndarray:
        out = np.empty((p, p))
        for m in range(p):
            for n in range(p):
                try:
                    out[m, n] = entry(m, n, z, z_prime)
                except (NotPositiveDefinite, InvalidMatrix) as e:
                    raise KernelEvalError(
                        f"kernel entry ({m}, {n}) failed: {e}",
                        witness={"m": m, "n": n, "z": z, "z_prime": z_prime},
                    ) from e
        return out

    logger.debug("kernel_built", construction=provenance["construction"], p=p)
    return MatrixKernel(p, domain, func, provenance)


def _split(domain: PointSpace, product: bool, z: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(x, y) for product domains, (z, z) for a single set."""
    return domain.split(z) if product else (z, z)


def _mixture_sum(phi: CMFunction, mix: MixtureSpec, a: float, m: int, n: int, z: Any, z_prime: Any) -> float:
    values = np.atleast_1d(phi(a * mix.locations))
    terms = []
    for (s, w), value in zip(mix.atoms, values):
        term = w * float(value) * float(mix.P(m, n, s, z, z_prime))
        if not math.isfinite(term):
            raise IntegrabilityError(
                f"mixture term at s={s} is not finite",
                witness={"m": m, "n": n, "s": s, "z": z, "z_prime": z_prime},
            )
        terms.append(term)
    return math.fsum(terms)


def _quadratic_construction(
    construction: str,
    phi: CMFunction,
    G: MatrixFieldFamily,
    H: VectorFieldFamily,
    mix: Optional[MixtureSpec],
    product: bool,
    power: PowerParam,
    unsafe: bool,
    seed: Optional[int],
) -> MatrixKernel:
    _check_families(G, H, mix)
    domain = PointSpace.product(H.space, G.space) if product else G.space
    inputs = {"phi": phi, "G": G, "H": H}
    certifiers: Dict[str, Certifier] = {"G": G.certify, "H": H.certify}
    if mix is not None:
        inputs["mixture"] = mix
        certifiers["mixture"] = mix.certify
    provenance = _provenance(construction, power, **inputs)
    _certify(certifiers, unsafe, seed, provenance)
    half_l = power.l / 2.0

    def entry(m: int, n: int, z: np.ndarray, z_prime: np.ndarray) -> float:
        x, y = _split(domain, product, z)
        x_prime, y_prime = _split(domain, product, z_prime)
        a, log_det = quadratic_form_inverse(G.raw(m, n, y, y_prime), H.evaluate(m, n, x, x_prime))
        scale = math.exp(-half_l * log_det)
        if mix is None:
            return scale * phi(a)
        return scale * _mixture_sum(phi, mix, a, m, n, z, z_prime)

    return _kernel(G.p, domain, entry, provenance)


def build_quadratic_kernel(
    phi: CMFunction,
    G: MatrixFieldFamily,
    H: VectorFieldFamily,
    power: PowerParam = PowerParam(),
    unsafe: bool = False,
    seed: Optional[int] = None,
) -> MatrixKernel:
    """K_{m,n}(y, y') = φ(Hᵀ G⁻¹ H) / √det G on a single set."""
    return _quadratic_construction("quadratic", phi, G, H, None, False, power, unsafe, seed)


def build_gneiting_single(
    phi: CMFunction,
    g: ScalarCNDKernel,
    H: VectorFieldFamily,
    q: int,
    power: PowerParam = PowerParam(),
    unsafe: bool = False,
    seed: Optional[int] = None,
) -> MatrixKernel:
    """K_{m,n}(y, y') = g(y, y')^{-q/2} φ(‖H_{m,n}(y, y')‖² / g(y, y'))."""
    if H.q != q:
        raise ParamError(f"H has {H.q}-vectors, expected q={q}")
    if not g.positive:
        raise FamilyInvalid("the scalar kernel must be positive valued", witness={"g": g.descriptor})
    provenance = _provenance("gneiting_single", power, phi=phi, g=g, H=H)
    provenance["q"] = q
    _certify(
        {"g": g.certify if g.space is not None else (lambda seed: check_scalar_cnd(g, H.space, seed=seed)),
         "H": H.certify},
        unsafe, seed, provenance,
    )
    exponent = q * power.l / 2.0

    def entry(m: int, n: int, y: np.ndarray, y_prime: np.ndarray) -> float:
        value = g(y, y_prime)
        if not value > 0:
            raise KernelEvalError(
                f"scalar kernel is not positive ({value})",
                witness={"m": m, "n": n, "z": y, "z_prime": y_prime},
            )
        h = H.evaluate(m, n, y, y_prime)
        return value ** -exponent * phi(float(h @ h) / value)

    return _kernel(H.p, H.space, entry, provenance)


def build_gneiting_classic(
    phi: CMFunction,
    f: BernsteinFunction,
    r: float,
    q_s: int,
    d: int,
    unsafe: bool = False,
) -> MatrixKernel:
    """
    Scalar space-time model on R^{q_s} × R^d:
    f(‖y − y'‖²)^{-r} φ(‖x − x'‖² / f(‖y − y'‖²)).
    """
    if q_s < 1 or d < 1:
        raise ParamError(f"dimensions must be positive, got q_s={q_s}, d={d}")
    if r < d / 2.0:
        raise ParamError(f"r={r} is below d/2 = {d / 2.0}")
    if r < q_s / 2.0:
        raise ParamError(
            f"r={r} is below q_s/2 = {q_s / 2.0}: besides r >= d/2 this model also requires r >= q_s/2, "
            f"so that the leftover factor f^(q_s/2 - r) stays positive definite"
        )
    domain = PointSpace.product(PointSpace.euclidean(q_s), PointSpace.euclidean(d))
    provenance = _provenance("gneiting_classic", PowerParam(), phi=phi, f=f)
    provenance.update({"r": float(r), "q_s": q_s, "d": d})
    _certify({"f": lambda seed: bernstein_check(f)}, unsafe, None, provenance)

    def entry(m: int, n: int, z: np.ndarray, z_prime: np.ndarray) -> float:
        x, y = domain.split(z)
        x_prime, y_prime = domain.split(z_prime)
        scale = f(float(np.sum((y - y_prime) ** 2)))
        return scale ** -r * phi(float(np.sum((x - x_prime) ** 2)) / scale)

    return _kernel(1, domain, entry, provenance)


def build_mixture_kernel(
    phi: CMFunction,
    G: MatrixFieldFamily,
    H: VectorFieldFamily,
    mix: MixtureSpec,
    power: PowerParam = PowerParam(),
    unsafe: bool = False,
    seed: Optional[int] = None,
) -> MatrixKernel:
    """K_{m,n} = (det G)^{-l/2} Σ_s ρ(s) φ(s·Hᵀ G⁻¹ H) P^s_{m,n} on a single set."""
    return _quadratic_construction("mixture", phi, G, H, mix, False, power, unsafe, seed)


def build_product_kernel(
    phi: CMFunction,
    G: MatrixFieldFamily,
    H: VectorFieldFamily,
    power: PowerParam = PowerParam(),
    unsafe: bool = False,
    seed: Optional[int] = None,
) -> MatrixKernel:
    """Quadratic construction with H on X and G on Y; points are (x, y)."""
    return _quadratic_construction("product", phi, G, H, None, True, power, unsafe, seed)


def build_product_mixture_kernel(
    phi: CMFunction,
    G: MatrixFieldFamily,
    H: VectorFieldFamily,
    mix: MixtureSpec,
    power: PowerParam = PowerParam(),
    unsafe: bool = False,
    seed: Optional[int] = None,
) -> MatrixKernel:
    """Mixture construction on X × Y; P^s takes product points."""
    return _quadratic_construction("product_mixture", phi, G, H, mix, True, power, unsafe, seed)


def _smoothness(v_list: Sequence[float], p: int) -> np.ndarray:
    v = np.asarray(v_list, dtype=float)
    if v.shape != (p,) or np.any(v <= 0):
        raise ParamError(f"need {p} positive smoothness values, got {list(v_list)}")
    return v


def build_matern_cross(
    G: MatrixFieldFamily,
    H: VectorFieldFamily,
    v_list: Sequence[float],
    r_matrix: Any,
    power: PowerParam = PowerParam(),
    unsafe: bool = False,
    seed: Optional[int] = None,
    nodes: Optional[int] = None,
) -> MatrixKernel:
    """
    K_{m,n} = Γ(v_mn) (det G)^{-l/2} M_{v_mn}(r_mn √(Hᵀ G⁻¹ H)), v_mn = (v_m + v_n)/2.

    The coefficient matrix [(r_mn/2)^{v_m+v_n}] must be PSD.
    """
    _check_families(G, H)
    v = _smoothness(v_list, G.p)
    r = np.asarray(r_matrix, dtype=float).reshape(G.p, G.p)
    if np.any(r <= 0) or not np.allclose(r, r.T):
        raise ParamError("r_matrix must be symmetric with positive entries")
    coefficients = eig_sym((r / 2.0) ** np.add.outer(v, v))
    if not coefficients.at_least_psd:
        raise ParamError(
            f"coefficient matrix is not PSD (min eigenvalue {coefficients.min_eig:.3e})",
            witness={"min_eig": coefficients.min_eig},
        )

    domain = PointSpace.product(H.space, G.space)
    provenance = _provenance("matern_cross", power, G=G, H=H)
    provenance.update({"v": v.tolist(), "r": r.tolist()})
    _certify({"G": G.certify, "H": H.certify}, unsafe, seed, provenance)
    half_l = power.l / 2.0

    def entry(m: int, n: int, z: np.ndarray, z_prime: np.ndarray) -> float:
        x, y = domain.split(z)
        x_prime, y_prime = domain.split(z_prime)
        a, log_det = quadratic_form_inverse(G.raw(m, n, y, y_prime), H.evaluate(m, n, x, x_prime))
        v_mn = (v[m] + v[n]) / 2.0
        return gamma_fn(v_mn) * math.exp(-half_l * log_det) * matern_eval(v_mn, r[m, n], a, nodes)

    return _kernel(G.p, domain, entry, provenance)


def build_cauchy_cross(
    G: MatrixFieldFamily,
    H: VectorFieldFamily,
    c: float,
    gamma: float,
    v_list: Sequence[float],
    power: PowerParam = PowerParam(),
    unsafe: bool = False,
    seed: Optional[int] = None,
) -> MatrixKernel:
    """K_{m,n} = Γ(v_m + v_n) (det G)^{-l/2} (1 + c·(Hᵀ G⁻¹ H)^γ)^{-(v_m + v_n)}."""
    if not 0 < gamma <= 1:
        raise ParamError(f"gamma must lie in (0, 1], got {gamma}")
    if not c > 0:
        raise ParamError(f"c must be positive, got {c}")
    _check_families(G, H)
    v = _smoothness(v_list, G.p)

    domain = PointSpace.product(H.space, G.space)
    provenance = _provenance("cauchy_cross", power, G=G, H=H)
    provenance.update({"c": float(c), "gamma": float(gamma), "v": v.tolist()})
    if 2.0 * float(v.min()) <= 1.0:
        provenance["flags"] = ["nu_le_one"]
    _certify({"G": G.certify, "H": H.certify}, unsafe, seed, provenance)
    half_l = power.l / 2.0

    def entry(m: int, n: int, z: np.ndarray, z_prime: np.ndarray) -> float:
        x, y = domain.split(z)
        x_prime, y_prime = domain.split(z_prime)
        a, log_det = quadratic_form_inverse(G.raw(m, n, y, y_prime), H.evaluate(m, n, x, x_prime))
        total = v[m] + v[n]
        return gamma_fn(total) * math.exp(-half_l * log_det) * (1.0 + c * a ** gamma) ** -total

    return _kernel(G.p, domain, entry, provenance)


def apply_det_power(
    phi: CMFunction,
    G: MatrixFieldFamily,
    H: VectorFieldFamily,
    l: int,
    unsafe: bool = False,
    seed: Optional[int] = None,
) -> MatrixKernel:
    """Quadratic construction with (det G)^{-l/2} in place of (det G)^{-1/2}."""
    return build_quadratic_kernel(phi, G, H, power=PowerParam(l), unsafe=unsafe, seed=seed)
