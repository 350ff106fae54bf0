"""
Numerical oracles for the analytic identities, and the Gram pipeline that
turns a MatrixKernel and a point set into a classified BlockGram.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
import scipy.special
import structlog

from .builders import (
    MatrixKernel,
    build_cauchy_cross,
    build_mixture_kernel,
    build_product_mixture_kernel,
)
from .config import get_settings
from .domain.matrices import BlockGram, SpectralReport, SymMatrix
from .domain.reports import CheckReport, SuiteReport
from .domain.spaces import PointSpace
from .errors import DuplicatePoints, ParamError, QuadratureError
from .families import (
    STRICTNESS_TOLERANCE,
    MatrixFieldFamily,
    VectorFieldFamily,
    cauchy_mixture,
    linear_maps,
    make_G_constant,
    make_H_difference,
    matern_mixture,
)
from .linalg import cholesky_pd, eig_sym, hermitian_embedding, quadratic_form_inverse, strict_exp_condition_margin
from .quadrature import gauss_hermite
from .runtime import make_rng, parallel_map
from .scalar_cm import CATALOG, catalog_get, cm_check, matern_eval, reconstruct_from_measure

logger = structlog.get_logger()

MAX_HERMITE_DIM = 4
AITKEN_TOLERANCE = 1e-8
MC_STANDARD_ERRORS = 3.0


@dataclass(frozen=True)
class AitkenInstance:
    """∫ exp(−uᵀAu + i bᵀu) du over R^q with A positive definite."""
    A: SymMatrix
    b: np.ndarray

    @classmethod
    def create(cls, a: Any, b: Any) -> AitkenInstance:
        matrix = SymMatrix.from_array(a)
        cholesky_pd(matrix)
        vector = np.asarray(b, dtype=float).reshape(-1)
        if vector.size != matrix.dim:
            raise ParamError(f"b has length {vector.size}, A is {matrix.dim}x{matrix.dim}")
        return cls(matrix, vector)

    @property
    def q(self) -> int:
        return self.A.dim


def aitken_rhs(inst: AitkenInstance) -> float:
    """π^{q/2} / √det A · exp(−bᵀ(4A)⁻¹b)."""
    quad, log_det = quadratic_form_inverse(inst.A, inst.b)
    return math.exp(0.5 * inst.q * math.log(math.pi) - 0.5 * log_det - quad / 4.0)


def _hermite_value(beta: np.ndarray, log_det_factor: float, nodes: int) -> complex:
    x, w = gauss_hermite(nodes)
    value = complex(math.exp(-log_det_factor))
    for b in beta:
        value *= complex(np.sum(w * np.exp(1j * b * x)))
    return value


def aitken_lhs(
    inst: AitkenInstance,
    method: str = "hermite",
    nodes: Optional[int] = None,
    samples: int = 20000,
    seed: Optional[int] = None,
) -> Tuple[float, float, float]:
    """
    (real part, imaginary part, error estimate) of the integral.

    "hermite": with A = LLᵀ and v = Lᵀu the integrand separates into a
    product of one-dimensional Gauss-Hermite sums; the error estimate is the
    change against three quarters as many nodes. "monte_carlo": u drawn from the
    Gaussian ∝ exp(−uᵀAu); the error estimate is one standard error.
    """
    factor = cholesky_pd(inst.A)
    log_det_factor = float(np.sum(np.log(np.diag(factor))))

    if method == "hermite":
        if inst.q > MAX_HERMITE_DIM:
            raise ParamError(f"tensor quadrature supports q <= {MAX_HERMITE_DIM}, got {inst.q}")
        nodes = nodes or get_settings().quadrature.hermite_nodes
        beta = scipy.linalg.solve_triangular(factor, inst.b, lower=True)
        value = _hermite_value(beta, log_det_factor, nodes)
        coarse = _hermite_value(beta, log_det_factor, max(3 * nodes // 4, 1))
        error = abs(value - coarse)
        if error > 1e-6 * abs(value) and error > 1e-300:
            logger.error("aitken_quadrature_failed", q=inst.q, nodes=nodes, error=error)
            raise QuadratureError(f"Gauss-Hermite did not converge with {nodes} nodes",
                                  witness={"error": error, "nodes": nodes})
        return value.real, value.imag, error

    if method == "monte_carlo":
        seed = get_settings().sampling.seed if seed is None else seed
        rng = make_rng(seed)
        v = rng.normal(scale=math.sqrt(0.5), size=(samples, inst.q))
        u = scipy.linalg.solve_triangular(factor.T, v.T, lower=False).T
        phase = u @ inst.b
        mass = math.exp(0.5 * inst.q * math.log(math.pi) - log_det_factor)
        re = np.cos(phase)
        im = np.sin(phase)
        error = mass * float(np.std(re, ddof=1)) / math.sqrt(samples)
        return mass * float(np.mean(re)), mass * float(np.mean(im)), error

    raise ParamError(f"unknown method: {method!r}")


def random_aitken_instance(rng: np.random.Generator, q: int, max_b: float = 5.0) -> AitkenInstance:
    """A with eigenvalues log-uniform in [0.5, 50] (condition ≤ 100) and ‖b‖ ≤ max_b."""
    basis, _ = np.linalg.qr(rng.normal(size=(q, q)))
    eigenvalues = np.exp(rng.uniform(math.log(0.5), math.log(50.0), size=q))
    direction = rng.normal(size=q)
    b = direction / np.linalg.norm(direction) * rng.uniform(0.0, max_b)
    return AitkenInstance.create(basis @ np.diag(eigenvalues) @ basis.T, b)


def _duplicate_witness(points: np.ndarray) -> Optional[Tuple[int, int]]:
    _, first, inverse = np.unique(points, axis=0, return_index=True, return_inverse=True)
    inverse = np.asarray(inverse).reshape(-1)
    for j, group in enumerate(inverse):
        i = int(first[group])
        if i != j:
            return i, j
    return None


def assemble_gram(
    K: MatrixKernel,
    points: Sequence[Any],
    provenance: Optional[Dict[str, Any]] = None,
) -> BlockGram:
    """[K_{m,n}(z_μ, z_ν)] in point-major layout; the upper point triangle is evaluated."""
    points = K.domain.validate(points)
    duplicate = _duplicate_witness(points)
    if duplicate is not None:
        raise DuplicatePoints(f"points {duplicate[0]} and {duplicate[1]} coincide",
                              witness={"indices": list(duplicate)})

    n_points = len(points)

    def row(mu: int) -> List[np.ndarray]:
        return [K(points[mu], points[nu]) for nu in range(mu, n_points)]

    blocks = np.empty((K.p, K.p, n_points, n_points))
    for mu, values in enumerate(parallel_map(row, range(n_points))):
        for offset, value in enumerate(values):
            nu = mu + offset
            blocks[:, :, mu, nu] = value
            if nu != mu:
                blocks[:, :, nu, mu] = value.T

    logger.info("gram_assembled", p=K.p, n_points=n_points)
    return BlockGram.from_blocks(blocks, provenance={**K.provenance, **(provenance or {}), "n_points": n_points})


def classify_gram(
    gram: BlockGram,
    tol_psd: Optional[float] = None,
    tol_pd: Optional[float] = None,
    method: str = "jacobi",
) -> SpectralReport:
    return eig_sym(gram.flattened, tol_psd, tol_pd, method)


def _spectral_check(name: str, matrix: Any) -> Tuple[CheckReport, SpectralReport]:
    report = eig_sym(matrix)
    check = CheckReport(check=name, passed=report.at_least_psd, margin=report.min_eig + report.tolerance_used,
                        details=report.to_dict())
    return check, report


def schur_chain_check(
    G: MatrixFieldFamily,
    H: VectorFieldFamily,
    points: Sequence[Any],
    u: Any,
    s: float,
) -> SuiteReport:
    """
    The positivity chain behind the quadratic construction at one (u, s):
    E_u = [exp(−uᵀG u)] is PSD, E_u^s = [exp(i·2√s·Hᵀu)] has unit diagonal,
    and E_u ∘ E_u^s is PSD. When the strict condition holds on these points
    the product must also be PD.
    """
    if s < 0:
        raise ParamError(f"s must be non-negative, got {s}")
    points = np.asarray(points, dtype=float)
    u = np.asarray(u, dtype=float)
    suite = SuiteReport(suite="schur_chain")

    form = G.quadratic_form_matrix(points, u)
    e_u = np.exp(-form)
    suite.add(_spectral_check("E_u_psd", SymMatrix.from_array(e_u))[0])

    e_us = H.exp_matrix(points, u, scale=2.0 * math.sqrt(s))
    diagonal = np.diag(e_us)
    suite.add(CheckReport(
        check="E_us_unit_diagonal",
        passed=bool(np.all(diagonal == 1.0)),
        margin=-float(np.max(np.abs(diagonal - 1.0))),
    ))

    product_check, product_report = _spectral_check("product_psd", hermitian_embedding(e_u * e_us))
    suite.add(product_check)

    strict_margin, _ = strict_exp_condition_margin(form, block=G.p)
    if strict_margin > STRICTNESS_TOLERANCE * max(1.0, float(np.max(np.abs(form)))):
        suite.add(CheckReport(check="product_pd", passed=product_report.min_eig > 0,
                              margin=product_report.min_eig, details={"strict_margin": strict_margin}))
    else:
        suite.add(CheckReport(check="product_pd", passed=None, details={"strict_margin": strict_margin}))
    return suite


def separability_rank(
    K: MatrixKernel,
    xs: Sequence[Any],
    ys: Sequence[Any],
    anchor: Any,
    m: int = 0,
    n: int = 0,
    tolerance: float = 1e-10,
) -> int:
    """
    Numerical rank of S_ij = K_{m,n}((x_i, y_j), anchor). A product kernel
    gives rank ≤ 1; a larger rank certifies nonseparability.
    """
    anchor = np.asarray(anchor, dtype=float)
    slice_ = np.array([[K(K.domain.join(x, y), anchor)[m, n] for y in ys] for x in xs])
    singular = np.linalg.svd(slice_, compute_uv=False)
    return int(np.sum(singular > tolerance * singular[0])) if singular[0] > 0 else 0


def aitken_suite(seed: int, trials: int = 100, method: str = "hermite", max_q: int = 3) -> SuiteReport:
    """Random instances with q ≤ max_q; quadrature within 1e-8 relative, MC within 3 standard errors."""
    suite = SuiteReport(suite=f"aitken_{method}", seed=seed)

    def one(k: int) -> CheckReport:
        rng = make_rng(seed, k)
        inst = random_aitken_instance(rng, int(rng.integers(1, max_q + 1)))
        exact = aitken_rhs(inst)
        re, im, error = aitken_lhs(inst, method=method, seed=int(rng.integers(2 ** 31)))
        if method == "hermite":
            relative = abs(re - exact) / exact
            passed = relative < AITKEN_TOLERANCE and abs(im) < 1e-10
            margin = AITKEN_TOLERANCE - relative
        else:
            relative = abs(re - exact) / max(error, 1e-300)
            passed = relative <= MC_STANDARD_ERRORS
            margin = MC_STANDARD_ERRORS - relative
        return CheckReport(check="aitken_identity", passed=passed, margin=margin, seed=k,
                           details={"q": inst.q, "lhs": re, "rhs": exact, "imag": im, "error": error})

    for report in parallel_map(one, range(trials)):
        suite.add(report)
    return suite


def matern_suite(
    seed: int,
    grid: Sequence[float] = (0.5, 1.0, 2.0, 3.0, 5.0),
    radii: Sequence[float] = (0.5, 1.0, 2.0, 3.0, 4.0),
    lags: Sequence[float] = (0.1, 0.5, 1.0, 2.0, 3.0),
) -> SuiteReport:
    """Exponential case, self-convergence, Bessel form and the mixture construction."""
    suite = SuiteReport(suite="matern", seed=seed)

    ratios = np.array([[matern_eval(0.5, r, u) / math.exp(-r * math.sqrt(u)) for u in grid] for r in grid])
    spread = float(ratios.max() / ratios.min() - 1.0)
    suite.add(CheckReport(check="matern_half_exponential", passed=spread < 1e-6, margin=1e-6 - spread,
                          details={"ratio": float(ratios.mean())}))

    base = matern_eval(1.5, 2.0, 1.0, nodes=64)
    doubled = matern_eval(1.5, 2.0, 1.0, nodes=128)
    change = abs(base - doubled) / abs(doubled)
    suite.add(CheckReport(check="matern_self_convergence", passed=change < 1e-8, margin=1e-8 - change))

    worst = 0.0
    for nu in (0.25, 0.75, 1.5, 2.5, 5.0):
        for z in (1e-3, 0.1, 1.0, 5.0, 30.0):
            exact = 2.0 ** (1.0 - nu) / scipy.special.gamma(nu) * z ** nu * scipy.special.kv(nu, z)
            worst = max(worst, abs(matern_eval(nu, z, 1.0) - exact) / exact)
    suite.add(CheckReport(check="matern_bessel_form", passed=worst < 1e-8, margin=1e-8 - worst))

    x_space = PointSpace.euclidean(1)
    y_space = PointSpace.euclidean(1)
    G = make_G_constant(np.eye(1), 1, y_space)
    H = make_H_difference(linear_maps([np.eye(1)]), x_space)
    phi = catalog_get("exp_neg")
    worst = 0.0
    for r in radii:
        kernel = build_product_mixture_kernel(
            phi, G, H, matern_mixture([1.0], r, PointSpace.product(x_space, y_space)), seed=seed
        )
        for lag in lags:
            value = kernel(np.array([lag, 0.0]), np.array([0.0, 0.0]))[0, 0]
            exact = scipy.special.gamma(1.0) * matern_eval(1.0, r, lag * lag)
            worst = max(worst, abs(value - exact) / exact)
    suite.add(CheckReport(check="matern_mixture_oracle", passed=worst < 1e-6, margin=1e-6 - worst))
    return suite


def cauchy_suite(seed: int) -> SuiteReport:
    """Gamma-measure reconstruction, zero-lag values and the mixture route at γ = 1."""
    suite = SuiteReport(suite="cauchy", seed=seed)

    phi = catalog_get("gen_cauchy", {"c": 1.0, "nu": 2.0, "gamma": 1.0})
    worst = max(abs(reconstruct_from_measure(phi, t) - (1.0 + t) ** -2) / (1.0 + t) ** -2
                for t in np.logspace(-2, 2, 20))
    suite.add(CheckReport(check="cauchy_reconstruction", passed=worst < 1e-6, margin=1e-6 - worst))

    x_space = PointSpace.euclidean(2)
    y_space = PointSpace.euclidean(1)
    a = np.array([[2.0, 0.3], [0.3, 1.0]])
    G = make_G_constant(a, 2, y_space)
    H = make_H_difference(linear_maps([np.eye(2), np.eye(2)]), x_space)
    v = [0.75, 1.25]
    kernel = build_cauchy_cross(G, H, 1.0, 1.0, v, seed=seed)
    z = np.array([0.3, -0.2, 0.5])
    value = kernel(z, z)
    det = float(np.linalg.det(a))
    expected = np.array([[scipy.special.gamma(vm + vn) / math.sqrt(det) for vn in v] for vm in v])
    gap = float(np.max(np.abs(value - expected) / expected))
    suite.add(CheckReport(check="cauchy_zero_lag", passed=gap < 1e-10, margin=1e-10 - gap))

    v = [1.5, 1.5]
    closed = build_cauchy_cross(G, H, 0.5, 1.0, v, seed=seed)
    mixed = build_mixture_kernel(
        catalog_get("exp_neg"),
        make_G_constant(a, 2, x_space),
        H,
        cauchy_mixture(v, 0.5, x_space),
        seed=seed,
    )
    rng = make_rng(seed, 5)
    worst = 0.0
    for _ in range(10):
        x, x_prime = rng.normal(scale=0.5, size=(2, 2))
        expected = closed(np.append(x, 0.0), np.append(x_prime, 1.0))
        worst = max(worst, float(np.max(np.abs(mixed(x, x_prime) - expected) / np.abs(expected))))
    suite.add(CheckReport(check="cauchy_mixture_route", passed=worst < 1e-6, margin=1e-6 - worst))
    return suite


def non_cm_control(t: Any) -> Any:
    """sin(t) + 2: positive and bounded but not completely monotone."""
    return np.sin(t) + 2.0


DEFAULT_PARAMS: Dict[str, Dict[str, Any]] = {
    "exp_neg": {},
    "exp_neg_scaled": {"lam": 0.5},
    "exp_neg_power": {"gamma": 0.5},
    "gen_cauchy": {"c": 1.0, "nu": 2.0, "gamma": 0.5},
    "cauchy": {"nu": 1.5},
    "constant": {"c": 2.0},
    "exp_mixture": {"locations": [0.5, 2.0], "weights": [1.0, 0.5]},
}


def cm_suite(seed: int, orders: int = 4) -> SuiteReport:
    """Every catalog entry passes cm_check and reconstructs from its measure; the control fails."""
    suite = SuiteReport(suite="cm", seed=seed)
    for name in CATALOG:
        phi = catalog_get(name, DEFAULT_PARAMS[name])
        suite.add(cm_check(phi, orders))
        if phi.measure is not None:
            worst = max(abs(reconstruct_from_measure(phi, t) - phi(t)) / phi(t) for t in np.logspace(-2, 2, 20))
            suite.add(CheckReport(check="measure_reconstruction", passed=worst < 1e-6, margin=1e-6 - worst,
                                  details={"function": name}))

    control = cm_check(non_cm_control, orders)
    suite.add(CheckReport(check="non_cm_control_rejected", passed=control.passed is False,
                          margin=-control.margin, witness=control.witness))
    return suite


SUITES: Dict[str, Callable[..., SuiteReport]] = {
    "aitken": lambda seed, trials: aitken_suite(seed, trials),
    "matern": lambda seed, trials: matern_suite(seed),
    "cauchy": lambda seed, trials: cauchy_suite(seed),
    "cm": lambda seed, trials: cm_suite(seed),
}


def run_suites(name: str, seed: int, trials: int = 100) -> List[SuiteReport]:
    if name == "all":
        return [suite(seed, trials) for suite in SUITES.values()]
    if name not in SUITES:
        raise ParamError(f"unknown suite: {name!r}")
    return [SUITES[name](seed, trials)]
