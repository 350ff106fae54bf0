"""
Inputs to the kernel constructions: matrix fields G_{m,n}, vector fields
H_{m,n}, scalar CND kernels and scale-mixture families P^s_{m,n}.

Every family carries a sampling certificate for the structural hypothesis
the builders rely on. Certificates are falsifiable at desk scale, not proofs;
reports echo the seed that produced them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import structlog

from .config import get_settings
from .domain.matrices import Classification, SymMatrix
from .domain.reports import CheckReport
from .domain.spaces import PointSpace, geodesic
from .errors import DomainError, FamilyInvalid, InvalidMatrix, NotPositiveDefinite, ParamError, ShapeError
from .linalg import cholesky_pd, eig_sym, hermitian_embedding, negative_type_check, strict_exp_condition_margin
from .quadrature import gen_laguerre
from .runtime import make_rng, parallel_map
from .scalar_cm import BernsteinFunction

logger = structlog.get_logger()

MAX_CHECK_POINTS = 8
ANTISYMMETRY_TOLERANCE = 1e-12
STRICTNESS_TOLERANCE = 1e-12
SPHERE_TOLERANCE = 1e-10

# Hypothesis each checker certifies, as named in failure reports.
HYPOTHESES: Dict[str, str] = {
    "cnd_G": "CND_p(Y) hypothesis of Theorem 2.1: u^T G u of negative type on Y",
    "exp_pd_H": "PD_p(X) hypothesis of Theorem 2.1: exp(i H^T u) positive definite on X",
    "strictness": "strictness condition of Theorem 2.1(ii)",
    "cnd_scalar": "CND_1(Y) hypothesis of Theorem 2.4 on g",
    "mixture_psd": "PD_p hypothesis of Theorem 3.1 on the mixture P^s",
    "mixture_strictness_diagonal": "Theorem 3.2(i): P^s_mm(y,y) > 0 on atoms of positive mass",
    "mixture_strictness_gram": "Theorem 3.2(ii): [P^s] in SPD_p on atoms of positive mass",
}

Descriptor = Dict[str, Any]


def descriptor(recipe: str, **params: Any) -> Descriptor:
    return {"recipe": recipe, "params": params}


class _Certified:
    """Per-seed cache of the family's sampling certificate."""

    def certify(self, seed: Optional[int] = None) -> CheckReport:
        seed = get_settings().sampling.seed if seed is None else seed
        cache = self.__dict__.setdefault("_certificates", {})
        if seed not in cache:
            cache[seed] = self._run_certificate(seed)
        return cache[seed]

    @property
    def certificate(self) -> CheckReport:
        return self.certify()

    def _run_certificate(self, seed: int) -> CheckReport:
        raise NotImplementedError


def _check_index(p: int, m: int, n: int) -> None:
    if not (0 <= m < p and 0 <= n < p):
        raise ParamError(f"component index ({m}, {n}) outside 0..{p - 1}")


def point_major_matrix(fn: Callable[[int, int, Any, Any], Any], points: Sequence[Any], p: int) -> np.ndarray:
    """[fn(m, n, z_μ, z_ν)] with row μ·p + m and column ν·p + n."""
    return np.array([
        [fn(m, n, z, w) for w in points for n in range(p)]
        for z in points for m in range(p)
    ])


def _worst(results: Sequence[Any], failed: Callable[[Any], bool], margin: Callable[[Any], float]) -> Any:
    """Smallest-margin failing result, or smallest-margin result when none fail."""
    failing = [r for r in results if failed(r)]
    return min(failing or results, key=margin)


@dataclass(frozen=True, eq=False)
class MatrixFieldFamily(_Certified):
    """p×p family of q×q matrix fields G_{m,n}(y, y')."""
    p: int
    q: int
    func: Callable[[int, int, np.ndarray, np.ndarray], Any]
    descriptor: Descriptor
    space: PointSpace
    builder_input: bool = True

    def raw(self, m: int, n: int, y: Any, y_prime: Any) -> np.ndarray:
        """G_{m,n}(y, y') without the positive-definiteness check."""
        value = np.asarray(self.func(m, n, y, y_prime), dtype=float)
        if value.shape != (self.q, self.q):
            raise ShapeError(f"G[{m},{n}] has shape {value.shape}, expected ({self.q}, {self.q})")
        return value

    def evaluate(self, m: int, n: int, y: Any, y_prime: Any) -> np.ndarray:
        _check_index(self.p, m, n)
        value = self.raw(m, n, y, y_prime)
        try:
            cholesky_pd(value)
        except (NotPositiveDefinite, InvalidMatrix) as e:
            raise FamilyInvalid(
                f"G[{m},{n}] is not positive definite",
                witness={"m": m, "n": n, "y": np.asarray(y), "y_prime": np.asarray(y_prime)},
            ) from e
        return value

    def quadratic_form_matrix(self, points: Sequence[Any], u: np.ndarray) -> np.ndarray:
        """[uᵀ G_{m,n}(y_μ, y_ν) u] in point-major layout."""
        return point_major_matrix(lambda m, n, y, w: float(u @ self.raw(m, n, y, w) @ u), points, self.p)

    def _run_certificate(self, seed: int) -> CheckReport:
        return check_G_validity(self, seed=seed)


@dataclass(frozen=True, eq=False)
class VectorFieldFamily(_Certified):
    """p×p family of real q-vector fields H_{m,n}(x, x')."""
    p: int
    q: int
    func: Callable[[int, int, np.ndarray, np.ndarray], Any]
    descriptor: Descriptor
    space: PointSpace

    def evaluate(self, m: int, n: int, x: Any, x_prime: Any) -> np.ndarray:
        value = np.asarray(self.func(m, n, x, x_prime), dtype=float).reshape(-1)
        if value.shape != (self.q,):
            raise ShapeError(f"H[{m},{n}] has length {value.size}, expected {self.q}")
        return value

    def exp_matrix(self, points: Sequence[Any], u: np.ndarray, scale: float = 1.0) -> np.ndarray:
        """[exp(i·scale·H_{m,n}(x_μ, x_ν)ᵀu)] in point-major layout."""
        return point_major_matrix(
            lambda m, n, x, w: np.exp(1j * scale * float(self.evaluate(m, n, x, w) @ u)), points, self.p
        )

    def _run_certificate(self, seed: int) -> CheckReport:
        return check_H_validity(self, seed=seed)


@dataclass(frozen=True, eq=False)
class ScalarCNDKernel(_Certified):
    """Real symmetric kernel of negative type; `positive` marks a range inside (0, ∞)."""
    func: Callable[[np.ndarray, np.ndarray], float]
    positive: bool
    descriptor: Descriptor
    space: Optional[PointSpace] = None

    def __call__(self, y: Any, y_prime: Any) -> float:
        return float(self.func(np.asarray(y, dtype=float), np.asarray(y_prime, dtype=float)))

    def _run_certificate(self, seed: int) -> CheckReport:
        if self.space is None:
            return CheckReport(check="cnd_scalar", passed=None, seed=seed, details={"reason": "no point space"})
        return check_scalar_cnd(self, self.space, seed=seed)


@dataclass(frozen=True, eq=False)
class MixtureSpec(_Certified):
    """
    Finite measure ρ = Σ w_k δ_{s_k} and the family P^s_{m,n}(z, z').

    Continuous measures enter through a quadrature discretization fixed at
    construction, so atoms are nodes and weights are quadrature weights.
    """
    atoms: Tuple[Tuple[float, float], ...]
    P: Callable[[int, int, float, Any, Any], float]
    p: int
    descriptor: Descriptor
    space: PointSpace
    flags: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.atoms:
            raise ParamError("a mixture needs at least one atom")
        for s, w in self.atoms:
            if not (s > 0 and w > 0 and math.isfinite(s) and math.isfinite(w)):
                raise ParamError(f"mixture atom ({s}, {w}) needs finite s > 0 and weight > 0")

    @property
    def locations(self) -> np.ndarray:
        return np.array([s for s, _ in self.atoms])

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for _, w in self.atoms])

    def gram(self, s: float, points: Sequence[Any]) -> np.ndarray:
        """[P^s_{m,n}(z_μ, z_ν)] in point-major layout."""
        return point_major_matrix(lambda m, n, z, w: float(self.P(m, n, s, z, w)), points, self.p)

    def _run_certificate(self, seed: int) -> CheckReport:
        return check_mixture_psd(self, seed=seed)


def _require_points(space: PointSpace, n_points: int) -> int:
    if n_points < 1 or n_points > MAX_CHECK_POINTS:
        raise ParamError(f"checkers run on 1..{MAX_CHECK_POINTS} points, got {n_points}")
    return min(n_points, space.size) if space.size else n_points


def _sample_inputs(space: PointSpace, n_points: int) -> Tuple[int, int, int]:
    sampling = get_settings().sampling
    return sampling.seed, _require_points(space, n_points or sampling.validity_points), sampling.negative_type_trials


def make_G_sum(
    g_list: Sequence[Callable[[np.ndarray], Any]],
    q: int,
    space: PointSpace,
    desc: Optional[Descriptor] = None,
    seed: Optional[int] = None,
) -> MatrixFieldFamily:
    """G_{m,n}(y, y') = g_m(y) + g_n(y'); each g_m is checked PD on sampled points."""
    if not g_list:
        raise ParamError("make_G_sum needs at least one map")
    seed = get_settings().sampling.seed if seed is None else seed
    points = space.sample(make_rng(seed, 0), get_settings().sampling.validity_points)
    for m, g in enumerate(g_list):
        for y in points:
            value = np.asarray(g(y), dtype=float)
            if value.shape != (q, q):
                raise ShapeError(f"g_{m} returns shape {value.shape}, expected ({q}, {q})")
            try:
                cholesky_pd(value)
            except (NotPositiveDefinite, InvalidMatrix) as e:
                raise FamilyInvalid(f"g_{m} is not positive definite at a sampled point",
                                    witness={"m": m, "y": y}) from e

    def func(m: int, n: int, y: np.ndarray, y_prime: np.ndarray) -> np.ndarray:
        return np.asarray(g_list[m](y), float) + np.asarray(g_list[n](y_prime), float)

    return MatrixFieldFamily(len(g_list), q, func, desc or descriptor("sum", p=len(g_list), q=q), space)


def shifted_norm_maps(shifts: Sequence[float], q: int) -> List[Callable[[np.ndarray], np.ndarray]]:
    """g_m(y) = (shift_m + ‖y‖²)·I_q."""
    return [lambda y, a=float(a): (a + float(np.dot(y, y))) * np.eye(q) for a in shifts]


def make_G_scalar_diag(g: ScalarCNDKernel, q: int, p: int, space: PointSpace) -> MatrixFieldFamily:
    """G_{m,n}(y, y') = g(y, y')·I_q for every (m, n)."""
    if not g.positive:
        raise FamilyInvalid("scalar diagonal families need a positive valued g", witness={"g": g.descriptor})
    eye = np.eye(q)
    return MatrixFieldFamily(
        p, q, lambda m, n, y, y_prime: g(y, y_prime) * eye,
        descriptor("scalar_diag", g=g.descriptor, p=p, q=q), space,
    )


def make_G_indexed_shift(base: ScalarCNDKernel, offsets: Sequence[float], q: int, space: PointSpace) -> MatrixFieldFamily:
    """G_{m,n}(y, y') = (w_m + w_n + base(y, y'))·I_q."""
    offsets = [float(w) for w in offsets]
    if not offsets or min(offsets) < 0 or (min(offsets) == 0 and not base.positive):
        raise ParamError("offsets must be positive, or non-negative with a positive base kernel")
    eye = np.eye(q)
    return MatrixFieldFamily(
        len(offsets), q, lambda m, n, y, y_prime: (offsets[m] + offsets[n] + base(y, y_prime)) * eye,
        descriptor("indexed_shift", offsets=offsets, base=base.descriptor, q=q), space,
    )


def _unit(y: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    norm = float(np.linalg.norm(y))
    if abs(norm - 1.0) > SPHERE_TOLERANCE:
        raise DomainError(f"sphere point has norm {norm:.12g}", witness={"point": y, "norm": norm})
    return y


def make_G_sphere(p: int, q: int, d: int) -> MatrixFieldFamily:
    """G_{m,n}(y, y') = (m + n + δ(y, y'))·I_q on S^d with 1-based m, n and geodesic δ."""
    space = PointSpace.sphere(d)
    eye = np.eye(q)

    def func(m: int, n: int, y: np.ndarray, y_prime: np.ndarray) -> np.ndarray:
        return (m + n + 2 + geodesic(_unit(y), _unit(y_prime))) * eye

    return MatrixFieldFamily(p, q, func, descriptor("sphere", p=p, q=q, d=d), space)


def make_G_constant(a: Any, p: int, space: PointSpace) -> MatrixFieldFamily:
    """G_{m,n} ≡ A."""
    matrix = SymMatrix.from_array(a)
    try:
        cholesky_pd(matrix)
    except NotPositiveDefinite as e:
        raise FamilyInvalid("constant family needs a positive definite matrix",
                            witness={"matrix": matrix.entries}) from e
    return MatrixFieldFamily(
        p, matrix.dim, lambda m, n, y, y_prime: matrix.entries,
        descriptor("constant", matrix=matrix.entries.tolist(), p=p), space,
    )


def make_G_kernel_diag(
    k: Callable[[np.ndarray, np.ndarray], float],
    q: int,
    p: int,
    space: PointSpace,
    desc: Optional[Descriptor] = None,
) -> MatrixFieldFamily:
    """G_{m,n}(y, y') = k(y, y')·I_q; a PD k generally breaks the CND hypothesis."""
    eye = np.eye(q)
    return MatrixFieldFamily(
        p, q, lambda m, n, y, y_prime: float(k(y, y_prime)) * eye,
        desc or descriptor("kernel_diag", p=p, q=q), space,
    )


def gaussian_kernel(scale: float = 1.0) -> Callable[[np.ndarray, np.ndarray], float]:
    return lambda y, y_prime: math.exp(-float(np.sum((np.asarray(y) - np.asarray(y_prime)) ** 2)) / scale)


def make_G_block_diagonal(g_list: Sequence[ScalarCNDKernel], q: int, space: PointSpace) -> MatrixFieldFamily:
    """
    G_{m,m} = g_m·I_q and G_{m,n} = 0 for m ≠ n.

    Of negative type but with singular off-diagonal blocks, so it only feeds
    the checkers; evaluate() and the builders refuse it.
    """
    eye = np.eye(q)
    zero = np.zeros((q, q))

    def func(m: int, n: int, y: np.ndarray, y_prime: np.ndarray) -> np.ndarray:
        return g_list[m](y, y_prime) * eye if m == n else zero

    return MatrixFieldFamily(
        len(g_list), q, func, descriptor("block_diagonal", g=[g.descriptor for g in g_list], q=q), space,
        builder_input=False,
    )


def make_H_difference(
    h_list: Sequence[Callable[[np.ndarray], Any]],
    space: PointSpace,
    desc: Optional[Descriptor] = None,
) -> VectorFieldFamily:
    """H_{m,n}(x, x') = h_m(x) − h_n(x')."""
    if not h_list:
        raise ParamError("make_H_difference needs at least one map")
    sample_point = space.sample(make_rng(get_settings().sampling.seed, 1), 1)[0]
    sizes = {np.atleast_1d(np.asarray(h(sample_point), dtype=float)).size for h in h_list}
    if len(sizes) != 1:
        raise ShapeError(f"maps disagree on output dimension: {sorted(sizes)}")
    q = sizes.pop()

    def func(m: int, n: int, x: np.ndarray, x_prime: np.ndarray) -> np.ndarray:
        return np.atleast_1d(np.asarray(h_list[m](x), float)) - np.atleast_1d(np.asarray(h_list[n](x_prime), float))

    return VectorFieldFamily(len(h_list), q, func, desc or descriptor("difference", p=len(h_list), q=q), space)


def linear_maps(
    matrices: Sequence[Any],
    offsets: Optional[Sequence[Any]] = None,
) -> List[Callable[[np.ndarray], np.ndarray]]:
    """h_m(x) = A_m x + b_m."""
    mats = [np.atleast_2d(np.asarray(a, dtype=float)) for a in matrices]
    shifts = [np.asarray(b, dtype=float) for b in offsets] if offsets else [np.zeros(a.shape[0]) for a in mats]
    return [lambda x, a=a, b=b: a @ np.atleast_1d(x) + b for a, b in zip(mats, shifts)]


def first_coordinate_maps(p: int, q: int, dim: int = 1) -> List[Callable[[np.ndarray], np.ndarray]]:
    """h_m(x) = (x_0, 0, …, 0) for every m."""
    a = np.zeros((q, dim))
    a[0, 0] = 1.0
    return linear_maps([a] * p)


def make_H_zero(p: int, q: int, space: PointSpace) -> VectorFieldFamily:
    zero = np.zeros(q)
    return VectorFieldFamily(p, q, lambda m, n, x, x_prime: zero, descriptor("zero", p=p, q=q), space)


def shifted_sq_distance(c: float = 1.0, space: Optional[PointSpace] = None) -> ScalarCNDKernel:
    """c + ‖y − y'‖²."""
    if c < 0:
        raise ParamError(f"shift must be non-negative, got {c}")
    return ScalarCNDKernel(
        lambda y, y_prime: c + float(np.sum((y - y_prime) ** 2)), c > 0,
        descriptor("shifted_sq_distance", c=c), space,
    )


def geodesic_distance(d: int = 2) -> ScalarCNDKernel:
    """Great-circle distance on S^d."""
    return ScalarCNDKernel(geodesic, False, descriptor("geodesic_distance", d=d), PointSpace.sphere(d))


def bernstein_of_sq_distance(f: BernsteinFunction, space: Optional[PointSpace] = None) -> ScalarCNDKernel:
    """f(‖y − y'‖²) for a positive f with completely monotone derivative."""
    return ScalarCNDKernel(
        lambda y, y_prime: f(float(np.sum((y - y_prime) ** 2))), True,
        descriptor("bernstein_of_sq_distance", f=f.to_dict()), space,
    )


def shifted_power_distance(c: float, alpha: float, space: Optional[PointSpace] = None) -> ScalarCNDKernel:
    """c + ‖y − y'‖^α with α ∈ (0, 2]."""
    if not 0 < alpha <= 2 or c < 0:
        raise ParamError(f"need alpha in (0, 2] and c >= 0, got alpha={alpha}, c={c}")
    return ScalarCNDKernel(
        lambda y, y_prime: c + float(np.linalg.norm(y - y_prime)) ** alpha, c > 0,
        descriptor("shifted_power_distance", c=c, alpha=alpha), space,
    )


def mixture_from_atoms(
    atoms: Sequence[Tuple[float, float]],
    P: Callable[[int, int, float, Any, Any], float],
    p: int,
    space: PointSpace,
    desc: Optional[Descriptor] = None,
) -> MixtureSpec:
    atoms = tuple((float(s), float(w)) for s, w in atoms)
    return MixtureSpec(atoms, P, p, desc or descriptor("atoms", atoms=[list(a) for a in atoms], p=p), space)


def unit_mixture(p: int, space: PointSpace) -> MixtureSpec:
    """Unit atom at s = 1 with P ≡ 1; reduces a mixture construction to its plain form."""
    return MixtureSpec(((1.0, 1.0),), lambda m, n, s, z, w: 1.0, p, descriptor("unit", p=p), space)


def matern_mixture(v_list: Sequence[float], r: float, space: PointSpace, step: Optional[float] = None) -> MixtureSpec:
    """
    dρ(s) = e^{-r²/4s} s^{-1} ds with P^s_{m,n} = (r/2)^{v_m+v_n} s^{-(v_m+v_n)/2}.

    Discretized by the trapezoid rule in x = ln s; the window reaches
    e^{-50} of the ρ density on the left and e^{-40} of the slowest P^s tail
    on the right.
    """
    v = np.asarray(v_list, dtype=float)
    if v.size == 0 or np.any(v <= 0) or r <= 0:
        raise ParamError("matern mixture needs positive smoothness values and r > 0")
    step = step or get_settings().quadrature.mixture_step
    lower = math.log(r * r / 200.0)
    upper = math.log(r * r / 4.0) + 40.0 / float(v.min())
    x = np.arange(lower, upper + step, step)
    weights = step * np.exp(-(r * r / 4.0) * np.exp(-x))
    atoms = tuple(zip(np.exp(x).tolist(), weights.tolist()))

    def P(m: int, n: int, s: float, z: Any, w: Any) -> float:
        total = v[m] + v[n]
        return (r / 2.0) ** total * s ** (-total / 2.0)

    return MixtureSpec(atoms, P, v.size, descriptor("matern", v=v.tolist(), r=r, step=step), space)


def cauchy_mixture(v_list: Sequence[float], c: float, space: PointSpace, nodes: Optional[int] = None) -> MixtureSpec:
    """
    dρ(s) = s^{-1} e^{-s/c} ds with P^s_{m,n} = (s/c)^{v_m+v_n}.

    Discretized by generalized Gauss-Laguerre in x = s/c with exponent
    2·min(v) − 1, exact in the smoothness pair (min, min) for polynomial
    integrands; unequal smoothness values converge more slowly.
    """
    v = np.asarray(v_list, dtype=float)
    if v.size == 0 or np.any(v <= 0) or c <= 0:
        raise ParamError("cauchy mixture needs positive smoothness values and c > 0")
    nodes = nodes or get_settings().quadrature.laguerre_nodes
    alpha = 2.0 * float(v.min()) - 1.0
    x, w = gen_laguerre(nodes, alpha)
    atoms = tuple(zip((c * x).tolist(), (w * x ** (-1.0 - alpha)).tolist()))
    flags = ("nu_le_one",) if 2.0 * float(v.min()) <= 1.0 else ()
    if flags:
        logger.info("cauchy_mixture_small_nu", v_min=float(v.min()))

    def P(m: int, n: int, s: float, z: Any, w_: Any) -> float:
        return (s / c) ** (v[m] + v[n])

    return MixtureSpec(atoms, P, v.size, descriptor("cauchy", v=v.tolist(), c=c, nodes=nodes), space, flags)


def _family_symmetry(G: MatrixFieldFamily, points: np.ndarray) -> Tuple[float, Optional[Dict[str, Any]]]:
    worst, witness = 0.0, None
    for i, y in enumerate(points):
        for j, w in enumerate(points):
            for m in range(G.p):
                for n in range(G.p):
                    gap = float(np.max(np.abs(G.raw(m, n, y, w) - G.raw(n, m, w, y).T)))
                    if gap > worst:
                        worst, witness = gap, {"m": m, "n": n, "y": y, "y_prime": w, "gap": gap}
    return worst, witness


def check_G_validity(
    G: MatrixFieldFamily,
    space: Optional[PointSpace] = None,
    n_points: Optional[int] = None,
    n_freq: Optional[int] = None,
    seed: Optional[int] = None,
) -> CheckReport:
    """
    Sampling certificate that (y, y') ↦ [uᵀ G_{m,n}(y, y') u] is of negative type.

    Each random frequency u gets its own point set; the form is tested on
    the per-component zero-sum subspace.
    """
    space = space or G.space
    default_seed, n_points, trials = _sample_inputs(space, n_points)
    seed = default_seed if seed is None else seed
    n_freq = n_freq or get_settings().sampling.validity_freqs
    hypothesis = HYPOTHESES["cnd_G"]

    points = space.sample(make_rng(seed, 0), n_points)
    gap, witness = _family_symmetry(G, points)
    if gap > 1e-10 * max(1.0, float(np.max(np.abs(G.raw(0, 0, points[0], points[0]))))):
        return CheckReport(check="cnd_G", passed=False, margin=-gap, seed=seed, witness=witness,
                           details={"stage": "symmetry", "hypothesis": hypothesis})

    def one(k: int) -> Tuple[np.ndarray, np.ndarray, CheckReport]:
        rng = make_rng(seed, 1, k)
        pts = space.sample(rng, n_points)
        u = rng.normal(size=G.q)
        report = negative_type_check(G.quadratic_form_matrix(pts, u), trials, int(rng.integers(2 ** 31)), block=G.p)
        return u, pts, report

    results = parallel_map(one, range(n_freq))
    u, pts, worst = _worst(results, lambda item: not item[2].passed, lambda item: item[2].margin)
    passed = all(r.passed for _, _, r in results)
    return CheckReport(
        check="cnd_G",
        passed=passed,
        margin=worst.margin,
        seed=seed,
        witness=None if passed else {"u": u, "points": pts, **worst.witness},
        details={"hypothesis": hypothesis, "n_points": n_points, "n_freq": n_freq, "p": G.p},
    )


def check_H_validity(
    H: VectorFieldFamily,
    space: Optional[PointSpace] = None,
    n_points: Optional[int] = None,
    n_freq: Optional[int] = None,
    seed: Optional[int] = None,
) -> CheckReport:
    """
    Sampling certificate that [exp(i H_{m,n}(x, x')ᵀu)] is positive definite.

    Anti-symmetry is checked first; a violation is reported without any
    spectral work.
    """
    space = space or H.space
    default_seed, n_points, _ = _sample_inputs(space, n_points)
    seed = default_seed if seed is None else seed
    n_freq = n_freq or get_settings().sampling.validity_freqs
    hypothesis = HYPOTHESES["exp_pd_H"]

    points = space.sample(make_rng(seed, 0), n_points)
    for i, x in enumerate(points):
        for j, w in enumerate(points):
            for m in range(H.p):
                for n in range(H.p):
                    forward = H.evaluate(m, n, x, w)
                    gap = float(np.max(np.abs(forward + H.evaluate(n, m, w, x))))
                    if gap > ANTISYMMETRY_TOLERANCE * max(1.0, float(np.max(np.abs(forward)))):
                        return CheckReport(
                            check="exp_pd_H", passed=False, margin=-gap, seed=seed,
                            witness={"m": m, "n": n, "x": x, "x_prime": w, "gap": gap},
                            details={"stage": "anti_symmetry", "hypothesis": hypothesis},
                        )

    def one(k: int) -> Tuple[np.ndarray, float, float]:
        rng = make_rng(seed, 1, k)
        pts = space.sample(rng, n_points)
        u = rng.normal(size=H.q)
        report = eig_sym(hermitian_embedding(H.exp_matrix(pts, u)))
        return u, report.min_eig + report.tolerance_used, report.min_eig

    results = parallel_map(one, range(n_freq))
    u, margin, min_eig = min(results, key=lambda item: item[1])
    passed = margin >= 0
    return CheckReport(
        check="exp_pd_H",
        passed=passed,
        margin=margin,
        seed=seed,
        witness=None if passed else {"u": u, "min_eig": min_eig},
        details={"hypothesis": hypothesis, "n_points": n_points, "n_freq": n_freq, "p": H.p},
    )


def sample_shell(rng: np.random.Generator, q: int, inner: float = 0.5, outer: float = 1.5) -> np.ndarray:
    """Random u with inner < ‖u‖ < outer."""
    direction = rng.normal(size=q)
    return direction / np.linalg.norm(direction) * rng.uniform(inner, outer)


def check_strictness_condition(
    G: MatrixFieldFamily,
    space: Optional[PointSpace] = None,
    n_points: Optional[int] = None,
    u_samples: Optional[int] = None,
    seed: Optional[int] = None,
) -> CheckReport:
    """
    uᵀ[G_{m,m}(y,y) + G_{n,n}(y',y') − 2G_{m,n}(y,y')]u < 0 for all sampled
    (m, y) ≠ (n, y') and u drawn from the shell 0.5 < ‖u‖ < 1.5.
    """
    space = space or G.space
    default_seed, n_points, _ = _sample_inputs(space, n_points)
    seed = default_seed if seed is None else seed
    u_samples = u_samples or get_settings().sampling.strictness_u_samples

    def one(k: int) -> Tuple[np.ndarray, np.ndarray, float, Optional[Dict[str, Any]], float]:
        rng = make_rng(seed, 2, k)
        pts = space.sample(rng, n_points)
        u = sample_shell(rng, G.q)
        form = G.quadratic_form_matrix(pts, u)
        margin, witness = strict_exp_condition_margin(form, block=G.p)
        return u, pts, margin, witness, STRICTNESS_TOLERANCE * max(1.0, float(np.max(np.abs(form))))

    results = parallel_map(one, range(u_samples))
    u, pts, margin, witness, _ = _worst(results, lambda item: item[2] <= item[4], lambda item: item[2])
    passed = all(r[2] > r[4] for r in results)
    return CheckReport(
        check="strictness",
        passed=passed,
        margin=float(margin),
        seed=seed,
        witness=None if passed else {"u": u, "points": pts, **(witness or {})},
        details={"hypothesis": HYPOTHESES["strictness"], "u_set": "0.5 < |u| < 1.5",
                 "n_points": n_points, "u_samples": u_samples},
    )


def check_scalar_cnd(
    g: ScalarCNDKernel,
    space: PointSpace,
    n_points: Optional[int] = None,
    seed: Optional[int] = None,
) -> CheckReport:
    """Symmetry, declared positivity and negative type of a scalar kernel on sampled points."""
    default_seed, n_points, trials = _sample_inputs(space, n_points)
    seed = default_seed if seed is None else seed
    rng = make_rng(seed, 3)
    points = space.sample(rng, n_points)
    values = point_major_matrix(lambda m, n, y, w: g(y, w), points, 1)

    asymmetry = float(np.max(np.abs(values - values.T)))
    if asymmetry > 1e-10 * max(1.0, float(np.max(np.abs(values)))):
        return CheckReport(check="cnd_scalar", passed=False, margin=-asymmetry, seed=seed,
                           details={"stage": "symmetry", "hypothesis": HYPOTHESES["cnd_scalar"]})
    if g.positive and np.min(values) <= 0:
        i, j = np.unravel_index(np.argmin(values), values.shape)
        return CheckReport(check="cnd_scalar", passed=False, margin=float(np.min(values)), seed=seed,
                           witness={"y": points[i], "y_prime": points[j]},
                           details={"stage": "positivity", "hypothesis": HYPOTHESES["cnd_scalar"]})

    report = negative_type_check(values, trials, int(rng.integers(2 ** 31)))
    report.check = "cnd_scalar"
    report.seed = seed
    report.details = {**report.details, "hypothesis": HYPOTHESES["cnd_scalar"]}
    if report.witness is not None:
        report.witness["points"] = points
    return report


def _atom_subset(mix: MixtureSpec, max_atoms: int) -> np.ndarray:
    count = len(mix.atoms)
    return np.unique(np.linspace(0, count - 1, min(count, max_atoms)).round().astype(int))


def check_mixture_psd(
    mix: MixtureSpec,
    space: Optional[PointSpace] = None,
    n_points: Optional[int] = None,
    seed: Optional[int] = None,
    max_atoms: int = 16,
) -> CheckReport:
    """[P^s_{m,n}] assembles PSD on sampled points for evenly spaced atoms s."""
    space = space or mix.space
    default_seed, n_points, _ = _sample_inputs(space, n_points)
    seed = default_seed if seed is None else seed
    points = space.sample(make_rng(seed, 4), n_points)

    def one(k: int) -> Tuple[float, float]:
        s = mix.atoms[k][0]
        report = eig_sym(SymMatrix.from_array(mix.gram(s, points)))
        return s, report.min_eig + report.tolerance_used

    results = parallel_map(one, _atom_subset(mix, max_atoms).tolist())
    s, margin = min(results, key=lambda item: item[1])
    passed = margin >= 0
    return CheckReport(
        check="mixture_psd",
        passed=passed,
        margin=margin,
        seed=seed,
        witness=None if passed else {"s": s, "points": points},
        details={"hypothesis": HYPOTHESES["mixture_psd"], "atoms_checked": len(results), "atoms": len(mix.atoms),
                 "flags": list(mix.flags)},
    )


def check_mixture_strictness(
    mix: MixtureSpec,
    points: Sequence[Any],
    route: str = "diagonal",
    max_atoms: int = 16,
) -> CheckReport:
    """
    Strictness routes for mixtures over a set of atoms of positive ρ-mass:
    "diagonal" needs P^s_{m,m}(z, z) > 0, "gram" needs [P^s] positive definite.
    Passes when at least one checked atom qualifies.
    """
    if route not in ("diagonal", "gram"):
        raise ParamError(f"unknown strictness route: {route!r}")
    points = np.asarray(points, dtype=float)
    qualifying: List[float] = []
    best = -np.inf
    for k in _atom_subset(mix, max_atoms).tolist():
        s = mix.atoms[k][0]
        gram = mix.gram(s, points)
        if route == "diagonal":
            score = float(np.min(np.diag(gram)))
            ok = score > 0
        else:
            report = eig_sym(SymMatrix.from_array(gram))
            score = report.min_eig
            ok = report.classification is Classification.PD
        best = max(best, score)
        if ok:
            qualifying.append(s)
    return CheckReport(
        check=f"mixture_strictness_{route}",
        passed=bool(qualifying),
        margin=float(best),
        details={"hypothesis": HYPOTHESES[f"mixture_strictness_{route}"], "qualifying_atoms": len(qualifying),
                 "route": route},
    )
