"""
Random kernel configurations for the acceptance suites.
Every builder draws from its own Philox stream, so a (seed, index) pair
always reproduces the same configuration.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from aitken_kernels.builders import (
    MatrixKernel,
    apply_det_power,
    build_cauchy_cross,
    build_gneiting_classic,
    build_gneiting_single,
    build_matern_cross,
    build_mixture_kernel,
    build_product_kernel,
    build_product_mixture_kernel,
    build_quadratic_kernel,
)
from aitken_kernels.domain.spaces import PointSpace
from aitken_kernels.families import (
    MatrixFieldFamily,
    MixtureSpec,
    ScalarCNDKernel,
    VectorFieldFamily,
    bernstein_of_sq_distance,
    linear_maps,
    make_G_scalar_diag,
    make_G_sphere,
    make_G_sum,
    make_H_difference,
    mixture_from_atoms,
    shifted_norm_maps,
    shifted_power_distance,
    shifted_sq_distance,
)
from aitken_kernels.runtime import make_rng
from aitken_kernels.scalar_cm import BernsteinFunction, CMFunction, bernstein_get, catalog_get
from aitken_kernels.verify import DEFAULT_PARAMS

G_RECIPES = ("sum", "scalar_diag", "sphere")
NON_CONSTANT = tuple(name for name in DEFAULT_PARAMS if name != "constant")


@dataclass(frozen=True)
class Configuration:
    kernel: MatrixKernel
    points: np.ndarray
    G: Optional[MatrixFieldFamily] = None
    H: Optional[VectorFieldFamily] = None
    phi: Optional[CMFunction] = None


def random_phi(rng: np.random.Generator, names=tuple(DEFAULT_PARAMS)) -> CMFunction:
    name = names[int(rng.integers(len(names)))]
    return catalog_get(name, DEFAULT_PARAMS[name])


def random_difference_H(rng: np.random.Generator, p: int, q: int, space: PointSpace) -> VectorFieldFamily:
    """h_m(x) = A_m x + b_m with Gaussian A_m, b_m."""
    matrices = [rng.normal(scale=0.7, size=(q, space.coord_dim)) for _ in range(p)]
    offsets = [rng.normal(size=q) for _ in range(p)]
    return make_H_difference(linear_maps(matrices, offsets), space)


def random_G(rng: np.random.Generator, p: int, q: int, recipe: str) -> MatrixFieldFamily:
    if recipe == "sphere":
        return make_G_sphere(p, q, d=2)
    space = PointSpace.euclidean(int(rng.integers(1, 4)))
    if recipe == "sum":
        return make_G_sum(shifted_norm_maps(rng.uniform(0.5, 2.0, size=p), q), q, space)
    return make_G_scalar_diag(shifted_sq_distance(float(rng.uniform(0.5, 2.0))), q, p, space)


def random_configuration(seed: int, index: int) -> Configuration:
    """p, q ≤ 3 and 2 ≤ N ≤ 8 over the sum, scalar_diag and sphere recipes."""
    rng = make_rng(seed, index)
    p, q = int(rng.integers(1, 4)), int(rng.integers(1, 4))
    G = random_G(rng, p, q, G_RECIPES[index % len(G_RECIPES)])
    H = random_difference_H(rng, p, q, G.space)
    phi = random_phi(rng)
    kernel = build_quadratic_kernel(phi, G, H, seed=seed)
    points = G.space.sample(rng, int(rng.integers(2, 9)))
    return Configuration(kernel, points, G, H, phi)


def sphere_strict_configuration(seed: int, index: int) -> Configuration:
    """Single-component sphere family with a non-constant φ; its Gram matrices are PD."""
    rng = make_rng(seed, index)
    q = int(rng.integers(1, 4))
    G = make_G_sphere(1, q, d=2)
    H = random_difference_H(rng, 1, q, G.space)
    phi = random_phi(rng, NON_CONSTANT)
    kernel = build_quadratic_kernel(phi, G, H, seed=seed)
    points = G.space.sample(rng, int(rng.integers(2, 7)))
    return Configuration(kernel, points, G, H, phi)


def negative_type_matrix(rng: np.random.Generator, n: int, duplicate: bool = False) -> np.ndarray:
    """
    A_ij = ‖x_i − x_j‖² + a_i + a_j for random x_i ∈ R³, a_i ∈ [0, 1).

    With `duplicate`, the last point repeats the first, which puts the
    pair (0, n−1) on the equality boundary A_00 + A_jj = 2 A_0j.
    """
    x = rng.normal(scale=1.5, size=(n, 3))
    a = rng.uniform(0.0, 1.0, size=n)
    if duplicate:
        x[-1] = x[0]
        a[-1] = a[0]
    sq = np.sum((x[:, None, :] - x[None, :, :]) ** 2, axis=-1)
    return sq + a[:, None] + a[None, :]


BUILDERS = (
    "mixture",
    "product",
    "product_mixture",
    "gneiting_single",
    "gneiting_classic",
    "matern_cross",
    "cauchy_cross",
    "det_power",
)


def random_psd(rng: np.random.Generator, p: int) -> np.ndarray:
    """B Bᵀ with a Gaussian B of random rank 1..p."""
    b = rng.normal(size=(p, int(rng.integers(1, p + 1))))
    return b @ b.T


def random_mixture(rng: np.random.Generator, p: int, space: PointSpace) -> MixtureSpec:
    """
    One to four atoms; P^s_{m,n}(z, z') = C_s[m, n]·exp(−s‖z − z'‖²/2) with a
    random PSD C_s per atom.
    """
    locations = rng.uniform(0.2, 3.0, size=int(rng.integers(1, 5)))
    weights = rng.uniform(0.1, 2.0, size=locations.size)
    coefficients = {float(s): random_psd(rng, p) for s in locations}

    def P(m, n, s, z, w):
        return coefficients[s][m, n] * float(np.exp(-0.5 * s * np.sum((np.asarray(z) - np.asarray(w)) ** 2)))

    return mixture_from_atoms(list(zip(locations, weights)), P, p, space)


def random_scalar_cnd(rng: np.random.Generator) -> ScalarCNDKernel:
    """Positive scalar kernels of negative type on euclidean spaces."""
    kind = int(rng.integers(3))
    if kind == 0:
        return shifted_sq_distance(float(rng.uniform(0.5, 2.0)))
    if kind == 1:
        return shifted_power_distance(float(rng.uniform(0.5, 2.0)), float(rng.uniform(0.3, 2.0)))
    return bernstein_of_sq_distance(random_bernstein(rng))


def random_bernstein(rng: np.random.Generator) -> BernsteinFunction:
    kind = int(rng.integers(3))
    if kind == 0:
        return bernstein_get("affine", {"a": float(rng.uniform(0.5, 2.0)), "b": float(rng.uniform(0.0, 2.0))})
    if kind == 1:
        return bernstein_get("power", {
            "a": float(rng.uniform(0.5, 2.0)),
            "alpha": float(rng.uniform(0.2, 1.0)),
            "beta": float(rng.uniform(0.2, 1.0)),
        })
    return bernstein_get("log", {"b": float(rng.uniform(0.0, 2.0))})


def builder_configuration(builder: str, seed: int, index: int) -> Configuration:
    """
    A certified kernel from `builder` with 1 ≤ p, q ≤ 3 and 2 ≤ N ≤ 8 points
    drawn from its domain. G families cycle through the sum, scalar_diag and
    sphere recipes; product constructions put H on a random euclidean X.
    """
    rng = make_rng(seed, BUILDERS.index(builder) + 1, index)
    n_points = int(rng.integers(2, 9))

    if builder == "gneiting_classic":
        q_s, d = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        r = max(q_s, d) / 2.0 + float(rng.uniform(0.0, 1.0))
        phi = random_phi(rng)
        kernel = build_gneiting_classic(phi, random_bernstein(rng), r, q_s, d)
        return Configuration(kernel, kernel.domain.sample(rng, n_points), phi=phi)

    p, q = int(rng.integers(1, 4)), int(rng.integers(1, 4))
    if builder == "gneiting_single":
        space = PointSpace.euclidean(int(rng.integers(1, 4)))
        H = random_difference_H(rng, p, q, space)
        phi = random_phi(rng)
        kernel = build_gneiting_single(phi, random_scalar_cnd(rng), H, q, seed=seed)
        return Configuration(kernel, space.sample(rng, n_points), H=H, phi=phi)

    G = random_G(rng, p, q, G_RECIPES[index % len(G_RECIPES)])
    if builder in ("mixture", "det_power"):
        H = random_difference_H(rng, p, q, G.space)
    else:
        H = random_difference_H(rng, p, q, PointSpace.euclidean(int(rng.integers(1, 4))))
    phi = random_phi(rng)

    if builder == "mixture":
        kernel = build_mixture_kernel(phi, G, H, random_mixture(rng, p, G.space), seed=seed)
    elif builder == "det_power":
        kernel = apply_det_power(phi, G, H, int(rng.integers(2, 5)), seed=seed)
    elif builder == "product":
        kernel = build_product_kernel(phi, G, H, seed=seed)
    elif builder == "product_mixture":
        domain = PointSpace.product(H.space, G.space)
        kernel = build_product_mixture_kernel(phi, G, H, random_mixture(rng, p, domain), seed=seed)
    elif builder == "matern_cross":
        v = rng.uniform(0.5, 2.5, size=p)
        r = np.full((p, p), float(rng.uniform(0.5, 3.0)))
        kernel = build_matern_cross(G, H, v, r, seed=seed)
        phi = None
    else:
        v = rng.uniform(0.6, 2.0, size=p)
        kernel = build_cauchy_cross(G, H, float(rng.uniform(0.5, 2.0)), float(rng.uniform(0.3, 1.0)), v, seed=seed)
        phi = None
    return Configuration(kernel, kernel.domain.sample(rng, n_points), G, H, phi)
