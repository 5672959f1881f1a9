"""Kernel machinery: Gram matrices, double centering, a conditional
dependence measure, and minimization of the mirror perturbation scale.

The measure for three blocks U, V, W with Gram matrices K_U, K_V, K_W is

    dep(U, V | W) = (1/n**2) * sum_ij [H K_U H]_ij * [H K_V H]_ij * [K_W]_ij

where H = I - (1/n) 11' is the centering projection.  Only K_U and K_V
are centered; K_W enters raw.  The mirror construction picks, for a
feature x with perturbation z and remaining columns W, the scale c that
minimizes the squared measure between u = x + c z and v = x - c z given
W.  For linear kernels that minimizer has a closed form; for other
kernels a bracketed golden-section search is used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConfigurationError,
    DegeneratePerturbationError,
    InvalidDataError,
    NumericalError,
)

_FAMILIES = ("linear", "gaussian", "polynomial")

# Relative floor below which the quartic denominator counts as zero.
_DENOM_REL_TOL = 1e-12


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus its parameters.

    ``bandwidth`` applies to the gaussian family; ``None`` means "resolve
    by the median pairwise distance heuristic at evaluation time".
    ``degree`` and ``offset`` apply to the polynomial family.
    """

    family: str = "gaussian"
    bandwidth: float | None = None
    degree: int = 2
    offset: float = 1.0

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ConfigurationError(
                f"unknown kernel family {self.family!r}; expected one of {_FAMILIES}"
            )
        if self.bandwidth is not None:
            bw = float(self.bandwidth)
            if not math.isfinite(bw) or bw <= 0:
                raise ConfigurationError(
                    f"bandwidth must be positive and finite, got {self.bandwidth}"
                )
            object.__setattr__(self, "bandwidth", bw)
        if not isinstance(self.degree, int) or self.degree < 1:
            raise ConfigurationError(
                f"polynomial degree must be an integer >= 1, got {self.degree}"
            )
        if not math.isfinite(float(self.offset)):
            raise ConfigurationError("polynomial offset must be finite")

    def with_bandwidth(self, bandwidth: float) -> "KernelSpec":
        return KernelSpec(self.family, bandwidth, self.degree, self.offset)


def _as_block(data) -> np.ndarray:
    block = np.asarray(data, dtype=float)
    if block.ndim == 1:
        block = block[:, None]
    if block.ndim != 2:
        raise InvalidDataError(f"kernel input must be 1-d or 2-d, got {block.ndim}-d")
    if block.shape[0] < 1:
        raise InvalidDataError("kernel input must have at least one row")
    if not np.all(np.isfinite(block)):
        raise InvalidDataError("kernel input contains non-finite values")
    return block


def _pairwise_sq_dists(block: np.ndarray) -> np.ndarray:
    sq = np.einsum("ij,ij->i", block, block)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (block @ block.T)
    return np.maximum(d2, 0.0)


def median_heuristic_bandwidth(data) -> float:
    """Median of the nonzero pairwise distances between rows; 1.0 when all
    rows coincide (so the resulting bandwidth is always usable)."""
    block = _as_block(data)
    d2 = _pairwise_sq_dists(block)
    iu = np.triu_indices(block.shape[0], k=1)
    dists = np.sqrt(d2[iu])
    dists = dists[dists > 0]
    if dists.size == 0:
        return 1.0
    return float(np.median(dists))


def gram_matrix(data, spec: KernelSpec) -> np.ndarray:
    """Gram matrix of the rows of ``data`` under ``spec``.

    A 1-d input is treated as a single column.  The result is exactly
    symmetric (it is symmetrized against floating point asymmetry).
    """
    block = _as_block(data)
    if block.shape[1] == 0:
        raise InvalidDataError("kernel input must have at least one column")
    if spec.family == "linear":
        k = block @ block.T
    elif spec.family == "gaussian":
        bw = spec.bandwidth
        if bw is None:
            bw = median_heuristic_bandwidth(block)
        k = np.exp(_pairwise_sq_dists(block) / (-2.0 * bw * bw))
    else:
        k = (block @ block.T + spec.offset) ** spec.degree
    return (k + k.T) / 2.0


def _check_square_symmetric(k: np.ndarray, label: str) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    if k.ndim != 2 or k.shape[0] != k.shape[1]:
        raise InvalidDataError(f"{label} must be square, got shape {k.shape}")
    if not np.all(np.isfinite(k)):
        raise InvalidDataError(f"{label} contains non-finite values")
    scale = np.abs(k).max() if k.size else 0.0
    if not np.allclose(k, k.T, atol=1e-8 * max(scale, 1.0), rtol=0.0):
        raise InvalidDataError(f"{label} is not symmetric")
    return k


def center_gram(k) -> np.ndarray:
    """Double centering H K H without forming H explicitly."""
    k = _check_square_symmetric(k, "gram matrix")
    row = k.mean(axis=0, keepdims=True)
    col = k.mean(axis=1, keepdims=True)
    grand = k.mean()
    out = k - row - col + grand
    return (out + out.T) / 2.0


@dataclass(frozen=True)
class GramTriple:
    """The three Gram matrices entering the dependence measure.

    Symmetry and shape agreement are validated here.  Positive
    semidefiniteness (up to roundoff) is the producer's contract: any
    valid kernel yields it, and checking eigenvalues on every
    construction would dominate the cost of the measure itself.
    """

    k_u: np.ndarray
    k_v: np.ndarray
    k_w: np.ndarray

    def __post_init__(self):
        k_u = _check_square_symmetric(self.k_u, "k_u")
        k_v = _check_square_symmetric(self.k_v, "k_v")
        k_w = _check_square_symmetric(self.k_w, "k_w")
        if not (k_u.shape == k_v.shape == k_w.shape):
            raise InvalidDataError(
                f"gram matrices disagree in shape: {k_u.shape}, {k_v.shape}, {k_w.shape}"
            )
        object.__setattr__(self, "k_u", k_u)
        object.__setattr__(self, "k_v", k_v)
        object.__setattr__(self, "k_w", k_w)

    @classmethod
    def from_data(cls, u, v, w, spec: KernelSpec, w_spec: KernelSpec | None = None) -> "GramTriple":
        """Build the triple from raw blocks.  ``w`` may have zero columns,
        in which case K_W is the all-ones matrix (conditioning on nothing)."""
        k_u = gram_matrix(u, spec)
        k_v = gram_matrix(v, spec)
        w_block = np.asarray(w, dtype=float)
        if w_block.ndim == 1:
            w_block = w_block[:, None]
        if w_block.shape[1] == 0:
            k_w = np.ones((k_u.shape[0], k_u.shape[0]))
        else:
            k_w = gram_matrix(w_block, w_spec if w_spec is not None else spec)
        return cls(k_u, k_v, k_w)

    @property
    def n(self) -> int:
        return self.k_u.shape[0]


def conditional_dependence(grams: GramTriple) -> float:
    """Nonnegative scalar dependence between U and V given W.

    Zero (up to floating point) when U or V is constant across rows, and
    invariant to any simultaneous permutation of the rows of all three
    blocks.
    """
    n = grams.n
    ku_c = center_gram(grams.k_u)
    kv_c = center_gram(grams.k_v)
    value = float(np.einsum("ij,ij,ij->", ku_c, kv_c, grams.k_w)) / (n * n)
    scale = max(
        1.0,
        float(np.abs(ku_c).max() * np.abs(kv_c).max() * np.abs(grams.k_w).max()),
    )
    if not math.isfinite(value):
        raise NumericalError("dependence measure is non-finite")
    if value < -1e-9 * scale:
        raise NumericalError(
            f"dependence measure is negative beyond tolerance: {value}"
        )
    return max(value, 0.0)


@dataclass(frozen=True)
class CMinimizationResult:
    """Outcome of a perturbation-scale optimization.

    ``objective_at_c_star`` is the squared dependence measure at the
    returned scale, identical in meaning for both methods.
    """

    c_star: float
    objective_at_c_star: float
    method: str
    evaluations: int


@dataclass(frozen=True)
class SearchConfig:
    """Controls the scalar search used for non-linear kernels.

    The search interval is [0, c_max_factor * ||x|| / ||z||]; a coarse
    grid of ``bracket_points`` locates the basin, then golden-section
    refines to absolute tolerance tol_factor * c_max.
    """

    c_max_factor: float = 10.0
    tol_factor: float = 1e-6
    bracket_points: int = 48

    def __post_init__(self):
        if not self.c_max_factor > 0:
            raise ConfigurationError("c_max_factor must be positive")
        if not 0 < self.tol_factor < 1:
            raise ConfigurationError("tol_factor must lie in (0, 1)")
        if self.bracket_points < 3:
            raise ConfigurationError("bracket_points must be at least 3")


def _column(data, label: str) -> np.ndarray:
    v = np.asarray(data, dtype=float).reshape(-1)
    if not np.all(np.isfinite(v)):
        raise InvalidDataError(f"{label} contains non-finite values")
    return v


def _conditioning_block(w, n: int) -> np.ndarray:
    if w is None:
        return np.empty((n, 0))
    block = np.asarray(w, dtype=float)
    if block.ndim == 1:
        block = block[:, None]
    if block.shape[0] != n:
        raise InvalidDataError(
            f"conditioning block has {block.shape[0]} rows, expected {n}"
        )
    if not np.all(np.isfinite(block)):
        raise InvalidDataError("conditioning block contains non-finite values")
    return block


def _quartic_coefficients(x: np.ndarray, z: np.ndarray, w: np.ndarray):
    """Coefficients (alpha, beta, gamma) of the linear-kernel objective

        G(c) = alpha - 2 beta c**2 + gamma c**4,

    where G(c) = n**2 * dep(x + c z, x - c z | w) for already-centered x
    and z.  Also returns the scale used for the degeneracy check."""
    x2 = x * x
    z2 = z * z
    if w.shape[1] == 0:
        # Conditioning on nothing: K_W is all ones, so quadratic forms
        # collapse to products of sums.  z2 >= 0, so gamma is free of
        # cancellation and is its own magnitude reference.
        sx, sz = x2.sum(), z2.sum()
        alpha = sx * sx
        beta = sx * sz
        gamma = sz * sz
        denom_scale = gamma
    else:
        wt_x2 = w.T @ x2
        wt_z2 = w.T @ z2
        alpha = float(wt_x2 @ wt_x2)
        beta = float(wt_x2 @ wt_z2)
        gamma = float(wt_z2 @ wt_z2)
        # Cancellation-free magnitude of gamma: if gamma is tiny against
        # this, the denominator is zero up to rounding.
        ref = np.abs(w).T @ z2
        denom_scale = float(ref @ ref)
    return float(alpha), float(beta), float(gamma), float(denom_scale)


def _closed_form_from_coefficients(alpha, beta, gamma, denom_scale, n):
    if not all(map(math.isfinite, (alpha, beta, gamma))):
        raise NumericalError("quartic coefficients are non-finite")
    if gamma <= _DENOM_REL_TOL * max(denom_scale, 1e-300):
        raise DegeneratePerturbationError(
            "perturbation-scale denominator vanishes; the perturbation is "
            "invisible to the conditioning block"
        )
    c_sq = max(beta, 0.0) / gamma
    c = math.sqrt(c_sq)
    value = alpha - 2.0 * beta * c_sq + gamma * c_sq * c_sq
    measure = max(value, 0.0) / (n * n)
    return CMinimizationResult(c, measure * measure, "closed_form", 0)


def closed_form_c_linear(x, z, w=None, center: bool = True) -> CMinimizationResult:
    """Exact minimizer of the linear-kernel objective over c >= 0.

    ``x`` and ``z`` are single columns, ``w`` the remaining columns (may
    be None or have zero columns).  With ``center=True`` (the default) x
    and z are mean-centered first, which matches what the dependence
    measure's centering does to linear Gram matrices; pass False when the
    inputs are already centered.

    The objective is an even quartic a - 2 b c**2 + g c**4; its minimizer
    is sqrt(b/g) when b > 0 and 0 otherwise.  A vanishing denominator g
    means z is perturbing in directions the conditioning block cannot
    see, and raises DegeneratePerturbationError.
    """
    x = _column(x, "x")
    z = _column(z, "z")
    if x.shape != z.shape:
        raise InvalidDataError(
            f"x and z disagree in length: {x.shape[0]} vs {z.shape[0]}"
        )
    n = x.shape[0]
    w_block = _conditioning_block(w, n)
    if center:
        x = x - x.mean()
        z = z - z.mean()
    alpha, beta, gamma, denom_scale = _quartic_coefficients(x, z, w_block)
    return _closed_form_from_coefficients(alpha, beta, gamma, denom_scale, n)


def _golden_section(f, a: float, b: float, tol: float):
    """Golden-section minimization on [a, b]; returns (x, evaluations)."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    inv_phi_sq = (3.0 - math.sqrt(5.0)) / 2.0
    h = b - a
    if h <= tol:
        return (a + b) / 2.0, 0
    steps = int(math.ceil(math.log(tol / h) / math.log(inv_phi)))
    c = a + inv_phi_sq * h
    d = a + inv_phi * h
    yc = f(c)
    yd = f(d)
    evals = 2
    for _ in range(steps - 1):
        if yc < yd:
            b, d, yd = d, c, yc
            h *= inv_phi
            c = a + inv_phi_sq * h
            yc = f(c)
        else:
            a, c, yc = c, d, yd
            h *= inv_phi
            d = a + inv_phi * h
            yd = f(d)
        evals += 1
    return (a + d) / 2.0 if yc < yd else (c + b) / 2.0, evals


def minimize_c(
    x,
    z,
    w=None,
    spec: KernelSpec = KernelSpec("linear"),
    search: SearchConfig = SearchConfig(),
) -> CMinimizationResult:
    """Scale c minimizing dep(x + c z, x - c z | w) over c >= 0.

    Linear kernels dispatch to the closed form.  Other kernels use a
    coarse grid to bracket the best basin on [0, c_max] followed by
    golden-section refinement; gaussian bandwidths left unset in ``spec``
    are resolved once from x (for both mirrored blocks) and once from w,
    then held fixed across all evaluations so the objective is a fixed
    function of c.
    """
    x = _column(x, "x")
    z = _column(z, "z")
    if x.shape != z.shape:
        raise InvalidDataError(
            f"x and z disagree in length: {x.shape[0]} vs {z.shape[0]}"
        )
    n = x.shape[0]
    w_block = _conditioning_block(w, n)

    z_norm = float(np.linalg.norm(z))
    if z_norm == 0.0:
        raise DegeneratePerturbationError("perturbation z is identically zero")

    if spec.family == "linear":
        return closed_form_c_linear(x, z, w_block, center=True)

    uv_spec = spec
    if spec.family == "gaussian" and spec.bandwidth is None:
        uv_spec = spec.with_bandwidth(median_heuristic_bandwidth(x))
    if w_block.shape[1] == 0:
        k_w = np.ones((n, n))
    else:
        w_spec = spec
        if spec.family == "gaussian" and spec.bandwidth is None:
            w_spec = spec.with_bandwidth(median_heuristic_bandwidth(w_block))
        k_w = gram_matrix(w_block, w_spec)

    evals = 0

    def objective(c: float) -> float:
        nonlocal evals
        evals += 1
        k_u = gram_matrix(x + c * z, uv_spec)
        k_v = gram_matrix(x - c * z, uv_spec)
        value = conditional_dependence(GramTriple(k_u, k_v, k_w))
        return value * value

    c_max = search.c_max_factor * float(np.linalg.norm(x)) / z_norm
    if c_max == 0.0:
        return CMinimizationResult(0.0, objective(0.0), "scalar_search", evals)

    grid = np.linspace(0.0, c_max, search.bracket_points)
    values = [objective(c) for c in grid]
    best = int(np.argmin(values))
    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, len(grid) - 1)]
    c_star, _ = _golden_section(objective, lo, hi, search.tol_factor * c_max)
    result_value = objective(c_star)
    if not math.isfinite(result_value):
        raise NumericalError(f"objective is non-finite at c={c_star}")
    return CMinimizationResult(float(c_star), result_value, "scalar_search", evals)
