"""Mirrored feature pairs.

For feature j with column x, a gaussian perturbation z is drawn and the
pair (x + c z, x - c z) replaces x, with c chosen so that the two halves
are as conditionally independent as possible given the remaining columns.
Under the null the two halves then carry exchangeable information about
the response, which is what the downstream sign-symmetry argument needs.

Each feature's z comes from a stream keyed by the column *name*, so a
single base seed reproduces any individual mirror without generating the
others, and permuting columns permutes the mirrors with them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .errors import ConfigurationError, MirrorSelectError
from .kernelmeasure import (
    CMinimizationResult,
    KernelSpec,
    SearchConfig,
    _closed_form_from_coefficients,
    minimize_c,
)
from .rng import RngSeed


@dataclass(frozen=True)
class MirrorPair:
    """One mirrored feature: the perturbation, its scale, and the pair."""

    feature_index: int
    name: str
    z: np.ndarray
    c: float
    x_plus: np.ndarray
    x_minus: np.ndarray

    @property
    def n(self) -> int:
        return self.z.shape[0]


def _draw_z(rng: RngSeed, name: str, n: int) -> np.ndarray:
    return rng.named_child(name).generator().standard_normal(n)


def _exact_complement(total: np.ndarray, part: np.ndarray) -> np.ndarray:
    """Float vector rest with part + rest == total bitwise where possible.

    total - part rounds, so the naive complement can miss by an ulp.  A
    few one-ulp nudges repair every entry whose magnitudes allow an
    exact complement; entries where no float works stay within one ulp.
    """
    rest = total - part
    bad = (part + rest) != total
    up = rest
    down = rest
    for _ in range(3):
        if not bad.any():
            break
        up = np.nextafter(up, np.inf)
        down = np.nextafter(down, -np.inf)
        for candidate in (up, down):
            fix = bad & ((part + candidate) == total)
            rest = np.where(fix, candidate, rest)
            bad &= ~fix
    return rest


def _pair_from_result(
    dataset: Dataset, j: int, z: np.ndarray, result: CMinimizationResult
) -> MirrorPair:
    x = dataset.x[:, j]
    x_plus = x + result.c_star * z
    x_minus = _exact_complement(2.0 * x, x_plus)
    return MirrorPair(
        feature_index=j,
        name=dataset.names[j],
        z=z,
        c=result.c_star,
        x_plus=x_plus,
        x_minus=x_minus,
    )


def make_mirror(
    dataset: Dataset,
    feature_index: int,
    spec: KernelSpec = KernelSpec("linear"),
    rng: RngSeed = RngSeed(0),
    search: SearchConfig = SearchConfig(),
) -> MirrorPair:
    """Mirror a single feature against the remaining columns."""
    if not 0 <= feature_index < dataset.p:
        raise ConfigurationError(
            f"feature index {feature_index} out of range for p={dataset.p}"
        )
    if dataset.n < 3:
        raise ConfigurationError(f"mirroring needs n >= 3 rows, got {dataset.n}")
    j = int(feature_index)
    z = _draw_z(rng, dataset.names[j], dataset.n)
    w = np.delete(dataset.x, j, axis=1)
    result = minimize_c(dataset.x[:, j], z, w, spec, search)
    return _pair_from_result(dataset, j, z, result)


def _linear_fast_results(
    dataset: Dataset, zs: list[np.ndarray]
) -> list[CMinimizationResult]:
    """Closed-form scales for every feature in O(n^2) each.

    Uses the full Gram matrix G = X X' once; the conditioning block for
    feature j then acts as G - x_j x_j', so no per-feature (n, p-1)
    matrix is ever formed.
    """
    x_all = dataset.x
    n = dataset.n
    gram = x_all @ x_all.T
    gram_abs = np.abs(gram)
    out = []
    for j in range(dataset.p):
        x_raw = x_all[:, j]
        xc = x_raw - x_raw.mean()
        zc = zs[j] - zs[j].mean()
        x2 = xc * xc
        z2 = zc * zc
        g_x2 = gram @ x2
        g_z2 = gram @ z2
        xj_x2 = float(x_raw @ x2)
        xj_z2 = float(x_raw @ z2)
        alpha = float(x2 @ g_x2) - xj_x2 * xj_x2
        beta = float(x2 @ g_z2) - xj_x2 * xj_z2
        gamma = float(z2 @ g_z2) - xj_z2 * xj_z2
        # Upper bound on the cancellation-free magnitude of gamma.
        denom_scale = float(z2 @ (gram_abs @ z2)) + float(np.abs(x_raw) @ z2) ** 2
        try:
            out.append(
                _closed_form_from_coefficients(alpha, beta, gamma, denom_scale, n)
            )
        except MirrorSelectError as err:
            raise type(err)(
                f"feature {j} ({dataset.names[j]}): {err}"
            ) from err
    return out


def make_all_mirrors(
    dataset: Dataset,
    spec: KernelSpec = KernelSpec("linear"),
    rng: RngSeed = RngSeed(0),
    search: SearchConfig = SearchConfig(),
) -> list[MirrorPair]:
    """Mirror every feature of the dataset.

    Linear kernels with p >= 2 take a shared-Gram path whose total cost
    grows linearly in p (times n^2); other kernels run the scalar search
    feature by feature.  Output order follows column order, and entry j
    equals ``make_mirror(dataset, j, ...)`` with the same arguments up to
    floating point summation order in the linear fast path.
    """
    if dataset.n < 3:
        raise ConfigurationError(f"mirroring needs n >= 3 rows, got {dataset.n}")
    zs = [_draw_z(rng, name, dataset.n) for name in dataset.names]
    pairs = []
    if spec.family == "linear" and dataset.p >= 2:
        for j, result in enumerate(_linear_fast_results(dataset, zs)):
            pairs.append(_pair_from_result(dataset, j, zs[j], result))
        return pairs
    for j in range(dataset.p):
        w = np.delete(dataset.x, j, axis=1)
        try:
            result = minimize_c(dataset.x[:, j], zs[j], w, spec, search)
        except MirrorSelectError as err:
            raise type(err)(
                f"feature {j} ({dataset.names[j]}): {err}"
            ) from err
        pairs.append(_pair_from_result(dataset, j, zs[j], result))
    return pairs
