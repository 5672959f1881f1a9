"""Mirror statistics, the data-adaptive threshold, feature screening and
the two end-to-end selection pipelines.

The per-feature statistic is

    M_j = |L_j+ + L_j-| - |L_j+ - L_j-|

where L_j+/- are the importances of the two mirrored halves.  M_j is
large and positive only when both halves matter with the same sign; null
features get a sign-symmetric M_j.  That symmetry turns the running tally

    FDP(t) = #{j: M_j <= -t} / max(#{j: M_j >= t}, 1)

into a conservative estimate of the false discovery proportion among
{M_j >= t}, and the selection threshold is the smallest candidate t with
FDP(t) <= q.

Two pipelines are provided: one network over all mirrored pairs at once
(joint), and one small network per feature with only that feature
mirrored (individual).  Optional screening first drops weak features
using a network trained on a held-out third of the rows.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np

from .dataset import Dataset
from .errors import ConfigurationError, InvalidDataError, TrainingError
from .kernelmeasure import KernelSpec, SearchConfig
from .mirror import MirrorPair, make_all_mirrors
from .neuralnet import NetConfig, path_importance, train
from .rng import RngSeed

_STREAM_SCREEN = 1
_STREAM_MIRROR = 2
_STREAM_TRAIN = 3

# An individual-net run aborts when more than this fraction of features
# fail to train.
_MAX_FAILURE_FRACTION = 0.1


def mirror_statistic(l_plus: float, l_minus: float) -> float:
    """Signed evidence that both halves of a mirrored pair matter."""
    lp = float(l_plus)
    lm = float(l_minus)
    if not (np.isfinite(lp) and np.isfinite(lm)):
        raise InvalidDataError("importances must be finite")
    return abs(lp + lm) - abs(lp - lm)


def estimate_fdp(m, t: float) -> float:
    """Running false-discovery tally at threshold ``t`` (> 0)."""
    t = float(t)
    if not t > 0:
        raise ConfigurationError(f"threshold must be positive, got {t}")
    m = np.asarray(m, dtype=float)
    numerator = int(np.sum(m <= -t))
    denominator = max(int(np.sum(m >= t)), 1)
    return numerator / denominator


def threshold_candidates(m) -> np.ndarray:
    """Ascending unique magnitudes of the nonzero statistics."""
    m = np.asarray(m, dtype=float)
    return np.unique(np.abs(m[m != 0.0]))


def adaptive_threshold(m, q: float) -> float | None:
    """Smallest candidate threshold with estimated FDP at most ``q``.

    Returns None when no candidate qualifies (nothing is selected).
    """
    q = float(q)
    if not 0.0 < q < 1.0:
        raise ConfigurationError(f"q must lie in (0, 1), got {q}")
    for t in threshold_candidates(m):
        if estimate_fdp(m, t) <= q:
            return float(t)
    return None


def fdp_curve(m) -> tuple[tuple[float, float], ...]:
    """(threshold, estimated FDP) at every candidate threshold."""
    return tuple((float(t), estimate_fdp(m, t)) for t in threshold_candidates(m))


@dataclass(frozen=True)
class MirrorStats:
    """Full-length statistic vectors (zeros for features never scored)."""

    m: np.ndarray
    importance_plus: np.ndarray
    importance_minus: np.ndarray


@dataclass(frozen=True)
class ScreenResult:
    """Outcome of the pre-selection screening stage."""

    kept: tuple[int, ...]
    importances: np.ndarray
    split_rows: np.ndarray


@dataclass(frozen=True)
class ScreenOptions:
    """How to screen: how many features survive and, optionally, a
    different network configuration for the screening net."""

    m_keep: int | None = None
    net: NetConfig | None = None

    def __post_init__(self):
        if self.m_keep is not None and self.m_keep < 1:
            raise ConfigurationError(f"m_keep must be positive, got {self.m_keep}")


@dataclass(frozen=True)
class SelectionResult:
    """Everything a selection run produced."""

    method: str
    q: float
    threshold: float | None
    selected: frozenset[int]
    stats: MirrorStats
    c_values: np.ndarray
    names: tuple[str, ...]
    constant: np.ndarray
    screened_out: np.ndarray
    failed: tuple[int, ...]
    curve: tuple[tuple[float, float], ...]
    seed: RngSeed
    screen: ScreenResult | None
    elapsed_s: float

    def to_json_dict(self) -> dict:
        features = []
        for j, name in enumerate(self.names):
            features.append(
                {
                    "index": j,
                    "name": name,
                    "m": float(self.stats.m[j]),
                    "l_plus": float(self.stats.importance_plus[j]),
                    "l_minus": float(self.stats.importance_minus[j]),
                    "c": float(self.c_values[j]),
                    "selected": j in self.selected,
                    "constant": bool(self.constant[j]),
                    "screened_out": bool(self.screened_out[j]),
                    "failed": j in set(self.failed),
                }
            )
        return {
            "schema": "mirrorselect/selection/v1",
            "method": self.method,
            "q": self.q,
            "seed": {"seed": self.seed.seed, "stream": self.seed.stream},
            "threshold": self.threshold,
            "n_selected": len(self.selected),
            "selected": sorted(self.selected),
            "selected_names": [self.names[j] for j in sorted(self.selected)],
            "features": features,
            "fdp_curve": [[t, f] for t, f in self.curve],
            "timing": {"total_s": self.elapsed_s},
        }


def default_m_keep(n: int, p: int) -> int:
    """How many features screening keeps by default."""
    return max(1, min(n // 2, p))


def screen(
    dataset: Dataset,
    config: NetConfig = NetConfig(),
    m_keep: int | None = None,
    rng: RngSeed = RngSeed(0),
) -> ScreenResult:
    """Rank features with a network fit on a random third of the rows and
    keep the ``m_keep`` largest path importances (by magnitude).

    The split rows must not be reused downstream; callers fit the
    selection stage on the complement.
    """
    n, p = dataset.n, dataset.p
    if n < 6:
        raise InvalidDataError(f"screening needs at least 6 rows, got {n}")
    if m_keep is None:
        m_keep = default_m_keep(n, p)
    if not 1 <= m_keep <= p:
        raise ConfigurationError(
            f"m_keep must lie in [1, {p}], got {m_keep}"
        )
    n_split = n // 3
    split_rows = np.sort(
        rng.child(0).generator().choice(n, size=n_split, replace=False)
    )
    sub = dataset.take_rows(split_rows)
    net_config = replace(
        config,
        seed=rng.child(1),
        batch_size=min(config.batch_size, sub.n),
    )
    net = train(sub.x, sub.y, net_config)
    importances = path_importance(net).values
    order = np.argsort(-np.abs(importances), kind="stable")
    kept = tuple(sorted(int(j) for j in order[:m_keep]))
    return ScreenResult(kept, importances, split_rows)


def _interleave_pairs(mirrors: list[MirrorPair]) -> tuple[np.ndarray, list]:
    cols = []
    paired = []
    for i, pair in enumerate(mirrors):
        cols.append(pair.x_plus)
        cols.append(pair.x_minus)
        paired.append((2 * i, 2 * i + 1))
    return np.column_stack(cols), paired


def _prepare(dataset, q, screen_opts, net, rng):
    if not isinstance(dataset, Dataset):
        raise InvalidDataError("expected a Dataset")
    if not 0.0 < float(q) < 1.0:
        raise ConfigurationError(f"q must lie in (0, 1), got {q}")
    ds = dataset.standardized()
    constant = dataset.constant_columns()
    active = [j for j in range(ds.p) if not constant[j]]
    if not active:
        raise InvalidDataError("every column is constant; nothing to select from")
    working = ds.select_columns(active)

    screen_result = None
    screened_out = np.zeros(ds.p, dtype=bool)
    if screen_opts is not None:
        screen_net = screen_opts.net if screen_opts.net is not None else net
        screen_result = screen(
            working, screen_net, screen_opts.m_keep, rng.child(_STREAM_SCREEN)
        )
        kept_local = set(screen_result.kept)
        dropped = [active[i] for i in range(len(active)) if i not in kept_local]
        screened_out[dropped] = True
        rows = np.setdiff1d(np.arange(working.n), screen_result.split_rows)
        working = working.take_rows(rows).select_columns(sorted(kept_local))
        active = [j for j in active if not screened_out[j]]
    return ds, working, active, constant, screened_out, screen_result


def _assemble(
    method,
    dataset,
    q,
    active,
    constant,
    screened_out,
    screen_result,
    mirrors,
    l_plus_active,
    l_minus_active,
    failed,
    rng,
    t0,
) -> SelectionResult:
    p = dataset.p
    l_plus = np.zeros(p)
    l_minus = np.zeros(p)
    m = np.zeros(p)
    c_values = np.zeros(p)
    failed_set = set(failed)
    for i, j in enumerate(active):
        c_values[j] = mirrors[i].c
        if j in failed_set:
            continue
        l_plus[j] = l_plus_active[i]
        l_minus[j] = l_minus_active[i]
        m[j] = mirror_statistic(l_plus[j], l_minus[j])
    threshold = adaptive_threshold(m, q)
    if threshold is None:
        selected = frozenset()
    else:
        selected = frozenset(int(j) for j in np.flatnonzero(m >= threshold))
    return SelectionResult(
        method=method,
        q=float(q),
        threshold=threshold,
        selected=selected,
        stats=MirrorStats(m, l_plus, l_minus),
        c_values=c_values,
        names=dataset.names,
        constant=constant,
        screened_out=screened_out,
        failed=tuple(sorted(failed_set)),
        curve=fdp_curve(m),
        seed=rng,
        screen=screen_result,
        elapsed_s=time.perf_counter() - t0,
    )


def run_sngm(
    dataset: Dataset,
    q: float = 0.1,
    spec: KernelSpec = KernelSpec("linear"),
    net: NetConfig = NetConfig(),
    rng: RngSeed = RngSeed(0),
    screen_opts: ScreenOptions | None = None,
    search: SearchConfig = SearchConfig(),
) -> SelectionResult:
    """Joint pipeline: mirror every feature, then fit one network on all
    2m interleaved half-columns and read both importances per feature
    from its input layer.  A training failure aborts the run."""
    t0 = time.perf_counter()
    ds, working, active, constant, screened_out, screen_result = _prepare(
        dataset, q, screen_opts, net, rng
    )
    mirrors = make_all_mirrors(working, spec, rng.child(_STREAM_MIRROR), search)
    inputs, paired = _interleave_pairs(mirrors)
    net_config = replace(
        net,
        seed=rng.child(_STREAM_TRAIN),
        batch_size=min(net.batch_size, working.n),
    )
    trained = train(inputs, working.y, net_config, paired_columns=paired)
    importances = path_importance(trained).values
    l_plus_active = [importances[2 * i] for i in range(len(mirrors))]
    l_minus_active = [importances[2 * i + 1] for i in range(len(mirrors))]
    method = "s_sngm" if screen_opts is not None else "sngm"
    return _assemble(
        method,
        dataset,
        q,
        active,
        constant,
        screened_out,
        screen_result,
        mirrors,
        l_plus_active,
        l_minus_active,
        [],
        rng,
        t0,
    )


def run_ingm(
    dataset: Dataset,
    q: float = 0.1,
    spec: KernelSpec = KernelSpec("linear"),
    net: NetConfig = NetConfig(),
    rng: RngSeed = RngSeed(0),
    screen_opts: ScreenOptions | None = None,
    search: SearchConfig = SearchConfig(),
) -> SelectionResult:
    """Individual pipeline: one network per feature, with only that
    feature's pair inserted in place of its column.

    A feature whose network fails to train is recorded and scored zero;
    the whole run aborts if more than a tenth of the features fail."""
    t0 = time.perf_counter()
    ds, working, active, constant, screened_out, screen_result = _prepare(
        dataset, q, screen_opts, net, rng
    )
    mirrors = make_all_mirrors(working, spec, rng.child(_STREAM_MIRROR), search)
    train_rng = rng.child(_STREAM_TRAIN)
    l_plus_active = []
    l_minus_active = []
    failed = []
    failures = []
    for i, pair in enumerate(mirrors):
        inputs = np.column_stack(
            [working.x[:, :i], pair.x_plus, pair.x_minus, working.x[:, i + 1 :]]
        )
        net_config = replace(
            net,
            seed=train_rng.named_child(pair.name),
            batch_size=min(net.batch_size, working.n),
        )
        try:
            trained = train(
                inputs, working.y, net_config, paired_columns=[(i, i + 1)]
            )
        except TrainingError as err:
            failed.append(active[i])
            failures.append(f"{pair.name}: {err}")
            l_plus_active.append(0.0)
            l_minus_active.append(0.0)
            continue
        importances = path_importance(trained).values
        l_plus_active.append(importances[i])
        l_minus_active.append(importances[i + 1])
    if len(failed) > _MAX_FAILURE_FRACTION * len(mirrors):
        raise TrainingError(
            f"{len(failed)} of {len(mirrors)} per-feature networks failed "
            f"to train: " + "; ".join(failures[:5])
        )
    method = "s_ingm" if screen_opts is not None else "ingm"
    return _assemble(
        method,
        dataset,
        q,
        active,
        constant,
        screened_out,
        screen_result,
        mirrors,
        l_plus_active,
        l_minus_active,
        failed,
        rng,
        t0,
    )
