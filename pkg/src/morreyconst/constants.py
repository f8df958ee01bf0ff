"""Ratio functionals measuring how far the space is from an inner-product
space, their witness pairs, and a maximizing estimator.

Four ratios over pairs (x, y), all with supremum 2 over any normed space:

* sum-power ratio        (N(x+y)^s + N(x-y)^s) / (2^(s-1) (N(x)^s + N(y)^s));
* unit-pair ratio        (N(u+v)^2 + N(u-v)^2) / 4           on unit vectors;
* unit-pair power ratio  (N(u+v)^s + N(u-v)^s) / 2^s         on unit vectors;
* product ratio          N(x+y) N(x-y) / (N(x)^2 + N(y)^2).

The witness pairs split a borderline power function into its inner and
outer parts; their ratios approach 2 exactly, with a closed-form lower
bound as a function of the split point in small mode.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from morreyconst.integrate import IntegrationSettings
from morreyconst.model import (
    Mode,
    PiecewiseRadialFunction,
    RadialPiece,
    SpaceParams,
    add,
    canonicalize,
    scale,
    subtract,
    truncate,
)
from morreyconst.norms import SearchSettings, norm

__all__ = [
    "Family",
    "ConstantKind",
    "ConstantEstimate",
    "ZeroFunction",
    "NotInSpace",
    "ratio",
    "witness_pair_morrey",
    "witness_pair_small_morrey",
    "theorem2_lower_bound",
    "random_pair",
    "candidate_pairs",
    "estimate_constant",
    "DEFAULT_EPS_LADDER",
]

INF = math.inf

DEFAULT_EPS_LADDER = (0.5, 0.1, 0.01, 1e-4)


class ZeroFunction(ValueError):
    """A ratio was requested with a zero-norm argument in its denominator."""


class NotInSpace(ValueError):
    """A function involved in a ratio has infinite norm."""


class Family(enum.Enum):
    GEN_VNJ = "gen_vnj"          # parametrized by s >= 1
    MOD_VNJ = "mod_vnj"          # unit vectors, squares
    GEN_MOD_VNJ = "gen_mod_vnj"  # unit vectors, parametrized by s >= 1
    ZBAGANU = "zbaganu"          # product form


@dataclass(frozen=True)
class ConstantKind:
    """One of the four ratio families, with its power s where applicable."""

    family: Family
    s: float | None = None

    def __post_init__(self) -> None:
        if self.family in (Family.GEN_VNJ, Family.GEN_MOD_VNJ):
            if self.s is None or not self.s >= 1.0:
                raise ValueError(f"{self.family.value} needs s >= 1, got {self.s}")
        elif self.s is not None:
            raise ValueError(f"{self.family.value} does not take s")

    @classmethod
    def gen_vnj(cls, s: float) -> "ConstantKind":
        return cls(Family.GEN_VNJ, float(s))

    @classmethod
    def mod_vnj(cls) -> "ConstantKind":
        return cls(Family.MOD_VNJ)

    @classmethod
    def gen_mod_vnj(cls, s: float) -> "ConstantKind":
        return cls(Family.GEN_MOD_VNJ, float(s))

    @classmethod
    def zbaganu(cls) -> "ConstantKind":
        return cls(Family.ZBAGANU)

    def label(self) -> str:
        if self.s is not None:
            return f"{self.family.value}(s={self.s:g})"
        return self.family.value


@dataclass(frozen=True)
class ConstantEstimate:
    """Best ratio found over a candidate set, with provenance.

    ``best_ratio`` is a certified lower bound for the constant (each
    ratio is an admissible pair's value); it is never a proof of the
    supremum.  ``best_pair`` is the achieving pair, ``best_index`` its
    position in the deterministic candidate order.
    """

    kind: ConstantKind
    best_ratio: float
    best_pair: tuple[PiecewiseRadialFunction, PiecewiseRadialFunction] | None
    best_index: int
    n_pairs_tried: int
    n_skipped: int
    max_ratio_seen: float
    trace: tuple[float, ...] = ()


def _norm_value(
    f: PiecewiseRadialFunction,
    params: SpaceParams,
    search: SearchSettings,
    integ: IntegrationSettings,
) -> float:
    return norm(f, params, search, integ).value


def ratio(
    kind: ConstantKind,
    x: PiecewiseRadialFunction,
    y: PiecewiseRadialFunction,
    params: SpaceParams,
    search: SearchSettings = SearchSettings(),
    integ: IntegrationSettings = IntegrationSettings(),
) -> float:
    """Evaluate one ratio functional on the pair (x, y).

    Raises ZeroFunction when a norm in the denominator vanishes and
    NotInSpace when any involved norm is infinite.  The pair sums
    x + y and x - y must be representable (shared exponents).
    """

    def n_of(g: PiecewiseRadialFunction) -> float:
        v = _norm_value(g, params, search, integ)
        if v == INF:
            raise NotInSpace(f"infinite norm for {g.pieces!r}")
        return v

    nx, ny = n_of(x), n_of(y)
    if nx == 0.0 or ny == 0.0:
        raise ZeroFunction("ratio needs both arguments to have nonzero norm")

    fam, s = kind.family, kind.s
    if fam in (Family.MOD_VNJ, Family.GEN_MOD_VNJ):
        x, y = scale(x, 1.0 / nx), scale(y, 1.0 / ny)
        n_sum, n_diff = n_of(add(x, y)), n_of(subtract(x, y))
        if fam is Family.MOD_VNJ:
            return (n_sum**2 + n_diff**2) / 4.0
        return (n_sum**s + n_diff**s) / 2.0**s

    n_sum, n_diff = n_of(add(x, y)), n_of(subtract(x, y))
    if fam is Family.GEN_VNJ:
        return (n_sum**s + n_diff**s) / (2.0 ** (s - 1.0) * (nx**s + ny**s))
    # product form
    return n_sum * n_diff / (nx**2 + ny**2)


def _split_pair(
    f: PiecewiseRadialFunction, cut: float
) -> tuple[PiecewiseRadialFunction, PiecewiseRadialFunction]:
    """k = (inner part) - (outer part) of f at the cut radius; returns (f, k)."""
    g = truncate(f, 0.0, cut)
    h = subtract(f, g)
    k = subtract(g, h)
    return f, k


def witness_pair_morrey(
    params: SpaceParams,
) -> tuple[PiecewiseRadialFunction, PiecewiseRadialFunction]:
    """Extremal pair for the unrestricted-radius mode.

    f = |x|^(-n/q) on all of R^n, k = f inside the unit ball minus f
    outside it.  Then f + k and f - k are twice the inner and outer
    parts, and |k| = f pointwise, which forces all four norms equal.
    """
    params.require_strict()
    if params.mode is not Mode.MORREY:
        raise ValueError("witness_pair_morrey requires Morrey-mode params")
    alpha = -params.n / params.q
    f = canonicalize([RadialPiece(0.0, INF, 1.0, alpha)])
    return _split_pair(f, 1.0)


def witness_pair_small_morrey(
    params: SpaceParams, eps: float
) -> tuple[PiecewiseRadialFunction, PiecewiseRadialFunction]:
    """Near-extremal pair for the small mode, split at radius eps.

    f = |x|^(-n/q) on the unit ball only; k flips sign at eps.  The
    ratios approach 2 as eps -> 0 with the closed-form deficit given by
    :func:`theorem2_lower_bound`.
    """
    params.require_strict()
    if params.mode is not Mode.SMALL_MORREY:
        raise ValueError("witness_pair_small_morrey requires small-mode params")
    if not (0.0 < eps < 1.0):
        raise ValueError(f"split radius must be in (0, 1), got {eps}")
    alpha = -params.n / params.q
    f = canonicalize([RadialPiece(0.0, 1.0, 1.0, alpha)])
    return _split_pair(f, eps)


def theorem2_lower_bound(params: SpaceParams, eps: float, kind: ConstantKind) -> float:
    """Closed-form lower bound achieved by the small-mode witness pair.

    With E = eps^(n(1 - p/q)): the sum-power families give
    1 + (1 - E)^(s/p) (s = 2 for the unit-pair ratio), the product form
    gives 2 (1 - E)^(1/p).  All tend to 2 as eps -> 0.
    """
    params.require_strict()
    if not (0.0 < eps < 1.0):
        raise ValueError(f"split radius must be in (0, 1), got {eps}")
    deficit = 1.0 - eps ** (params.n * (1.0 - params.p / params.q))
    p = params.p
    fam = kind.family
    if fam is Family.ZBAGANU:
        return 2.0 * deficit ** (1.0 / p)
    s = 2.0 if fam is Family.MOD_VNJ else float(kind.s)
    return 1.0 + deficit ** (s / p)


# ---------------------------------------------------------------------------
# Random candidate pairs.


def _random_function(
    rng: np.random.Generator, params: SpaceParams
) -> PiecewiseRadialFunction:
    """One random canonical function with everywhere-shared exponent -n/q.

    Breakpoints are drawn in log space; each cell of the resulting
    partition of (0, inf) gets a coefficient in [-2, 2], and the first
    or last cell is sometimes dropped so finite supports appear too.
    The shared exponent keeps every pairwise sum representable and the
    norm finite in both modes.
    """
    alpha = -params.n / params.q
    if params.mode is Mode.SMALL_MORREY:
        log_lo, log_hi = math.log(1e-3), math.log(1.0)
    else:
        log_lo, log_hi = math.log(1e-2), math.log(10.0)
    n_cuts = int(rng.integers(1, 4))
    cuts = np.sort(np.exp(rng.uniform(log_lo, log_hi, size=n_cuts)))
    bounds = [0.0, *[float(c) for c in cuts], INF]
    coefs = rng.uniform(-2.0, 2.0, size=len(bounds) - 1)
    if rng.random() < 0.25:
        coefs[0] = 0.0
    if rng.random() < 0.25:
        coefs[-1] = 0.0
    pieces = [
        RadialPiece(bounds[i], bounds[i + 1], float(coefs[i]), alpha)
        for i in range(len(bounds) - 1)
        if coefs[i] != 0.0
    ]
    return canonicalize(pieces)


def random_pair(
    rng: np.random.Generator, params: SpaceParams
) -> tuple[PiecewiseRadialFunction, PiecewiseRadialFunction]:
    """A random candidate pair whose sums stay representable."""
    return _random_function(rng, params), _random_function(rng, params)


# ---------------------------------------------------------------------------
# Estimation: maximize the ratio over witnesses, user pairs, random pairs.


def candidate_pairs(
    params: SpaceParams,
    candidates: list[tuple[PiecewiseRadialFunction, PiecewiseRadialFunction]] | None = None,
    random_trials: int = 0,
    seed: int = 0,
    include_witnesses: bool = True,
    eps_ladder: tuple[float, ...] = DEFAULT_EPS_LADDER,
) -> list[tuple[PiecewiseRadialFunction, PiecewiseRadialFunction]]:
    """The estimator's candidate sequence, in its deterministic order.

    Witness pair(s) for the mode first (one per ladder value in small
    mode), then the trivial pair (f, f), then user candidates, then the
    seeded random pairs.
    """
    if random_trials < 0:
        raise ValueError("random_trials must be >= 0")
    pairs: list[tuple[PiecewiseRadialFunction, PiecewiseRadialFunction]] = []
    if include_witnesses:
        if params.mode is Mode.MORREY:
            pairs.append(witness_pair_morrey(params))
        else:
            for eps in eps_ladder:
                pairs.append(witness_pair_small_morrey(params, eps))
        f_witness = pairs[0][0]
        pairs.append((f_witness, f_witness))
    if candidates:
        pairs.extend(candidates)
    if random_trials:
        rng = np.random.Generator(np.random.Philox(key=seed))
        for _ in range(random_trials):
            pairs.append(random_pair(rng, params))
    return pairs


def estimate_constant(
    kind: ConstantKind,
    params: SpaceParams,
    candidates: list[tuple[PiecewiseRadialFunction, PiecewiseRadialFunction]] | None = None,
    random_trials: int = 0,
    seed: int = 0,
    include_witnesses: bool = True,
    eps_ladder: tuple[float, ...] = DEFAULT_EPS_LADDER,
    search: SearchSettings = SearchSettings(),
    integ: IntegrationSettings = IntegrationSettings(),
    keep_trace: bool = False,
) -> ConstantEstimate:
    """Best ratio over the :func:`candidate_pairs` sequence.

    Pairs whose ratio is undefined (zero norm, infinite norm,
    unrepresentable sum) are skipped and counted.  Identical inputs give
    identical output regardless of evaluation schedule: the reduction is
    a max with ties resolved to the earliest candidate.
    """
    pairs = candidate_pairs(
        params, candidates, random_trials, seed, include_witnesses, eps_ladder
    )

    best_ratio = -INF
    best_pair = None
    best_index = -1
    max_seen = -INF
    skipped = 0
    trace: list[float] = []
    for idx, (x, y) in enumerate(pairs):
        try:
            value = ratio(kind, x, y, params, search, integ)
        except (ZeroFunction, NotInSpace, ValueError):
            skipped += 1
            if keep_trace:
                trace.append(math.nan)
            continue
        if keep_trace:
            trace.append(value)
        max_seen = max(max_seen, value)
        if value > best_ratio:
            best_ratio, best_pair, best_index = value, (x, y), idx
    if best_pair is None:
        raise ZeroFunction("no candidate pair had a well-defined ratio")
    return ConstantEstimate(
        kind=kind,
        best_ratio=best_ratio,
        best_pair=best_pair,
        best_index=best_index,
        n_pairs_tried=len(pairs),
        n_skipped=skipped,
        max_ratio_seen=max_seen,
        trace=tuple(trace),
    )
