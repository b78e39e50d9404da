"""Parameter planning: rectangle dimensions, weight tails, slice counts.

Rectangles are indexed by ``j = 2i`` (vertical, level ``i``) and
``j = 2i + 1`` (horizontal, level ``i``).  For each index the planner keeps
the shorter side ``n_j``, the rounded-up aspect ratio ``Lam_j`` and the weight
``a_j = Lam_j / n_j**gamma``; the slice counts ``m_j`` are chosen against
those.

Two relaxations apply to the hard rules, both recorded in the report:

* *burn-in*: an uncut index (``m_j = 1``) is exempt from the spacing rules
  ``n_j / (2 m_j) > nu0`` and ``n_j // m_j >= 3``, as long as such indices
  form a prefix.  Small first levels are common and carry no slices.
* the ``k`` cap is a soft diagnostic for explicit schedules.

The clearance rule is an extra hard constraint: below the frontier index
at most one of two consecutive indices may be cut.  A rectangle that is cut
receives folded slices from its children and also folds into its own
``next``; both foldings then meet on the bottom layer along the same
boundary rows and the overlap audit fails.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .gridgen import ParamSeed, derive_params


class PlanError(ValueError):
    """A hard plan invariant failed; ``index`` is the first offending ``j``."""

    def __init__(self, index: int, reason: str):
        super().__init__(f"index j={index}: {reason}")
        self.index = index
        self.reason = reason


@dataclass(frozen=True)
class ParamPlan:
    seed: ParamSeed
    gamma: float = 1.0
    nu0: int = 1
    c: float = 0.5
    m: tuple[int, ...] | None = None
    strict: bool = False
    fold_clearance: bool = True

    def __post_init__(self):
        if not (self.gamma > 0 and math.isfinite(self.gamma)):
            raise ValueError("gamma must be a positive real")
        if int(self.nu0) != self.nu0 or self.nu0 < 1:
            raise ValueError("nu0 must be a positive integer")
        if not 0 < self.c < 1:
            raise ValueError("c must lie in (0, 1)")
        if self.m is not None:
            object.__setattr__(self, "m", tuple(int(x) for x in self.m))

    @property
    def K(self) -> int:
        return self.seed.K

    @property
    def levels(self) -> list[tuple[int, int]]:
        return derive_params(self.seed)

    @property
    def n_indices(self) -> int:
        return 2 * self.K

    def dimensions(self) -> list["RectDims"]:
        return [rect_dimensions(self, i) for i in range(self.K)]

    @property
    def n(self) -> np.ndarray:
        return np.array([x for d in self.dimensions() for x in d.n], dtype=np.int64)

    @property
    def Lam(self) -> np.ndarray:
        return np.array([x for d in self.dimensions() for x in d.Lam], dtype=np.int64)

    @property
    def a(self) -> np.ndarray:
        return self.Lam / self.n.astype(float) ** self.gamma


@dataclass(frozen=True)
class RectDims:
    vertical: tuple[int, int]
    horizontal: tuple[int, int]
    n: tuple[int, int]
    Lam: tuple[int, int]


def _ceil_ratio(w: int, h: int) -> int:
    lo, hi = min(w, h), max(w, h)
    return -(-hi // lo)


def rect_dimensions(plan: ParamPlan, i: int) -> RectDims:
    """(width, height) of the level-``i`` vertical and horizontal rectangles."""
    if not 0 <= i < plan.K:
        raise ValueError(f"level {i} outside 0..{plan.K - 1}")
    lv = plan.levels
    l_i, d_i = lv[i]
    d_next = lv[i + 1][1]
    v = (l_i, d_next - l_i)
    h = (d_next + d_i - l_i, l_i)
    return RectDims(v, h, (min(v), min(h)), (_ceil_ratio(*v), _ceil_ratio(*h)))


# ---------------------------------------------------------------------------
# k


@dataclass
class KSequence:
    k: np.ndarray
    tails: np.ndarray
    thresholds: dict[int, int]
    weighted_sum: float


def _level_of(t: float) -> float:
    """Largest ``s >= 0`` with ``t < 2**-s`` (0 if none, inf when ``t == 0``)."""
    if t == 0:
        return math.inf
    return float(max(0, -math.frexp(t)[1]))


def construct_k(a: Sequence[float]) -> KSequence:
    """Nondecreasing integer weights from the tail sums of ``a``.

    The tail at ``i`` is the prefix sum from ``i`` plus the last term, which
    stands in for the untruncated remainder.  ``k_i`` is the number of dyadic
    thresholds ``2**-s`` (``s >= 1``) the tail has dropped below; a zero tail
    admits any ``k`` and is reported as ``inf``.
    """
    a = np.asarray(a, dtype=float)
    if np.any(a < 0):
        raise ValueError("weights must be nonnegative")
    if a.size == 0:
        return KSequence(np.zeros(0), np.zeros(0), {}, 0.0)
    tails = np.cumsum(a[::-1])[::-1] + a[-1]
    k = np.array([_level_of(t) for t in tails])
    k = np.maximum.accumulate(k)  # guards float noise in the tail sums
    thresholds: dict[int, int] = {}
    for i, ki in enumerate(k):
        top = int(min(ki, 64)) if math.isfinite(ki) else 64
        for s in range(top + 1):
            thresholds.setdefault(s, i)
    prod = np.where(a == 0, 0.0, a * np.where(np.isinf(k), 0.0, k))
    prod = np.where(np.isinf(k) & (a > 0), np.inf, prod)
    return KSequence(k, tails, thresholds, float(prod.sum()))


# ---------------------------------------------------------------------------
# m


@dataclass
class MSchedule:
    m: np.ndarray
    caps: np.ndarray
    burn_in: list[int]
    increases: list[int]
    clearance_capped: list[int] = field(default_factory=list)
    unbounded_hint: bool = False


def in_range(n: int, m: int, nu0: int) -> bool:
    """Spacing rules for cutting an ``n``-wide rectangle into ``m`` slices."""
    return n // m >= 3 and n / (2 * m) > nu0


def choose_m_sequence(n: Sequence[int], k: Sequence[float], gamma: float, nu0: int) -> MSchedule:
    """Largest admissible nondecreasing slice counts for given ``n`` and ``k``."""
    n = np.asarray(n, dtype=np.int64)
    k = np.asarray(k, dtype=float)
    if not any(in_range(int(x), 1, nu0) for x in n):
        raise PlanError(0, f"no index admits a cut with nu0={nu0}")
    m = np.zeros(len(n), np.int64)
    caps = np.zeros(len(n), np.int64)
    burn: list[int] = []
    prev = 1
    cut_seen = False
    for j, (nj, kj) in enumerate(zip(n, k)):
        kcap = nj if math.isinf(kj) else max(1, int(math.floor(kj ** (1.0 / gamma) + 1e-12)))
        cap = min(int(nj), kcap)
        caps[j] = cap
        best = 0
        for cand in range(cap, prev - 1, -1):
            if cand == 1 or in_range(int(nj), cand, nu0):
                best = cand
                break
        if best == 0:
            raise PlanError(j, f"no slice count >= {prev} fits n={nj}, nu0={nu0}")
        if in_range(int(nj), best, nu0):
            cut_seen = True
        elif cut_seen:
            raise PlanError(j, f"n={nj} too small for nu0={nu0} after the burn-in prefix")
        else:
            burn.append(j)
        m[j] = prev = best
    inc = [j for j in range(1, len(m)) if m[j] > m[j - 1]]
    hint = bool(len(k) and (math.isinf(k[-1]) or k[-1] > k[0]) and n[-1] > n[0])
    return MSchedule(m, caps, burn, inc, unbounded_hint=hint)


def clearance_violation(m: Sequence[int]) -> int | None:
    """First ``j`` below the frontier where ``j`` and ``j + 1`` are both cut.

    Index 0 has no children, so it only conflicts through index 1 (which
    then must be the frontier).
    """
    m = list(m)
    last = len(m) - 1
    for j in range(last):
        if m[j] >= 2 and m[j + 1] >= 2:
            if j >= 1:
                return j
            if last > 1:
                return j + 1
    return None


def choose_m(plan: ParamPlan) -> MSchedule:
    ks = construct_k(plan.a)
    sched = choose_m_sequence(plan.n, ks.k, plan.gamma, plan.nu0)
    if plan.fold_clearance:
        m = sched.m.copy()
        last = len(m) - 1
        keep = last if last > 1 else None
        capped = [j for j in range(len(m)) if m[j] > 1 and j != keep and (keep is not None)]
        m[capped] = 1
        if capped:
            sched.clearance_capped = capped
            sched.m = m
            sched.increases = [j for j in range(1, len(m)) if m[j] > m[j - 1]]
    return sched


# ---------------------------------------------------------------------------
# validation


@dataclass
class PlanReport:
    levels: list[tuple[int, int]]
    n: list[int]
    Lam: list[int]
    a: list[float]
    k: list[float]
    m: list[int]
    inv_L_prefix: float
    L_decreasing: bool
    weighted_k_sum: float
    target_series: float
    scaling_gap: float
    bounds: list[float]
    comparison_rects: list[tuple[int, int]]
    burn_in: list[int]
    k_cap_exceeded: list[int]
    strict: bool
    warnings: list[str]

    def as_dict(self) -> dict:
        def clean(v):
            if isinstance(v, float) and not math.isfinite(v):
                return str(v)
            if isinstance(v, list):
                return [clean(x) for x in v]
            if isinstance(v, tuple):
                return [clean(x) for x in v]
            return v

        return {k: clean(v) for k, v in self.__dict__.items()}


def slice_schedule(plan: ParamPlan) -> np.ndarray:
    if plan.m is None:
        return choose_m(plan).m
    if len(plan.m) != plan.n_indices:
        raise PlanError(0, f"explicit m has {len(plan.m)} entries, expected {plan.n_indices}")
    return np.asarray(plan.m, dtype=np.int64)


def validate_plan(plan: ParamPlan) -> PlanReport:
    """Check every hard invariant and collect the diagnostic series.

    Raises :class:`PlanError` naming the first offending index.
    """
    n, Lam, a = plan.n, plan.Lam, plan.a
    ks = construct_k(a)
    m = slice_schedule(plan)
    warnings: list[str] = []

    for j in range(1, len(n)):
        if n[j] < n[j - 1]:
            raise PlanError(j, f"n decreases ({n[j - 1]} -> {n[j]})")
    if plan.strict:
        for i in range(1, plan.K):
            if n[2 * i] <= n[2 * i - 2]:
                raise PlanError(2 * i, "n not strictly increasing across levels")
    burn: list[int] = []
    cut_seen = False
    for j, (nj, mj) in enumerate(zip(n, m)):
        if mj < 1:
            raise PlanError(j, "slice count must be >= 1")
        if j and mj < m[j - 1]:
            raise PlanError(j, f"m decreases ({m[j - 1]} -> {mj})")
        if mj > nj:
            raise PlanError(j, f"m={mj} exceeds n={nj}")
        if in_range(int(nj), int(mj), plan.nu0):
            cut_seen = True
            continue
        if mj >= 2:
            why = []
            if nj / (2 * mj) <= plan.nu0:
                why.append(f"n/(2m) = {nj / (2 * mj):g} <= nu0={plan.nu0}")
            if nj // mj < 3:
                why.append(f"shortest slice side {nj // mj} < 3")
            raise PlanError(j, "; ".join(why))
        if cut_seen:
            raise PlanError(j, "uncut out-of-range index after the burn-in prefix")
        burn.append(j)
    if not cut_seen:
        raise PlanError(0, f"no index admits a cut with nu0={plan.nu0}")
    if plan.fold_clearance:
        bad = clearance_violation(m)
        if bad is not None:
            raise PlanError(bad, "consecutive cut indices below the frontier collide when folded")
    if burn:
        warnings.append(f"burn-in indices {burn} are uncut and exempt from spacing rules")

    kcap = [j for j in range(len(m)) if m[j] > 1 and math.isfinite(ks.k[j]) and m[j] > max(1.0, ks.k[j]) ** (1 / plan.gamma)]
    if kcap:
        warnings.append(f"m exceeds the k cap at indices {kcap}")

    L = list(plan.seed.L)
    inv_L = float(sum(1.0 / x for x in L))
    L_dec = any(L[i + 1] < L[i] for i in range(len(L) - 1))
    if L_dec:
        warnings.append(f"L decreases; prefix sum of 1/L is {inv_L:.3f}")

    expo = m.astype(float) ** plan.gamma * Lam / n.astype(float) ** plan.gamma
    expo_sliced = Lam / (n / m.astype(float)) ** plan.gamma
    comparison = [(int(2 * lam * nj), int(-(-nj // (2 * mj)))) for lam, nj, mj in zip(Lam, n, m)]

    return PlanReport(
        levels=[tuple(map(int, t)) for t in plan.levels],
        n=[int(x) for x in n],
        Lam=[int(x) for x in Lam],
        a=[float(x) for x in a],
        k=[float(x) for x in ks.k],
        m=[int(x) for x in m],
        inv_L_prefix=inv_L,
        L_decreasing=L_dec,
        weighted_k_sum=ks.weighted_sum,
        target_series=float(expo.sum()),
        scaling_gap=float(np.max(np.abs(plan.c**expo - plan.c**expo_sliced))),
        bounds=[float(plan.c**e) for e in expo],
        comparison_rects=comparison,
        burn_in=burn,
        k_cap_exceeded=kcap,
        strict=plan.strict,
        warnings=warnings,
    )


DESK_SEED = ParamSeed(2, 3, (3, 4, 5), 0)
DESK_M = (1, 1, 1, 1, 1, 3)


def desk_plan(seed: int = 0, m: Sequence[int] | None = DESK_M, **kw) -> ParamPlan:
    return ParamPlan(ParamSeed(2, 3, (3, 4, 5), seed), m=None if m is None else tuple(m), **kw)
