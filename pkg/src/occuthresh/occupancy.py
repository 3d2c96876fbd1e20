"""Deciding and counting r-in-k occupation solutions on configurations.

An assignment solves a configuration when every constraint sees exactly
``r`` of its k f-edges wired to value-one variables, counting
multiplicity.  Exact counting enumerates the C(n, n1) assignments with
the forced number of ones along a revolving-door Gray code, so each step
moves one variable in and one out; per-constraint tallies live in
bit-packed fields of a single integer, making the per-step update one
add, one subtract, and one compare.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, ContractViolation, ParameterError
from .instances import Configuration, Params, child_seed, sample_configuration
from .parallel import parallel_map

ENUMERATION_CAP = 32

_WILSON_Z = 1.959963984540054  # 97.5% normal quantile


def ones_quota(params: Params) -> int | None:
    """Number of ones forced on any solution: r*n/k, or ``None`` if fractional.

    Absent quota means the instance has no solutions at all.
    """
    rn = params.r * params.n
    if rn % params.k != 0:
        return None
    return rn // params.k


def is_solution(cfg: Configuration, x) -> bool:
    """True iff every constraint has exactly r one-valued f-edges under x."""
    p = cfg.params
    x = np.asarray(x)
    if x.shape != (p.n,):
        raise ContractViolation(f"assignment must have length {p.n}, got shape {x.shape}")
    tallies = x[cfg.constraint_members()].sum(axis=1)
    return bool(np.all(tallies == p.r))


def _packed_tallies(cfg: Configuration):
    # One bit field of `bits` per constraint inside a single big int;
    # fields never overflow because a tally is at most k.
    p = cfg.params
    bits = max(3, (p.k + 1).bit_length())
    con_of_slot = (cfg.wiring // p.k).tolist()
    masks = [0] * p.n
    for slot, con in enumerate(con_of_slot):
        masks[slot // p.d] += 1 << (bits * con)
    target = sum(p.r << (bits * c) for c in range(p.m))
    return masks, target


def revolving_door(n: int, t: int):
    """Yield (removed, added) steps visiting every t-subset of range(n).

    Successive subsets differ by a single element exchange (the
    revolving-door Gray code, Knuth TAOCP 7.2.1.3 Algorithm R).  The
    initial subset is {0, ..., t-1}; nothing is yielded for t in {0, n}.
    """
    if not 0 <= t <= n:
        raise ParameterError(f"need 0 <= t <= n, got t={t}, n={n}")
    remaining = math.comb(n, t) - 1
    if t == 0 or t == n:
        return
    c = list(range(t)) + [n, 0]
    odd = t % 2 == 1
    while remaining > 0:
        remaining -= 1
        if odd:
            if c[0] + 1 < c[1]:
                yield c[0], c[0] + 1
                c[0] += 1
                continue
            j, decrease = 1, True
        else:
            if c[0] > 0:
                yield c[0], c[0] - 1
                c[0] -= 1
                continue
            j, decrease = 1, False
        while True:
            if decrease:
                if c[j] >= j + 1:
                    out = c[j]
                    c[j] = c[j - 1]
                    c[j - 1] = j - 1
                    yield out, j - 1
                    break
            else:
                if c[j] + 1 < c[j + 1]:
                    out = c[j - 1]
                    c[j - 1] = c[j]
                    c[j] += 1
                    yield out, c[j]
                    break
            j += 1
            decrease = not decrease


def _sweep(cfg: Configuration, early_exit: bool) -> int:
    p = cfg.params
    quota = ones_quota(p)
    if quota is None:
        return 0
    masks, target = _packed_tallies(cfg)
    cur = sum(masks[:quota])
    count = 1 if cur == target else 0
    if early_exit and count:
        return 1
    for out, added in revolving_door(p.n, quota):
        cur += masks[added] - masks[out]
        if cur == target:
            if early_exit:
                return 1
            count += 1
    return count


def _check_cap(n: int, cap: int):
    if n > cap:
        raise CapacityError(
            f"exact enumeration capped at n={cap} (got n={n}); "
            "use Monte Carlo estimation for larger instances"
        )


def count_solutions(cfg: Configuration, cap: int = ENUMERATION_CAP) -> int:
    """Exact solution count; 0 immediately when the ones quota is fractional."""
    _check_cap(cfg.params.n, cap)
    return _sweep(cfg, early_exit=False)


def has_solution(cfg: Configuration, cap: int = ENUMERATION_CAP) -> bool:
    """Early-exit satisfiability decision; agrees with count_solutions > 0."""
    _check_cap(cfg.params.n, cap)
    return _sweep(cfg, early_exit=True) > 0


@dataclass(frozen=True)
class OverlapProfile:
    """Similarity of two solutions: shared ones and doubly-shared constraints.

    ``r1`` counts variables taking one under both solutions; ``r2``
    counts constraints with at least two f-edges wired to such shared-one
    variables.  ``w = (r1/n1, r2/m)`` is the normalized profile.
    """

    r1: int
    r2: int
    n1: int
    m: int

    @property
    def w1(self) -> float:
        return self.r1 / self.n1

    @property
    def w2(self) -> float:
        return self.r2 / self.m


def overlap(cfg: Configuration, x, y) -> OverlapProfile:
    """Overlap profile of two solutions; raises if either fails to solve cfg."""
    if not is_solution(cfg, x):
        raise ContractViolation("x is not a solution of the configuration")
    if not is_solution(cfg, y):
        raise ContractViolation("y is not a solution of the configuration")
    p = cfg.params
    shared = np.asarray(x).astype(np.int64) & np.asarray(y).astype(np.int64)
    r1 = int(shared.sum())
    shared_edges = shared[cfg.constraint_members()].sum(axis=1)
    r2 = int((shared_edges >= 2).sum())
    quota = ones_quota(p)
    return OverlapProfile(r1=r1, r2=r2, n1=int(quota), m=p.m)


@dataclass(frozen=True)
class SatProbRow:
    n: int
    trials: int
    sat_count: int
    sat_fraction: float
    ci_low: float
    ci_high: float
    seed: int


def _wilson_interval(successes: int, trials: int) -> tuple[float, float]:
    z = _WILSON_Z
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1.0 - phat) / trials + z * z / (4.0 * trials * trials)) / denom
    lo = 0.0 if successes == 0 else max(0.0, center - half)
    hi = 1.0 if successes == trials else min(1.0, center + half)
    return lo, hi


def _sat_trial(args) -> bool:
    n, d, k, r, seed, cap = args
    cfg = sample_configuration(Params(n=n, d=d, k=k, r=r), seed)
    return has_solution(cfg, cap=cap)


def estimate_sat_probability(
    k: int,
    d: int,
    n_list,
    trials: int,
    seed: int,
    r: int = 2,
    threads: int = 1,
    cap: int = ENUMERATION_CAP,
) -> list[SatProbRow]:
    """Fraction of satisfiable instances per n, with Wilson 95% intervals.

    Trial ``t`` for the i-th entry of ``n_list`` runs on child seed
    ``child_seed(child_seed(seed, i), t)``; results reduce in trial
    order, so any worker count gives identical output.
    """
    if trials < 1:
        raise ParameterError(f"need trials >= 1, got {trials}")
    for n in n_list:
        _check_cap(n, cap)
        Params(n=n, d=d, k=k, r=r)  # validate the family up front
    rows = []
    for i, n in enumerate(n_list):
        seed_n = child_seed(seed, i)
        tasks = [(n, d, k, r, child_seed(seed_n, t), cap) for t in range(trials)]
        outcomes = parallel_map(_sat_trial, tasks, threads)
        sat = sum(bool(o) for o in outcomes)
        lo, hi = _wilson_interval(sat, trials)
        rows.append(
            SatProbRow(
                n=n,
                trials=trials,
                sat_count=sat,
                sat_fraction=sat / trials,
                ci_low=lo,
                ci_high=hi,
                seed=seed,
            )
        )
    return rows
