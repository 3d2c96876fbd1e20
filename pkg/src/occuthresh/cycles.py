"""Short-cycle census of configurations and the matching Poisson constants.

A 2l-cycle is a closed alternating variable/constraint walk with l
distinct variables, l distinct constraints, and 2l distinct wiring
edges; lengths are counted in the factor-graph sense.  The census
enumerates directed rooted cycles (rooted at a variable, with a
direction) and divides by 2l, asserting exact divisibility first.

For l <= 2 a vectorized pair-count evaluates the same quantities from
edge multiplicities; it is property-tested against the walk enumeration
and used by the Monte Carlo driver, where censuses of many samples run
in parallel over sample seeds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation, ParameterError
from .instances import Configuration, Params, child_seed, count_two_cycles, sample_configuration
from .parallel import parallel_map


@dataclass(frozen=True)
class CycleCensus:
    """counts[l-1] = number of 2l-cycles, for l = 1 .. l_max."""

    counts: tuple

    @property
    def l_max(self) -> int:
        return len(self.counts)

    def count(self, l: int) -> int:
        return self.counts[l - 1]


def _census_walk(cfg: Configuration, l_max: int) -> tuple:
    p = cfg.params
    d, k = p.d, p.k
    to_con = (cfg.wiring // k).tolist()
    inv = cfg.inverse_wiring()
    con_members = inv.reshape(p.m, k).tolist()
    directed = [0] * (l_max + 1)
    var_seen = bytearray(p.n)
    con_seen = bytearray(p.m)

    def walk(root: int, a: int, s_in: int, depth: int):
        for s_out in con_members[a]:
            if s_out == s_in:
                continue
            v = s_out // d
            if v == root:
                directed[depth] += 1
                continue
            if depth == l_max or var_seen[v]:
                continue
            var_seen[v] = 1
            base = v * d
            for s2 in range(base, base + d):
                if s2 == s_out:
                    continue
                a2 = to_con[s2]
                if con_seen[a2]:
                    continue
                con_seen[a2] = 1
                walk(root, a2, s2, depth + 1)
                con_seen[a2] = 0
            var_seen[v] = 0

    for root in range(p.n):
        var_seen[root] = 1
        base = root * d
        for s in range(base, base + d):
            a = to_con[s]
            con_seen[a] = 1
            walk(root, a, s, 1)
            con_seen[a] = 0
        var_seen[root] = 0

    counts = []
    for l in range(1, l_max + 1):
        if directed[l] % (2 * l) != 0:
            raise AssertionError(
                f"directed {2 * l}-cycle count {directed[l]} not divisible by {2 * l}"
            )
        counts.append(directed[l] // (2 * l))
    return tuple(counts)


def _census_pairs(cfg: Configuration, l_max: int) -> tuple:
    # l=1: pairs of parallel edges between one variable and one constraint.
    # l=2: sum over variable pairs {v1,v2} and constraint pairs {a1,a2} of
    # the product of edge multiplicities, evaluated as (S^2 - Q)/2 with
    # S = sum_a M[v1,a]M[v2,a] and Q the sum of squares.
    counts = [count_two_cycles(cfg)]
    if l_max >= 2:
        p = cfg.params
        members = np.sort(cfg.constraint_members(), axis=1)
        ii, jj = np.triu_indices(p.k, k=1)
        v1 = members[:, ii].ravel().astype(np.int64)
        v2 = members[:, jj].ravel().astype(np.int64)
        cons = np.repeat(np.arange(p.m, dtype=np.int64), ii.size)
        distinct = v1 != v2
        pair_key = v1[distinct] * p.n + v2[distinct]
        key_con = pair_key * p.m + cons[distinct]
        uniq, mult = np.unique(key_con, return_counts=True)
        per_pair = uniq // p.m
        pairs, inverse = np.unique(per_pair, return_inverse=True)
        s = np.bincount(inverse, weights=mult.astype(float))
        q = np.bincount(inverse, weights=(mult * mult).astype(float))
        counts.append(int(round(((s * s - q) / 2.0).sum())))
    return tuple(counts)


def count_cycles(cfg: Configuration, l_max: int, method: str = "auto") -> CycleCensus:
    """Census of 2l-cycles for l = 1 .. l_max.

    ``method`` is "walk" (directed-walk enumeration), "pairs"
    (multiplicity counting, l_max <= 2 only), or "auto" (pairs when
    applicable, walk otherwise).
    """
    if l_max < 1:
        raise ParameterError(f"need l_max >= 1, got {l_max}")
    if method == "auto":
        method = "pairs" if l_max <= 2 else "walk"
    if method == "pairs":
        if l_max > 2:
            raise ParameterError("pair counting only covers l_max <= 2")
        return CycleCensus(_census_pairs(cfg, l_max))
    if method == "walk":
        return CycleCensus(_census_walk(cfg, l_max))
    raise ParameterError(f"unknown census method {method!r}")


def lambda_l(l: int, k: int, d: int) -> float:
    """Limiting mean of the 2l-cycle count: ((k-1)(d-1))^l / (2l)."""
    if l < 1:
        raise ParameterError(f"need l >= 1, got {l}")
    return ((k - 1) * (d - 1)) ** l / (2.0 * l)


def delta_l(l: int, k: int) -> float:
    """Conditioning distortion of the 2l-cycle count: (-1/(k-1))^l."""
    if l < 1:
        raise ParameterError(f"need l >= 1, got {l}")
    if k < 2:
        raise ParameterError(f"need k >= 2, got {k}")
    return (-1.0 / (k - 1)) ** l


def mu_l(l: int, k: int, d: int) -> float:
    """Solution-conditioned cycle rate: lambda_l * (1 + delta_l)."""
    return lambda_l(l, k, d) * (1.0 + delta_l(l, k))


def markov_trace_delta(l: int, k: int) -> float:
    """delta_l recomputed as Tr(W^l) - 1 for the explicit two-state chain.

    W is column stochastic with W[1,1] = 1/(k-1) and W[1,0] = 2/(k-1);
    its eigenvalues are 1 and -1/(k-1), so this must equal delta_l.
    """
    if l < 1:
        raise ParameterError(f"need l >= 1, got {l}")
    c = 1.0 / (k - 1)
    w = np.array([[1.0 - 2.0 * c, 1.0 - c], [2.0 * c, c]])
    return float(np.trace(np.linalg.matrix_power(w, l))) - 1.0


@dataclass(frozen=True)
class PoissonFitRow:
    l: int
    empirical_mean: float
    lam: float
    z_score: float
    empirical_var: float
    chi2: float
    dof: int


def _poisson_pmf(lam: float, upto: int) -> np.ndarray:
    ks = np.arange(upto + 1)
    logs = -lam + ks * math.log(lam) - np.array([math.lgamma(x + 1) for x in ks])
    return np.exp(logs)


def poisson_gof(samples, k: int, d: int) -> list[PoissonFitRow]:
    """Per-l comparison of a census sample against Poisson(lambda_l).

    Reports moments, a z-score for the mean, and a chi-square statistic
    over count bins merged to expected mass >= 5.  Statistics only; no
    pass/fail is attached.
    """
    samples = list(samples)
    if len(samples) < 2:
        raise ContractViolation("need at least 2 census samples")
    l_max = min(c.l_max for c in samples)
    data = np.array([[c.count(l) for l in range(1, l_max + 1)] for c in samples], dtype=float)
    n_samples = data.shape[0]
    rows = []
    for l in range(1, l_max + 1):
        xs = data[:, l - 1]
        lam = lambda_l(l, k, d)
        mean = float(xs.mean())
        var = float(xs.var(ddof=1))
        z = (mean - lam) / math.sqrt(lam / n_samples)
        top = int(xs.max())
        pmf = _poisson_pmf(lam, top)
        expected_raw = np.append(pmf, max(0.0, 1.0 - pmf.sum())) * n_samples
        observed_raw = np.append(np.bincount(xs.astype(int), minlength=top + 1), 0.0)
        obs_bins, exp_bins = [], []
        acc_o = acc_e = 0.0
        for o, e in zip(observed_raw, expected_raw):
            acc_o += o
            acc_e += e
            if acc_e >= 5.0:
                obs_bins.append(acc_o)
                exp_bins.append(acc_e)
                acc_o = acc_e = 0.0
        if acc_e > 0 and obs_bins:
            obs_bins[-1] += acc_o
            exp_bins[-1] += acc_e
        chi2 = float(sum((o - e) ** 2 / e for o, e in zip(obs_bins, exp_bins)))
        dof = max(1, len(obs_bins) - 1)
        rows.append(
            PoissonFitRow(
                l=l,
                empirical_mean=mean,
                lam=lam,
                z_score=z,
                empirical_var=var,
                chi2=chi2,
                dof=dof,
            )
        )
    return rows


def pair_correlation(samples, l_a: int, l_b: int) -> float:
    """Pearson correlation between the counts of 2*l_a and 2*l_b cycles."""
    xs = np.array([c.count(l_a) for c in samples], dtype=float)
    ys = np.array([c.count(l_b) for c in samples], dtype=float)
    return float(np.corrcoef(xs, ys)[0, 1])


def _census_task(args) -> tuple:
    n, d, k, r, seed, l_max = args
    cfg = sample_configuration(Params(n=n, d=d, k=k, r=r), seed)
    return count_cycles(cfg, l_max).counts


def census_samples(
    k: int,
    d: int,
    n: int,
    samples: int,
    seed: int,
    l_max: int = 2,
    r: int = 2,
    threads: int = 1,
) -> list[CycleCensus]:
    """Censuses of ``samples`` independent configurations.

    Sample ``i`` runs on ``child_seed(seed, i)``; gathering is by sample
    index, so results do not depend on the worker count.
    """
    if samples < 1:
        raise ParameterError(f"need samples >= 1, got {samples}")
    tasks = [(n, d, k, r, child_seed(seed, i), l_max) for i in range(samples)]
    return [CycleCensus(c) for c in parallel_map(_census_task, tasks, threads)]
