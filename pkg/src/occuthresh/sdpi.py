"""KL contraction coefficients and the complete k = 4 certificate.

The generic coefficient sup KL(Wp || Wp*) / KL(p || p*) is estimated by
a dense simplex grid followed by local simplex-move refinement; both
stages are deterministic (grid points enumerate in lexicographic
composition order, ties keep the first winner, refinement accepts only
strict improvements).  The occupation family instantiates this for the
3x3 channel whose inputs measure solution overlap; its conjectured
supremum sits at the degenerate corner pmf.

The k = 4 functions certify, at grid resolution, that the conjectured
corner value really is the supremum.  All bound curves are closed
forms; the one numeric ingredient is the crossover abscissa of the two
lower bounds, computed by bisection exactly as the certificate records.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product as _iterproduct

import numpy as np

from .errors import CertificateError, ContractViolation, ParameterError, ParseError
from .moments import (
    OverlapPoint,
    input_kl,
    input_count_pmf,
    input_pmf_star,
    output_kl,
    output_count_pmf,
    w_star,
)
from .numerics import Channel, Pmf, binary_entropy, find_root, kl_divergence, kl_divergence_rows

_EXCLUSION_TV = 1e-9


@dataclass(frozen=True)
class OccupationChannel:
    """The fixed 3x3 overlap channel for a given k, with its reference pmfs."""

    k: int
    channel: Channel
    p_star: Pmf
    q_star: Pmf


def occupation_channel(k: int) -> OccupationChannel:
    """Column-stochastic channel mapping the input overlap pmf to the output one."""
    if k < 4:
        raise ParameterError(f"occupation channel needs k >= 4, got {k}")
    ws = 2.0 / k
    matrix = np.array(
        [
            [1.0 - 2.0 * ws, 1.0 - 1.5 * ws, 1.0 - ws],
            [2.0 * ws, ws, 0.0],
            [0.0, 0.5 * ws, ws],
        ]
    )
    channel = Channel(matrix)
    p_star = Pmf(input_pmf_star(k))
    return OccupationChannel(k=k, channel=channel, p_star=p_star, q_star=channel.apply(p_star))


def conjectured_contraction(k: int) -> float:
    """H(2/k) / (-ln(1/C(k,2))): the value attained at the degenerate corner."""
    if k < 4:
        raise ParameterError(f"need k >= 4, got {k}")
    w1s, w2s = w_star(k)
    return binary_entropy(w1s) / (-math.log(w2s))


def divergence_ratio(w: OverlapPoint, k: int) -> float:
    """KL(Q_w || Q*) / KL(P_w || P*); undefined (raises) exactly at w = w*."""
    denom = input_kl(w, k)
    if denom == 0.0:
        raise ParameterError(f"divergence ratio is 0/0 at the reference point w* (w={w})")
    return output_kl(w, k) / denom


def _compositions(total: int, parts: int):
    # lexicographic order; the first tuple is (0, ..., 0, total)
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _grid_pmfs(depth: int, parts: int) -> np.ndarray:
    comps = np.array(list(_compositions(depth, parts)), dtype=float)
    grid = comps / depth
    return grid / grid.sum(axis=1, keepdims=True)


def _ratio_rows(ps: np.ndarray, matrix: np.ndarray, p_star: np.ndarray, q_star: np.ndarray):
    numer = kl_divergence_rows(ps @ matrix.T, q_star)
    denom = kl_divergence_rows(ps, p_star)
    tv = 0.5 * np.abs(ps - p_star).sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratios = numer / denom
    ratios = np.where(np.isinf(denom), np.where(np.isinf(numer), -np.inf, 0.0), ratios)
    ratios = np.where(denom == 0.0, -np.inf, ratios)
    return np.where(tv <= _EXCLUSION_TV, -np.inf, ratios)


def _ratio_point(p: np.ndarray, matrix: np.ndarray, p_star: np.ndarray, q_star: np.ndarray):
    return float(_ratio_rows(p.reshape(1, -1), matrix, p_star, q_star)[0])


def _refine_simplex(p, value, matrix, p_star, q_star, start_step: float, tol: float):
    # Hill climbing along pairwise mass moves e_i - e_j; strict
    # improvements only, step halved when no move helps.
    m = p.size
    step = start_step
    while step >= tol:
        improved = True
        while improved:
            improved = False
            for i, j in _iterproduct(range(m), range(m)):
                if i == j or p[j] < step:
                    continue
                cand = p.copy()
                cand[i] += step
                cand[j] -= step
                cand /= cand.sum()
                v = _ratio_point(cand, matrix, p_star, q_star)
                if v > value:
                    p, value = cand, v
                    improved = True
        step *= 0.5
    return p, value


def contraction_coefficient(
    p_star: Pmf,
    channel: Channel,
    grid_depth: int = 200,
    refine_tol: float = 1e-10,
) -> tuple[float, Pmf]:
    """Estimate d*(P*, W) = sup KL(Wp||Wp*)/KL(p||p*) over p != p*.

    Dense simplex grid of the given composition depth (points within
    1e-9 total variation of p* are excluded), then simplex-move
    refinement down to ``refine_tol``.  Deterministic: grid ties keep
    the lexicographically first composition.
    """
    if grid_depth < 2:
        raise ParameterError(f"need grid_depth >= 2, got {grid_depth}")
    if channel.n_in != len(p_star):
        raise ContractViolation(
            f"channel expects {channel.n_in} inputs, reference pmf has {len(p_star)}"
        )
    q_star = channel.apply(p_star)
    grid = _grid_pmfs(grid_depth, len(p_star))
    ratios = _ratio_rows(grid, channel.matrix, p_star.weights, q_star.weights)
    best = int(np.argmax(ratios))
    if not np.isfinite(ratios[best]):
        raise ParameterError("no admissible grid point; reference pmf degenerate?")
    p, value = _refine_simplex(
        grid[best].copy(),
        float(ratios[best]),
        channel.matrix,
        p_star.weights,
        q_star.weights,
        start_step=1.0 / grid_depth,
        tol=refine_tol,
    )
    return value, Pmf(p)


@dataclass(frozen=True)
class OccupationContraction:
    sup: float
    argmax: OverlapPoint
    conjectured: float
    gap: float


def occupation_contraction(
    k: int, grid_depth: int = 200, refine_tol: float = 1e-10
) -> OccupationContraction:
    """Supremum of the divergence ratio over the overlap region.

    Every pmf on three outcomes is an admissible input, so the search
    runs on the full simplex; the overlap point is recovered from the
    winning pmf via w = (p1/2 + p2, p2).
    """
    occ = occupation_channel(k)
    sup, argpmf = contraction_coefficient(
        occ.p_star, occ.channel, grid_depth=grid_depth, refine_tol=refine_tol
    )
    p = argpmf.weights
    arg = OverlapPoint(float(p[1] / 2.0 + p[2]), float(p[2]), "count")
    conjectured = conjectured_contraction(k)
    if sup < conjectured - 1e-9:
        raise CertificateError(
            "occupation_sup_feasibility", arg.w1, "supremum fell below the feasible corner value"
        )
    return OccupationContraction(sup=sup, argmax=arg, conjectured=conjectured, gap=sup - conjectured)


# ---------------------------------------------------------------------------
# k = 4: closed-form curves (cell parametrization) and the certificate
# ---------------------------------------------------------------------------

_W_PLUS = 5.0 / 12.0


def _xlny(x, y):
    # x * ln(y) with the 0 * ln 0 = 0 convention, elementwise.
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = x * np.log(y)
    return np.where(x == 0.0, 0.0, out)


def _check_unit(w1, name: str):
    w1 = np.asarray(w1, dtype=float)
    if np.any((w1 < 0.0) | (w1 > 1.0)):
        raise ParameterError(f"{name} needs w1 in [0, 1], got {w1!r}")
    return w1


def _d2_vec(w1) -> np.ndarray:
    w1 = _check_unit(w1, "output divergence")
    return _xlny(w1, 2.0 * w1) + _xlny(1.0 - w1, 2.0 * (1.0 - w1))


def _sqrt_disc(w1: np.ndarray) -> np.ndarray:
    return np.sqrt(12.0 * (w1 - 0.5) ** 2 + 1.0)


def _dmin_cells(w1: np.ndarray):
    # Cells of the w2-minimized input pmf, in cancellation-free form:
    # p11 = w1^2 / (sqrt(D) + 2 - 3 w1), p00 = (1 - w1)^2 / (sqrt(D) + 3 w1 - 1).
    root = _sqrt_disc(w1)
    p11 = w1 * w1 / (root + 2.0 - 3.0 * w1)
    p00 = (1.0 - w1) ** 2 / (root + 3.0 * w1 - 1.0)
    return p11, p00


def _dmin_vec(w1) -> np.ndarray:
    w1 = _check_unit(w1, "minimized input divergence")
    p11, p00 = _dmin_cells(w1)
    return _xlny(w1, 6.0 * p11) + _xlny(1.0 - w1, 6.0 * p00)


def _dplus_vec(w1) -> np.ndarray:
    w1 = _check_unit(w1, "quadratic bound")
    return 6.0 * (0.5 - w1) ** 2


def _dminus_vec(w1) -> np.ndarray:
    w1 = np.asarray(w1, dtype=float)
    if np.any((w1 < 0.0) | (w1 > _W_PLUS)):
        raise ParameterError(f"log-sum bound needs w1 in [0, 5/12], got {w1!r}")
    return _xlny(2.0 * w1, 12.0 * w1 / 5.0) + _xlny(1.0 - 2.0 * w1, 6.0 - 12.0 * w1)


def k4_output_divergence(w1: float) -> float:
    """KL of the output cells from their reference: w1 ln(2w1) + (1-w1) ln(2(1-w1))."""
    return float(_d2_vec(w1))


def k4_input_divergence(w1: float, w2: float) -> float:
    """KL of the input cells from their reference at a cell-parametrized point."""
    OverlapPoint(w1, w2, "cell")
    p11 = w1 - w2
    p00 = 1.0 - w1 - w2
    return float(_xlny(p11, 6.0 * p11) + _xlny(2.0 * w2, 3.0 * w2) + _xlny(p00, 6.0 * p00))


def k4_minimizing_w2(w1: float) -> float:
    """The w2 minimizing the input divergence at fixed w1: (2 - sqrt(D)) / 3."""
    w1 = float(_check_unit(w1, "minimizing w2"))
    return (2.0 - float(_sqrt_disc(np.asarray(w1)))) / 3.0


def k4_min_input_divergence(w1: float) -> float:
    """Input divergence minimized over w2 at fixed w1."""
    return float(_dmin_vec(w1))


def k4_quadratic_bound(w1: float) -> float:
    """Lower bound 6 (1/2 - w1)^2 on the minimized input divergence."""
    return float(_dplus_vec(w1))


def k4_logsum_bound(w1: float) -> float:
    """Log-sum-inequality lower bound on [0, 5/12]; value 0 at the right end."""
    return float(_dminus_vec(w1))


def k4_ratio_envelope(w1: float) -> float:
    """Largest divergence ratio at fixed w1; the removable point 1/2 maps to 1/3."""
    w1 = float(_check_unit(w1, "ratio envelope"))
    if w1 == 0.5:
        return 1.0 / 3.0
    return float(_d2_vec(w1) / _dmin_vec(w1))


@dataclass(frozen=True)
class K4Certificate:
    """Grid certificate that the k = 4 contraction supremum is the corner value.

    Not a formal proof: the resolution and all margins are recorded so
    the certificate can be audited.
    """

    w_bar: float
    w_0: float
    grid_resolution: int
    max_ratio_found: float
    conjectured_d_star: float
    ratio_at_w_bar: float
    margins: dict


def certify_k4_contraction(grid_points: int = 20001, root_tol: float = 1e-12) -> K4Certificate:
    """Run the five k = 4 checks at grid resolution and emit the certificate.

    Checks: (i) the minimized divergence dominates the quadratic bound on
    [0, 1]; (ii) it dominates the log-sum bound up to their crossover
    w_bar; (iii) the quadratic upper ratio decreases on [w_bar, 1/2];
    (iv) the corner-ratio comparison curve has exactly the roots
    {0, w_0} on [0, 5/12]; (v) the grid maximum of the ratio envelope
    stays within 1e-6 of the conjectured value.  Any failure raises
    :class:`CertificateError` naming the check and the witness point.
    """
    if grid_points < 10**4:
        raise ParameterError(f"need grid_points >= 1e4, got {grid_points}")
    d_star = conjectured_contraction(4)
    w_bar = find_root(
        lambda x: k4_quadratic_bound(x) - k4_logsum_bound(x), 0.05, 0.2, root_tol
    )
    if not 0.108 < w_bar < 0.1087:
        raise CertificateError("w_bar_range", w_bar, "crossover left its expected interval")
    tol = 1e-12
    margins = {}

    xs = np.linspace(0.0, 1.0, grid_points)
    gap_plus = _dmin_vec(xs) - _dplus_vec(xs)
    i = int(np.argmin(gap_plus))
    margins["dmin_minus_dplus_min"] = float(gap_plus[i])
    if gap_plus[i] < -tol:
        raise CertificateError("d_min_vs_d_plus", float(xs[i]), "quadratic bound violated")

    xs_lo = np.append(np.linspace(0.0, w_bar, grid_points, endpoint=False), w_bar)
    gap_minus = _dmin_vec(xs_lo) - _dminus_vec(xs_lo)
    i = int(np.argmin(gap_minus))
    margins["dmin_minus_dminus_min"] = float(gap_minus[i])
    if gap_minus[i] < -tol:
        raise CertificateError("d_min_vs_d_minus", float(xs_lo[i]), "log-sum bound violated")

    xs_hi = np.linspace(w_bar, 0.5, grid_points)
    with np.errstate(divide="ignore", invalid="ignore"):
        r_plus = _d2_vec(xs_hi) / _dplus_vec(xs_hi)
    r_plus[-1] = 1.0 / 3.0
    steps = np.diff(r_plus)
    i = int(np.argmax(steps))
    margins["rplus_max_increase"] = float(steps[i])
    if steps[i] > tol:
        raise CertificateError("r_plus_monotone", float(xs_hi[i]), "upper ratio increased")

    xs_f = np.linspace(0.0, _W_PLUS, grid_points)
    f = _d2_vec(xs_f) - d_star * _dminus_vec(xs_f)
    margins["f_at_origin"] = float(f[0])
    if abs(f[0]) > 1e-9:
        raise CertificateError("root_at_origin", 0.0, "comparison curve not zero at the origin")
    signs = np.sign(f[1:])
    nonzero = signs[signs != 0.0]
    flips = int(np.count_nonzero(nonzero[:-1] * nonzero[1:] < 0))
    if flips != 1:
        raise CertificateError("root_count", float(xs_f[-1]), f"expected 1 interior root, saw {flips}")
    flip_at = int(np.nonzero(np.diff(np.sign(f[1:])) != 0)[0][0]) + 1
    w_0 = find_root(
        lambda x: k4_output_divergence(x) - d_star * k4_logsum_bound(x),
        float(xs_f[flip_at]),
        float(xs_f[flip_at + 1]),
        root_tol,
    )
    margins["f_at_w_bar"] = float(k4_output_divergence(w_bar) - d_star * k4_logsum_bound(w_bar))

    with np.errstate(divide="ignore", invalid="ignore"):
        r_max = _d2_vec(xs) / _dmin_vec(xs)
    r_max[xs == 0.5] = 1.0 / 3.0
    i = int(np.argmax(r_max))
    max_ratio = float(r_max[i])
    margins["grid_max_headroom"] = d_star + 1e-6 - max_ratio
    if max_ratio > d_star + 1e-6:
        raise CertificateError("grid_max", float(xs[i]), "ratio envelope exceeded the corner value")

    return K4Certificate(
        w_bar=w_bar,
        w_0=w_0,
        grid_resolution=grid_points,
        max_ratio_found=max_ratio,
        conjectured_d_star=d_star,
        ratio_at_w_bar=float(_d2_vec(w_bar) / _dplus_vec(w_bar)),
        margins=margins,
    )


# ---------------------------------------------------------------------------
# Structured-text formats: channel inputs and certificate outputs
# ---------------------------------------------------------------------------


def format_channel(p_star: Pmf, channel: Channel) -> str:
    """Channel/pmf document: n_in, n_out, column-major matrix, reference pmf."""
    cols = channel.matrix.T.ravel()
    matrix = ", ".join(repr(float(v)) for v in cols)
    pstar = ", ".join(repr(float(v)) for v in p_star.weights)
    return (
        f"n_in = {channel.n_in}\n"
        f"n_out = {channel.n_out}\n"
        f"matrix = [{matrix}]\n"
        f"p_star = [{pstar}]\n"
    )


def parse_channel(text: str) -> tuple[Pmf, Channel]:
    """Parse the channel/pmf document; '#' lines are comments."""
    fields = {}
    order = iter(("n_in", "n_out", "matrix", "p_star"))
    last = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        last = lineno
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {line!r}", line=lineno)
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        try:
            wanted = next(order)
        except StopIteration:
            raise ParseError(f"unexpected extra field {key!r}", line=lineno) from None
        if key != wanted:
            raise ParseError(f"expected field {wanted!r}, got {key!r}", line=lineno)
        try:
            if key in ("n_in", "n_out"):
                fields[key] = int(value)
            else:
                if not (value.startswith("[") and value.endswith("]")):
                    raise ValueError
                body = value[1:-1].strip()
                fields[key] = [float(tok) for tok in body.split(",")] if body else []
        except ValueError:
            raise ParseError(f"could not parse value for {key!r}", line=lineno) from None
    missing = [f for f in ("n_in", "n_out", "matrix", "p_star") if f not in fields]
    if missing:
        raise ParseError(f"missing fields {missing}", line=last + 1)
    n_in, n_out = fields["n_in"], fields["n_out"]
    if len(fields["matrix"]) != n_in * n_out:
        raise ParseError(f"matrix needs {n_in * n_out} entries, got {len(fields['matrix'])}", line=last)
    if len(fields["p_star"]) != n_in:
        raise ParseError(f"p_star needs {n_in} entries, got {len(fields['p_star'])}", line=last)
    matrix = np.array(fields["matrix"], dtype=float).reshape(n_in, n_out).T
    return Pmf(np.array(fields["p_star"])), Channel(matrix)


def format_certificate(cert: K4Certificate) -> str:
    lines = [
        f"w_bar = {cert.w_bar!r}",
        f"w_0 = {cert.w_0!r}",
        f"grid_resolution = {cert.grid_resolution}",
        f"max_ratio_found = {cert.max_ratio_found!r}",
        f"conjectured_d_star = {cert.conjectured_d_star!r}",
        f"ratio_at_w_bar = {cert.ratio_at_w_bar!r}",
    ]
    for name in sorted(cert.margins):
        lines.append(f"margin.{name} = {cert.margins[name]!r}")
    return "\n".join(lines) + "\n"
