"""Finite-section diagnostics of Riesz-basisness and coefficient-hypothesis checks.

Two independent kinds of evidence are produced:

* Gram reports: the root system of a truncated problem over an index window is
  normalized and its Gram matrix ``G[i, j] = <phi_j, phi_i>`` examined.  For a
  Riesz basis the extreme eigenvalues of finite sections stay bounded away
  from 0 and infinity; ``riesz_ratio = mu_max / mu_min`` growing along nested
  windows witnesses failure.
* Coefficient verdicts: windowed versions of the two coefficient conditions
  (uniform two-sided bounds on ``|alpha_n / beta_n|`` with a lower bound on
  ``|alpha_n| n^(m+1)``, or a sequence along which
  ``|alpha/beta| + |beta/alpha|`` diverges).  Verdicts are three-valued and
  only ever state consistency with a hypothesis.

Index convention: windows and sequences use the coefficient index ``n`` (even
for periodic, odd for antiperiodic problems).  Pair ``k`` of the spectrum is
governed by ``n = 2k`` or ``n = 2k + 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from . import floquet
from .floquet import FloquetOptions, RootFunction, SolverError, SpectralPair
from .potential import (
    Counterexample,
    Combination,
    Potential,
    PotentialError,
    lacunary_support,
    direction_bound,
    make_power_decay,
    perturb,
)

__all__ = [
    "GramReport",
    "Margin",
    "TheoremVerdict",
    "DensityReport",
    "CONSISTENT",
    "VIOLATED",
    "INCONCLUSIVE",
    "BASIS_LIKE",
    "NON_BASIS_LIKE",
    "UNDETERMINED",
    "window_indices",
    "pair_of_index",
    "root_system",
    "gram_matrix",
    "gram_report",
    "gram_sweep",
    "pair_angle",
    "margins",
    "check_theorem1",
    "check_theorem2",
    "hypothesis_class",
    "density_demo",
]

CONSISTENT = "Consistent"
VIOLATED = "Violated"
INCONCLUSIVE = "Inconclusive"

BASIS_LIKE = "BasisLike"
NON_BASIS_LIKE = "NonBasisLike"
UNDETERMINED = "Undetermined"


# ---------------------------------------------------------------------------
# index bookkeeping
# ---------------------------------------------------------------------------


def _parity_ok(bc_case: int, n: int) -> bool:
    return n % 2 == (0 if bc_case == 1 else 1)


def window_indices(bc_case: int, lo: int, hi: int) -> list[int]:
    """Coefficient indices of the relevant parity in ``[lo, hi]`` that govern a pair ``k >= 1``."""
    first = 2 if bc_case == 1 else 3
    return [n for n in range(max(lo, first), hi + 1) if _parity_ok(bc_case, n)]


def pair_of_index(bc_case: int, n: int) -> int:
    return n // 2 if bc_case == 1 else (n - 1) // 2


# ---------------------------------------------------------------------------
# Gram matrices
# ---------------------------------------------------------------------------


@dataclass
class PairAngle:
    index: int
    pair: int
    classification: str
    lambda_minus: complex
    lambda_plus: complex
    angle: float


@dataclass
class GramReport:
    bc_case: int
    window: tuple[int, int]
    system_size: int
    mu_min: float
    mu_max: float
    riesz_ratio: float
    angles: list[PairAngle] = field(default_factory=list)
    method: str = "shooting"

    def angle_at(self, index: int) -> float:
        for a in self.angles:
            if a.index == index:
                return a.angle
        raise KeyError(index)


def _inner(f: np.ndarray, g: np.ndarray) -> complex:
    return complex(np.mean(f * np.conj(g)))


def pair_angle(u_plus: RootFunction | np.ndarray, u_minus: RootFunction | np.ndarray,
               tol: float = 1e-8) -> float:
    """``|<u_plus, u_minus>|`` for unit-normalized grid functions."""
    a = getattr(u_plus, "values", u_plus)
    b = getattr(u_minus, "values", u_minus)
    for name, v in (("u_plus", a), ("u_minus", b)):
        nrm = math.sqrt(float(np.mean(np.abs(v) ** 2)))
        if abs(nrm - 1.0) > tol:
            raise ValueError(f"{name} is not unit-normalized (norm {nrm:.12g})")
    return min(1.0, abs(_inner(a, b)))


def _normalized(v: np.ndarray) -> np.ndarray:
    return v / math.sqrt(float(np.mean(np.abs(v) ** 2)))


@dataclass
class _PairSystem:
    index: int
    pair: SpectralPair
    members: list[np.ndarray]


def _shooting_members(q, bc_case, pair, grid_size, opts):
    if pair.classification == floquet.SEPARATED:
        (um,) = floquet.eigenfunction(q, bc_case, pair.lambda_minus, grid_size, opts)
        (up,) = floquet.eigenfunction(q, bc_case, pair.lambda_plus, grid_size, opts)
        return [um.values, up.values]
    lam = 0.5 * (pair.lambda_minus + pair.lambda_plus)
    fns = floquet.eigenfunction(q, bc_case, lam, grid_size, opts)
    if pair.classification == floquet.DOUBLE_SEMISIMPLE:
        if len(fns) != 2:
            raise SolverError(f"pair n={pair.n}: expected a two-dimensional eigenspace")
        return [fns[0].values, fns[1].values]
    u = fns[0]
    v = floquet.associated_function(q, bc_case, pair, u, grid_size, opts)
    return [v.chain_partner.values, _normalized(v.values)]


def _galerkin_members(q, bc_case, n, grid_size, K_matrix):
    w, V, freqs = floquet.galerkin_pair(q, bc_case, n, K_matrix)
    x = np.arange(grid_size) / grid_size
    basis = np.exp(2j * np.pi * np.outer(x, freqs))
    pair = SpectralPair(bc_case, n, complex(w[0]), complex(w[1]), floquet.SEPARATED,
                        floquet.coeff_index(bc_case, n), floquet.reference_value(bc_case, n))
    return pair, [_normalized(basis @ V[:, 0]), _normalized(basis @ V[:, 1])]


def root_system(q: Potential, bc_case: int, indices: Iterable[int], grid_size: int,
                opts: FloquetOptions = floquet.DEFAULT_OPTIONS, method: str = "shooting",
                K_matrix: Optional[int] = None) -> list[_PairSystem]:
    """Unit-normalized root functions for the pairs governed by ``indices``."""
    out = []
    for idx in indices:
        n = pair_of_index(bc_case, idx)
        try:
            if method == "shooting":
                pair = floquet.find_pair(q, bc_case, n, opts)
                members = _shooting_members(q, bc_case, pair, grid_size, opts)
            elif method == "galerkin":
                km = K_matrix or max(n + 16, q.K + 4)
                pair, members = _galerkin_members(q, bc_case, n, grid_size, km)
            else:
                raise ValueError(f"unknown method {method!r}")
        except SolverError as exc:
            raise SolverError(f"index {idx} (pair {n}): {exc}") from exc
        out.append(_PairSystem(idx, pair, [_normalized(m) for m in members]))
    return out


def gram_matrix(members: Sequence[np.ndarray]) -> np.ndarray:
    F = np.array(members)
    G = (F.conj() @ F.T) / F.shape[1]
    # G[i, j] = <phi_j, phi_i>; symmetrize away rounding
    return 0.5 * (G + G.conj().T)


def _report(bc_case, window, systems, method):
    members = [m for s in systems for m in s.members]
    if not members:
        raise ValueError(f"window {window} contains no pairs for case {bc_case}")
    mu = np.linalg.eigvalsh(gram_matrix(members))
    mu_min, mu_max = float(max(mu[0], 0.0)), float(mu[-1])
    ratio = mu_max / mu_min if mu_min > 0 else math.inf
    angles = [PairAngle(s.index, s.pair.n, s.pair.classification, s.pair.lambda_minus,
                        s.pair.lambda_plus, min(1.0, abs(_inner(s.members[1], s.members[0]))))
              for s in systems]
    return GramReport(bc_case, tuple(window), len(members), mu_min, mu_max, max(ratio, 1.0),
                      angles, method)


def _check_window(bc_case, n_lo, n_hi, grid_size):
    if n_lo < 1 or n_hi < n_lo:
        raise ValueError(f"invalid window [{n_lo}, {n_hi}]")
    if grid_size < 4 * n_hi + 1:
        raise ValueError(f"grid_size={grid_size} too small for window up to {n_hi}; "
                         f"need at least {4 * n_hi + 1}")


def gram_report(q: Potential, bc_case: int, n_lo: int, n_hi: int, grid_size: Optional[int] = None,
                opts: FloquetOptions = floquet.DEFAULT_OPTIONS, method: str = "shooting",
                K_matrix: Optional[int] = None) -> GramReport:
    grid_size = grid_size or _default_grid(q, n_hi)
    _check_window(bc_case, n_lo, n_hi, grid_size)
    systems = root_system(q, bc_case, window_indices(bc_case, n_lo, n_hi), grid_size, opts,
                          method, K_matrix)
    return _report(bc_case, (n_lo, n_hi), systems, method)


def gram_sweep(q: Potential, bc_case: int, windows: Sequence[tuple[int, int]],
               grid_size: Optional[int] = None, opts: FloquetOptions = floquet.DEFAULT_OPTIONS,
               method: str = "shooting", K_matrix: Optional[int] = None) -> list[GramReport]:
    """Gram reports over several windows; each pair is solved once."""
    n_top = max(hi for _, hi in windows)
    grid_size = grid_size or _default_grid(q, n_top)
    for lo, hi in windows:
        _check_window(bc_case, lo, hi, grid_size)
    union = sorted({n for lo, hi in windows for n in window_indices(bc_case, lo, hi)})
    systems = {s.index: s for s in root_system(q, bc_case, union, grid_size, opts, method, K_matrix)}
    return [_report(bc_case, (lo, hi), [systems[n] for n in window_indices(bc_case, lo, hi)], method)
            for lo, hi in windows]


def _default_grid(q, n_hi):
    # room for the eigenfunction's frequency n/2 spread by the bandwidth of q
    need = max(4 * n_hi + 1, 2 * (n_hi // 2 + 2 * q.K) + 1)
    return int(2 ** math.ceil(math.log2(need)))


# ---------------------------------------------------------------------------
# coefficient hypotheses
# ---------------------------------------------------------------------------


@dataclass
class Margin:
    n: int
    alpha: complex
    beta: complex
    alpha_margin: float   # |alpha_n| n^(m+1)
    beta_margin: float    # |beta_n| n^(m+1)
    r: float              # |alpha_n / beta_n|
    R: float              # r + 1/r, inf if either coefficient vanishes


@dataclass
class TheoremVerdict:
    theorem: int
    bc_case: int
    m: int
    indices: list[int]
    margins: list[Margin]
    verdict: str
    stats: dict = field(default_factory=dict)
    reason: str = ""

    @property
    def sequence(self) -> list[int]:
        return self.stats.get("candidates", self.indices)


def margins(q: Potential, indices: Iterable[int], m: int) -> list[Margin]:
    out = []
    for n in indices:
        a, b = q.coeff(-n), q.coeff(n)
        w = float(n) ** (m + 1)
        aa, bb = abs(a), abs(b)
        if aa > 0 and bb > 0:
            r = aa / bb
            R = r + 1.0 / r
        else:
            r = math.inf if bb == 0 and aa > 0 else (0.0 if aa == 0 and bb > 0 else math.nan)
            R = math.inf
        out.append(Margin(n, a, b, aa * w, bb * w, r, R))
    return out


def _default_indices(bc_case, lo_exclusive, hi):
    return [n for n in range(lo_exclusive + 1, hi + 1) if _parity_ok(bc_case, n)]


def _dyadic(bc_case, indices):
    return [n for n in indices if lacunary_support(bc_case, n)]


def check_theorem1(q: Potential, bc_case: int, m: int = 0, n0: int = 1, n_max: int = 64,
                   theta: float = 4.0, indices: Optional[Sequence[int]] = None) -> TheoremVerdict:
    """Windowed check of the two-sided ratio condition with the lower bound on ``|alpha_n|``.

    The default window is every index of the relevant parity in ``(n0, n_max]``;
    an explicit ``indices`` sequence replaces it.
    """
    if theta <= 1:
        raise ValueError("theta must exceed 1")
    if indices is None:
        if n_max < 2 * n0:
            raise ValueError(f"need n_max >= 2 n0, got n0={n0}, n_max={n_max}")
        indices = _default_indices(bc_case, n0, n_max)
    indices = [int(n) for n in indices]
    bad = [n for n in indices if not _parity_ok(bc_case, n)]
    if bad:
        raise ValueError(f"indices of the wrong parity for case {bc_case}: {bad[:5]}")
    mg = margins(q, indices, m)
    if not mg:
        return TheoremVerdict(1, bc_case, m, indices, mg, INCONCLUSIVE, reason="empty window")
    c0 = min(x.alpha_margin for x in mg)
    rs = [x.r for x in mg]
    finite = [r for r in rs if 0 < r < math.inf]
    stats = {"c0": c0, "c1": min(rs), "c2": max(rs), "theta": theta}
    stats["ratio_spread"] = (max(finite) / min(finite)) if finite else math.inf
    pos = [x for x in mg if x.alpha_margin > 0]
    if len(pos) >= 2:
        ln = np.log([x.n for x in pos])
        stats["alpha_margin_slope"] = float(np.polyfit(ln, np.log([x.alpha_margin for x in pos]), 1)[0])

    zeros = [x.n for x in mg if x.alpha == 0 or x.beta == 0]
    if zeros:
        return TheoremVerdict(1, bc_case, m, indices, mg, VIOLATED, stats,
                              f"vanishing coefficient at n={zeros[:8]}")
    dy = [x for x in mg if lacunary_support(bc_case, x.n)]
    if len(dy) >= 2:
        r_dy = np.array([x.r for x in dy])
        steps = np.diff(r_dy)
        cumulative = r_dy[-1] / r_dy[0]
        stats["dyadic_cumulative_factor"] = float(cumulative)
        if (np.all(steps > 0) and cumulative >= theta) or (np.all(steps < 0) and cumulative <= 1 / theta):
            return TheoremVerdict(1, bc_case, m, indices, mg, VIOLATED, stats,
                                  f"ratio along the dyadic subsequence changes monotonically by {cumulative:.4g}")
    if c0 > 0 and stats["ratio_spread"] <= theta:
        return TheoremVerdict(1, bc_case, m, indices, mg, CONSISTENT, stats)
    return TheoremVerdict(1, bc_case, m, indices, mg, INCONCLUSIVE, stats,
                          f"ratio spread {stats['ratio_spread']:.4g} exceeds theta={theta}")


def check_theorem2(q: Potential, bc_case: int, m: int = 0, n_max: int = 256,
                   c_floor: float = 1e-6, sigma_min: float = 0.1, min_candidates: int = 4,
                   min_span: float = 8.0, indices: Optional[Sequence[int]] = None) -> TheoremVerdict:
    """Search the relevant parity class for a sequence along which the ratio diverges.

    Candidates have both ``|alpha_n| n^(m+1)`` and ``|beta_n| n^(m+1)`` at least
    ``c_floor``.  The growth exponent is the least-squares slope of
    ``log max(r_n, 1/r_n)`` against ``log n``; since
    ``max(r, 1/r) <= R_n <= max(r, 1/r) + 1`` it has the same divergence as ``R_n``.
    """
    if indices is None:
        indices = _default_indices(bc_case, 0, n_max)
    indices = [int(n) for n in indices]
    mg = margins(q, indices, m)
    cand = [x for x in mg if x.alpha_margin >= c_floor and x.beta_margin >= c_floor]
    stats = {"candidates": [x.n for x in cand], "c_floor": c_floor, "sigma_min": sigma_min}
    if cand:
        stats["c0"] = min(min(x.alpha_margin, x.beta_margin) for x in cand)
    if len(cand) < 2:
        return TheoremVerdict(2, bc_case, m, indices, mg, INCONCLUSIVE, stats,
                              f"{len(cand)} candidate indices above c_floor; need at least 2")
    ln = np.log([float(x.n) for x in cand])
    dominant = np.log([max(x.r, 1.0 / x.r) for x in cand])
    slope = float(np.polyfit(ln, dominant, 1)[0])
    stats["slope"] = slope
    stats["slope_logR"] = float(np.polyfit(ln, np.log([x.R for x in cand]), 1)[0])
    span = cand[-1].n / cand[0].n
    stats["span"] = float(span)
    if len(cand) < min_candidates or span < min_span:
        return TheoremVerdict(2, bc_case, m, indices, mg, INCONCLUSIVE, stats,
                              f"{len(cand)} candidates spanning a factor {span:.3g}; "
                              f"need {min_candidates} spanning {min_span}")
    if slope >= sigma_min:
        return TheoremVerdict(2, bc_case, m, indices, mg, CONSISTENT, stats)
    return TheoremVerdict(2, bc_case, m, indices, mg, INCONCLUSIVE, stats,
                          f"growth exponent {slope:.4g} below sigma_min={sigma_min}")


def hypothesis_class(v1: TheoremVerdict, v2: TheoremVerdict) -> str:
    if v2.verdict == CONSISTENT:
        return NON_BASIS_LIKE
    if v1.verdict == CONSISTENT:
        return BASIS_LIKE
    return UNDETERMINED


# ---------------------------------------------------------------------------
# density construction
# ---------------------------------------------------------------------------


class DensityError(RuntimeError):
    pass


@dataclass
class DensityReport:
    target: str
    delta: float
    construction: str
    l1_distance_bound: float
    indices: list[int]
    start_verdicts: tuple[TheoremVerdict, TheoremVerdict]
    perturbed_verdicts: tuple[TheoremVerdict, TheoremVerdict]
    start_class: str
    perturbed_class: str
    start_gram: Optional[GramReport] = None
    perturbed_gram: Optional[GramReport] = None
    perturbed: Optional[Potential] = field(default=None, repr=False)

    @property
    def flipped(self) -> bool:
        return self.start_class != self.perturbed_class and self.perturbed_class == self.target


def _lacunary_terms(rule):
    if isinstance(rule, Counterexample):
        yield 1.0, rule
    elif isinstance(rule, Combination):
        for w, r in rule.terms:
            for ww, rr in _lacunary_terms(r):
                yield w * ww, rr


def _verdicts(q, bc_case, m, n0, n_max, theta, sigma_min, c_floor, indices):
    v1 = check_theorem1(q, bc_case, m, n0, n_max, theta, indices=indices)
    v2 = check_theorem2(q, bc_case, m, n_max, c_floor, sigma_min, indices=indices)
    return v1, v2


def density_demo(q_start: Potential, delta: float, target: str, n_max: int = 256,
                 bc_case: int = 1, m: int = 0, n0: int = 1, theta: float = 4.0,
                 sigma_min: float = 0.1, c_floor: float = 1e-6,
                 gram_window: Optional[tuple[int, int]] = (1, 4), grid_size: Optional[int] = None,
                 opts: FloquetOptions = floquet.DEFAULT_OPTIONS) -> DensityReport:
    """Perturb ``q_start`` by at most ``delta`` in L1 so that its hypothesis class becomes ``target``.

    NonBasisLike: add a scaled lacunary counterexample.  Joint scaling of
    ``alpha_n`` and ``beta_n`` keeps ``r_n``, so its growth survives wherever
    the start potential is negligible; on collision the lacunary support is
    shifted to higher octaves.

    BasisLike: first try a symmetric power-decay direction on the window.  If
    the start potential dominates there (a lacunary start), add instead a
    symmetric copy of its dominant lacunary side; the ratio then saturates at
    ``~U/delta`` once the correction beats the smaller side, and both
    potentials are judged on a probe of lacunary indices beyond that crossover.
    """
    if not delta > 0:
        raise PotentialError(f"delta must be positive, got {delta}")
    if target not in (BASIS_LIKE, NON_BASIS_LIKE):
        raise ValueError(f"target must be {BASIS_LIKE} or {NON_BASIS_LIKE}")
    K = max(q_start.K, 8)
    window = _default_indices(bc_case, n0, n_max)
    args = (bc_case, m, n0, n_max, theta, sigma_min, c_floor)

    attempts = []
    if target == NON_BASIS_LIKE:
        for p_min in range(1, 7):
            d = Potential(Counterexample(bc_case, 0.3, 0.7, p_min), K, m)
            attempts.append((f"lacunary counterexample direction, p >= {p_min}", d, window))
    else:
        s = m + 1.5
        parity = "even" if bc_case == 1 else "odd"
        attempts.append((f"symmetric power-decay direction s={s}", make_power_decay(s, s, parity, K, m), window))
        for w, rule in _lacunary_terms(q_start.rule):
            if rule.case != bc_case:
                continue
            e_big = min(rule.eps1, rule.eps2)
            e_small = max(rule.eps1, rule.eps2)
            d = Potential(Counterexample(bc_case, e_big, e_big, rule.p_min), K, m)
            t = delta / d.l1_bound()
            # crossover where t n^-e_big beats |w| n^-e_small by a factor 16
            gap = e_small - e_big
            p_lo = max(rule.p_min, math.ceil(math.log2((16 * abs(w) / t) ** (1 / gap))) + 1) if gap > 0 else rule.p_min
            shift = 0 if bc_case == 1 else 1
            probe = [2**p + shift for p in range(p_lo, p_lo + 17)]
            attempts.append((f"symmetric lacunary correction, probe p in [{p_lo}, {p_lo + 16}]", d, probe))

    for construction, direction, indices in attempts:
        q_new = perturb(q_start, delta, direction)
        v_new = _verdicts(q_new, *args, indices=indices)
        if hypothesis_class(*v_new) == target:
            break
    else:
        raise DensityError(f"no admissible direction reaches {target} from {q_start.label or 'q_start'}")

    v_start = _verdicts(q_start, *args, indices=indices)
    # the added term is (delta / U) * d with ||d||_{L1} <= U
    d_used, U = direction_bound(direction)
    l1 = delta / U * d_used.l1_bound()
    report = DensityReport(target, delta, construction, float(l1), list(indices), v_start, v_new,
                           hypothesis_class(*v_start), hypothesis_class(*v_new), perturbed=q_new)
    if gram_window is not None:
        lo, hi = gram_window
        report.start_gram = gram_report(q_start, bc_case, lo, hi, grid_size, opts)
        report.perturbed_gram = gram_report(q_new, bc_case, lo, hi, grid_size, opts)
    return report

