"""Complex 1-periodic potentials described by Fourier data.

A potential is ``q(x) = sum_k c_k exp(2 pi i k x)`` on ``[0, 1]``.  Coefficients
come from a *rule* that is exact for every integer ``k``; pointwise values
are only ever produced through the truncation ``|k| <= K``.

Coefficient functionals of interest::

    alpha_n = int_0^1 q(x) exp(+2 pi i n x) dx = c_{-n}
    beta_n  = int_0^1 q(x) exp(-2 pi i n x) dx = c_{+n}
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

__all__ = [
    "FiniteList",
    "Counterexample",
    "PowerDecay",
    "Combination",
    "Potential",
    "CoeffPair",
    "PotentialError",
    "trig_polynomial",
    "constant",
    "evaluate",
    "fourier_coefficients",
    "quadrature_coefficients",
    "make_counterexample",
    "make_power_decay",
    "perturb",
    "direction_bound",
    "combine",
    "lacunary_support",
    "potential_from_dict",
    "potential_to_dict",
    "load_potential",
]


class PotentialError(ValueError):
    """Invalid potential description or operation argument."""


# ---------------------------------------------------------------------------
# coefficient rules
# ---------------------------------------------------------------------------

# dyadic sums below are carried out explicitly up to this exponent and the
# remainder is bounded by a geometric tail
_DYADIC_PMAX = 60


def lacunary_support(case: int, n: int, p_min: int = 1) -> bool:
    """True if ``n`` is ``2**p`` (case 1) or ``2**p + 1`` (case 2) with ``p >= p_min``."""
    if case == 2:
        n -= 1
    return n >= 2**p_min and (n & (n - 1)) == 0


@dataclass(frozen=True)
class FiniteList:
    """Finitely many nonzero coefficients, stored as sorted ``(k, c_k)`` pairs."""

    coeffs: tuple[tuple[int, complex], ...]

    @classmethod
    def from_mapping(cls, coeffs: Mapping[int, complex]) -> "FiniteList":
        items = tuple(sorted((int(k), complex(c)) for k, c in coeffs.items() if c != 0))
        return cls(items)

    def coeff(self, k: int) -> complex:
        for kk, c in self.coeffs:
            if kk == k:
                return c
        return 0j

    def bandwidth(self) -> int | None:
        return max((abs(k) for k, _ in self.coeffs), default=0)

    def l1_bound(self) -> float:
        return float(sum(abs(c) for _, c in self.coeffs))


@dataclass(frozen=True)
class Counterexample:
    """Lacunary series: ``c_{-n} = g_n n^-eps1``, ``c_{+n} = g_n n^-eps2``.

    ``g_n = 1`` on ``n = 2**p`` (case 1) or ``n = 2**p + 1`` (case 2),
    ``p = p_min, p_min + 1, ...`` (default ``p_min = 1``), and zero elsewhere.
    """

    case: int
    eps1: float
    eps2: float
    p_min: int = 1

    def coeff(self, k: int) -> complex:
        n = abs(k)
        if k == 0 or not lacunary_support(self.case, n, self.p_min):
            return 0j
        return complex(n ** -(self.eps1 if k < 0 else self.eps2))

    def bandwidth(self) -> int | None:
        return None

    def l1_bound(self) -> float:
        total = 0.0
        shift = 0 if self.case == 1 else 1
        for p in range(self.p_min, _DYADIC_PMAX + 1):
            n = 2**p + shift
            total += n**-self.eps1 + n**-self.eps2
        # n_p >= 2**p, so the tail is dominated by two geometric series
        for e in (self.eps1, self.eps2):
            r = 2.0**-e
            total += r ** (_DYADIC_PMAX + 1) / (1.0 - r)
        return total


@dataclass(frozen=True)
class PowerDecay:
    """``c_{-n} = n^-s_plus``, ``c_{+n} = n^-s_minus`` for ``n`` of the chosen parity."""

    s_plus: float
    s_minus: float
    parity: str = "all"

    def selected(self, n: int) -> bool:
        if n <= 0:
            return False
        if self.parity == "even":
            return n % 2 == 0
        if self.parity == "odd":
            return n % 2 == 1
        return True

    def coeff(self, k: int) -> complex:
        n = abs(k)
        if not self.selected(n):
            return 0j
        return complex(n ** -(self.s_plus if k < 0 else self.s_minus))

    def bandwidth(self) -> int | None:
        return None

    def l1_bound(self, n_explicit: int = 4096) -> float:
        total = 0.0
        for s in (self.s_plus, self.s_minus):
            if s <= 1.0:
                return math.inf
            n = np.arange(1, n_explicit + 1, dtype=float)
            mask = np.array([self.selected(int(v)) for v in n])
            total += float(np.sum(n[mask] ** -s))
            # sum_{n > N} n^-s <= int_N^inf x^-s dx
            total += n_explicit ** (1.0 - s) / (s - 1.0)
        return total


@dataclass(frozen=True)
class Combination:
    """Linear combination ``sum_i w_i * rule_i``."""

    terms: tuple[tuple[complex, object], ...]

    def coeff(self, k: int) -> complex:
        return sum((w * r.coeff(k) for w, r in self.terms), 0j)

    def bandwidth(self) -> int | None:
        widths = [r.bandwidth() for _, r in self.terms]
        if any(b is None for b in widths):
            return None
        return max(widths, default=0)

    def l1_bound(self) -> float:
        return float(sum(abs(w) * r.l1_bound() for w, r in self.terms))


# ---------------------------------------------------------------------------
# potential
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoeffPair:
    n: int
    alpha: complex
    beta: complex


@dataclass(frozen=True)
class Potential:
    """Immutable potential: exact coefficient rule, truncation ``K``, smoothness ``m``.

    ``m`` is declared metadata (the Sobolev order of ``W_1^m`` together with
    periodic matching of derivatives); it is not checked symbolically.
    """

    rule: object
    K: int
    m: int = 0
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if self.K < 0:
            raise PotentialError(f"bandwidth K must be non-negative, got {self.K}")
        if self.m < 0:
            raise PotentialError(f"smoothness m must be non-negative, got {self.m}")
        bw = self.rule.bandwidth()
        if bw is not None and bw > self.K:
            raise PotentialError(f"trig polynomial has support up to |k|={bw} > K={self.K}")

    @property
    def kind(self) -> str:
        return "TrigPolynomial" if isinstance(self.rule, FiniteList) else "ClosedFormSeries"

    @property
    def coeffs(self) -> dict[int, complex]:
        """Nonzero coefficients of the truncation ``|k| <= K``."""
        out = {}
        for k in range(-self.K, self.K + 1):
            c = self.rule.coeff(k)
            if c != 0:
                out[k] = c
        return out

    def coeff(self, k: int) -> complex:
        """Exact coefficient ``c_k`` (no truncation)."""
        return self.rule.coeff(int(k))

    def coeff_array(self) -> np.ndarray:
        """Dense truncated coefficients, entry ``k + K`` holds ``c_k``."""
        return np.array([self.rule.coeff(k) for k in range(-self.K, self.K + 1)], dtype=complex)

    def truncated(self) -> "Potential":
        return Potential(FiniteList.from_mapping(self.coeffs), self.K, self.m, self.label)

    def l1_bound(self) -> float:
        """Upper bound on the L1(0,1) norm of the full series via the coefficient l1 sum."""
        return self.rule.l1_bound()

    def is_conjugate_symmetric(self, n_check: int | None = None, tol: float = 0.0) -> bool:
        n_check = self.K if n_check is None else n_check
        return all(
            abs(self.coeff(-k) - np.conj(self.coeff(k))) <= tol for k in range(0, n_check + 1)
        )

    def __add__(self, other: "Potential") -> "Potential":
        return combine([(1.0, self), (1.0, other)])

    def __mul__(self, s: complex) -> "Potential":
        return combine([(s, self)])

    __rmul__ = __mul__


def combine(terms: Iterable[tuple[complex, Potential]]) -> Potential:
    terms = list(terms)
    K = max(p.K for _, p in terms)
    m = min(p.m for _, p in terms)
    rule = Combination(tuple((complex(w), p.rule) for w, p in terms))
    if rule.bandwidth() is not None:
        coeffs = {k: rule.coeff(k) for k in range(-K, K + 1)}
        return Potential(FiniteList.from_mapping(coeffs), K, m)
    return Potential(rule, K, m)


def trig_polynomial(coeffs: Mapping[int, complex], K: int | None = None, m: int | None = None) -> Potential:
    """Finite trigonometric polynomial.  A trig polynomial lies in every ``W_1^m``;
    ``m`` defaults to 0 and may be raised freely."""
    rule = FiniteList.from_mapping(coeffs)
    K = rule.bandwidth() if K is None else K
    return Potential(rule, K, 0 if m is None else m)


def constant(c: complex, K: int = 0) -> Potential:
    return trig_polynomial({0: c}, K=K)


def make_counterexample(case: int, eps1: float, eps2: float, K: int, m: int = 0) -> Potential:
    """Lacunary counterexample family; ``|alpha_n / beta_n| = n**(eps2 - eps1)`` on the support."""
    if case not in (1, 2):
        raise PotentialError(f"case must be 1 or 2, got {case}")
    if not 0.0 < eps1 < eps2 < 1.0:
        raise PotentialError(f"need 0 < eps1 < eps2 < 1, got eps1={eps1}, eps2={eps2}")
    if K < 2:
        raise PotentialError(f"bandwidth K must be >= 2, got {K}")
    return Potential(Counterexample(case, float(eps1), float(eps2)), int(K), m,
                     label=f"counterexample(case={case}, eps1={eps1}, eps2={eps2})")


def make_power_decay(s_plus: float, s_minus: float, parity: str = "all", K: int = 64, m: int = 0) -> Potential:
    if s_plus <= 0 or s_minus <= 0:
        raise PotentialError("decay exponents must be positive")
    if parity not in ("even", "odd", "all"):
        raise PotentialError(f"parity must be even, odd or all, got {parity!r}")
    return Potential(PowerDecay(float(s_plus), float(s_minus), parity), int(K), m,
                     label=f"power(s_plus={s_plus}, s_minus={s_minus}, parity={parity})")


def evaluate(q: Potential, grid_size: int) -> np.ndarray:
    """Values of the truncated series at ``x_j = j / grid_size``."""
    if grid_size < 2 * q.K + 1:
        raise PotentialError(f"grid of {grid_size} points cannot resolve bandwidth K={q.K}; "
                             f"need at least {2 * q.K + 1}")
    buf = np.zeros(grid_size, dtype=complex)
    for k, c in zip(range(-q.K, q.K + 1), q.coeff_array()):
        buf[k % grid_size] += c
    return np.fft.ifft(buf) * grid_size


def fourier_coefficients(q: Potential, n: int) -> CoeffPair:
    """Closed-form ``(alpha_n, beta_n) = (c_{-n}, c_{+n})`` from the exact rule."""
    if n < 1:
        raise PotentialError(f"index must be >= 1, got {n}")
    return CoeffPair(n, q.coeff(-n), q.coeff(n))


def quadrature_coefficients(q: Potential, n: int, grid_size: int | None = None) -> CoeffPair:
    """``alpha_n, beta_n`` of the truncated potential by the rectangle rule on a
    uniform grid, exact for band-limited integrands when ``grid_size > K + n``."""
    if n < 1:
        raise PotentialError(f"index must be >= 1, got {n}")
    grid_size = grid_size or 2 * (q.K + n) + 2
    x = np.arange(grid_size) / grid_size
    vals = evaluate(q, grid_size)
    phase = np.exp(2j * np.pi * n * x)
    return CoeffPair(n, complex(np.mean(vals * phase)), complex(np.mean(vals / phase)))


def direction_bound(direction: Potential) -> tuple[Potential, float]:
    """``(d, U)`` with ``U`` the coefficient l1 sum of ``d``, an upper bound on
    ``||d||_{L1}``.  A direction whose coefficients are not summable is
    replaced by its truncation to ``|k| <= K``."""
    U = direction.l1_bound()
    if not math.isfinite(U):
        direction = direction.truncated()
        U = direction.l1_bound()
    if U == 0:
        raise PotentialError("perturbation direction has no nonzero coefficients")
    return direction, U


def perturb(q: Potential, delta: float, direction: Potential) -> Potential:
    """``q + (delta / U) * direction`` with ``U >= ||direction||_{L1}``
    (see :func:`direction_bound`); the result is within L1 distance ``delta`` of ``q``."""
    if not delta > 0:
        raise PotentialError(f"delta must be positive, got {delta}")
    direction, U = direction_bound(direction)
    return combine([(1.0, q), (delta / U, direction)])


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------

_FIELDS = {
    "trig": {"kind", "K", "m", "coeffs"},
    "counterexample": {"kind", "case", "eps1", "eps2", "K", "m"},
    "power": {"kind", "s_plus", "s_minus", "parity", "K", "m"},
}
_REQUIRED = {
    "trig": {"kind", "coeffs"},
    "counterexample": {"kind", "case", "eps1", "eps2", "K"},
    "power": {"kind", "s_plus", "s_minus", "K"},
}


def potential_from_dict(d: Mapping) -> Potential:
    kind = d.get("kind")
    if kind not in _FIELDS:
        raise PotentialError(f"unknown potential kind {kind!r}")
    unknown = set(d) - _FIELDS[kind]
    if unknown:
        raise PotentialError(f"unknown fields for kind {kind!r}: {sorted(unknown)}")
    missing = _REQUIRED[kind] - set(d)
    if missing:
        raise PotentialError(f"missing fields for kind {kind!r}: {sorted(missing)}")
    m = int(d.get("m", 0))
    try:
        if kind == "trig":
            coeffs = {}
            for entry in d["coeffs"]:
                k, re, im = entry
                if int(k) != k:
                    raise PotentialError(f"non-integer frequency {k!r}")
                coeffs[int(k)] = coeffs.get(int(k), 0j) + complex(float(re), float(im))
            K = d.get("K")
            return trig_polynomial(coeffs, K=None if K is None else int(K), m=m)
        if kind == "counterexample":
            return make_counterexample(int(d["case"]), float(d["eps1"]), float(d["eps2"]), int(d["K"]), m)
        return make_power_decay(float(d["s_plus"]), float(d["s_minus"]), d.get("parity", "all"), int(d["K"]), m)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, PotentialError):
            raise
        raise PotentialError(f"malformed {kind} potential: {exc}") from exc


def potential_to_dict(q: Potential) -> dict:
    r = q.rule
    if isinstance(r, FiniteList):
        return {"kind": "trig", "K": q.K, "m": q.m,
                "coeffs": [[k, c.real, c.imag] for k, c in r.coeffs]}
    if isinstance(r, Counterexample):
        return {"kind": "counterexample", "case": r.case, "eps1": r.eps1, "eps2": r.eps2,
                "K": q.K, "m": q.m}
    if isinstance(r, PowerDecay):
        return {"kind": "power", "s_plus": r.s_plus, "s_minus": r.s_minus, "parity": r.parity,
                "K": q.K, "m": q.m}
    # combinations have no file form; store the truncation
    return potential_to_dict(q.truncated())


def load_potential(source: str) -> Potential:
    """Load a potential from a JSON file path or an inline JSON object."""
    text = source.strip()
    if not text.startswith("{"):
        with open(source) as fh:
            text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PotentialError(f"invalid potential JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise PotentialError("potential JSON must be an object")
    return potential_from_dict(data)
