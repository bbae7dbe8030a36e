"""Periodic and antiperiodic spectra of ``-u'' + q u = lam u`` on ``[0, 1]``.

Case 1 is periodic (``u(0) = u(1)``, ``u'(0) = u'(1)``), case 2 antiperiodic.
The eigenvalues are the zeros of ``D(lam) - 2`` and ``D(lam) + 2`` where
``D`` is the trace of the monodromy matrix.  Pair ``n`` sits near
``rho_n = (2 pi n)^2`` (case 1) or ``(pi (2n + 1))^2`` (case 2) and is
governed by the coefficient index ``2n`` or ``2n + 1``.

A Fourier-Galerkin matrix gives an independent route to the same spectrum.
"""
from __future__ import annotations

import cmath
import dataclasses
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np
import scipy.linalg

from . import _integrate
from .potential import Potential

__all__ = [
    "SolverError",
    "Monodromy",
    "SpectralPair",
    "RootFunction",
    "FloquetOptions",
    "SEPARATED",
    "DOUBLE_SEMISIMPLE",
    "DOUBLE_JORDAN",
    "reference_value",
    "coeff_index",
    "monodromy",
    "discriminant",
    "find_pair",
    "eigenfunction",
    "associated_function",
    "galerkin_spectrum",
    "galerkin_pair",
    "spectral_second_derivative",
    "eigen_residual",
    "chain_residual",
]

SEPARATED = "Separated"
DOUBLE_SEMISIMPLE = "DoubleSemisimple"
DOUBLE_JORDAN = "DoubleJordan"


class SolverError(RuntimeError):
    """Integration, root search or chain construction failed."""


@dataclass(frozen=True)
class FloquetOptions:
    tol: float = 1e-12          # local error tolerance of the integrator
    noise_factor: float = 4.0   # |D -+ 2| at the critical point within this many noise levels: double root
    pair_rtol: float = 0.0      # optional floor: splits below pair_rtol (1 + |rho|) are merged
    degeneracy_tol: float = 1e-6  # ||M -+ I||_F below this counts as M = +-I
    radius_cap: float = math.inf
    newton_max_iter: int = 80
    n_retries: int = 8
    eig_tol: float = 1e-6       # smallest singular value of M -+ I at an eigenvalue


DEFAULT_OPTIONS = FloquetOptions()


def _sign(bc_case: int) -> int:
    if bc_case == 1:
        return 1
    if bc_case == 2:
        return -1
    raise ValueError(f"bc_case must be 1 or 2, got {bc_case}")


def reference_value(bc_case: int, n: int) -> float:
    return (2 * math.pi * n) ** 2 if _sign(bc_case) == 1 else (math.pi * (2 * n + 1)) ** 2


def coeff_index(bc_case: int, n: int) -> int:
    return 2 * n if _sign(bc_case) == 1 else 2 * n + 1


@lru_cache(maxsize=256)
def _coef(q: Potential) -> np.ndarray:
    arr = q.coeff_array()
    arr.setflags(write=False)
    return arr


def _propagate(q, lam, y0, x_out, tol, kappa=0.0):
    states, steps, status = _integrate.run(_coef(q), lam, y0, x_out, tol, kappa)
    if status == _integrate.STATUS_UNDERFLOW:
        raise SolverError(f"step size underflow at lam={lam!r}; |lam| beyond supported range")
    if status == _integrate.STATUS_MAX_STEPS:
        raise SolverError(f"step limit of {_integrate.MAX_STEPS} reached at lam={lam!r}")
    return states


# ---------------------------------------------------------------------------
# monodromy
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Monodromy:
    lam: complex
    matrix: np.ndarray
    discriminant: complex


_ONE = np.array([1.0])
_FUND = np.array([1, 0, 0, 1], dtype=complex)


def monodromy(q: Potential, lam: complex, tol: float = DEFAULT_OPTIONS.tol) -> Monodromy:
    """Map ``(u(0), u'(0)) -> (u(1), u'(1))``; columns are the solutions with
    initial data ``(1, 0)`` and ``(0, 1)``."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    y = _propagate(q, complex(lam), _FUND, _ONE, tol)[-1]
    M = np.array([[y[0], y[2]], [y[1], y[3]]])
    return Monodromy(complex(lam), M, complex(M[0, 0] + M[1, 1]))


def discriminant(q: Potential, lam: complex, tol: float = DEFAULT_OPTIONS.tol) -> complex:
    return monodromy(q, lam, tol).discriminant


# ---------------------------------------------------------------------------
# pair search
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpectralPair:
    bc_case: int
    n: int
    lambda_minus: complex
    lambda_plus: complex
    classification: str
    coeff_index: int
    rho: float
    newton_iterations: int = 0

    @property
    def splitting(self) -> complex:
        return self.lambda_plus - self.lambda_minus

    @property
    def is_double(self) -> bool:
        return self.classification != SEPARATED


def _newton(f, x0, h, max_iter, xtol):
    """Complex Newton with central-difference derivative.

    Returns ``(root, |f(root)|, iterations, converged)``.  Linear convergence
    with ratio near 1/2 (a double root) ends the iteration early; the caller
    resolves such roots through the critical point of ``f``.
    """
    x = complex(x0)
    fx = f(x)
    best = (x, abs(fx))
    prev = None
    halving = 0
    for it in range(1, max_iter + 1):
        d = (f(x + h) - f(x - h)) / (2 * h)
        if d == 0 or not cmath.isfinite(d):
            break
        step = fx / d
        x = x - step
        fx = f(x)
        if not cmath.isfinite(fx):
            break
        if abs(fx) <= best[1]:
            best = (x, abs(fx))
        if abs(step) <= xtol or fx == 0:
            return x, abs(fx), it, True
        if prev is not None and abs(step) >= 0.7 * prev and abs(step) < 1e-8 * (1 + abs(x)):
            # steps no longer shrink: the discriminant noise floor is reached
            return best[0], best[1], it, True
        if prev is not None and 0.3 < abs(step) / prev < 0.7:
            halving += 1
            if halving >= 4:
                return best[0], best[1], it, False
        else:
            halving = 0
        prev = abs(step)
    return best[0], best[1], max_iter, False


def _critical_point(f, x0, h1, h2, max_iter, xtol):
    """Zero of ``f'`` near ``x0`` (the midpoint of a nearly double root)."""
    x = complex(x0)
    for _ in range(max_iter):
        f0, fp, fm = f(x), f(x + h1), f(x - h1)
        d1 = (fp - fm) / (2 * h1)
        d2 = (f(x + h2) - 2 * f0 + f(x - h2)) / h2**2
        if d2 == 0:
            break
        step = d1 / d2
        x -= step
        if abs(step) <= xtol:
            break
    f0 = f(x)
    d2 = (f(x + h2) - 2 * f0 + f(x - h2)) / h2**2
    return x, f0, d2


def _pencil_roots(q, sigma, lam, tol):
    h = 1e-4 * math.sqrt(1.0 + abs(lam))
    A = monodromy(q, lam, tol).matrix - sigma * np.eye(2)
    B = (monodromy(q, lam + h, tol).matrix - monodromy(q, lam - h, tol).matrix) / (2 * h)
    d = scipy.linalg.eigvals(A, -B)
    d = d[np.isfinite(d)]
    return lam + d if d.size == 2 else None


def _pencil_center(q, sigma, lam, tol):
    """Mean of the two pencil roots: a sharper location of a double root than
    the critical point of ``D -+ 2``, whose error scales with sqrt(noise)."""
    roots = _pencil_roots(q, sigma, lam, tol)
    if roots is None:
        return lam
    c = complex(np.mean(roots))
    return c if abs(c - lam) < 1e-6 * (1 + abs(lam)) else lam


def _pencil_split(q, sigma, lam, tol, agree=0.01):
    """Resolve a pair whose splitting is below the noise of ``D``.

    The individual entries of the monodromy carry the splitting at first
    order, where ``D -+ 2`` only sees it at second order.  The roots of the
    linearized pencil ``(M - +-I) + delta M'`` are accepted when the
    splitting they give is reproduced by an integration 100x tighter;
    otherwise ``None`` (a genuine double root at this resolution).
    """
    coarse = _pencil_roots(q, sigma, lam, tol)
    fine = _pencil_roots(q, sigma, lam, tol * 1e-2)
    if coarse is None or fine is None:
        return None
    s_coarse = abs(coarse[0] - coarse[1])
    s_fine = abs(fine[0] - fine[1])
    if s_fine == 0 or abs(s_coarse - s_fine) > agree * s_fine:
        return None
    return complex(fine[0]), complex(fine[1])


def _pencil_polish(q, sigma, r1, r2, tol):
    """One pencil correction per root of a close separated pair.

    ``D -+ 2`` has slope ~ splitting * D'' at such roots, which amplifies
    its noise; the pencil works on the monodromy entries directly.  A
    correction is kept only if it is small against the splitting.
    """
    out = []
    gap = abs(r1 - r2)
    for r in (r1, r2):
        roots = _pencil_roots(q, sigma, r, tol)
        if roots is not None:
            c = roots[np.argmin(np.abs(roots - r))]
            if abs(c - r) < 0.25 * gap:
                r = complex(c)
        out.append(r)
    return out[0], out[1]


def find_pair(q: Potential, bc_case: int, n: int,
              opts: FloquetOptions = DEFAULT_OPTIONS) -> SpectralPair:
    """Both roots of ``D(lam) -+ 2`` inside the disk around ``rho_n``.

    Newton from seeds ``rho_n + c_0 +- offset`` finds the first root; the
    second comes from Newton on the deflated function ``f / (lam - lam_1)``.
    Close pairs are re-resolved through the critical point ``lam_c`` of ``f``:
    the pair is declared double when ``|f(lam_c)|`` is within a few times the
    measured integration error of ``D``, otherwise both roots are polished
    from the local quadratic model.
    """
    if n < 1:
        raise ValueError(f"pair index must be >= 1, got {n}")
    sigma = _sign(bc_case)
    rho = reference_value(bc_case, n)
    idx = coeff_index(bc_case, n)
    radius = min(2 * math.pi**2 * (2 * n + 1), opts.radius_cap)
    sqrt_rho = math.sqrt(rho)
    tol = opts.tol

    def f(lam):
        return discriminant(q, lam, tol) - 2 * sigma

    c0 = q.coeff(0) if q.K >= 0 else 0j
    a, b = (q.coeff(-idx), q.coeff(idx)) if idx <= q.K else (0j, 0j)
    offset = 0.3 * math.sqrt(abs(a * b)) + 1e-3 * sqrt_rho
    center = rho + c0
    h = 1e-4 * sqrt_rho
    xtol = 1e-14 * (1 + rho)
    in_disk = lambda z: abs(z - rho) <= radius  # noqa: E731

    seeds = [(center - offset, center + offset)]
    for j in range(opts.n_retries):
        phase = cmath.exp(2j * math.pi * (j + 0.5) / opts.n_retries)
        scale = (1.0 + j) * offset
        seeds.append((center - scale * phase, center + scale * phase))

    iterations = 0
    roots = None
    for s1, s2 in seeds:
        r1, _, it1, _ = _newton(f, s1, h, opts.newton_max_iter, xtol)
        iterations += it1
        if not in_disk(r1):
            continue

        def g(lam, r1=r1):
            return f(lam) / (lam - r1)

        start = s2 if abs(s2 - r1) > 10 * h else s2 + offset
        r2, _, it2, _ = _newton(g, start, h, opts.newton_max_iter, xtol)
        iterations += it2
        if in_disk(r2):
            roots = (r1, r2)
            break
    if roots is None:
        raise SolverError(f"pair search failed: fewer than two roots of D {'-' if sigma > 0 else '+'} 2 "
                          f"near rho={rho:.6g} (case {bc_case}, n={n}); bandwidth or range inadequate")

    r1, r2 = roots
    merge_tol = opts.pair_rtol * (1 + abs(rho))
    double = polished = False
    if abs(r1 - r2) < 0.1 * sqrt_rho:
        lc, fc, d2 = _critical_point(f, 0.5 * (r1 + r2), h, 1e-2 * sqrt_rho, 30, xtol)
        # error of D at this tolerance, measured against a tighter integration
        noise = max(abs(discriminant(q, lc, tol) - discriminant(q, lc, tol * 1e-2)), 1e-14)
        half = cmath.sqrt(-2 * fc / d2) if d2 != 0 else complex(math.inf)
        if (abs(fc) <= opts.noise_factor * noise or 2 * abs(half) < merge_tol) and in_disk(lc):
            resolved = None if 2 * abs(half) < merge_tol else _pencil_split(q, sigma, lc, tol)
            if resolved is None:
                r1 = r2 = _pencil_center(q, sigma, lc, tol)
                double = True
            else:
                r1, r2 = resolved
                polished = True
        else:
            p1, _, it1, ok1 = _newton(f, lc - half, h, opts.newton_max_iter, xtol)
            p2, _, it2, ok2 = _newton(f, lc + half, h, opts.newton_max_iter, xtol)
            iterations += it1 + it2
            if ok1 and ok2 and abs(p1 - p2) > 0.5 * abs(half):
                r1, r2 = p1, p2
            else:
                r1, r2 = lc - half, lc + half

    if not (double or polished) and abs(r1 - r2) < 0.1 * sqrt_rho:
        r1, r2 = _pencil_polish(q, sigma, r1, r2, tol)

    lo, hi = sorted((r1, r2), key=lambda z: (z.real, z.imag))
    if double:
        M = monodromy(q, lo, tol).matrix
        dev = np.linalg.norm(M - sigma * np.eye(2))
        cls = DOUBLE_SEMISIMPLE if dev <= opts.degeneracy_tol else DOUBLE_JORDAN
    else:
        cls = SEPARATED
    return SpectralPair(bc_case, n, complex(lo), complex(hi), cls, idx, rho, iterations)


# ---------------------------------------------------------------------------
# root functions
# ---------------------------------------------------------------------------


@dataclass
class RootFunction:
    kind: str                    # "Eigen" or "Associated"
    lam: complex
    bc_case: int
    values: np.ndarray           # u(x_j), x_j = j / M
    derivative: np.ndarray       # u'(x_j)
    end_state: np.ndarray        # (u(1), u'(1))
    chain_partner: Optional["RootFunction"] = field(default=None, repr=False)

    @property
    def grid_size(self) -> int:
        return self.values.shape[0]

    @property
    def l2_norm(self) -> float:
        return float(np.sqrt(np.mean(np.abs(self.values) ** 2)))

    @property
    def boundary_residual(self) -> float:
        s = _sign(self.bc_case)
        return float(abs(self.values[0] - s * self.end_state[0])
                     + abs(self.derivative[0] - s * self.end_state[1]))

    def scaled(self, c: complex) -> "RootFunction":
        return RootFunction(self.kind, self.lam, self.bc_case, c * self.values, c * self.derivative,
                            c * self.end_state, self.chain_partner)


def _grid_points(grid_size):
    return np.arange(1, grid_size + 1) / grid_size


def _trajectory(q, lam, y0, grid_size, tol, kappa=0.0):
    states = _propagate(q, complex(lam), y0, _grid_points(grid_size), tol, kappa)
    return np.vstack([np.asarray(y0, dtype=complex)[None, :], states])


def _inner(f, g):
    return complex(np.mean(f * np.conj(g)))


def eigenfunction(q: Potential, bc_case: int, lam: complex, grid_size: int,
                  opts: FloquetOptions = DEFAULT_OPTIONS) -> tuple[RootFunction, ...]:
    """Unit-norm eigenfunction(s) at ``lam`` sampled on ``x_j = j / grid_size``.

    Returns one function when the kernel of ``M -+ I`` is one-dimensional and
    the orthonormalized pair from initial data ``(1, 0)``, ``(0, 1)`` when
    ``M = +-I``.
    """
    sigma = _sign(bc_case)
    M = monodromy(q, lam, opts.tol).matrix
    A = M - sigma * np.eye(2)
    tol = opts.tol
    if np.linalg.norm(A) <= opts.degeneracy_tol:
        if _pencil_split(q, sigma, lam, opts.tol) is not None:
            # resolved sub-noise splitting: a single eigenvector, read off a tighter integration
            tol = opts.tol * 1e-2
            A = monodromy(q, lam, tol).matrix - sigma * np.eye(2)
    if np.linalg.norm(A) <= opts.degeneracy_tol and tol == opts.tol:
        traj = _trajectory(q, lam, _FUND, grid_size, opts.tol)
        u1 = RootFunction("Eigen", complex(lam), bc_case, traj[:-1, 0], traj[:-1, 1], traj[-1, :2])
        u2 = RootFunction("Eigen", complex(lam), bc_case, traj[:-1, 2], traj[:-1, 3], traj[-1, 2:])
        u1 = u1.scaled(1 / u1.l2_norm)
        p = _inner(u2.values, u1.values)
        w = RootFunction("Eigen", complex(lam), bc_case, u2.values - p * u1.values,
                         u2.derivative - p * u1.derivative, u2.end_state - p * u1.end_state)
        return u1, w.scaled(1 / w.l2_norm)
    lam, x = _refine_kernel(q, lam, A, opts, tol)
    y0 = np.zeros(4, dtype=complex)
    y0[:2] = x
    traj = _trajectory(q, lam, y0, grid_size, tol)
    u = RootFunction("Eigen", complex(lam), bc_case, traj[:-1, 0], traj[:-1, 1], traj[-1, :2])
    # fix the phase so that the largest sample is real positive
    j = int(np.argmax(np.abs(u.values)))
    phase = abs(u.values[j]) / u.values[j]
    return (u.scaled(phase / u.l2_norm),)


def _refine_kernel(q, lam, A, opts, tol=None):
    """Eigenvalue correction and kernel vector from the pencil ``A + delta M'(lam)``.

    Near a close pair ``A = M - +-I`` is small in every direction at the
    discriminant-noise level, so its own kernel is ill-determined; the
    linearized pencil restores the missing direction.
    """
    tol = tol or opts.tol
    h = 1e-4 * math.sqrt(1.0 + abs(lam))
    B = (monodromy(q, lam + h, tol).matrix - monodromy(q, lam - h, tol).matrix) / (2 * h)
    deltas = scipy.linalg.eigvals(A, -B)
    deltas = deltas[np.isfinite(deltas)]
    if deltas.size == 0:
        raise SolverError(f"lam={lam!r}: degenerate monodromy pencil")
    delta = deltas[np.argmin(np.abs(deltas))]
    if abs(delta) > opts.eig_tol * (1.0 + abs(lam)):
        raise SolverError(f"lam={lam!r} is not an eigenvalue: nearest root of det(M -+ I) "
                          f"is {abs(delta):.3e} away")
    _, _, vh = np.linalg.svd(A + delta * B)
    return complex(lam + delta), np.conj(vh[-1])


def _chain_blocks(q, lam, tol):
    """Monodromy ``M`` and the block ``P`` mapping initial ``u`` data to ``v(1)``
    for the augmented system with ``v(0) = 0``."""
    M = np.empty((2, 2), dtype=complex)
    P = np.empty((2, 2), dtype=complex)
    for k in range(2):
        y0 = np.zeros(4, dtype=complex)
        y0[k] = 1.0
        end = _propagate(q, lam, y0, _ONE, tol, kappa=1.0)[-1]
        M[:, k] = end[:2]
        P[:, k] = end[2:]
    return M, P


def _kernels(A):
    """Analytic right and left kernel vectors of a near-singular 2x2 matrix."""
    (a, b), (c, d) = A
    if abs(a) + abs(b) >= abs(c) + abs(d):
        r = np.array([b, -a])
    else:
        r = np.array([d, -c])
    if abs(a) + abs(c) >= abs(b) + abs(d):
        l = np.array([c, -a])
    else:
        l = np.array([d, -b])
    return r, l


def _jordan_point(q, sigma, lam0, lam1, opts, max_iter=40):
    """Secant search for the zero of the chain solvability function.

    At a Jordan eigenvalue ``lam*`` the chain system ``A w = -P r`` is
    consistent, where ``r`` spans the kernel of ``A = M -+ I``.  The
    function ``s(lam) = l^T P r`` (``l`` the left kernel) is analytic with a
    simple zero there, while ``det A`` only has a double zero.
    """
    def s(lam):
        M, P = _chain_blocks(q, lam, opts.tol)
        A = M - sigma * np.eye(2)
        r, l = _kernels(A)
        nr = np.linalg.norm(r) * np.linalg.norm(l)
        return (l @ P @ r) / (nr if nr > 0 else 1.0)

    x0, x1 = complex(lam0), complex(lam1)
    if x0 == x1:
        x1 = x0 + 1e-6 * (1 + abs(x0))
    f0, f1 = s(x0), s(x1)
    for _ in range(max_iter):
        if f1 == f0:
            break
        x2 = x1 - f1 * (x1 - x0) / (f1 - f0)
        x0, f0 = x1, f1
        x1, f1 = x2, s(x2)
        if abs(x1 - x0) <= 1e-15 * (1 + abs(x1)):
            break
    return x1


def associated_function(q: Potential, bc_case: int, pair: SpectralPair, u: RootFunction,
                        grid_size: Optional[int] = None,
                        opts: FloquetOptions = DEFAULT_OPTIONS,
                        residual_tol: float = 1e-6) -> RootFunction:
    """Chain partner ``v`` with ``v'' - q v + lam v = u`` and the same boundary conditions.

    The eigenvalue is first moved to the exact zero of the solvability
    function, where ``u`` is recomputed (its phase aligned with the input).
    The particular solution with zero initial data is then corrected by a
    combination of the fundamental solutions solving ``(M -+ I) w = -p``;
    the gauge is ``<v, u> = 0``.  The returned ``v.chain_partner`` is the
    recomputed ``u``.
    """
    if pair.classification != DOUBLE_JORDAN:
        raise SolverError(f"no associated function: pair n={pair.n} is {pair.classification}")
    grid_size = grid_size or u.grid_size
    # v is O(1 / splitting scale); integrate tighter so its periodic mismatch stays negligible
    tight = dataclasses.replace(opts, tol=opts.tol * 1e-2)
    sigma = _sign(bc_case)
    mid = 0.5 * (pair.lambda_minus + pair.lambda_plus)
    lam = _jordan_point(q, sigma, u.lam, mid, tight)
    if abs(lam - mid) > max(abs(pair.splitting), opts.eig_tol * (1 + abs(mid))) + 1e-9 * (1 + abs(mid)):
        raise SolverError(f"chain equation unsolvable at n={pair.n}: no Jordan point near the pair")
    M, P = _chain_blocks(q, lam, tight.tol)
    A = M - sigma * np.eye(2)
    r, _ = _kernels(A)
    traj = _trajectory(q, lam, np.concatenate([r, [0, 0]]), grid_size, tight.tol)
    u_new = RootFunction("Eigen", complex(lam), bc_case, traj[:-1, 0], traj[:-1, 1], traj[-1, :2])
    c = _inner(u.values, u_new.values)
    u_new = u_new.scaled(c / abs(c) / u_new.l2_norm if c != 0 else 1 / u_new.l2_norm)
    u0 = np.array([u_new.values[0], u_new.derivative[0]])
    p = P @ u0
    # A is rank one at a Jordan eigenvalue; drop the noise-level singular value
    w, *_ = np.linalg.lstsq(A, -p, rcond=1e-6)
    defect = np.linalg.norm(A @ w + p)
    if defect > residual_tol * (1 + np.linalg.norm(p)):
        raise SolverError(f"chain equation unsolvable at n={pair.n}: boundary defect {defect:.3e}")
    traj = _trajectory(q, lam, np.concatenate([u0, w]), grid_size, tight.tol, kappa=1.0)
    v = RootFunction("Associated", complex(lam), bc_case, traj[:-1, 2], traj[:-1, 3], traj[-1, 2:], u_new)
    c = _inner(v.values, u_new.values) / _inner(u_new.values, u_new.values)
    v = RootFunction("Associated", complex(lam), bc_case, v.values - c * u_new.values,
                     v.derivative - c * u_new.derivative, v.end_state - c * u_new.end_state, u_new)
    res = chain_residual(q, v)
    if res > residual_tol:
        raise SolverError(f"chain equation unsolvable at n={pair.n}: residual {res:.3e} "
                          f"(boundary defect {v.boundary_residual:.3e}); pair is likely not a Jordan block")
    return v


# ---------------------------------------------------------------------------
# residual checks by spectral differentiation
# ---------------------------------------------------------------------------


def spectral_second_derivative(values: np.ndarray, bc_case: int) -> np.ndarray:
    """``u''`` on the uniform grid; antiperiodic data are differentiated as
    ``exp(i pi x) w(x)`` with ``w`` periodic."""
    M = values.shape[0]
    x = np.arange(M) / M
    k = 2 * np.pi * np.fft.fftfreq(M, d=1.0 / M)
    if M % 2 == 0:
        k[M // 2] = 0.0
    if _sign(bc_case) == 1:
        return np.fft.ifft(-(k**2) * np.fft.fft(values))
    e = np.exp(1j * np.pi * x)
    wh = np.fft.fft(values / e)
    w1 = np.fft.ifft(1j * k * wh)
    w2 = np.fft.ifft(-(k**2) * wh)
    return e * (w2 + 2j * np.pi * w1 - np.pi**2 * (values / e))


def _qgrid(q, M):
    from .potential import evaluate
    return evaluate(q, M)


def eigen_residual(q: Potential, u: RootFunction) -> float:
    """``||u'' - q u + lam u|| / ||u||`` in the discrete L2 norm."""
    d2 = spectral_second_derivative(u.values, u.bc_case)
    r = d2 - _qgrid(q, u.grid_size) * u.values + u.lam * u.values
    return float(np.sqrt(np.mean(np.abs(r) ** 2)) / u.l2_norm)


def chain_residual(q: Potential, v: RootFunction) -> float:
    """``||v'' - q v + lam v - u|| / ||u||`` for an associated function."""
    u = v.chain_partner
    d2 = spectral_second_derivative(v.values, v.bc_case)
    r = d2 - _qgrid(q, v.grid_size) * v.values + v.lam * v.values - u.values
    return float(np.sqrt(np.mean(np.abs(r) ** 2)) / u.l2_norm)


# ---------------------------------------------------------------------------
# Galerkin oracle
# ---------------------------------------------------------------------------


def _frequencies(bc_case: int, K_matrix: int) -> np.ndarray:
    if _sign(bc_case) == 1:
        return np.arange(-K_matrix, K_matrix + 1, dtype=float)
    return np.arange(-K_matrix - 1, K_matrix + 1, dtype=float) + 0.5


def galerkin_spectrum(q: Potential, bc_case: int, K_matrix: int):
    """Eigenvalues and eigenvectors of ``A[j, k] = (2 pi j)^2 delta_jk + c_{j-k}``.

    Returns ``(eigenvalues, eigenvectors, frequencies)`` sorted by real part;
    ``eigenvectors[:, i]`` holds the amplitudes of ``exp(2 pi i j x)``.
    """
    if K_matrix < q.K + 4:
        raise ValueError(f"K_matrix={K_matrix} must be at least bandwidth + 4 = {q.K + 4}")
    freqs = _frequencies(bc_case, K_matrix)
    diff = np.rint(freqs[:, None] - freqs[None, :]).astype(int)
    coef = _coef(q)
    T = np.zeros(diff.shape, dtype=complex)
    inside = np.abs(diff) <= q.K
    T[inside] = coef[diff[inside] + q.K]
    A = np.diag((2 * np.pi * freqs) ** 2).astype(complex) + T
    try:
        w, V = np.linalg.eig(A)
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"Galerkin eigensolver failed: {exc}") from exc
    order = np.lexsort((w.imag, w.real))
    return w[order], V[:, order], freqs


def galerkin_pair(q: Potential, bc_case: int, n: int, K_matrix: Optional[int] = None):
    """The two Galerkin eigenvalues nearest ``rho_n`` (sorted) with eigenvectors."""
    K_matrix = K_matrix or max(n + 16, q.K + 4)
    w, V, freqs = galerkin_spectrum(q, bc_case, K_matrix)
    rho = reference_value(bc_case, n) + q.coeff(0)
    near = np.argsort(np.abs(w - rho))[:2]
    near = sorted(near, key=lambda i: (w[i].real, w[i].imag))
    return w[near], V[:, near], freqs
