"""Numerical joint normal-Poisson Stein solution.

The interpolation T_s h mixes a Gaussian smoothing in x with the transition
law of independent immigration-death chains in y.  The Stein solution is an
integral of T_s h over s in [0, 1], evaluated here by adaptive Gauss-Legendre
quadrature after the substitution s = 1 - u^2.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from numpy.polynomial.legendre import leggauss

from .bounds import log_plus
from .errors import BudgetExceeded

TAIL_TOL = 1e-9
MAX_SERIES = 2000


@dataclass(frozen=True)
class NormalPoissonParams:
    sigma: np.ndarray
    lam: np.ndarray

    def __init__(self, sigma, lam):
        sigma = np.atleast_2d(np.asarray(sigma, dtype=float))
        lam = np.atleast_1d(np.asarray(lam, dtype=float))
        if sigma.shape[0] != sigma.shape[1]:
            raise ValueError("sigma must be square")
        if not np.allclose(sigma, sigma.T, atol=1e-12):
            raise ValueError("sigma must be symmetric")
        if np.linalg.eigvalsh(sigma).min() < -1e-10:
            raise ValueError("sigma must be positive semidefinite")
        if (lam <= 0).any():
            raise ValueError("Poisson means must be strictly positive")
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "lam", lam)

    @property
    def d(self) -> int:
        return self.sigma.shape[0]

    @property
    def r(self) -> int:
        return self.lam.shape[0]

    def root(self) -> np.ndarray:
        """A matrix L with L L^T = sigma, valid for singular sigma too."""
        vals, vecs = np.linalg.eigh(self.sigma)
        return vecs * np.sqrt(np.clip(vals, 0.0, None))


# ---------------------------------------------------------------- transition


def transition(y: Sequence[int], z: Sequence[int], s: float, lam: Sequence[float]) -> float:
    """p_s(y, z): binomial thinning of y plus Poisson(lam * s) immigration."""
    out = 1.0
    for yj, zj, lj in zip(y, z, lam):
        acc = 0.0
        for k in range(min(yj, zj) + 1):
            m = zj - k
            acc += (
                math.comb(yj, k) * (1 - s) ** k * s ** (yj - k)
                * (lj * s) ** m * math.exp(-lj * s) / math.factorial(m)
            )
        out *= acc
    return out


def _kernel_1d(y: int, zmax: int, s: np.ndarray, lam: float) -> np.ndarray:
    """Array (len(s), zmax + 1) of one-coordinate transition probabilities."""
    s = np.asarray(s, dtype=float)
    rate = lam * s
    pois = np.empty((s.size, zmax + 1))
    pois[:, 0] = np.exp(-rate)
    for m in range(1, zmax + 1):
        pois[:, m] = pois[:, m - 1] * rate / m
    out = np.zeros((s.size, zmax + 1))
    for k in range(min(y, zmax) + 1):
        w = math.comb(y, k) * (1 - s) ** k * s ** (y - k)
        out[:, k:] += w[:, None] * pois[:, : zmax + 1 - k]
    return out


def _log_m(y: int, z: int, lam: float) -> float:
    """log of the dominating weight M_{y,z}."""
    if z <= y:
        return 0.0
    return max(0.0, z * math.log(lam)) - math.lgamma(z - y + 1)


def _m_tail(y: int, zmax: int, lam: float) -> float:
    total = 0.0
    z = zmax + 1
    while True:
        log_term = _log_m(y, z, lam)
        if log_term > 700:
            raise BudgetExceeded(f"dominating series for lambda={lam:g} overflows")
        term = math.exp(log_term)
        total += term
        # terms decay factorially once z - y exceeds lam
        if z - y > lam + 1 and term < 1e-30 * max(total, 1e-300):
            return total
        z += 1


def truncation(y: Sequence[int], lam: Sequence[float], tol: float = TAIL_TOL) -> tuple[list[int], float]:
    """Per-coordinate cut-offs whose dominated tail mass is below ``tol``."""
    totals = [(yj + 1) + _m_tail(yj, yj, lj) for yj, lj in zip(y, lam)]
    cut = [int(yj + math.ceil(lj)) + 2 for yj, lj in zip(y, lam)]
    while True:
        tails = [_m_tail(yj, cj, lj) for yj, cj, lj in zip(y, cut, lam)]
        bound = 0.0
        for j, tj in enumerate(tails):
            rest = 1.0
            for k, tk in enumerate(totals):
                if k != j:
                    rest *= tk
            bound += tj * rest
        if bound <= tol:
            return cut, bound
        if max(cut) >= MAX_SERIES:
            raise BudgetExceeded(f"series tail {bound:.3g} above {tol:.3g}")
        cut = [c + 1 + c // 4 for c in cut]


# --------------------------------------------------------------- y weights


class Weight:
    """Bounded function chi of y in Z_+^r with |chi| <= 1."""

    label = "weight"

    def __call__(self, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def is_constant(self) -> bool:
        return False

    def vanishes_off_zero(self) -> bool:
        return False

    def transition_mean(self, y, s, lam) -> Optional[np.ndarray]:
        """Closed form of sum_z chi(z) p_s(y, z) when one is known."""
        return None


class PgfWeight(Weight):
    """chi(y) = Re(w ** sum(y)) for a complex w with |w| <= 1.

    w = 1 gives the constant, w = 0 the indicator of y = 0, real w in (0, 1)
    an exponential decay and w on the unit circle an oscillation.
    """

    def __init__(self, w: complex, label: str | None = None):
        if abs(w) > 1:
            raise ValueError("|w| must not exceed 1")
        self.w = complex(w)
        self.label = label or f"pgf({w:.3g})"

    def __call__(self, y: np.ndarray) -> np.ndarray:
        total = np.asarray(y).sum(axis=-1)
        if self.w == 0:
            return (total == 0).astype(float)
        return np.real(self.w ** total)

    def is_constant(self) -> bool:
        return self.w == 1

    def vanishes_off_zero(self) -> bool:
        return self.w == 0

    def transition_mean(self, y, s, lam) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        out = np.ones(s.shape, dtype=complex)
        for yj, lj in zip(y, lam):
            out *= (s + (1 - s) * self.w) ** yj * np.exp(lj * s * (self.w - 1))
        return np.real(out)


class CallableWeight(Weight):
    """Any bounded chi given as a vectorised callable; no closed forms."""

    def __init__(self, fn: Callable[[np.ndarray], np.ndarray], label: str):
        self.fn = fn
        self.label = label

    def __call__(self, y: np.ndarray) -> np.ndarray:
        return np.asarray(self.fn(np.asarray(y)), dtype=float)


def _grid(cut: Sequence[int]) -> np.ndarray:
    axes = [np.arange(c + 1) for c in cut]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack(mesh, axis=-1)


def _contract(values: np.ndarray, kernels: list[np.ndarray]) -> np.ndarray:
    """sum_z values[..., z] prod_j kernels[j][s, z_j]; values has a leading s axis."""
    out = values
    for ker in reversed(kernels):
        shape = (ker.shape[0],) + (1,) * (out.ndim - 2) + (ker.shape[1],)
        out = (out * ker.reshape(shape)).sum(axis=-1)
    return out


def weight_transition_mean(weight: Weight, y, s, lam, tol: float = TAIL_TOL) -> np.ndarray:
    """Series evaluation of sum_z chi(z) p_s(y, z) for an array of s."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    cut, _ = truncation(y, lam, tol)
    kernels = [_kernel_1d(yj, cj, s, lj) for yj, cj, lj in zip(y, cut, lam)]
    chi = weight(_grid(cut))
    return _contract(np.broadcast_to(chi, (s.size,) + chi.shape), kernels)


def poisson_weight_mean(weight: Weight, lam, tol: float = 1e-13) -> float:
    if isinstance(weight, PgfWeight):
        return float(weight.transition_mean([0] * len(lam), np.array(1.0), lam))
    return float(weight_transition_mean(weight, [0] * len(lam), [1.0], lam, tol)[0])


# ------------------------------------------------------------ test functions


class TestFunction:
    """h(x, y) with sup-norm at most one and x-sections in the C3 unit ball."""

    __test__ = False
    label = "h"

    def __call__(self, x, y):
        raise NotImplementedError

    def x_constant(self) -> bool:
        return False

    def y_constant(self) -> bool:
        return False

    def vanishes_off_zero(self) -> bool:
        return False

    def reference(self, params: NormalPoissonParams) -> float:
        """E h(Z, N) for Z ~ N(0, sigma) and independent N ~ Po(lam)."""
        return _generic_reference(self, params)


class TrigTest(TestFunction):
    """h(x, y) = trig(a.x + b) chi(y), trig in {sin, cos}, |a| <= 1."""

    def __init__(self, a: Sequence[float], b: float, trig: str, weight: Weight, label: str = ""):
        a = np.asarray(a, dtype=float)
        if np.linalg.norm(a) > 1 + 1e-12:
            raise ValueError("|a| must not exceed 1")
        if trig not in ("sin", "cos"):
            raise ValueError("trig must be 'sin' or 'cos'")
        self.a, self.b, self.trig, self.weight = a, float(b), trig, weight
        self.label = label or f"{trig}(a.x+{b:g})*{weight.label}"

    def _trig(self, t):
        return np.sin(t) if self.trig == "sin" else np.cos(t)

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        return self._trig(x @ self.a + self.b) * self.weight(np.asarray(y))

    def x_constant(self) -> bool:
        return not self.a.any()

    def y_constant(self) -> bool:
        return self.weight.is_constant()

    def vanishes_off_zero(self) -> bool:
        return self.weight.vanishes_off_zero()

    def gaussian_part(self, xs: np.ndarray, s: np.ndarray, sigma: np.ndarray) -> np.ndarray:
        """E trig(sqrt(1-s) a.x + sqrt(s) a.Z + b) as an array (len(s), len(xs))."""
        q = float(self.a @ sigma @ self.a)
        proj = np.asarray(xs, dtype=float) @ self.a
        s = np.asarray(s, dtype=float)[:, None]
        return np.exp(-s * q / 2) * self._trig(np.sqrt(1 - s) * proj[None, :] + self.b)

    def reference(self, params: NormalPoissonParams) -> float:
        q = float(self.a @ params.sigma @ self.a)
        return math.exp(-q / 2) * float(self._trig(self.b)) * poisson_weight_mean(self.weight, params.lam)


class CallableTest(TestFunction):
    """Arbitrary vectorised h(x, y); Gaussian smoothing by Hermite quadrature."""

    def __init__(self, fn: Callable, label: str):
        self.fn = fn
        self.label = label

    def __call__(self, x, y):
        return self.fn(np.asarray(x, dtype=float), np.asarray(y))


HERMITE_NODES = 64


def _hermite(d: int, root: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if d > 2:
        raise ValueError("Hermite fallback supports d <= 2")
    t, w = hermegauss(HERMITE_NODES)
    w = w / w.sum()
    mesh = np.stack(np.meshgrid(*([t] * d), indexing="ij"), axis=-1).reshape(-1, d)
    weights = np.prod(np.stack(np.meshgrid(*([w] * d), indexing="ij"), axis=-1).reshape(-1, d), axis=1)
    return mesh @ root.T, weights


def _generic_slepian(h: TestFunction, xs, s: float, params, grid: np.ndarray) -> np.ndarray:
    """S_s h(x, z) for every x in xs and z in grid, as (len(xs),) + grid.shape[:-1]."""
    nodes, weights = _hermite(params.d, params.root())
    pts = math.sqrt(1 - s) * np.asarray(xs)[:, None, :] + math.sqrt(s) * nodes[None, :, :]
    flat = grid.reshape(-1, grid.shape[-1])
    out = np.empty((len(xs), flat.shape[0]))
    for i, z in enumerate(flat):
        zz = np.broadcast_to(z, pts.shape[:-1] + (len(z),))
        out[:, i] = (h(pts, zz) * weights).sum(axis=1)
    return out.reshape((len(xs),) + grid.shape[:-1])


def _generic_reference(h: TestFunction, params: NormalPoissonParams, tol: float = 1e-12) -> float:
    y0 = [0] * params.r
    return float(_interpolate_batch(h, np.zeros((1, params.d)), y0, np.array([1.0]), params, tol)[0, 0])


def _interpolate_batch(h: TestFunction, xs, y, s, params, tol: float = TAIL_TOL) -> np.ndarray:
    """T_s h(x, y) as an array (len(s), len(xs))."""
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    s = np.atleast_1d(np.asarray(s, dtype=float))
    if isinstance(h, TrigTest):
        gauss = h.gaussian_part(xs, s, params.sigma)
        pois = weight_transition_mean(h.weight, y, s, params.lam, tol)
        return gauss * pois[:, None]
    cut, _ = truncation(y, params.lam, tol)
    grid = _grid(cut)
    out = np.empty((s.size, len(xs)))
    for i, si in enumerate(s):
        kernels = [_kernel_1d(yj, cj, np.array([si]), lj) for yj, cj, lj in zip(y, cut, params.lam)]
        slep = _generic_slepian(h, xs, float(si), params, grid)
        out[i] = _contract(slep, [np.repeat(k, len(xs), axis=0) for k in kernels])
    return out


def interpolate(h: TestFunction, x, y, s: float, params: NormalPoissonParams, tol: float = 1e-6) -> float:
    """T_s h(x, y) with the truncated series tail kept below ``tol``."""
    if not 0.0 <= s <= 1.0:
        raise ValueError("s must lie in [0, 1]")
    _, tail = truncation(y, params.lam, min(tol, TAIL_TOL))
    if tail > tol:
        raise BudgetExceeded(f"tail {tail:.3g} exceeds {tol:.3g}")
    return float(_interpolate_batch(h, [x], list(y), [s], params, min(tol, TAIL_TOL))[0, 0])


# ---------------------------------------------------------------- solution

_GL_LO = leggauss(16)
_GL_HI = leggauss(32)
MAX_DEPTH = 40


def _gl(fn, a: float, b: float, rule) -> np.ndarray:
    t, w = rule
    u = 0.5 * (b - a) * t + 0.5 * (b + a)
    return 0.5 * (b - a) * (w[:, None] * fn(u)).sum(axis=0)


def solve_batch(h: TestFunction, xs, y, params: NormalPoissonParams, tol: float = 1e-4) -> np.ndarray:
    """f_h(x, y) for each row of xs, all sharing one adaptive partition."""
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    y = [int(v) for v in y]
    if h.x_constant() and h.y_constant():
        return np.zeros(len(xs))
    # the reference uses the same truncated series, so the integrand is
    # analytic at u = 0 rather than carrying a 1/u tail error
    ref = _interpolate_batch(h, xs, y, np.array([1.0]), params)[0]

    def integrand(u):
        vals = _interpolate_batch(h, xs, y, 1.0 - u * u, params)
        return -(vals - ref[None, :]) / u[:, None]

    total = np.zeros(len(xs))
    stack = [(0.0, 1.0, 0)]
    while stack:
        a, b, depth = stack.pop()
        coarse = _gl(integrand, a, b, _GL_LO)
        fine = _gl(integrand, a, b, _GL_HI)
        err = float(np.abs(fine - coarse).max())
        if err <= tol * (b - a) or err < 1e-15:
            total += fine
        elif depth >= MAX_DEPTH:
            raise BudgetExceeded(f"quadrature error {err:.3g} on [{a:.3g}, {b:.3g}]")
        else:
            mid = 0.5 * (a + b)
            stack.append((a, mid, depth + 1))
            stack.append((mid, b, depth + 1))
    return total


def solve(h: TestFunction, x, y, params: NormalPoissonParams, tol: float = 1e-4) -> float:
    return float(solve_batch(h, [x], y, params, tol)[0])


FD_FIRST = 1e-4
FD_SECOND = 1e-3
SOLVE_TOL = 1e-11


def _unit(d: int, j: int) -> np.ndarray:
    e = np.zeros(d)
    e[j] = 1.0
    return e


class _Derivs:
    """Finite-difference x-derivatives of f_h(., y) at one point."""

    def __init__(self, h, x, y, params, tol=SOLVE_TOL):
        x = np.asarray(x, dtype=float)
        d = x.size
        h1, h2 = FD_FIRST, FD_SECOND
        pts = [x]
        for j in range(d):
            pts += [x + h1 * _unit(d, j), x - h1 * _unit(d, j)]
            pts += [x + h2 * _unit(d, j), x - h2 * _unit(d, j)]
        for j in range(d):
            for k in range(j + 1, d):
                for sj in (1, -1):
                    for sk in (1, -1):
                        pts.append(x + h2 * (sj * _unit(d, j) + sk * _unit(d, k)))
        vals = solve_batch(h, np.array(pts), y, params, tol)
        self.value = vals[0]
        self.grad = np.empty(d)
        self.hess = np.empty((d, d))
        pos = 1
        for j in range(d):
            fp, fm, gp, gm = vals[pos: pos + 4]
            pos += 4
            self.grad[j] = (fp - fm) / (2 * h1)
            self.hess[j, j] = (gp - 2 * vals[0] + gm) / h2**2
        for j in range(d):
            for k in range(j + 1, d):
                pp, pm, mp, mm = vals[pos: pos + 4]
                pos += 4
                self.hess[j, k] = self.hess[k, j] = (pp - pm - mp + mm) / (4 * h2**2)


def apply_generator(h, x, y, params, tol: float = SOLVE_TOL) -> float:
    """(A f_h)(x, y) with x-derivatives by central differences."""
    x = np.asarray(x, dtype=float)
    y = [int(v) for v in y]
    der = _Derivs(h, x, y, params, tol)
    out = float((params.sigma * der.hess).sum() - x @ der.grad)
    for j, lj in enumerate(params.lam):
        up = list(y)
        up[j] += 1
        out += 2 * lj * (solve(h, x, up, params, tol) - der.value)
        if y[j] > 0:
            down = list(y)
            down[j] -= 1
            out += 2 * y[j] * (solve(h, x, down, params, tol) - der.value)
    return out


def generator_residual(h, x, y, params: NormalPoissonParams, tol: float = SOLVE_TOL) -> float:
    lhs = apply_generator(h, x, y, params, tol)
    rhs = float(h(np.asarray(x, float), np.asarray(y))) - h.reference(params)
    return abs(lhs - rhs)


# ------------------------------------------------------- Poisson smoothness


def poisson_unimodal_tv(lam: float) -> float:
    """sum_k |Po(lam){k} - Po(lam){k-1}|, checked against 2 Po(lam){floor(lam)}."""
    if lam <= 0:
        raise ValueError("lambda must be positive")

    def pmf(k: int) -> float:
        return math.exp(k * math.log(lam) - lam - math.lgamma(k + 1))

    kmax = int(lam + 40 * math.sqrt(lam) + 60)
    terms = [abs(pmf(0))]
    terms += [abs(pmf(k) - pmf(k - 1)) for k in range(1, kmax + 2)]
    total = math.fsum(terms)
    mode = 2 * pmf(math.floor(lam))
    if abs(total - mode) > 1e-12:
        raise ArithmeticError(f"summed variation {total} differs from {mode}")
    return total


# ---------------------------------------------------------- smoothness bounds


def _magic(lam: float) -> float:
    return -math.expm1(-lam) / (2 * lam)


def difference_bound(quantity: str, lam: Sequence[float], idx: tuple, h: TestFunction) -> float:
    """Cited upper bound for one probed quantity.

    Quantities: 'lip', 'd2', 'd3' (x-seminorms of f), 'dj' (first y-difference),
    'djk' (second y-difference, j == k allowed), 'dk_dj' (y-difference of a
    first x-derivative), 'dl_djk' (y-difference of a second x-derivative) and
    'djk_uniform' (the min-lambda bound for any second y-difference).
    """
    if quantity in ("lip", "d2", "d3"):
        if h.x_constant():
            return 0.0
        return {"lip": 1.0, "d2": 0.5, "d3": 1 / 3}[quantity]
    if h.y_constant():
        return 0.0
    improved = h.vanishes_off_zero()
    e = math.e
    if quantity == "dj":
        (j,) = idx
        lj = lam[j]
        return min(0.5, _magic(lj)) if improved else min(1.0, math.sqrt(2 / (e * lj)))
    if quantity == "djk":
        j, k = idx
        if j == k:
            lj = lam[j]
            if improved:
                return min(0.25, _magic(lj))
            return min(1.0, 8 / 3 * math.sqrt(1 / (e * lj)), (2 + 2 * log_plus(e * lj)) / (e * lj))
        if improved:
            return min(0.25, _magic(lam[j] + lam[k]))
        low = min(lam[j], lam[k])
        return min(
            1.0,
            4 / 3 * math.sqrt(2 / (e * lam[j])),
            4 / 3 * math.sqrt(2 / (e * lam[k])),
            (1 + log_plus(2 * e * low)) / (e * low),
        )
    if quantity == "djk_uniform":
        low = min(lam)
        return min(1.0, (2 + 2 * log_plus(e * low)) / (e * low))
    if quantity == "dk_dj":
        (k,) = idx
        if improved:
            return min(1 / 3, _magic(lam[k]))
        return min(2 / 3, math.pi / (2 * math.sqrt(2)) * math.sqrt(1 / (e * lam[k])))
    if quantity == "dl_djk":
        (l,) = idx
        if improved:
            return min(0.25, _magic(lam[l]))
        return min(0.5, 4 / (3 * math.sqrt(2)) * math.sqrt(1 / (e * lam[l])))
    raise ValueError(f"unknown quantity {quantity!r}")


@dataclass(frozen=True)
class ProbeRow:
    h_id: str
    x: tuple
    y: tuple
    quantity: str
    measured: float
    bound: float

    @property
    def margin(self) -> float:
        return self.bound - self.measured


PROBE_BUDGET = 1e-3


def _third_partials(h, x, y, params, tol) -> float:
    """max |d_jkl f| via central differences of finite-difference Hessians."""
    d = x.size
    step = FD_SECOND
    worst = 0.0
    for l in range(d):
        up = _Derivs(h, x + step * _unit(d, l), y, params, tol).hess
        dn = _Derivs(h, x - step * _unit(d, l), y, params, tol).hess
        worst = max(worst, float(np.abs((up - dn) / (2 * step)).max()))
    return worst


def smoothness_probe(
    params: NormalPoissonParams,
    dictionary: Iterable[TestFunction],
    grid: Iterable[tuple[Sequence[float], Sequence[int]]],
    tol: float = SOLVE_TOL,
    third: bool = True,
) -> list[ProbeRow]:
    lam = list(params.lam)
    r = params.r
    rows: list[ProbeRow] = []
    for h in dictionary:
        for x, y in grid:
            x = np.asarray(x, dtype=float)
            y = [int(v) for v in y]
            key = (tuple(float(v) for v in x), tuple(y))

            def add(q, idx, measured):
                rows.append(ProbeRow(h.label, key[0], key[1], q if not idx else f"{q}{idx}",
                                     float(measured), difference_bound(q, lam, idx, h)))

            cache: dict[tuple, _Derivs] = {}

            def at(yy):
                yy = tuple(yy)
                if yy not in cache:
                    cache[yy] = _Derivs(h, x, list(yy), params, tol)
                return cache[yy]

            def shift(yy, j, by=1):
                out = list(yy)
                out[j] += by
                return tuple(out)

            base = at(y)
            add("lip", (), np.linalg.norm(base.grad))
            add("d2", (), np.abs(base.hess).max())
            if third:
                add("d3", (), _third_partials(h, x, y, params, tol))
            for j in range(r):
                add("dj", (j,), abs(at(shift(y, j)).value - base.value))
                dj_grad = at(shift(y, j)).grad - base.grad
                add("dk_dj", (j,), np.abs(dj_grad).max())
                dj_hess = at(shift(y, j)).hess - base.hess
                add("dl_djk", (j,), np.abs(dj_hess).max())
                for k in range(j, r):
                    both = at(shift(shift(y, j), k)).value
                    second = both - at(shift(y, j)).value - at(shift(y, k)).value + base.value
                    add("djk", (j, k), abs(second))
                    add("djk_uniform", (), abs(second))
    return rows


PROBE_HEADER = ("h_id", "x", "y", "quantity", "measured", "bound", "margin")


def probe_csv(rows: Iterable[ProbeRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(PROBE_HEADER)
    for row in rows:
        writer.writerow([
            row.h_id,
            " ".join(f"{v:g}" for v in row.x),
            " ".join(str(v) for v in row.y),
            row.quantity,
            f"{row.measured:.10g}",
            f"{row.bound:.10g}",
            f"{row.margin:.10g}",
        ])
    return buf.getvalue()


# -------------------------------------------------------------- dictionary


def _direction(d: int, angle: float, radius: float) -> np.ndarray:
    if d == 1:
        return np.array([radius * math.copysign(1.0, math.cos(angle))])
    v = np.zeros(d)
    v[0], v[1] = math.cos(angle), math.sin(angle)
    return radius * v


def _inverse_total(y: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.asarray(y).sum(axis=-1))


def dictionary(d: int, r: int, size: int = 12) -> list[TrigTest]:
    """Fixed family of test functions certified to lie in the H3 unit ball."""
    at_zero = PgfWeight(0.0, "1{y=0}")
    one = PgfWeight(1.0, "1")
    specs = [
        ("sin", 0.3, 0.0, 0.8, one),
        ("cos", -0.5, 1.0, 1.0, at_zero),
        ("sin", 1.1, 2.0, 0.6, PgfWeight(math.exp(-0.7), "exp(-0.7|y|)")),
        ("cos", 0.2, 2.7, 0.9, PgfWeight(np.exp(0.9j), "cos(0.9|y|)")),
        ("sin", 0.9, 0.0, 0.0, PgfWeight(math.exp(-0.3), "exp(-0.3|y|)")),
        ("cos", 0.7, 4.0, 0.7, one),
        ("sin", 0.0, 0.5, 1.0, at_zero),
        ("cos", 1.3, 3.5, 0.5, PgfWeight(math.exp(-1.5), "exp(-1.5|y|)")),
        ("sin", -0.8, 1.4, 0.85, PgfWeight(0.6 * np.exp(2.0j), "Re(w^|y|)")),
        ("cos", 0.4, 5.0, 0.75, CallableWeight(_inverse_total, "1/(1+|y|)")),
        ("cos", 0.0, 0.8, 1.0, one),
        ("sin", 0.6, 0.0, 0.0, one),
    ]
    out = []
    for i in range(size):
        trig, b, angle, radius, weight = specs[i % len(specs)]
        a = _direction(d, angle + 0.37 * (i // len(specs)), radius)
        out.append(TrigTest(a, b, trig, weight, label=f"h{i:02d}"))
    return out
