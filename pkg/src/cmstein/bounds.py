"""Closed-form covariances, Poisson means, constants and approximation bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from .combinatorics import DegreeSequence, double_falling, falling
from .errors import NeedsLargerN, NonpositiveLambda, PreconditionFailed

Bound = Union[float, PreconditionFailed]


def log_plus(x: float) -> float:
    return math.log(x) if x > 1.0 else 0.0


@dataclass(frozen=True)
class MomentParameters:
    lambda_s: float
    lambda_m: float
    nu: Optional[float]
    mu3: Optional[float]
    mu4: Optional[float]


def _pair_sums(ds: DegreeSequence) -> tuple[int, int]:
    """Return (sum_i (d_i)_2, sum_{i<j} (d_i)_2 (d_j)_2) as exact integers."""
    p = [falling(d, 2) for d in ds.degrees]
    total = sum(p)
    return total, (total * total - sum(x * x for x in p)) // 2


def moment_parameters(ds: DegreeSequence) -> MomentParameters:
    N = ds.N
    if N < 2:
        raise NeedsLargerN("Poisson means need N >= 2")
    s2, cross = _pair_sums(ds)
    lam_s = s2 / (2 * (N - 1))
    dd = double_falling(N - 1, 2)
    lam_m = cross / (2 * dd) if dd > 0 else 0.0
    if N > 7:
        nu = s2 / (N - 7)
        mu3 = sum(falling(d, 3) for d in ds.degrees) / (N - 7)
        mu4 = sum(falling(d, 4) for d in ds.degrees) / (N - 7)
    else:
        nu = mu3 = mu4 = None
    return MomentParameters(lam_s, lam_m, nu, mu3, mu4)


def covariance(ds: DegreeSequence) -> np.ndarray:
    """Exact covariance of the normalised isolated-edge and 2-star counts.

    A term is kept only when its combinatorial count is positive, which is
    what makes denominators like ((N-1))_4 harmless at tiny N.
    """
    n, N = ds.n, ds.N
    n1, n2 = ds.count(1), ds.count(2)
    M = N - 1
    f12, f13, f14 = falling(n1, 2), falling(n1, 3), falling(n1, 4)
    g22 = falling(n2, 2)
    dd2 = double_falling(M, 2)
    dd3 = double_falling(M, 3)
    dd4 = double_falling(M, 4)

    s11 = 0.0
    if f12:
        s11 += f12 / 2 / M * (1 - 1 / M)
    if f13:
        s11 -= f13 / M**2
    if f14:
        s11 += f14 / 4 / dd2 * 2 / M

    s12 = 0.0
    if f12 * n2:
        s12 -= (2 * f13 * n2 + f12 * n2) / (M * dd2)
    if f14 * n2:
        s12 += f14 * n2 / 2 / dd3 * 4 / M

    s22 = 0.0
    if f12 * n2:
        s22 += f12 * n2 / dd2 * (1 - 1 / dd2)
        s22 -= (4 * f13 * g22 + f14 * n2 + 2 * f12 * g22 + 4 * f13 * n2 + f12 * n2) / dd2**2
    if f14 * g22:
        s22 += f14 * g22 / dd4 * 8 * (N - 4) / dd2

    return np.array([[s11, s12], [s12, s22]]) / n


def delta_simple(ds: DegreeSequence, mp: Optional[MomentParameters] = None) -> float:
    if ds.N <= 7:
        raise NeedsLargerN("the simplicity error budget needs N > 7")
    mp = mp or moment_parameters(ds)
    nu, mu, ls, lm = mp.nu, mp.mu3, mp.lambda_s, mp.lambda_m
    M = ds.N - 1
    first = (
        7 * nu**4 + mu**2 + 4 * mu * nu**2 + 8 * nu**3
        + 4 * mu * nu + 2 * mu + 4 * nu**2 + 2 * ls
    ) / (2 * M)
    second = (6 * mu**2 + 8 * mu * nu + nu**2 + 4 * lm) / (4 * double_falling(M, 2))
    return first + second


def c1_constant(c: float) -> float:
    return (
        math.sqrt(3 * (0.5 + 1.5 * c**2 + 4 * c**3 + 3.5 * c**4 + 2 * c**6))
        + math.sqrt(2 * (2 * c**3 + 5 * c**4 + 68 * c**5 + 72 * c**6 + 72 * c**8))
        + math.sqrt(2 * (2 * c**3 + 8 * c**4 + 4 * c**5 + 56 * c**6 + 72 * c**8))
        + math.sqrt(3 * (c + 24 * c**4 + 64 * c**5 + 328 * c**6 + 256 * c**7
                         + 872 * c**8 + 2048 * c**10))
    )


def c_prime(c: float, lambda_s: float, lambda_m: float) -> float:
    return (c**2 + 6 * c**3) * lambda_s + (2 * c**2 + 8 * c**3) * lambda_m + c**3


def constants(c_star: float, lambda_s: float, lambda_m: float) -> tuple[float, float]:
    """Return (C(c*), C'(c*, lambda_s, lambda_m))."""
    if c_star < 0:
        raise ValueError("c_star must be nonnegative")
    big_c = c_star / 2 * c1_constant(c_star) + 4 / 3 * c_star**2 + 6 * c_star**3
    return big_c, c_prime(c_star, lambda_s, lambda_m)


@dataclass
class TheoryReport:
    n: int
    N: int
    sigma: np.ndarray
    moments: MomentParameters
    delta_simple: Bound
    c_star: Bound
    big_c: Bound
    c_prime: Bound
    l_n: Bound
    bound_a: Bound
    bound_b: Bound
    bound_c: Bound
    bound_c2: Bound
    diagnostics: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        def val(x):
            if isinstance(x, PreconditionFailed):
                return None
            return x

        out = {
            "n": self.n,
            "N": self.N,
            "sigma11": float(self.sigma[0, 0]),
            "sigma12": float(self.sigma[0, 1]),
            "sigma22": float(self.sigma[1, 1]),
            "lambda_s": self.moments.lambda_s,
            "lambda_m": self.moments.lambda_m,
            "nu": self.moments.nu,
            "mu3": self.moments.mu3,
            "mu4": self.moments.mu4,
        }
        for name in ("delta_simple", "c_star", "big_c", "c_prime", "l_n",
                     "bound_a", "bound_b", "bound_c", "bound_c2"):
            out[name] = val(getattr(self, name))
        failures = {}
        for name in ("delta_simple", "c_star", "l_n", "bound_a", "bound_b", "bound_c", "bound_c2"):
            x = getattr(self, name)
            if isinstance(x, PreconditionFailed):
                failures[name] = x.reason
        out["precondition_failed"] = failures
        return out


def _joint_preconditions(ds: DegreeSequence) -> Optional[str]:
    n, N = ds.n, ds.N
    if min(n, N) <= 15:
        return f"needs min(n, N) > 15, got {min(n, N)}"
    if ds.count(1) < 1:
        return "needs at least one vertex of degree 1"
    if ds.count(0) + ds.count(1) > n - 2:
        return "needs n0 + n1 <= n - 2"
    return None


def error_bounds(ds: DegreeSequence) -> TheoryReport:
    n, N = ds.n, ds.N
    mp = moment_parameters(ds)
    sigma = covariance(ds)
    ls, lm = mp.lambda_s, mp.lambda_m
    total = ls + lm
    diagnostics: list[str] = []

    def failed(name: str, reason: str) -> PreconditionFailed:
        diagnostics.append(f"{name}: {reason}")
        return PreconditionFailed(name, reason)

    if N > 7:
        delta: Bound = delta_simple(ds, mp)
    else:
        delta = failed("delta_simple", f"needs N > 7, got {N}")

    if isinstance(delta, PreconditionFailed):
        bound_b: Bound = failed("bound_b", delta.reason)
        l_n: Bound = failed("l_n", delta.reason)
    else:
        factor = 0.5 if total == 0 else min(0.5, -math.expm1(-total) / total)
        bound_b = factor * delta
        l_n = math.exp(-total) - bound_b

    reason = _joint_preconditions(ds)
    if reason is None and isinstance(delta, PreconditionFailed):
        reason = delta.reason
    if reason is not None:
        c_star: Bound = failed("c_star", reason)
        big_c: Bound = PreconditionFailed("big_c", reason)
        cp: Bound = PreconditionFailed("c_prime", reason)
        bound_a: Bound = failed("bound_a", reason)
        bound_c: Bound = failed("bound_c", reason)
        bound_c2: Bound = failed("bound_c2", reason)
    else:
        m = min(n, N)
        c_star = max(ds.count(1), ds.count(2)) / (m - 15)
        big_c, cp = constants(c_star, ls, lm)
        em = math.e * min(ls, lm)
        # both factors saturate at 2 as the smaller Poisson mean goes to 0
        grad_factor = 2.0 if em == 0 else min(2.0, 3 * math.pi / (2 * math.sqrt(2)) / math.sqrt(em))
        diff_factor = 2.0 if em == 0 else min(2.0, (4 + 4 * log_plus(em)) / em)
        bound_a = big_c / math.sqrt(m - 1) + grad_factor * cp / math.sqrt(n) + diff_factor * delta
        if l_n <= 0:
            bound_c = failed("bound_c", f"L_n = {l_n:.6g} is not positive")
            bound_c2 = failed("bound_c2", f"L_n = {l_n:.6g} is not positive")
        else:
            shrink = -math.expm1(-total) / total
            bound_c = (
                big_c / math.sqrt(m - 1)
                + min(1.0, 1.5 * shrink) * cp / math.sqrt(n)
                + min(1.0, 2 * shrink) * delta
            ) / l_n
            bound_c2 = (big_c / math.sqrt(m - 1) + cp / math.sqrt(n)) / l_n

    return TheoryReport(
        n=n, N=N, sigma=sigma, moments=mp, delta_simple=delta, c_star=c_star,
        big_c=big_c, c_prime=cp, l_n=l_n, bound_a=bound_a, bound_b=bound_b,
        bound_c=bound_c, bound_c2=bound_c2, diagnostics=diagnostics,
    )


@dataclass(frozen=True)
class MomentBounds:
    tree_variance: Bound
    tree_products: Bound
    cross_tree_multi: Bound
    cross_multi_tree: Bound
    multi: Bound

    def to_dict(self) -> dict:
        return {
            k: (None if isinstance(v, PreconditionFailed) else v)
            for k, v in self.__dict__.items()
        }


def moment_bounds(ds: DegreeSequence) -> MomentBounds:
    """Right-hand sides of the five moment bounds behind the joint bound.

    Fields, in order: the variance term over isolated trees, the product term
    over isolated trees, the two cross terms between trees and loops/double
    edges, and the loops/double-edge term.
    """
    N = ds.N
    top = max(ds.count(1), ds.count(2))
    mp = moment_parameters(ds)

    if N > 15 and ds.count(1) >= 1:
        c = top / (N - 15)
        tree_variance: Bound = c1_constant(c) * top / math.sqrt(N - 1)
    else:
        tree_variance = PreconditionFailed("tree_variance", "needs N > 15 and n1 >= 1")

    if N > 3:
        c = top / (N - 3)
        tree_products: Bound = (8 * c + 36 * c**2) * top
    else:
        tree_products = PreconditionFailed("tree_products", "needs N > 3")

    if N > 7:
        c = top / (N - 7)
        cross: Bound = c_prime(c, mp.lambda_s, mp.lambda_m)
        multi: Bound = delta_simple(ds, mp)
    else:
        cross = PreconditionFailed("cross", "needs N > 7")
        multi = PreconditionFailed("multi", "needs N > 7")
    return MomentBounds(tree_variance, tree_products, cross, cross, multi)


def comparison_bound(
    sigma: Sequence[Sequence[float]],
    lam: Sequence[float],
    sigma2: Sequence[Sequence[float]],
    lam2: Sequence[float],
) -> float:
    lam = np.asarray(lam, dtype=float)
    lam2 = np.asarray(lam2, dtype=float)
    if (lam <= 0).any() or (lam2 <= 0).any():
        raise NonpositiveLambda("Poisson means must be strictly positive")
    diff = np.abs(np.asarray(sigma, float) - np.asarray(sigma2, float)).sum()
    return 0.5 * float(diff) + 2 * float(np.abs(lam - lam2).sum())


def asymptotic_sigma(p1: float, p2: float, mu: float) -> np.ndarray:
    """Limit covariance for a degree law with P(D=1)=p1, P(D=2)=p2, E D = mu."""
    if mu <= 0:
        raise ValueError("mu must be positive")
    s11 = p1**2 / (2 * mu) - p1**3 / mu**2 + p1**4 / (2 * mu**3)
    s12 = -2 * p1**3 * p2 / mu**3 + 2 * p1**4 * p2 / mu**4
    s22 = (
        p1**2 * p2 / mu**2 - 4 * p1**3 * p2**2 / mu**4
        - p1**4 * p2 / mu**4 + 8 * p1**4 * p2**2 / mu**5
    )
    return np.array([[s11, s12], [s12, s22]])


def disjoint_destruction(N: int, e_alpha: int, e_beta: int) -> Fraction:
    """P(I_a = I_b = 1, J_ba = 0) for motifs sharing no half-edge."""
    keep = Fraction(1)
    for stage in range(1, e_alpha + 1):
        keep *= 1 - Fraction(2 * e_beta, N - 2 * (e_alpha - stage) - 1)
    return Fraction(1, double_falling(N - 1, e_alpha + e_beta)) * (1 - keep)


def common_edge_destruction(N: int) -> Fraction:
    """E[I_a I_b (1 - J_ba)] for two double edges sharing one pair."""
    return Fraction(1, double_falling(N - 1, 3)) * (1 - Fraction(N - 5, double_falling(N - 1, 2)))
