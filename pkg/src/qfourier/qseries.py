"""Scalar q-series primitives.

q-Pochhammer symbols, the q-exponential e(z,q) = 1/(z;q)_inf, the
normalization constant

    c_{q,v} = (q^{2v+2}; q^2)_inf / ((1-q) (q^2; q^2)_inf),

and the Gauss-kernel amplitude

    A(t) = (-q^{2v+2} t; q^2)_inf (-q^{-2v}/t; q^2)_inf
           / ((-t; q^2)_inf (-q^2/t; q^2)_inf).

Every operation comes in two flavours: a fast native-float path (public
functions) and a software high-precision path (the ``*_mp`` twins, working
at ``PrecisionCtx.work_digits`` decimal digits).  Tables consumed by other
modules are generated on the high-precision path and rounded once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp

from .errors import NonConvergent, PoleAtOne

__all__ = [
    "QParams",
    "PrecisionCtx",
    "DEFAULT_CTX",
    "qpoch_finite",
    "qpoch_inf",
    "qpoch_inf_mp",
    "c_qv",
    "c_qv_mp",
    "qexp",
    "qexp_mp",
    "gauss_amplitude",
    "gauss_amplitude_mp",
]


@dataclass(frozen=True)
class QParams:
    """Lattice base ``q`` in (0, 1) and order parameter ``v`` > -1."""

    q: float
    v: float

    def __post_init__(self) -> None:
        if not (0.0 < self.q < 1.0):
            raise ValueError(f"q must lie strictly inside (0, 1), got q={self.q}")
        if not self.v > -1.0:
            raise ValueError(f"v must be greater than -1, got v={self.v}")


@dataclass(frozen=True)
class PrecisionCtx:
    """Precision policy: decimal working digits and relative tail tolerance."""

    work_digits: int = 50
    tail_tol: float = 1e-30

    def __post_init__(self) -> None:
        if self.work_digits < 16:
            raise ValueError(f"work_digits must be >= 16, got {self.work_digits}")
        if not (0.0 < self.tail_tol < 1.0):
            raise ValueError(f"tail_tol must lie in (0, 1), got {self.tail_tol}")


DEFAULT_CTX = PrecisionCtx()

# Hard ceiling on automatically escalated precision (decimal digits).
_MAX_AUTO_DIGITS = 50_000


def _check_q(q: float) -> None:
    if not (0.0 < q < 1.0):
        raise ValueError(f"q must lie strictly inside (0, 1), got q={q}")


def qpoch_finite(a: float, q: float, n: int) -> float:
    """Finite q-Pochhammer symbol (a; q)_n = prod_{k<n} (1 - a q^k)."""
    _check_q(q)
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    prod = 1.0
    aqk = a
    for _ in range(n):
        prod *= 1.0 - aqk
        aqk *= q
    return prod


def _poch_terms(a: float, q: float, tail_tol: float) -> int:
    """Number of factors K with |a| q^K < tail_tol (at least 1)."""
    if a == 0.0:
        return 1
    # |a| q^K < tol  <=>  K > (log|a| - log tol) / log(1/q)
    k = (math.log(abs(a)) - math.log(tail_tol)) / -math.log(q)
    return max(1, int(math.ceil(k)) + 1)


def qpoch_inf(a: float, q: float, ctx: PrecisionCtx = DEFAULT_CTX) -> float:
    """Infinite q-Pochhammer symbol (a; q)_inf, truncated at |a| q^K < tail_tol.

    The omitted tail satisfies |log tail| <= |a| q^K / (1 - q - |a| q^K), so the
    relative truncation error is below tail_tol/(1-q).  A factor that vanishes
    exactly (a q^k = 1 for some k) makes the product exactly 0.
    """
    _check_q(q)
    if a == 0.0:
        return 1.0
    prod = 1.0
    aqk = a
    for _ in range(_poch_terms(a, q, ctx.tail_tol)):
        factor = 1.0 - aqk
        if factor == 0.0:
            return 0.0
        prod *= factor
        aqk *= q
    return prod


def qpoch_inf_mp(a, q: float, ctx: PrecisionCtx = DEFAULT_CTX) -> mp.mpf:
    """High-precision (a; q)_inf at ``ctx.work_digits`` decimal digits."""
    _check_q(q)
    with mp.workdps(ctx.work_digits + 10):
        a_ = mp.mpf(a)
        if a_ == 0:
            return mp.mpf(1)
        q_ = mp.mpf(q)
        # Truncate when |a| q^K drops below the tail tolerance squared at the
        # working precision (never looser than 10^-(work_digits+5)).
        tol = min(ctx.tail_tol, mp.mpf(10) ** -(ctx.work_digits + 5))
        prod = mp.mpf(1)
        aqk = a_
        while abs(aqk) >= tol:
            factor = 1 - aqk
            if factor == 0:
                return mp.mpf(0)
            prod *= factor
            aqk *= q_
        return prod


def c_qv(p: QParams, ctx: PrecisionCtx = DEFAULT_CTX) -> float:
    """Normalization constant c_{q,v}; strictly positive."""
    return float(c_qv_mp(p, ctx))


def c_qv_mp(p: QParams, ctx: PrecisionCtx = DEFAULT_CTX) -> mp.mpf:
    """High-precision c_{q,v} = (q^{2v+2};q^2)_inf / ((1-q)(q^2;q^2)_inf)."""
    with mp.workdps(ctx.work_digits + 10):
        q = mp.mpf(p.q)
        q2 = q * q
        num = qpoch_inf_mp(q ** (2 * mp.mpf(p.v) + 2), float(q2), ctx)
        den = qpoch_inf_mp(q2, float(q2), ctx)
        return num / den / (1 - q)


def qexp(z: float, q: float, ctx: PrecisionCtx = DEFAULT_CTX) -> float:
    """q-exponential e(z, q) = 1/(z; q)_inf.

    For |z| < 1 this sums the series sum_n z^n/(q;q)_n; the product form used
    here extends it to every z < 1 (the product converges there and has no
    zero factor).
    """
    if z >= 1.0:
        raise PoleAtOne(f"e(z, q) has a pole at z = 1; got z={z}")
    denom = qpoch_inf(z, q, ctx)
    return 1.0 / denom


def qexp_mp(z, q: float, ctx: PrecisionCtx = DEFAULT_CTX) -> mp.mpf:
    """High-precision q-exponential 1/(z; q)_inf for z < 1."""
    if z >= 1.0:
        raise PoleAtOne(f"e(z, q) has a pole at z = 1; got z={z}")
    with mp.workdps(ctx.work_digits + 10):
        return 1 / qpoch_inf_mp(z, q, ctx)


def gauss_amplitude(t: float, p: QParams, ctx: PrecisionCtx = DEFAULT_CTX) -> float:
    """Gauss-kernel amplitude A(t) for t > 0; strictly positive."""
    return float(gauss_amplitude_mp(t, p, ctx))


def gauss_amplitude_mp(t, p: QParams, ctx: PrecisionCtx = DEFAULT_CTX) -> mp.mpf:
    """High-precision A(t), a ratio of four infinite Pochhammer products."""
    if not t > 0.0:
        raise ValueError(f"t must be positive, got t={t}")
    with mp.workdps(ctx.work_digits + 10):
        q = mp.mpf(p.q)
        v = mp.mpf(p.v)
        t_ = mp.mpf(t)
        q2 = float(q * q)
        num = qpoch_inf_mp(-(q ** (2 * v + 2)) * t_, q2, ctx) * qpoch_inf_mp(
            -(q ** (-2 * v)) / t_, q2, ctx
        )
        den = qpoch_inf_mp(-t_, q2, ctx) * qpoch_inf_mp(-(q * q) / t_, q2, ctx)
        if den == 0:
            raise NonConvergent(f"vanishing denominator product in A(t) at t={t}")
        return num / den
