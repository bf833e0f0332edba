"""Two-parameter Mittag-Leffler function on the negative real axis.

E_{a,b}(z) = sum_k z^k / Gamma(a*k + b) is evaluated by three regimes:

* plain double-precision power series (with Kahan summation) while the
  terms stay small enough that cancellation is harmless,
* the algebraic asymptotic expansion -sum_k z^{-k}/Gamma(b - a*k) with
  optimal truncation for large |z| (plus the saddle-point exponential
  term when a > 1, where it is not negligible),
* the power series in extended precision (stdlib ``decimal``, with a
  Spouge gamma evaluated in the same precision) for the gap in between,
  where neither double-precision route reaches the accuracy target.

Only real z <= 1 is supported; the diffusion solvers feed in z <= 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal, localcontext
from functools import lru_cache

__all__ = ["MLParams", "MLConvergenceError", "ml_eval", "ml_decay_constant"]

_SERIES_EPS = 1e-17
_SERIES_MAX_TERMS = 10_000
# cancellation scale x = |z|^(1/alpha); largest term of the series ~ e^x
_DOUBLE_SERIES_MAX_X = 4.0
_DECIMAL_SERIES_MAX_X = 700.0
_ASYMPTOTIC_REL_TOL = 1e-13


class MLConvergenceError(ArithmeticError):
    """Series failed to converge within the term cap."""


@dataclass(frozen=True)
class MLParams:
    """Order pair (alpha, beta) of E_{alpha,beta}."""

    alpha: float
    beta: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.alpha) and 0.0 < self.alpha < 2.0):
            raise ValueError(f"alpha must lie in (0, 2), got {self.alpha}")
        if not (math.isfinite(self.beta) and self.beta > 0.0):
            raise ValueError(f"beta must be positive, got {self.beta}")


def _rgamma(x: float) -> float:
    """1 / Gamma(x) for real x, with zeros at the poles x = 0, -1, -2, ..."""
    if x > 0.0:
        if x > 171.0:
            return 0.0  # Gamma overflows; reciprocal underflows
        return 1.0 / math.gamma(x)
    if x == math.floor(x):
        return 0.0
    # reflection: 1/Gamma(x) = Gamma(1-x) sin(pi x) / pi
    log_mag = math.lgamma(1.0 - x)
    s = math.sin(math.pi * x)
    if log_mag > 700.0:
        return math.inf if s > 0 else -math.inf
    return math.exp(log_mag) * s / math.pi


def _series_double(alpha: float, beta: float, z: float) -> float:
    """Defining power series with compensated summation."""
    total = _rgamma(beta)
    comp = 0.0
    term = 1.0
    for k in range(1, _SERIES_MAX_TERMS):
        term *= z
        t = term * _rgamma(alpha * k + beta)
        y = t - comp
        s = total + y
        comp = (s - total) - y
        total = s
        if abs(t) < _SERIES_EPS * abs(total) and k > 2:
            return total
    raise MLConvergenceError(
        f"series for E_({alpha},{beta})({z}) did not converge in "
        f"{_SERIES_MAX_TERMS} terms"
    )


# ---------------------------------------------------------------------------
# extended-precision series (decimal + Spouge gamma)


def _pi_decimal() -> Decimal:
    """pi at the current decimal context precision (Machin-like series)."""
    with localcontext() as ctx:
        ctx.prec += 4
        three = Decimal(3)
        lasts, t, s, n, na, d, da = Decimal(0), three, Decimal(3), 1, 0, 0, 24
        while s != lasts:
            lasts = s
            n, na = n + na, na + 8
            d, da = d + da, da + 32
            t = (t * n) / d
            s += t
    return +s


@lru_cache(maxsize=None)
def _spouge_coeffs(a: int, prec: int) -> tuple[Decimal, ...]:
    with localcontext() as ctx:
        ctx.prec = prec + 10
        half = Decimal(1) / 2
        c0 = (2 * _pi_decimal()).sqrt()
        coeffs = [c0]
        fact = Decimal(1)
        for k in range(1, a):
            if k > 1:
                fact *= k - 1
            ak = Decimal(a - k)
            c = ak ** (Decimal(k) - half) * ak.exp() / fact
            if k % 2 == 0:
                c = -c
            coeffs.append(c)
    return tuple(coeffs)


def _spouge_core(x: Decimal, a: int, prec: int) -> Decimal:
    """Spouge approximation of Gamma(x), accurate for x in [1, 2)."""
    coeffs = _spouge_coeffs(a, prec)
    with localcontext() as ctx:
        ctx.prec = prec + 10
        half = Decimal(1) / 2
        zz = x - 1
        acc = coeffs[0]
        for k in range(1, a):
            acc += coeffs[k] / (zz + k)
        base = zz + a
        return base ** (zz + half) * (-base).exp() * acc


def _gamma_decimal(x: Decimal, a: int, prec: int) -> Decimal:
    """Gamma(x) for x > 0 in decimal arithmetic.

    The coefficient sum of the Spouge formula cancels badly away from the
    base interval, so the argument is reduced to [1, 2) and climbed back
    up with the recurrence Gamma(x + 1) = x Gamma(x).
    """
    with localcontext() as ctx:
        ctx.prec = prec + 10
        if x < 1:
            return _gamma_decimal(x + 1, a, prec) / x
        m = int(x) - 1
        y = x - m
        fac = Decimal(1)
        for j in range(m):
            fac *= y + j
        return _spouge_core(y, a, prec) * fac


_gamma_tables: dict[tuple[float, float, int], list[Decimal]] = {}


def _gamma_table(alpha: float, beta: float, prec: int, n: int) -> list[Decimal]:
    """Incrementally extended cache of Gamma(alpha*k + beta) at `prec` digits."""
    tab = _gamma_tables.setdefault((alpha, beta, prec), [])
    if len(tab) <= n:
        a = int(prec / 0.79) + 3
        da, db = Decimal(alpha), Decimal(beta)
        with localcontext() as ctx:
            # the argument alpha*k + beta must carry full working precision;
            # the default context would truncate it to 28 digits
            ctx.prec = prec + 10
            while len(tab) <= n:
                tab.append(_gamma_decimal(da * len(tab) + db, a, prec))
    return tab


def _series_decimal(alpha: float, beta: float, z: float, x_scale: float) -> float:
    prec = 30 + int(0.52 * x_scale)
    with localcontext() as ctx:
        ctx.prec = prec + 10
        dz = Decimal(z)
        total = Decimal(0)
        zpow = Decimal(1)
        max_term = Decimal(0)
        stop = Decimal(10) ** -(prec - 5)
        for k in range(_SERIES_MAX_TERMS):
            tab = _gamma_table(alpha, beta, prec, k)
            t = zpow / tab[k]
            total += t
            at = abs(t)
            if at > max_term:
                max_term = at
            if k > 2 and at < stop * max_term:
                return float(total)
            zpow *= dz
    raise MLConvergenceError(
        f"extended-precision series for E_({alpha},{beta})({z}) did not "
        f"converge in {_SERIES_MAX_TERMS} terms"
    )


# ---------------------------------------------------------------------------
# asymptotic expansion for large -z


def _asymptotic(alpha: float, beta: float, z: float) -> tuple[float, float]:
    """Algebraic asymptotic series at optimal truncation.

    Returns (value, absolute error estimate: the first omitted nonzero
    term).  For alpha >= 1 the exponentially damped saddle-point term is
    added explicitly, since near alpha = 2 it decays too slowly to ignore.
    The reflection formula makes |Gamma(beta - alpha*k)| oscillate, so the
    truncation point is picked as the global minimum of |term|, not the
    first local increase.
    """
    eta = -z
    log_eta = math.log(eta)
    terms: list[float] = []
    envs: list[float] = []
    min_env = math.inf
    best = -1
    for k in range(1, 400):
        log_epow = -k * log_eta
        epow = math.exp(log_epow) if log_epow > -745.0 else 0.0
        x = beta - alpha * k
        # snap float round-off onto the exact poles of Gamma, where the
        # term vanishes; otherwise a ~1e-17 residue derails the truncation
        if x <= 0.5 and abs(x - round(x)) < 1e-9:
            r = 0.0
        else:
            r = _rgamma(x)
        t = epow * r if k % 2 == 1 else -epow * r
        terms.append(t)
        # smooth size envelope: |1/Gamma(x)| <= Gamma(1-x)/pi for x <= 1/2
        # (reflection with |sin| <= 1); near-pole dips of the actual term
        # must not be mistaken for the optimal truncation point
        if x <= 0.5:
            log_env = log_epow + math.lgamma(1.0 - x) - math.log(math.pi)
            env = math.exp(log_env) if log_env < 700.0 else math.inf
        else:
            env = epow * abs(r)
        envs.append(env)
        if env < min_env:
            min_env, best = env, k - 1
        if env > 10.0 * min_env or env < 1e-25:
            break
    total = math.fsum(terms[: best + 1])
    if best + 1 < len(envs):
        err = envs[best + 1]
    else:
        err = min_env
    if best < 0:
        err = math.inf
    if alpha >= 1.0:
        c = eta ** (1.0 / alpha)
        ang = math.pi / alpha
        root_weight = 1.0 if alpha == 1.0 else 2.0
        total += (
            (root_weight / alpha)
            * c ** (1.0 - beta)
            * math.exp(c * math.cos(ang))
            * math.cos(c * math.sin(ang) + (1.0 - beta) * ang)
        )
    return total, err


def _eval(alpha: float, beta: float, z: float) -> float:
    if z == 0.0:
        return _rgamma(beta)
    if alpha == 1.0 and beta == 1.0:
        return math.exp(z)
    if z > 0.0:
        return _series_double(alpha, beta, z)

    eta = -z
    try:
        x_scale = eta ** (1.0 / alpha)
    except OverflowError:
        x_scale = math.inf
    if x_scale <= _DOUBLE_SERIES_MAX_X:
        return _series_double(alpha, beta, z)

    val, err = _asymptotic(alpha, beta, z)
    scale = max(abs(val), abs(_rgamma(beta)) / (1.0 + eta))
    # for alpha < 1 the omitted exponentially small contribution is of size
    # ~ exp(-0.9 x); only trust the algebraic estimate once x is large
    if err <= _ASYMPTOTIC_REL_TOL * scale and (alpha >= 1.0 or x_scale >= 35.0):
        return val
    if x_scale <= _DECIMAL_SERIES_MAX_X:
        return _series_decimal(alpha, beta, z, x_scale)
    if err > 1e-8 * scale:
        raise MLConvergenceError(
            f"no evaluation regime reaches the accuracy target for "
            f"E_({alpha},{beta})({z})"
        )
    return val


@lru_cache(maxsize=1 << 18)
def _eval_cached(alpha: float, beta: float, z: float) -> float:
    return _eval(alpha, beta, z)


def ml_eval(p: MLParams, z: float) -> float:
    """E_{alpha,beta}(z) for real z <= 0 (a guard of z <= 1 is tolerated)."""
    if not math.isfinite(z):
        raise ValueError(f"argument must be finite, got {z}")
    if z > 1.0:
        raise ValueError(f"only z <= 1 is supported, got {z}")
    return _eval_cached(p.alpha, p.beta, float(z))


def ml_decay_constant(p: MLParams, eta_grid) -> float:
    """Empirical constant sup (1+eta) |E_{alpha,beta}(-eta)| over the grid.

    This is the constant C of the decay bound |E(-eta)| <= C/(1+eta).
    """
    etas = list(eta_grid)
    if not etas:
        raise ValueError("eta_grid must be non-empty")
    if any(e < 0 for e in etas):
        raise ValueError("eta_grid entries must be >= 0")
    return max(abs(ml_eval(p, -e)) * (1.0 + e) for e in etas)
