"""Scalar divergence families on the positive half-line.

Three families are provided, each with explicit handling of the parameter
singularities (five branches selected on ``(alpha, beta)``):

- ``ab_divergence``     -- the asymmetric two-parameter family,
- ``abs_divergence``    -- its symmetric counterpart,
- ``dt_squared``        -- the one-parameter family of degree ``2t``.

All evaluators accept scalars or numpy arrays for ``x`` and ``y`` (broadcast
elementwise); parameters are always scalars.  Inputs must be strictly
positive: zero is genuinely singular for the log and negative-exponent
branches, and epsilon-smoothing is a caller policy, not done here.
"""

import functools
from dataclasses import dataclass
from enum import Enum

import numpy as np

DEFAULT_EPS_PARAM = 1e-12


def _overflow_to_range_error(fn):
    """Silence numpy overflow warnings; every path isfinite-checks and
    raises :class:`RangeError` itself."""
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        with np.errstate(over="ignore", invalid="ignore"):
            return fn(*args, **kwargs)
    return wrapper


class DivergenceError(Exception):
    """Base class for divergence evaluation errors."""


class DomainError(DivergenceError, ValueError):
    """Inputs outside the admissible domain (nonpositive or non-finite)."""


class RangeError(DivergenceError, ArithmeticError):
    """An intermediate power overflowed; the message names the term."""


class DivergenceBranch(Enum):
    GENERIC = "generic"        # alpha != 0, beta != 0, alpha + beta != 0
    ALPHA_ONLY = "alpha-only"  # alpha != 0, beta == 0
    SKEW_PAIR = "skew-pair"    # alpha == -beta != 0
    BETA_ONLY = "beta-only"    # alpha == 0, beta != 0
    BOTH_ZERO = "both-zero"    # alpha == beta == 0


@dataclass(frozen=True)
class DivergenceSpec:
    """Which divergence family to use and its parameters.

    ``family`` is one of ``"ab"``, ``"abs"`` (both parametrized by
    ``alpha, beta``) or ``"dt"`` (parametrized by ``t``).  A ``dt`` spec of
    parameter t is ``2t``-homogeneous; ``ab``/``abs`` specs are
    ``(alpha + beta)``-homogeneous.
    """

    family: str
    alpha: float | None = None
    beta: float | None = None
    t: float | None = None

    def __post_init__(self):
        if self.family not in ("ab", "abs", "dt"):
            raise DomainError(f"unknown divergence family {self.family!r}")
        if self.family == "dt":
            if self.t is None or not np.isfinite(self.t):
                raise DomainError("dt family requires a finite t")
            if self.alpha is not None or self.beta is not None:
                raise DomainError("dt family takes no (alpha, beta)")
        else:
            if self.alpha is None or self.beta is None:
                raise DomainError(f"{self.family} family requires (alpha, beta)")
            if not (np.isfinite(self.alpha) and np.isfinite(self.beta)):
                raise DomainError("alpha and beta must be finite")
            if self.t is not None:
                raise DomainError(f"{self.family} family takes no t")

    @classmethod
    def ab(cls, alpha, beta):
        return cls("ab", alpha=float(alpha), beta=float(beta))

    @classmethod
    def abs(cls, alpha, beta):
        return cls("abs", alpha=float(alpha), beta=float(beta))

    @classmethod
    def dt(cls, t):
        return cls("dt", t=float(t))

    @property
    def homogeneity(self) -> float:
        """Scaling degree gamma: d(cx, cy) = c**gamma * d(x, y)."""
        if self.family == "dt":
            return 2.0 * self.t
        return self.alpha + self.beta

    @property
    def symmetric(self) -> bool:
        return self.family in ("abs", "dt")

    def branch(self, eps_param=DEFAULT_EPS_PARAM) -> DivergenceBranch:
        if self.family == "dt":
            return (DivergenceBranch.BOTH_ZERO if abs(self.t) <= eps_param
                    else DivergenceBranch.GENERIC)
        return branch_select(self.alpha, self.beta, eps_param)

    def evaluate(self, x, y, eps_param=DEFAULT_EPS_PARAM, skew_mode="limit"):
        """Scalar divergence of this spec at (x, y) (elementwise on arrays)."""
        if self.family == "ab":
            return ab_divergence(self.alpha, self.beta, x, y, eps_param)
        if self.family == "abs":
            return abs_divergence(self.alpha, self.beta, x, y, eps_param,
                                  skew_mode=skew_mode)
        return dt_squared(self.t, x, y, eps_param)

    def label(self) -> str:
        if self.family == "dt":
            return f"dt:{self.t:g}"
        return f"{self.family}:{self.alpha:g},{self.beta:g}"


def branch_select(alpha, beta, eps_param=DEFAULT_EPS_PARAM) -> DivergenceBranch:
    """Pick the evaluation branch for (alpha, beta).

    A parameter within ``eps_param`` of zero is treated as exactly zero, and
    ``alpha + beta`` within ``eps_param`` of zero selects the skew branch,
    so that floating-point parameter grids hit the special cases
    deterministically.  Exactly one branch matches any pair.
    """
    if not (eps_param > 0):
        raise DomainError("eps_param must be positive")
    if not (np.isfinite(alpha) and np.isfinite(beta)):
        raise DomainError("alpha and beta must be finite")
    a_zero = abs(alpha) <= eps_param
    b_zero = abs(beta) <= eps_param
    if a_zero and b_zero:
        return DivergenceBranch.BOTH_ZERO
    if b_zero:
        return DivergenceBranch.ALPHA_ONLY
    if a_zero:
        return DivergenceBranch.BETA_ONLY
    if abs(alpha + beta) <= eps_param:
        return DivergenceBranch.SKEW_PAIR
    return DivergenceBranch.GENERIC


def _checked_pow(base, expo, term):
    out = np.power(base, expo)
    if not np.all(np.isfinite(out)):
        raise RangeError(f"term {term} overflowed (exponent {expo:g})")
    return out


def _validate_positive(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise DomainError("x and y must be finite")
    if np.any(x <= 0) or np.any(y <= 0):
        raise DomainError("x and y must be strictly positive")
    return x, y


def _scalar_out(value, scalar):
    return float(value) if scalar else value


@_overflow_to_range_error
def ab_divergence(alpha, beta, x, y, eps_param=DEFAULT_EPS_PARAM):
    """Asymmetric two-parameter divergence between positive reals.

    Nonnegative, zero iff ``x == y``; generally not symmetric in (x, y).
    Raises :class:`DomainError` for nonpositive input and
    :class:`RangeError` when a power term overflows.
    """
    branch = branch_select(alpha, beta, eps_param)
    scalar = np.isscalar(x) and np.isscalar(y)
    x, y = _validate_positive(x, y)
    L = np.log(x) - np.log(y)

    if branch is DivergenceBranch.GENERIC:
        g = alpha + beta
        xa = _checked_pow(x, alpha, "x**alpha")
        yb = _checked_pow(y, beta, "y**beta")
        xg = _checked_pow(x, g, "x**(alpha+beta)")
        yg = _checked_pow(y, g, "y**(alpha+beta)")
        val = -(xa * yb - (alpha / g) * xg - (beta / g) * yg) / (alpha * beta)
        # x**a * x**b and x**(a+b) round differently; pin the identity case
        val = np.where(x == y, 0.0, val)
    elif branch is DivergenceBranch.ALPHA_ONLY:
        xa = _checked_pow(x, alpha, "x**alpha")
        ya = _checked_pow(y, alpha, "y**alpha")
        # x^a*log(x^a/y^a) - x^a + y^a; the log is alpha*L exactly
        val = (xa * (alpha * L) - xa + ya) / (alpha * alpha)
    elif branch is DivergenceBranch.SKEW_PAIR:
        # log(y^a/x^a) + (y^a/x^a)^-1 - 1  ==  e^{aL} - 1 - aL
        u = alpha * L
        val = (np.expm1(u) - u) / (alpha * alpha)
        if not np.all(np.isfinite(val)):
            raise RangeError(f"term (x/y)**alpha overflowed (exponent {alpha:g})")
    elif branch is DivergenceBranch.BETA_ONLY:
        xb = _checked_pow(x, beta, "x**beta")
        yb = _checked_pow(y, beta, "y**beta")
        val = (yb * (-beta * L) - yb + xb) / (beta * beta)
    else:
        val = 0.5 * L * L
    if not np.all(np.isfinite(val)):
        raise RangeError("divergence value overflowed")
    # log-branch cancellation can round to -eps near x == y
    val = np.maximum(val, 0.0)
    return _scalar_out(val, scalar)


@_overflow_to_range_error
def abs_divergence(alpha, beta, x, y, eps_param=DEFAULT_EPS_PARAM,
                   skew_mode="limit"):
    """Symmetric two-parameter divergence between positive reals.

    Branches:

    - generic: ``(x^a - y^a)(x^b - y^b) / (a b)``
    - ``beta == 0``: ``(x^a - y^a) log(x^a / y^a) / a^2`` (and symmetrically
      for ``alpha == 0``)
    - ``alpha == -beta``: by default the continuous limit of the generic
      branch, ``(x^a/y^a + y^a/x^a - 2) / a^2``; with
      ``skew_mode="jeffreys"`` the extra Jeffreys-style term
      ``(x^a - y^a) log(x^a / y^a) / a^2`` is added on top
    - ``alpha == beta == 0``: ``(log x - log y)^2 / 2``

    Symmetric in (x, y) on every branch, nonnegative, zero iff ``x == y``,
    and ``(alpha + beta)``-homogeneous.
    """
    if skew_mode not in ("limit", "jeffreys"):
        raise DomainError(f"unknown skew_mode {skew_mode!r}")
    branch = branch_select(alpha, beta, eps_param)
    scalar = np.isscalar(x) and np.isscalar(y)
    x, y = _validate_positive(x, y)
    # every branch is a symmetric function; evaluating at the sorted pair
    # makes the symmetry bit-exact
    x, y = np.maximum(x, y), np.minimum(x, y)
    L = np.log(x) - np.log(y)

    if branch is DivergenceBranch.GENERIC:
        da = _checked_pow(y, alpha, "y**alpha") * np.expm1(alpha * L)
        db = _checked_pow(y, beta, "y**beta") * np.expm1(beta * L)
        if not (np.all(np.isfinite(da)) and np.all(np.isfinite(db))):
            raise RangeError("term x**alpha - y**alpha overflowed")
        val = da * db / (alpha * beta)
    elif branch is DivergenceBranch.ALPHA_ONLY:
        da = _checked_pow(y, alpha, "y**alpha") * np.expm1(alpha * L)
        val = da * L / alpha
    elif branch is DivergenceBranch.SKEW_PAIR:
        u = alpha * L
        val = (np.expm1(u) + np.expm1(-u)) / (alpha * alpha)
        if skew_mode == "jeffreys":
            da = _checked_pow(y, alpha, "y**alpha") * np.expm1(u)
            val = val + da * L / alpha
        if not np.all(np.isfinite(val)):
            raise RangeError(f"term (x/y)**alpha overflowed (exponent {alpha:g})")
    elif branch is DivergenceBranch.BETA_ONLY:
        db = _checked_pow(y, beta, "y**beta") * np.expm1(beta * L)
        val = db * L / beta
    else:
        val = 0.5 * L * L
    if not np.all(np.isfinite(val)):
        raise RangeError("divergence value overflowed")
    return _scalar_out(val, scalar)


@_overflow_to_range_error
def dt_squared(t, x, y, eps_param=DEFAULT_EPS_PARAM):
    """One-parameter squared metric ``((x^t - y^t) / t)^2 / 2``.

    At ``t == 0`` (within ``eps_param``) the limit ``(log x - log y)^2 / 2``
    is used.  Symmetric, nonnegative, zero iff ``x == y``, and
    ``2t``-homogeneous.
    """
    if not np.isfinite(t):
        raise DomainError("t must be finite")
    if not (eps_param > 0):
        raise DomainError("eps_param must be positive")
    scalar = np.isscalar(x) and np.isscalar(y)
    x, y = _validate_positive(x, y)
    x, y = np.maximum(x, y), np.minimum(x, y)  # bit-exact symmetry
    L = np.log(x) - np.log(y)
    if abs(t) <= eps_param:
        val = 0.5 * L * L
    else:
        dd = _checked_pow(y, t, "y**t") * np.expm1(t * L) / t
        if not np.all(np.isfinite(dd)):
            raise RangeError(f"term x**t - y**t overflowed (exponent {t:g})")
        val = 0.5 * dd * dd
    return _scalar_out(val, scalar)


def symmetrize_type1(alpha, beta, x, y, eps_param=DEFAULT_EPS_PARAM):
    """Half the sum of both orientations of the asymmetric divergence."""
    fwd = ab_divergence(alpha, beta, x, y, eps_param)
    bwd = ab_divergence(alpha, beta, y, x, eps_param)
    return 0.5 * (fwd + bwd)
