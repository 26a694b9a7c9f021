"""Divergences between discrete measures.

A discrete measure is represented by density values over shared atoms plus
strictly positive dominating-measure weights; the divergence of a scalar
family is lifted atomwise, ``D(P, Q) = sum_i w_i d(p_i, q_i)``.  Keeping the
weights explicit makes the change-of-dominating-measure identity an
executable operation (see :func:`change_dominating_measure`): for families
of homogeneity degree 1 the lifted divergence does not depend on the chosen
weights at all.
"""

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .divergences import (
    DEFAULT_EPS_PARAM,
    DivergenceBranch,
    DivergenceError,
    DivergenceSpec,
)

NORMALIZATION_TOL = 1e-9


class ValidationError(DivergenceError, ValueError):
    """A density record violates its invariants."""


class SingularAtomError(DivergenceError, ValueError):
    """A zero density value hit a log or negative-exponent branch."""

    def __init__(self, atom, message=None):
        self.atom = atom
        super().__init__(message or f"zero density at atom {atom} is singular "
                                    "for this divergence; smooth it first")


@dataclass(frozen=True)
class DiscreteDensity:
    """Nonnegative density values plus positive dominating weights.

    ``normalized`` records whether ``sum(values * weights)`` is 1 within
    :data:`NORMALIZATION_TOL`, i.e. whether the record represents a
    probability measure.  Build instances through :func:`validate_density`.
    """

    values: np.ndarray
    weights: np.ndarray
    normalized: bool

    def __len__(self):
        return self.values.shape[0]

    @property
    def total_mass(self) -> float:
        return float(np.dot(self.values, self.weights))


def _frozen_array(x, name):
    arr = np.array(x, dtype=float)
    if arr.ndim != 1:
        raise ValidationError(f"{name} must be one-dimensional")
    arr.flags.writeable = False
    return arr


def validate_density(values, weights=None) -> DiscreteDensity:
    """Check and freeze a density record; weights default to all ones."""
    values = _frozen_array(values, "values")
    if weights is None:
        weights = np.ones(values.shape[0])
    weights = _frozen_array(weights, "weights")
    if values.shape[0] != weights.shape[0]:
        raise ValidationError(
            f"length mismatch: {values.shape[0]} values vs "
            f"{weights.shape[0]} weights")
    if values.shape[0] < 1:
        raise ValidationError("density needs at least one atom")
    if not np.all(np.isfinite(values)) or not np.all(np.isfinite(weights)):
        raise ValidationError("values and weights must be finite")
    if np.any(values < 0):
        atom = int(np.argmax(values < 0))
        raise ValidationError(f"negative density value at atom {atom}")
    if np.any(weights <= 0):
        atom = int(np.argmax(weights <= 0))
        raise ValidationError(f"nonpositive weight at atom {atom}")
    normalized = abs(float(np.dot(values, weights)) - 1.0) <= NORMALIZATION_TOL
    return DiscreteDensity(values, weights, normalized)


def change_dominating_measure(P: DiscreteDensity, new_weights) -> DiscreteDensity:
    """Re-express the same measure against different dominating weights."""
    new_weights = np.asarray(new_weights, dtype=float)
    if new_weights.shape != P.weights.shape:
        raise ValidationError("new weights must match the atom count")
    if not np.all(np.isfinite(new_weights)) or np.any(new_weights <= 0):
        raise ValidationError("new weights must be finite and positive")
    return validate_density(P.values * P.weights / new_weights, new_weights)


def smooth_density(P: DiscreteDensity, epsilon=1e-9,
                   renormalize=False) -> DiscreteDensity:
    """Clamp density values below by ``epsilon`` (optionally renormalize).

    This is the caller-side policy for feeding zero-carrying densities into
    divergences that are singular at zero.
    """
    if not (epsilon > 0):
        raise ValidationError("epsilon must be positive")
    values = np.maximum(P.values, epsilon)
    if renormalize:
        values = values / np.dot(values, P.weights)
    return validate_density(values, P.weights)


def _check_same_base(P: DiscreteDensity, Q: DiscreteDensity):
    if len(P) != len(Q):
        raise ValidationError("P and Q must share the same atoms")
    if not np.array_equal(P.weights, Q.weights):
        raise ValidationError("P and Q must share identical dominating weights")


def zero_singular(spec: DivergenceSpec, eps_param=DEFAULT_EPS_PARAM) -> bool:
    """Whether ``d(v, 0)`` diverges for this spec (log or negative power)."""
    if spec.family == "dt":
        return spec.t <= eps_param
    if spec.branch(eps_param) is not DivergenceBranch.GENERIC:
        return True
    return spec.alpha <= 0 or spec.beta <= 0


def divergence_vs_zero(spec: DivergenceSpec, v, side="first",
                       eps_param=DEFAULT_EPS_PARAM):
    """Elementwise divergence between positive values and the zero measure.

    ``side`` says where the zero sits for the asymmetric family:
    ``"first"`` computes d(v, 0), ``"second"`` computes d(0, v).  Raises for
    specs whose zero-divergence is infinite.
    """
    if zero_singular(spec, eps_param):
        raise SingularAtomError(None, f"divergence vs the zero measure "
                                      f"diverges for spec {spec.label()}")
    v = np.asarray(v, dtype=float)
    if spec.family == "dt":
        return np.power(v, 2.0 * spec.t) / (2.0 * spec.t * spec.t)
    g = spec.alpha + spec.beta
    vg = np.power(v, g)
    if spec.family == "abs":
        return vg / (spec.alpha * spec.beta)
    if side == "first":
        return vg / (spec.beta * g)
    return vg / (spec.alpha * g)


def _atomwise(spec, p, q, eps_param, skew_mode):
    """Per-atom divergence values, extending safe specs continuously to 0."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if not ((p == 0).any() or (q == 0).any()):
        return spec.evaluate(p, q, eps_param, skew_mode=skew_mode)
    if zero_singular(spec, eps_param):
        atom = int(np.argmax((p == 0) | (q == 0)))
        raise SingularAtomError(atom)
    p, q = np.broadcast_arrays(p, q)
    out = np.zeros(p.shape)
    both = (p > 0) & (q > 0)
    if both.any():
        out[both] = spec.evaluate(p[both], q[both], eps_param,
                                  skew_mode=skew_mode)
    only_q0 = (p > 0) & (q == 0)
    if only_q0.any():
        out[only_q0] = divergence_vs_zero(spec, p[only_q0], "first", eps_param)
    only_p0 = (p == 0) & (q > 0)
    if only_p0.any():
        out[only_p0] = divergence_vs_zero(spec, q[only_p0], "second", eps_param)
    return out  # both zero: the continuous extension d(0, 0) = 0


def divergence_measures(spec: DivergenceSpec, P: DiscreteDensity,
                        Q: DiscreteDensity, eps_param=DEFAULT_EPS_PARAM,
                        skew_mode="limit") -> float:
    """Weighted atomwise divergence between two densities on shared atoms.

    Symmetric in (P, Q) for the ``abs`` and ``dt`` families.  Zero density
    values are allowed only where the scalar divergence extends continuously
    (positive exponents); otherwise a :class:`SingularAtomError` names the
    first offending atom.
    """
    _check_same_base(P, Q)
    d = _atomwise(spec, P.values, Q.values, eps_param, skew_mode)
    return math.fsum(np.asarray(d * P.weights, dtype=float))


def symmetrize_type2(alpha, beta, P: DiscreteDensity, Q: DiscreteDensity,
                     eps_param=DEFAULT_EPS_PARAM) -> float:
    """Symmetrization through the atomwise midpoint (P + Q) / 2.

    Averages the asymmetric divergence of P and of Q against the midpoint
    density; symmetric in (P, Q) by construction.
    """
    _check_same_base(P, Q)
    spec = DivergenceSpec.ab(alpha, beta)
    M = validate_density(0.5 * (P.values + Q.values), P.weights)
    return 0.5 * (divergence_measures(spec, P, M, eps_param)
                  + divergence_measures(spec, Q, M, eps_param))


# --- vectorized batch evaluation over stacked densities -----------------

# cap per-chunk temporaries at ~64 MB of doubles so wide data (gene
# expression: ~10^4 atoms) cannot blow up the pairwise broadcasts
_BATCH_ELEMENTS = 1 << 23


def _row_chunks(rows, row_elements):
    step = max(1, _BATCH_ELEMENTS // max(1, row_elements))
    for start in range(0, rows, step):
        yield start, min(rows, start + step)


def _weighted_rowsum(values, w):
    # per-row reduction; unlike a BLAS matvec its rounding does not depend
    # on how many rows are in the block, so chunking cannot change results
    return (values * w).sum(axis=-1)


def stack_densities(densities):
    """Stack densities sharing atoms/weights into (values matrix, weights)."""
    if not densities:
        raise ValidationError("empty density sequence")
    w = densities[0].weights
    for i, d in enumerate(densities):
        if len(d) != len(densities[0]) or not np.array_equal(d.weights, w):
            raise ValidationError(f"density {i} has a different atom structure")
    V = np.vstack([d.values for d in densities])
    return V, w


def pairwise_divergence(spec: DivergenceSpec, V, w,
                        eps_param=DEFAULT_EPS_PARAM,
                        skew_mode="limit") -> np.ndarray:
    """All pairwise divergences between rows of V; each unordered pair once.

    Returns an exactly symmetric (n, n) matrix for symmetric families; for
    the asymmetric family both orientations are evaluated.
    """
    V = np.asarray(V, dtype=float)
    w = np.asarray(w, dtype=float)
    n = V.shape[0]
    D = np.zeros((n, n))
    if spec.symmetric:
        iu, ju = np.triu_indices(n, k=1)
        vals = np.empty(iu.shape[0])
        for lo, hi in _row_chunks(iu.shape[0], V.shape[1]):
            vals[lo:hi] = _weighted_rowsum(
                _atomwise(spec, V[iu[lo:hi]], V[ju[lo:hi]], eps_param,
                          skew_mode), w)
        D[iu, ju] = vals
        D[ju, iu] = vals
    else:
        for i in range(n):
            mask = np.arange(n) != i
            D[i, mask] = _weighted_rowsum(
                _atomwise(spec, V[i][None, :], V[mask], eps_param,
                          skew_mode), w)
    # d(P, P) = 0 identically; the diagonal needs no evaluation
    return D


def cross_divergence(spec: DivergenceSpec, V1, V2, w,
                     eps_param=DEFAULT_EPS_PARAM,
                     skew_mode="limit") -> np.ndarray:
    """Divergences between rows of V1 (first argument) and rows of V2."""
    V1 = np.asarray(V1, dtype=float)
    V2 = np.asarray(V2, dtype=float)
    w = np.asarray(w, dtype=float)
    out = np.empty((V1.shape[0], V2.shape[0]))
    for lo, hi in _row_chunks(V1.shape[0], V2.shape[0] * V2.shape[1]):
        out[lo:hi] = _weighted_rowsum(
            _atomwise(spec, V1[lo:hi, None, :], V2[None, :, :], eps_param,
                      skew_mode), w)
    return out


# --- named special cases -------------------------------------------------

@dataclass(frozen=True)
class NamedDivergence:
    """A named divergence with its spec and independent closed-form row."""

    name: str
    spec: DivergenceSpec
    atom_form: Callable[[np.ndarray, np.ndarray], np.ndarray]

    def closed_form(self, P: DiscreteDensity, Q: DiscreteDensity) -> float:
        """Evaluate the closed-form expression directly (no branch dispatch)."""
        _check_same_base(P, Q)
        return math.fsum(self.atom_form(P.values, Q.values) * P.weights)


def _row_euclidean(p, q):
    return (p - q) ** 2


def _row_v1_hellinger(p, q):
    return 2.0 * (np.sqrt(p) - np.sqrt(q)) * (p - q)


def _row_v2_hellinger(p, q):
    return 2.0 * (np.sqrt(p) - np.sqrt(q)) * (p - q) / (p * q)


def _row_hellinger(p, q):
    return 4.0 * (np.sqrt(p) - np.sqrt(q)) ** 2


def _row_jeffrey(p, q):
    return (p - q) * np.log(p / q)


def _row_euclidean_dt(p, q):
    return 0.5 * (p - q) ** 2


def _row_s_euclidean(p, q):
    return 0.5 * (1.0 / p - 1.0 / q) ** 2


def _row_hellinger_dt(p, q):
    return 2.0 * (np.sqrt(p) - np.sqrt(q)) ** 2


def _row_s_itakura_saito(p, q):
    return 2.0 * (1.0 / np.sqrt(p) - 1.0 / np.sqrt(q)) ** 2


# The one-parameter family's published table swaps the Hellinger and
# symmetrized-Itakura-Saito labels relative to its defining formula; the
# formula wins here: t = 1/2 is Hellinger-shaped, t = -1/2 is the
# Itakura-Saito (COSH) shape.
NAMED_DIVERGENCES = {
    "euclidean": NamedDivergence("euclidean", DivergenceSpec.abs(1, 1),
                                 _row_euclidean),
    "v1-hellinger": NamedDivergence("v1-hellinger",
                                    DivergenceSpec.abs(0.5, 1),
                                    _row_v1_hellinger),
    "v2-hellinger": NamedDivergence("v2-hellinger",
                                    DivergenceSpec.abs(0.5, -1),
                                    _row_v2_hellinger),
    "hellinger": NamedDivergence("hellinger", DivergenceSpec.abs(0.5, 0.5),
                                 _row_hellinger),
    "jeffrey": NamedDivergence("jeffrey", DivergenceSpec.abs(1, 0),
                               _row_jeffrey),
    "euclidean-dt": NamedDivergence("euclidean-dt", DivergenceSpec.dt(1),
                                    _row_euclidean_dt),
    "s-euclidean": NamedDivergence("s-euclidean", DivergenceSpec.dt(-1),
                                   _row_s_euclidean),
    "hellinger-dt": NamedDivergence("hellinger-dt", DivergenceSpec.dt(0.5),
                                    _row_hellinger_dt),
    "s-itakura-saito": NamedDivergence("s-itakura-saito",
                                       DivergenceSpec.dt(-0.5),
                                       _row_s_itakura_saito),
}

SPEC_ALIASES = {"itakura-saito": "s-itakura-saito"}


def named_divergence(name: str) -> NamedDivergence:
    key = SPEC_ALIASES.get(name.lower(), name.lower())
    try:
        return NAMED_DIVERGENCES[key]
    except KeyError:
        raise ValidationError(
            f"unknown divergence name {name!r}; known: "
            f"{sorted(NAMED_DIVERGENCES) + sorted(SPEC_ALIASES)}") from None


def parse_spec(text: str) -> DivergenceSpec:
    """Parse ``ab:a,b`` / ``abs:a,b`` / ``dt:t`` or a divergence name."""
    token = text.strip().lower()
    if ":" in token:
        family, _, args = token.partition(":")
        try:
            if family == "dt":
                return DivergenceSpec.dt(float(args))
            if family in ("ab", "abs"):
                a, b = (float(part) for part in args.split(","))
                return DivergenceSpec(family, alpha=a, beta=b)
        except (ValueError, TypeError) as exc:
            raise ValidationError(f"malformed spec {text!r}: {exc}") from None
        raise ValidationError(f"unknown spec family {family!r} in {text!r}")
    return named_divergence(token).spec
