"""Kernels built from divergences, Gram matrices, and spectral checks.

A divergence whose negative is conditionally positive definite (cpd) embeds
isometrically into a Hilbert space; choosing the zero measure as origin
turns it into a positive definite (pd) kernel

    K(P, Q) = (-D(P, Q) + D(P, 0) + D(Q, 0)) / 2.

Where the divergence against the zero measure diverges (negative
exponents), the published closed forms of the kernels are taken as the
definition instead.  ``psd_check`` / ``cpd_check`` verify definiteness
claims spectrally, and ``probe_hilbertianity`` searches for counterexample
Grams on random densities.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .divergences import DEFAULT_EPS_PARAM, DivergenceError, DivergenceSpec
from .measures import (
    DiscreteDensity,
    SingularAtomError,
    ValidationError,
    divergence_measures,
    pairwise_divergence,
    cross_divergence,
    stack_densities,
    validate_density,
)

DEFAULT_EIG_TOL = 1e-8
KERNEL_MODES = ("neg-divergence-cpd", "lemma-pd", "gaussian")


class UnsupportedSpecError(DivergenceError, ValueError):
    """No finite zero-measure divergence and no closed-form kernel."""


@dataclass(frozen=True)
class KernelSpec:
    """How to turn a divergence into a kernel.

    ``neg-divergence-cpd`` uses -D directly (cpd, for SVM use),
    ``lemma-pd`` uses the zero-measure origin construction above, and
    ``gaussian`` uses exp(-D / (2 sigma^2)) with bandwidth ``sigma``.
    """

    base: DivergenceSpec
    mode: str
    sigma: float | None = None

    def __post_init__(self):
        if self.mode not in KERNEL_MODES:
            raise ValidationError(f"unknown kernel mode {self.mode!r}")
        if self.mode == "gaussian":
            if self.sigma is None or not (self.sigma > 0):
                raise ValidationError("gaussian mode requires sigma > 0")
        elif self.sigma is not None:
            raise ValidationError(f"mode {self.mode!r} takes no sigma")

    def label(self) -> str:
        sig = f",sigma={self.sigma:g}" if self.sigma is not None else ""
        return f"{self.mode}({self.base.label()}{sig})"


@dataclass(frozen=True)
class GramMatrix:
    """Symmetric matrix of pairwise evaluations plus its building spec."""

    entries: np.ndarray
    spec: object = None

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=float)
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise ValidationError("Gram entries must be square")
        if not np.array_equal(e, e.T):
            raise ValidationError("Gram entries must be symmetric")
        object.__setattr__(self, "entries", e)

    @property
    def order(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class SpectrumReport:
    """Extremal eigenvalues of a (possibly centered) Gram and the verdict.

    ``verdict`` is ``"psd"`` when ``min_eig >= -tol * max(1, |max_eig|)``,
    else ``"indefinite"``.
    """

    min_eig: float
    max_eig: float
    order: int
    centered: bool
    tol: float
    verdict: str

    @property
    def relative_min(self) -> float:
        return self.min_eig / max(1.0, abs(self.max_eig))

    def to_kv_lines(self):
        return [
            f"order={self.order}",
            f"centered={str(self.centered).lower()}",
            f"min_eig={self.min_eig!r}",
            f"max_eig={self.max_eig!r}",
            f"tol={self.tol!r}",
            f"verdict={self.verdict}",
        ]


def _verdict(min_eig, max_eig, tol):
    return "psd" if min_eig >= -tol * max(1.0, abs(max_eig)) else "indefinite"


def _spectrum(matrix, centered, tol):
    eigs = np.linalg.eigvalsh(matrix)
    lo, hi = float(eigs[0]), float(eigs[-1])
    return SpectrumReport(lo, hi, matrix.shape[0], centered, tol,
                          _verdict(lo, hi, tol))


def psd_check(G: GramMatrix, tol=DEFAULT_EIG_TOL) -> SpectrumReport:
    """Full eigendecomposition verdict on a kernel Gram matrix."""
    if not (tol > 0):
        raise ValidationError("tol must be positive")
    if not np.all(np.isfinite(G.entries)):
        raise ValidationError("Gram has non-finite entries")
    return _spectrum(G.entries, centered=False, tol=tol)


def cpd_check(D: GramMatrix, tol=DEFAULT_EIG_TOL) -> SpectrumReport:
    """Conditional-psd verdict for a divergence Gram (zero diagonal).

    Negates the matrix and conjugates by the centering projector
    ``I - 11^T/n``, which restricts the quadratic form to coefficient
    vectors summing to zero, then eigendecomposes.
    """
    if not (tol > 0):
        raise ValidationError("tol must be positive")
    entries = D.entries
    if not np.all(np.isfinite(entries)):
        raise ValidationError("Gram has non-finite entries")
    diag_scale = max(1.0, float(np.abs(entries).max()))
    if np.any(np.abs(np.diag(entries)) > tol * diag_scale):
        raise ValidationError("divergence Gram must have zero diagonal")
    n = entries.shape[0]
    center = np.eye(n) - np.full((n, n), 1.0 / n)
    projected = center @ (-entries) @ center
    projected = 0.5 * (projected + projected.T)
    return _spectrum(projected, centered=True, tol=tol)


def lemma_gram(D: GramMatrix, origin_index: int) -> GramMatrix:
    """Kernel Gram from a divergence Gram using a data point as origin.

    ``K_ij = (-D_ij + D_i,o + D_o,j) / 2``; psd exactly when -D is cpd.
    """
    entries = D.entries
    n = entries.shape[0]
    if not 0 <= origin_index < n:
        raise ValidationError("origin index out of range")
    row = entries[origin_index]
    K = 0.5 * (-entries + row[:, None] + row[None, :])
    K = np.triu(K) + np.triu(K, 1).T
    return GramMatrix(K, spec=("lemma-origin", origin_index, D.spec))


# --- kernels on densities -------------------------------------------------


def _zero_divergence_total(spec: DivergenceSpec, P: DiscreteDensity) -> float:
    """Finite D(P, zero measure) for specs with positive exponents."""
    if spec.family == "abs":
        g = spec.alpha + spec.beta
        return math.fsum(np.power(P.values, g) * P.weights) / (spec.alpha * spec.beta)
    return math.fsum(np.power(P.values, 2.0 * spec.t) * P.weights) / (2.0 * spec.t ** 2)


def _kernel_route(spec: DivergenceSpec, eps_param) -> str:
    """Which construction applies: 'lemma', 'dt-closed', 'jeffreys', or error."""
    if spec.family == "dt":
        if spec.t > eps_param:
            return "lemma"
        if spec.t < -eps_param:
            return "dt-closed"
    elif spec.family == "abs":
        if spec.alpha > eps_param and spec.beta > eps_param:
            return "lemma"
        if abs(spec.alpha - 1.0) <= eps_param and abs(spec.beta) <= eps_param:
            return "jeffreys"
    raise UnsupportedSpecError(
        f"divergence {spec.label()} has an infinite zero-measure divergence "
        "and no closed-form kernel")


def kernel_from_divergence(spec: DivergenceSpec, P: DiscreteDensity,
                           Q: DiscreteDensity,
                           eps_param=DEFAULT_EPS_PARAM) -> float:
    """Positive-definite kernel value induced by a divergence.

    Uses the zero-measure origin construction when D(., 0) is finite
    (symmetric family with both exponents positive, or t > 0).  For t < 0
    the closed form ``sum w (p q)^t / (2 t^2)`` defines the kernel, and for
    the (1, 0) spec the closed Jeffreys-kernel form
    ``sum w ((q - p) log(p/q) - p - q) / 2`` is used.
    """
    route = _kernel_route(spec, eps_param)
    if route == "lemma":
        d = divergence_measures(spec, P, Q, eps_param)
        return 0.5 * (-d + _zero_divergence_total(spec, P)
                      + _zero_divergence_total(spec, Q))
    if route == "dt-closed":
        if np.any(P.values == 0) or np.any(Q.values == 0):
            atom = int(np.argmax((P.values == 0) | (Q.values == 0)))
            raise SingularAtomError(atom)
        t = spec.t
        prod = np.power(P.values * Q.values, t)
        return math.fsum(prod * P.weights) / (2.0 * t * t)
    # Jeffreys spec (1, 0): -D/2 shifted by the total masses
    d = divergence_measures(spec, P, Q, eps_param)
    return -0.5 * d - 0.5 * (P.total_mass + Q.total_mass)


def gaussian_kernel(spec: DivergenceSpec, sigma: float, P: DiscreteDensity,
                    Q: DiscreteDensity, eps_param=DEFAULT_EPS_PARAM) -> float:
    """``exp(-D(P, Q) / (2 sigma^2))``; equals 1 iff the divergence is 0."""
    if not (sigma > 0):
        raise ValidationError("sigma must be positive")
    return math.exp(-divergence_measures(spec, P, Q, eps_param)
                    / (2.0 * sigma * sigma))


def gaussian_from_divergence(D_entries, sigma):
    """Elementwise gaussian transform of a matrix of divergence values."""
    if not (sigma > 0):
        raise ValidationError("sigma must be positive")
    return np.exp(np.asarray(D_entries) / (-2.0 * sigma * sigma))


def _locate_failure(exc, spec, densities, eps_param):
    """Replay pairs to attach an (i, j) location to a batch failure."""
    n = len(densities)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            try:
                divergence_measures(spec, densities[i], densities[j], eps_param)
            except DivergenceError as pair_exc:
                raise type(exc)(f"kernel element ({i}, {j}): {pair_exc}") from exc
    raise exc


def divergence_gram(spec: DivergenceSpec, densities,
                    eps_param=DEFAULT_EPS_PARAM, skew_mode="limit") -> GramMatrix:
    """Matrix of pairwise divergence values D_ij (zero diagonal)."""
    V, w = stack_densities(densities)
    try:
        D = pairwise_divergence(spec, V, w, eps_param, skew_mode)
    except DivergenceError as exc:
        _locate_failure(exc, spec, densities, eps_param)
    return GramMatrix(D, spec=spec)


def gram(kspec: KernelSpec, densities, eps_param=DEFAULT_EPS_PARAM) -> GramMatrix:
    """Pairwise kernel Gram over densities sharing an atom structure.

    ``neg-divergence-cpd`` entries are -D_ij; the other modes produce pd
    candidates (lemma construction or gaussian transform).
    """
    spec = kspec.base
    if kspec.mode == "lemma-pd":
        route = _kernel_route(spec, eps_param)
        if route != "lemma":
            # closed-form kernels evaluated pairwise (symmetric by route)
            n = len(densities)
            K = np.zeros((n, n))
            try:
                for i in range(n):
                    for j in range(i, n):
                        K[i, j] = K[j, i] = kernel_from_divergence(
                            spec, densities[i], densities[j], eps_param)
            except DivergenceError as exc:
                raise type(exc)(f"kernel element ({i}, {j}): {exc}") from exc
            return GramMatrix(K, spec=kspec)
    D = divergence_gram(spec, densities, eps_param)
    if kspec.mode == "neg-divergence-cpd":
        return GramMatrix(-D.entries, spec=kspec)
    if kspec.mode == "gaussian":
        return GramMatrix(gaussian_from_divergence(D.entries, kspec.sigma),
                          spec=kspec)
    z = np.array([_zero_divergence_total(spec, d) for d in densities])
    K = 0.5 * (-D.entries + z[:, None] + z[None, :])
    K = np.triu(K) + np.triu(K, 1).T
    return GramMatrix(K, spec=kspec)


def kernel_rows(kspec: KernelSpec, train, test,
                eps_param=DEFAULT_EPS_PARAM) -> np.ndarray:
    """Kernel evaluations of test densities against training densities.

    Returns a (len(test), len(train)) matrix whose rows feed the SVM
    decision function.
    """
    V1, w = stack_densities(list(test) + list(train))
    V_test, V_train = V1[:len(test)], V1[len(test):]
    spec = kspec.base
    if kspec.mode == "lemma-pd" and _kernel_route(spec, eps_param) != "lemma":
        return np.array([[kernel_from_divergence(spec, te, tr, eps_param)
                          for tr in train] for te in test])
    D = cross_divergence(spec, V_test, V_train, w, eps_param)
    if kspec.mode == "neg-divergence-cpd":
        return -D
    if kspec.mode == "gaussian":
        return gaussian_from_divergence(D, kspec.sigma)
    z_test = np.array([_zero_divergence_total(spec, d) for d in test])
    z_train = np.array([_zero_divergence_total(spec, d) for d in train])
    return 0.5 * (-D + z_test[:, None] + z_train[None, :])


# --- randomized definiteness probe ---------------------------------------


@dataclass(frozen=True)
class ProbeResult:
    """All spectrum reports from a randomized cpd probe, plus the worst."""

    spec: DivergenceSpec
    n: int
    trials: int
    atoms: int
    seed: int
    tol: float
    reports: list = field(repr=False)
    worst_relative_eig: float = 0.0

    @property
    def all_psd(self) -> bool:
        return all(r.verdict == "psd" for r in self.reports)

    def to_kv_lines(self):
        lines = [
            f"spec={self.spec.label()}",
            f"n={self.n}",
            f"trials={self.trials}",
            f"atoms={self.atoms}",
            f"seed={self.seed}",
            f"tol={self.tol!r}",
            f"worst_relative_eig={self.worst_relative_eig!r}",
            f"all_psd={str(self.all_psd).lower()}",
        ]
        for k, r in enumerate(self.reports):
            lines.append(f"trial{k}.min_eig={r.min_eig!r}")
            lines.append(f"trial{k}.max_eig={r.max_eig!r}")
            lines.append(f"trial{k}.verdict={r.verdict}")
        return lines


def sample_densities(rng, n, atoms):
    """n random unit-weight densities: normalized i.i.d. exponential draws."""
    X = rng.exponential(size=(n, atoms))
    X /= X.sum(axis=1, keepdims=True)
    return [validate_density(row) for row in X]


def probe_hilbertianity(spec: DivergenceSpec, n: int, trials: int, seed: int,
                        atoms: int = 8, tol=DEFAULT_EIG_TOL,
                        eps_param=DEFAULT_EPS_PARAM) -> ProbeResult:
    """Randomized search for indefinite divergence Grams.

    Each trial samples ``n`` densities on ``atoms`` atoms (normalized
    i.i.d. exponential variates, seeded), builds the divergence Gram and
    runs :func:`cpd_check`.  The result records every report and the most
    negative relative eigenvalue seen; it asserts nothing.
    """
    if n < 3:
        raise ValidationError("probe needs n >= 3")
    if trials < 1:
        raise ValidationError("probe needs trials >= 1")
    rng = np.random.default_rng(seed)
    reports = []
    worst = math.inf
    for _ in range(trials):
        densities = sample_densities(rng, n, atoms)
        report = cpd_check(divergence_gram(spec, densities, eps_param), tol)
        reports.append(report)
        worst = min(worst, report.relative_min)
    return ProbeResult(spec, n, trials, atoms, seed, tol, reports, worst)
