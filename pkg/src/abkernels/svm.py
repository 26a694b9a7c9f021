"""Binary soft-margin SVM over precomputed Gram matrices.

The dual problem

    max  sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij
    s.t. 0 <= alpha_i <= C,  sum_i alpha_i y_i = 0

is solved by sequential minimal optimization: pairs of coefficients are
updated analytically, the first picked as the worst KKT violator (full
passes over everything alternate with passes over the unbounded
coefficients), the second by the largest error gap.  Works on conditionally
positive definite Grams directly, since every feasible pair direction has
curvature ``K_ii + K_jj - 2 K_ij >= 0`` there; genuinely indefinite Grams
can be repaired first with :func:`condition_gram`.
"""

from dataclasses import dataclass

import numpy as np

from .divergences import DEFAULT_EPS_PARAM, DivergenceError, DivergenceSpec
from .kernels import (
    GramMatrix,
    KernelSpec,
    _kernel_route,
    _zero_divergence_total,
    gaussian_from_divergence,
    gram,
    kernel_rows,
)
from .measures import ValidationError, pairwise_divergence, stack_densities


class DegenerateDataError(DivergenceError, ValueError):
    """Training data cannot support a two-class problem."""


@dataclass(frozen=True)
class LabeledDataset:
    densities: list
    labels: np.ndarray

    def __len__(self):
        return len(self.densities)

    def subset(self, indices):
        idx = np.asarray(indices)
        return LabeledDataset([self.densities[i] for i in idx],
                              self.labels[idx])


def labeled_dataset(densities, labels) -> LabeledDataset:
    labels = np.asarray(labels, dtype=int)
    if len(densities) != labels.shape[0]:
        raise ValidationError("densities and labels must have equal length")
    if labels.shape[0] < 2:
        raise ValidationError("need at least two samples")
    if not np.all(np.isin(labels, (-1, 1))):
        raise ValidationError("labels must be -1 or +1")
    return LabeledDataset(list(densities), labels)


@dataclass(frozen=True)
class SvmModel:
    """Solved dual: coefficients, bias, and the spec the Gram came from."""

    dual_coeffs: np.ndarray
    bias: float
    support_indices: np.ndarray
    train_labels: np.ndarray
    penalty: float
    spec: object = None
    converged: bool = True


@dataclass(frozen=True)
class CvReport:
    """Grid of (C, sigma, mean validation error) and the selected pair."""

    grid: list
    best: tuple
    best_error: float


def stratified_split_indices(labels, train_fraction, seed):
    """Per-class deterministic shuffle; returns sorted train/test indices."""
    if not 0 < train_fraction < 1:
        raise ValidationError("train fraction must be in (0, 1)")
    rng = np.random.default_rng(seed)
    labels = np.asarray(labels)
    train_idx, test_idx = [], []
    for value in np.unique(labels):
        members = np.flatnonzero(labels == value)
        perm = members[rng.permutation(members.shape[0])]
        n_train = int(round(train_fraction * members.shape[0]))
        if n_train == 0:
            raise DegenerateDataError(
                f"class {value} would get zero training samples")
        train_idx.extend(perm[:n_train])
        test_idx.extend(perm[n_train:])
    return np.sort(np.array(train_idx, dtype=int)), np.sort(
        np.array(test_idx, dtype=int))


def train_test_split(data: LabeledDataset, train_fraction, seed):
    """Deterministic stratified split into (train, test) datasets."""
    train_idx, test_idx = stratified_split_indices(data.labels,
                                                   train_fraction, seed)
    return data.subset(train_idx), data.subset(test_idx)


def _exact_symmetric(M):
    return np.triu(M) + np.triu(M, 1).T


def condition_gram(G, mode) -> GramMatrix:
    """Repair an indefinite Gram: 'none', 'clip' (zero negative eigenvalues)
    or 'jitter' (shift the diagonal just past the most negative one)."""
    entries = G.entries if isinstance(G, GramMatrix) else np.asarray(G, float)
    spec = G.spec if isinstance(G, GramMatrix) else None
    if not np.all(np.isfinite(entries)):
        raise ValidationError("Gram has non-finite entries")
    if mode == "none":
        return G if isinstance(G, GramMatrix) else GramMatrix(entries, spec)
    if mode == "clip":
        eigvals, eigvecs = np.linalg.eigh(entries)
        if eigvals[0] >= 0:
            return G if isinstance(G, GramMatrix) else GramMatrix(entries, spec)
        repaired = (eigvecs * np.maximum(eigvals, 0.0)) @ eigvecs.T
        return GramMatrix(_exact_symmetric(repaired), spec)
    if mode == "jitter":
        lo = float(np.linalg.eigvalsh(entries)[0])
        delta = max(0.0, -lo) + 1e-10
        return GramMatrix(entries + delta * np.eye(entries.shape[0]), spec)
    raise ValidationError(f"unknown conditioning mode {mode!r}")


def dual_objective(K, labels, alpha) -> float:
    y = np.asarray(labels, dtype=float)
    v = alpha * y
    return float(np.sum(alpha) - 0.5 * v @ K @ v)


def kkt_violation(K, labels, alpha, bias, C) -> float:
    """Largest margin-condition residual, classified by box position."""
    y = np.asarray(labels, dtype=float)
    yf = y * ((alpha * y) @ K + bias)
    r = 1.0 - yf
    edge = 1e-9 * C
    at_zero = alpha <= edge
    at_cap = alpha >= C - edge
    free = ~at_zero & ~at_cap
    worst = 0.0
    if at_zero.any():
        worst = max(worst, float(np.max(r[at_zero], initial=-np.inf)))
    if at_cap.any():
        worst = max(worst, float(np.max(-r[at_cap], initial=-np.inf)))
    if free.any():
        worst = max(worst, float(np.max(np.abs(r[free]))))
    return max(worst, 0.0)


def _final_bias(K, y, alpha, C):
    g = (alpha * y) @ K
    margin = y - g
    free = (alpha > 1e-9 * C) & (alpha < C * (1 - 1e-9))
    if free.any():
        return float(np.mean(margin[free]))
    uppers = margin[((alpha <= 1e-9 * C) & (y < 0)) | ((alpha >= C * (1 - 1e-9)) & (y > 0))]
    lowers = margin[((alpha <= 1e-9 * C) & (y > 0)) | ((alpha >= C * (1 - 1e-9)) & (y < 0))]
    hi = float(np.min(uppers)) if uppers.size else np.inf
    lo = float(np.max(lowers)) if lowers.size else -np.inf
    if np.isinf(hi) and np.isinf(lo):
        return 0.0
    if np.isinf(hi):
        return lo
    if np.isinf(lo):
        return hi
    return 0.5 * (lo + hi)


def solve_dual_smo(G, labels, C, kkt_tol=1e-3, max_passes=10000,
                   spec=None) -> SvmModel:
    """Train the dual by sequential minimal optimization.

    Returns a model satisfying the KKT conditions at ``kkt_tol`` (the
    internal loop works at half that, so the recomputed final bias stays
    within tolerance).  If ``max_passes`` runs out first the best iterate
    is returned with ``converged=False``.
    """
    K = G.entries if isinstance(G, GramMatrix) else np.asarray(G, dtype=float)
    y = np.asarray(labels, dtype=float)
    n = y.shape[0]
    if K.shape != (n, n):
        raise ValidationError("Gram order must match the label count")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValidationError("labels must be -1 or +1")
    if not C > 0:
        raise ValidationError("C must be positive")
    if np.unique(y).shape[0] < 2:
        raise DegenerateDataError(
            "single-class training set: the equality constraint forces "
            "alpha = 0")

    alpha = np.zeros(n)
    bias = 0.0
    E = -y.copy()  # decision values start at zero
    tol = 0.5 * kkt_tol
    tiny = 1e-12

    def take_step(i, j):
        nonlocal bias, E
        if i == j:
            return False
        ai, aj = alpha[i], alpha[j]
        yi, yj = y[i], y[j]
        Ei, Ej = E[i], E[j]
        s = yi * yj
        if s > 0:
            L, H = max(0.0, ai + aj - C), min(C, ai + aj)
        else:
            L, H = max(0.0, aj - ai), min(C, C + aj - ai)
        if H - L < tiny:
            return False
        eta = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if eta > tiny:
            aj_new = aj + yj * (Ei - Ej) / eta
            aj_new = min(max(aj_new, L), H)
        else:
            # flat or concave along the pair: compare the two endpoints
            f1 = yi * (Ei + bias) - ai * K[i, i] - s * aj * K[i, j]
            f2 = yj * (Ej + bias) - s * ai * K[i, j] - aj * K[j, j]
            L1 = ai + s * (aj - L)
            H1 = ai + s * (aj - H)
            psi_L = (L1 * f1 + L * f2 + 0.5 * L1 * L1 * K[i, i]
                     + 0.5 * L * L * K[j, j] + s * L * L1 * K[i, j])
            psi_H = (H1 * f1 + H * f2 + 0.5 * H1 * H1 * K[i, i]
                     + 0.5 * H * H * K[j, j] + s * H * H1 * K[i, j])
            if psi_L < psi_H - tiny:
                aj_new = L
            elif psi_L > psi_H + tiny:
                aj_new = H
            else:
                return False
        if abs(aj_new - aj) < tiny * (aj_new + aj + tiny):
            return False
        ai_new = ai + s * (aj - aj_new)
        # rounding can push the paired coefficient just past the box
        if ai_new < 0 and ai_new > -1e-10 * C:
            ai_new = 0.0
        elif ai_new > C and ai_new < C * (1 + 1e-10):
            ai_new = C
        d_i = yi * (ai_new - ai)
        d_j = yj * (aj_new - aj)
        b1 = bias - Ei - d_i * K[i, i] - d_j * K[i, j]
        b2 = bias - Ej - d_i * K[i, j] - d_j * K[j, j]
        if tiny < ai_new < C - tiny:
            new_bias = b1
        elif tiny < aj_new < C - tiny:
            new_bias = b2
        else:
            new_bias = 0.5 * (b1 + b2)
        E += d_i * K[i] + d_j * K[j] + (new_bias - bias)
        alpha[i], alpha[j] = ai_new, aj_new
        bias = new_bias
        return True

    def examine(i):
        r = E[i] * y[i]
        if not ((r < -tol and alpha[i] < C) or (r > tol and alpha[i] > 0)):
            return False
        candidates = np.flatnonzero((alpha > 0) & (alpha < C))
        if candidates.size > 1:
            j = int(candidates[np.argmax(np.abs(E[i] - E[candidates]))])
            if take_step(i, j):
                return True
        start = (i + 1) % n
        for j in candidates[(np.searchsorted(candidates, start)
                             + np.arange(candidates.size)) % max(candidates.size, 1)]:
            if take_step(i, int(j)):
                return True
        for j in (start + np.arange(n)) % n:
            if take_step(i, int(j)):
                return True
        return False

    examine_all = True
    passes = 0
    while passes < max_passes:
        passes += 1
        changed = 0
        if examine_all:
            order = np.arange(n)
        else:
            free = np.flatnonzero((alpha > 0) & (alpha < C))
            # worst violators first
            order = free[np.argsort(-np.abs(E[free] * y[free]))]
        for i in order:
            changed += examine(int(i))
        if examine_all:
            if changed == 0:
                break
            examine_all = False
        elif changed == 0:
            examine_all = True
    # if passes ran out, the best-so-far iterate falls through

    bias = _final_bias(K, y, alpha, C)
    converged = kkt_violation(K, y, alpha, bias, C) <= kkt_tol
    support = np.flatnonzero(alpha > 0)
    alpha.flags.writeable = False
    return SvmModel(alpha, float(bias), support, np.asarray(labels, int),
                    float(C), spec, bool(converged))


def decision_function(model: SvmModel, kernel_row) -> float:
    """Signed score for one sample given its kernel row against training."""
    row = np.asarray(kernel_row, dtype=float)
    if row.shape != model.train_labels.shape:
        raise ValidationError(
            f"kernel row length {row.shape} does not match training size "
            f"{model.train_labels.shape}")
    return float((model.dual_coeffs * model.train_labels) @ row + model.bias)


def decision_values(model: SvmModel, rows) -> np.ndarray:
    rows = np.asarray(rows, dtype=float)
    return rows @ (model.dual_coeffs * model.train_labels) + model.bias


def predict(model: SvmModel, rows) -> np.ndarray:
    """Predicted labels; a score of exactly zero maps to +1."""
    scores = decision_values(model, rows)
    return np.where(scores >= 0, 1, -1)


def test_error(model: SvmModel, test_rows, test_labels) -> float:
    test_labels = np.asarray(test_labels)
    if test_labels.shape[0] == 0:
        raise ValidationError("empty test set")
    return float(np.mean(predict(model, test_rows) != test_labels))


def _auto_conditioning(mode):
    # lemma-pd Grams can be indefinite for asymmetric-exponent specs;
    # -D and the gaussian transform are safe for SMO as-is
    return "clip" if mode == "lemma-pd" else "none"


def _grid_entries(C_grid, sigma_grid, mode):
    if not len(C_grid):
        raise ValidationError("empty C grid")
    if mode == "gaussian":
        if sigma_grid is None or not len(sigma_grid):
            raise ValidationError("gaussian mode needs a sigma grid")
        return [(float(C), float(s)) for C in C_grid for s in sigma_grid]
    return [(float(C), None) for C in C_grid]


def _kernel_entries_from_divergence(D, mode, sigma, z):
    if mode == "neg-divergence-cpd":
        return -D
    if mode == "gaussian":
        return gaussian_from_divergence(D, sigma)
    return _exact_symmetric(0.5 * (-D + z[:, None] + z[None, :]))


def stratified_fold_ids(labels, folds, rng):
    labels = np.asarray(labels)
    ids = np.empty(labels.shape[0], dtype=int)
    for value in np.unique(labels):
        members = np.flatnonzero(labels == value)
        perm = members[rng.permutation(members.shape[0])]
        ids[perm] = np.arange(perm.shape[0]) % folds
    return ids


def cross_validate(data: LabeledDataset, spec: DivergenceSpec, mode: str,
                   C_grid, sigma_grid=None, folds=5, seed=0,
                   conditioning=None, kkt_tol=1e-3,
                   max_passes=10000) -> CvReport:
    """Stratified k-fold grid search over C (and sigma in gaussian mode).

    The divergence Gram is computed once and re-transformed per grid point.
    Ties are broken toward smaller C, then smaller sigma.
    """
    if folds < 2:
        raise ValidationError("need at least two folds")
    entries = _grid_entries(C_grid, sigma_grid, mode)
    if conditioning is None:
        conditioning = _auto_conditioning(mode)
    V, w = stack_densities(data.densities)
    D = pairwise_divergence(spec, V, w)
    z = None
    K_full = None
    if mode == "lemma-pd":
        if _kernel_route(spec, DEFAULT_EPS_PARAM) == "lemma":
            z = np.array([_zero_divergence_total(spec, d)
                          for d in data.densities])
        else:
            K_full = gram(KernelSpec(spec, "lemma-pd"), data.densities).entries
    rng = np.random.default_rng(seed)
    fold_ids = stratified_fold_ids(data.labels, folds, rng)
    grid = []
    for C, sigma in entries:
        errors = []
        for f in range(folds):
            tr = fold_ids != f
            te = ~tr
            if np.unique(data.labels[tr]).shape[0] < 2:
                raise DegenerateDataError(f"fold {f} leaves a single class")
            if not te.any():
                raise DegenerateDataError(f"fold {f} is empty")
            if K_full is not None:
                Ktr = K_full[np.ix_(tr, tr)]
                rows = K_full[np.ix_(te, tr)]
            else:
                Ktr = _kernel_entries_from_divergence(
                    D[np.ix_(tr, tr)], mode, sigma,
                    z[tr] if z is not None else None)
                rows = _cross_from_divergence(D[np.ix_(te, tr)], mode, sigma,
                                              z, te, tr)
            Ktr = condition_gram(GramMatrix(Ktr), conditioning).entries
            model = solve_dual_smo(Ktr, data.labels[tr], C, kkt_tol,
                                   max_passes)
            errors.append(test_error(model, rows, data.labels[te]))
        grid.append((C, sigma, float(np.mean(errors))))
    best = min(grid, key=lambda e: (e[2], e[0],
                                    e[1] if e[1] is not None else -1.0))
    return CvReport(grid, (best[0], best[1]), best[2])


def _cross_from_divergence(D_rows, mode, sigma, z, te, tr):
    if mode == "neg-divergence-cpd":
        return -D_rows
    if mode == "gaussian":
        return gaussian_from_divergence(D_rows, sigma)
    return 0.5 * (-D_rows + z[te][:, None] + z[tr][None, :])


def train_svm(train: LabeledDataset, kspec: KernelSpec, C,
              conditioning=None, kkt_tol=1e-3, max_passes=10000) -> SvmModel:
    """Build the kernel Gram for a training set and solve the dual."""
    from .kernels import gram
    if conditioning is None:
        conditioning = _auto_conditioning(kspec.mode)
    G = condition_gram(gram(kspec, train.densities), conditioning)
    return solve_dual_smo(G, train.labels, C, kkt_tol, max_passes, spec=kspec)


def evaluate_svm(model: SvmModel, train: LabeledDataset,
                 test: LabeledDataset) -> float:
    """Test error of a trained model, building the cross-kernel rows."""
    rows = kernel_rows(model.spec, train.densities, test.densities)
    return test_error(model, rows, test.labels)
