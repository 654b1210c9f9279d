"""Soft-margin SVM trained on precomputed kernel matrices.

The dual problem is solved by a two-variable working-set method with
max-violating-pair selection. Indefinite kernels (double centering does not
repair them) are handled by clamping the pairwise curvature from below, so
every step stays finite; failure to reach the tolerance inside the
iteration cap flags the model instead of raising.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass

import numpy as np

from .errors import DataError, NumericError
from .kernel import KernelMatrix

log = logging.getLogger(__name__)

#: Lower clamp on the curvature K_ii + K_jj - 2 K_ij of a working pair.
CURVATURE_FLOOR = 1e-12

#: Dual coefficients below this threshold do not make a support vector.
SUPPORT_EPS = 1e-12


@dataclass
class SvmParams:
    c: float = 2.0
    tol: float = 1e-3
    max_iter: int | None = None  # defaults to 10^4 * n pair updates

    def __post_init__(self):
        if not self.c > 0:
            raise DataError("C must be strictly positive")
        if not self.tol > 0:
            raise DataError("tolerance must be strictly positive")
        if self.max_iter is not None and self.max_iter < 1:
            raise DataError("max_iter must be at least 1")


@dataclass
class SvmModel:
    dual_coef: np.ndarray  # alpha_i * y_i over the support
    support: np.ndarray    # training indices of the support vectors
    bias: float
    c: float
    n_train: int
    objective: float
    kernel_fingerprint: str
    non_convergent: bool = False


def _kernel_values(kernel) -> tuple[np.ndarray, bool]:
    if isinstance(kernel, KernelMatrix):
        return kernel.values, kernel.is_psd
    values = np.asarray(kernel, dtype=np.float64)
    return values, False  # unknown definiteness: skip the monotonicity check


def kernel_fingerprint(values: np.ndarray) -> str:
    digest = hashlib.sha256()
    digest.update(str(values.shape).encode())
    digest.update(np.ascontiguousarray(values, dtype="<f8").tobytes())
    return digest.hexdigest()


def train(kernel, y, c: float = 2.0, tol: float = 1e-3,
          max_iter: int | None = None,
          class_weights: tuple[float, float] | None = None) -> SvmModel:
    """Fit the dual SVM on a precomputed training kernel.

    ``y`` holds labels in {-1, +1} with both classes present. Convergence
    is the max-violating-pair KKT gap dropping to ``tol``; the iteration
    cap defaults to 10^4 times the training size. ``class_weights``
    optionally scales the box constraint per class as (positive, negative)
    factors; by default both classes share the plain C.
    """
    params = SvmParams(c=c, tol=tol, max_iter=max_iter)
    k, assume_psd = _kernel_values(kernel)
    if k.ndim != 2 or k.shape[0] != k.shape[1]:
        raise DataError("kernel matrix must be square")
    if not np.all(np.isfinite(k)):
        raise DataError("kernel matrix has non-finite entries")
    y = np.asarray(y, dtype=np.float64).ravel()
    n = k.shape[0]
    if y.size != n:
        raise DataError("labels do not match kernel size")
    if n < 2:
        raise DataError("training needs at least 2 patterns")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise DataError("labels must be -1 or +1")
    if np.unique(y).size < 2:
        raise DataError("training needs both classes")

    pos = y > 0
    if class_weights is None:
        box = np.full(n, params.c)
    else:
        w_pos, w_neg = class_weights
        if not (w_pos > 0 and w_neg > 0):
            raise DataError("class weights must be strictly positive")
        box = np.where(pos, params.c * w_pos, params.c * w_neg)

    cap = params.max_iter if params.max_iter is not None else 10_000 * n
    alpha = np.zeros(n)
    grad = -np.ones(n)  # gradient of 1/2 a'Qa - sum(a) at a = 0

    def objective() -> float:
        # W(alpha) = sum(alpha) - 1/2 alpha' Q alpha, via the gradient
        return 0.5 * float(alpha.sum() - alpha @ grad)

    prev_obj = objective()
    converged = False
    for it in range(cap):
        up = (pos & (alpha < box)) | (~pos & (alpha > 0))
        low = (pos & (alpha > 0)) | (~pos & (alpha < box))
        if not up.any() or not low.any():
            converged = True
            break
        mvp = -grad * y
        i = int(np.flatnonzero(up)[np.argmax(mvp[up])])
        j = int(np.flatnonzero(low)[np.argmin(mvp[low])])
        gap = mvp[i] - mvp[j]
        if gap <= params.tol:
            converged = True
            break
        eta = k[i, i] + k[j, j] - 2.0 * k[i, j]
        if eta < CURVATURE_FLOOR:
            eta = CURVATURE_FLOOR
        step = gap / eta
        room_i = (box[i] - alpha[i]) if y[i] > 0 else alpha[i]
        room_j = alpha[j] if y[j] > 0 else (box[j] - alpha[j])
        step = min(step, room_i, room_j)
        alpha[i] += y[i] * step
        alpha[j] -= y[j] * step
        grad += step * y * (k[:, i] - k[:, j])
        if assume_psd and (it + 1) % n == 0:
            # The PSD flag tolerates slightly negative eigenvalues, so the
            # sweep check must leave matching slack before failing.
            obj = objective()
            scale = max(1.0, abs(prev_obj))
            if obj < prev_obj - 1e-6 * scale:
                raise NumericError(
                    "dual objective decreased on a PSD kernel "
                    "(%.12g -> %.12g)" % (prev_obj, obj)
                )
            prev_obj = obj
    else:
        converged = False
    non_convergent = not converged
    if non_convergent:
        log.warning("working-set solver hit the %d-iteration cap "
                    "(KKT gap above %g)", cap, params.tol)

    free = (alpha > SUPPORT_EPS) & (alpha < box - SUPPORT_EPS)
    if free.any():
        bias = float(np.mean((-grad * y)[free]))
    else:
        up = (pos & (alpha < box)) | (~pos & (alpha > 0))
        low = (pos & (alpha > 0)) | (~pos & (alpha < box))
        mvp = -grad * y
        hi = mvp[up].max() if up.any() else 0.0
        lo = mvp[low].min() if low.any() else 0.0
        bias = float((hi + lo) / 2.0)

    support = np.flatnonzero(alpha > SUPPORT_EPS)
    return SvmModel(
        dual_coef=(alpha * y)[support],
        support=support,
        bias=bias,
        c=params.c,
        n_train=n,
        objective=objective(),
        kernel_fingerprint=kernel_fingerprint(k),
        non_convergent=non_convergent,
    )


def decision_scores(model: SvmModel, rows) -> np.ndarray:
    """Decision values for kernel rows evaluated against the training set."""
    rows = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    if rows.shape[1] != model.n_train:
        raise DataError("kernel rows must have one column per training pattern")
    return rows[:, model.support] @ model.dual_coef + model.bias


def predict(model: SvmModel, rows) -> np.ndarray:
    """Class labels in {-1, +1}; a zero score maps to +1."""
    scores = decision_scores(model, rows)
    return np.where(scores >= 0.0, 1.0, -1.0)


@dataclass
class ErrorReport:
    """Per-class and global error counts for a binary evaluation."""

    errors_pos: int
    total_pos: int
    errors_neg: int
    total_neg: int

    @property
    def rate_pos(self) -> float:
        return self.errors_pos / self.total_pos if self.total_pos else 0.0

    @property
    def rate_neg(self) -> float:
        return self.errors_neg / self.total_neg if self.total_neg else 0.0

    @property
    def global_errors(self) -> int:
        return self.errors_pos + self.errors_neg

    @property
    def global_rate(self) -> float:
        total = self.total_pos + self.total_neg
        return self.global_errors / total if total else 0.0


def evaluate(model: SvmModel, rows, y_true) -> ErrorReport:
    """Error report of the model's predictions against true labels."""
    y_true = np.asarray(y_true, dtype=np.float64).ravel()
    if y_true.size == 0:
        raise DataError("empty test set")
    predicted = predict(model, rows)
    if predicted.size != y_true.size:
        raise DataError("predictions and labels differ in length")
    if not np.all(np.isin(y_true, (-1.0, 1.0))):
        raise DataError("labels must be -1 or +1")
    wrong = predicted != y_true
    return ErrorReport(
        errors_pos=int(np.count_nonzero(wrong & (y_true > 0))),
        total_pos=int(np.count_nonzero(y_true > 0)),
        errors_neg=int(np.count_nonzero(wrong & (y_true < 0))),
        total_neg=int(np.count_nonzero(y_true < 0)),
    )


def save_model(path, model: SvmModel) -> None:
    payload = {
        "dual_coef": model.dual_coef.tolist(),
        "support": model.support.tolist(),
        "bias": model.bias,
        "c": model.c,
        "n_train": model.n_train,
        "objective": model.objective,
        "kernel_fingerprint": model.kernel_fingerprint,
        "non_convergent": model.non_convergent,
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_model(path) -> SvmModel:
    with open(path) as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError("%s: %s" % (path, exc)) from None
    try:
        return SvmModel(
            dual_coef=np.asarray(payload["dual_coef"], dtype=np.float64),
            support=np.asarray(payload["support"], dtype=np.int64),
            bias=float(payload["bias"]),
            c=float(payload["c"]),
            n_train=int(payload["n_train"]),
            objective=float(payload["objective"]),
            kernel_fingerprint=str(payload["kernel_fingerprint"]),
            non_convergent=bool(payload["non_convergent"]),
        )
    except KeyError as exc:
        raise DataError("%s: missing model field %s" % (path, exc)) from None
