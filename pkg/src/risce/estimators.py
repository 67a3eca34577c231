"""Cascaded-channel estimators operating on beamspace pilot measurements.

The flagship estimator exploits three structural facts about the per-user
beamspace channels: all users share one set of occupied columns, within a user
every occupied column's row support is a circular shift of one per-user
pattern, and the shifts are identical across users.  Baselines drop one or
both of the cross-column/cross-user couplings, and an oracle solves least
squares on the true supports.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .config import ArrayGeometry
from .numerics import (
    circ_xcorr_1d,
    circ_xcorr_2d,
    ls_solve,
    peak_shift_1d,
    peak_shift_2d,
    top_l_indices,
)
from .sensing import GroundTruth, Offset, shift_indices

__all__ = [
    "EstimatorInput",
    "EstimateReport",
    "OffsetUndetermined",
    "joint_column_support",
    "coarse_omp",
    "estimate_common_offsets",
    "offset_structured_somp",
    "estimate_triple_structured",
    "estimate_row_structured",
    "estimate_conventional_omp",
    "estimate_oracle_ls",
    "residual_stop_threshold",
]


def residual_stop_threshold(noise_variance: float, n_pilots: int) -> float:
    """Residual-norm level sigma*sqrt(2T) for greedy recovery without a known sparsity.

    Pass the result as stop_threshold to coarse_omp or offset_structured_somp
    together with a generous atom cap; iteration then stops once the residual
    is at the noise floor instead of after a fixed atom count.
    """
    if noise_variance < 0.0:
        raise ValueError("noise_variance must be non-negative")
    if n_pilots < 1:
        raise ValueError("n_pilots must be positive")
    return math.sqrt(2.0 * n_pilots * noise_variance)


@dataclass
class EstimatorInput:
    """Everything an estimator may use: measurements, sensing matrix, and sparsity budgets."""

    Y: list[np.ndarray]  # per-user n_pilots x n_bs measurements
    sensing_matrix: np.ndarray  # n_pilots x n_elements
    n_columns: int  # shared occupied-column count
    row_counts: list[int]  # per-user nonzero rows per occupied column
    geometry: ArrayGeometry

    def __post_init__(self) -> None:
        if not self.Y:
            raise ValueError("at least one user measurement is required")
        shape = self.Y[0].shape
        if len(shape) != 2:
            raise ValueError("measurements must be 2-D arrays")
        for k, Y_k in enumerate(self.Y):
            if Y_k.shape != shape:
                raise ValueError(f"user {k} measurement shape {Y_k.shape} differs from {shape}")
        n_pilots, n_bs = shape
        if self.sensing_matrix.ndim != 2 or self.sensing_matrix.shape[0] != n_pilots:
            raise ValueError("sensing matrix row count must match the pilot length")
        if self.sensing_matrix.shape[1] != self.geometry.n_elements:
            raise ValueError("sensing matrix column count must match the reflector size")
        if not 1 <= self.n_columns <= n_bs:
            raise ValueError(f"n_columns must lie in [1, {n_bs}]")
        if len(self.row_counts) != len(self.Y):
            raise ValueError("row_counts must list one budget per user")
        for k, count in enumerate(self.row_counts):
            if not 1 <= count <= self.geometry.n_elements:
                raise ValueError(f"user {k} row count {count} out of range")
        if self.n_columns * max(self.row_counts) > n_pilots:
            warnings.warn(
                f"total atom budget {self.n_columns * max(self.row_counts)} exceeds the "
                f"pilot length {n_pilots}; recovery may be unreliable",
                RuntimeWarning,
                stacklevel=2,
            )


@dataclass
class EstimateReport:
    """Estimator output: per-user channel estimates plus recovered structure.

    offsets and row_patterns are None for estimators that do not model the
    cross-column coupling.
    """

    H_hat: list[np.ndarray]
    col_support: np.ndarray
    offsets: list[Offset] | None
    row_patterns: list[np.ndarray] | None
    diagnostics: dict = field(default_factory=dict)


class OffsetUndetermined(RuntimeError):
    """Offset estimation found no correlation mass for at least one column.

    Carries the partial result: `offsets` holds zero shifts for the columns
    listed in `failed`, so callers can fall back and continue.
    """

    def __init__(self, offsets: list[Offset], failed: list[int]):
        super().__init__(f"offset undetermined for columns {failed}")
        self.offsets = offsets
        self.failed = failed


def _zero(geometry: ArrayGeometry) -> Offset:
    return (0, 0) if geometry.is_planar else 0


def joint_column_support(Y: list[np.ndarray], n_columns: int) -> np.ndarray:
    """Occupied-column detection from the diagonal of sum_k Y_k^H @ Y_k.

    The diagonal equals the per-column measurement power summed over users, so
    the shared support is the top-n_columns entries (ascending index order).
    """
    power = np.zeros(Y[0].shape[1])
    for Y_k in Y:
        power += np.sum(np.abs(Y_k) ** 2, axis=0)
    return top_l_indices(power, n_columns)


def _omp(
    y: np.ndarray, a: np.ndarray, budget: int, stop_threshold: float | None = None
) -> tuple[np.ndarray, np.ndarray, bool, float]:
    """Greedy matching pursuit with least-squares refit on the sorted support.

    Returns (support, coefficients, rank_deficient, final residual norm).
    Stops early when the residual carries no correlation mass, so a zero input
    yields an empty support; with stop_threshold set, also stops once the
    residual norm falls below it.
    """
    support: list[int] = []
    coef = np.zeros(0, dtype=complex)
    resid = np.array(y, dtype=complex, copy=True)
    rank_flag = False
    for _ in range(int(budget)):
        if stop_threshold is not None and float(np.linalg.norm(resid)) < stop_threshold:
            break
        metric = np.abs(a.conj().T @ resid) ** 2
        if support:
            metric[support] = -np.inf
        best = int(np.argmax(metric))
        if not (metric[best] > 0.0):
            break
        support.append(best)
        support.sort()
        sub = a[:, support]
        coef, deficient = ls_solve(sub, y)
        rank_flag = rank_flag or deficient
        resid = y - sub @ coef
    return np.asarray(support, dtype=int), coef, rank_flag, float(np.linalg.norm(resid))


def coarse_omp(
    y: np.ndarray, a: np.ndarray, sparsity: int, stop_threshold: float | None = None
) -> np.ndarray:
    """Per-column OMP returning a dense length-n coefficient vector.

    sparsity is the atom budget; an optional stop_threshold (see
    residual_stop_threshold) ends iteration early at the noise floor.
    """
    y = np.asarray(y)
    a = np.asarray(a)
    if a.ndim != 2 or y.ndim != 1 or y.shape[0] != a.shape[0]:
        raise ValueError(f"incompatible shapes {a.shape} and {y.shape}")
    if sparsity < 0:
        raise ValueError("sparsity must be non-negative")
    support, coef, _, _ = _omp(y, a, sparsity, stop_threshold)
    out = np.zeros(a.shape[1], dtype=complex)
    out[support] = coef
    return out


def estimate_common_offsets(
    coarse_cols: list[np.ndarray], geometry: ArrayGeometry
) -> list[Offset]:
    """Shared circular shifts between the first retained column and each other one.

    Per column, the per-user correlation magnitudes between the coarse
    reference column and the coarse target column are summed over users and
    the signed peak lag is taken.  The first column is the reference (zero
    shift).  Raises OffsetUndetermined, carrying zero-shift fallbacks, if some
    column has no correlation mass at all.
    """
    n_cols = coarse_cols[0].shape[1]
    offsets: list[Offset] = [_zero(geometry)]
    failed: list[int] = []
    for j in range(1, n_cols):
        acc: np.ndarray | None = None
        for h0 in coarse_cols:
            if geometry.is_planar:
                n1, n2 = geometry.n1, geometry.n2
                corr = circ_xcorr_2d(h0[:, 0].reshape(n1, n2), h0[:, j].reshape(n1, n2))
            else:
                corr = circ_xcorr_1d(h0[:, 0], h0[:, j])
            acc = corr if acc is None else acc + corr
        if not np.any(acc > 0.0):
            offsets.append(_zero(geometry))
            failed.append(j)
        elif geometry.is_planar:
            offsets.append(peak_shift_2d(acc))
        else:
            offsets.append(peak_shift_1d(acc))
    if failed:
        raise OffsetUndetermined(offsets, failed)
    return offsets


def _rolled(corr: np.ndarray, offset: Offset, geometry: ArrayGeometry) -> np.ndarray:
    """rolled[p] = corr[(p + offset) mod n], wrapping each axis for planar arrays."""
    if geometry.is_planar:
        d1, d2 = offset
        return np.roll(
            corr.reshape(geometry.n1, geometry.n2), (-int(d1), -int(d2)), axis=(0, 1)
        ).ravel()
    return np.roll(corr, -int(offset))


def offset_structured_somp(
    y_cols: np.ndarray,
    a: np.ndarray,
    offsets: list[Offset],
    n_rows: int,
    geometry: ArrayGeometry,
    stop_threshold: float | None = None,
) -> dict:
    """Joint greedy row recovery across one user's occupied columns.

    Anchors index rows of the reference column; column j's support is the
    anchor set shifted by offsets[j].  Each iteration scores every unused
    anchor by the squared correlation magnitude summed over columns (each
    column's correlation evaluated at the anchor shifted by that column's
    offset), then refits every column by least squares on its shifted support
    and updates the residuals.  n_rows caps the anchor count; an optional
    stop_threshold ends iteration once every column residual is below it.
    """
    y_cols = np.asarray(y_cols)
    a = np.asarray(a)
    if y_cols.ndim != 2 or y_cols.shape[0] != a.shape[0]:
        raise ValueError(f"incompatible shapes {a.shape} and {y_cols.shape}")
    n_cols = y_cols.shape[1]
    if len(offsets) != n_cols:
        raise ValueError("one offset per retained column is required")
    n = a.shape[1]
    anchors: list[int] = []
    resids = np.array(y_cols, dtype=complex, copy=True)
    column_fits: list[tuple[np.ndarray, np.ndarray]] = [
        (np.zeros(0, dtype=int), np.zeros(0, dtype=complex)) for _ in range(n_cols)
    ]
    history: list[list[float]] = []
    rank_flag = False
    collision = False
    for _ in range(int(n_rows)):
        if stop_threshold is not None and all(
            float(np.linalg.norm(resids[:, j])) < stop_threshold for j in range(n_cols)
        ):
            break
        metric = np.zeros(n)
        for j in range(n_cols):
            corr = a.conj().T @ resids[:, j]
            metric += np.abs(_rolled(corr, offsets[j], geometry)) ** 2
        if anchors:
            metric[anchors] = -np.inf
        best = int(np.argmax(metric))
        if not (metric[best] > 0.0):
            break
        anchors.append(best)
        anchors.sort()
        anchor_arr = np.asarray(anchors, dtype=int)
        for j in range(n_cols):
            rows = np.unique(shift_indices(anchor_arr, offsets[j], geometry))
            if rows.size < anchor_arr.size:
                collision = True
            coef, deficient = ls_solve(a[:, rows], y_cols[:, j])
            rank_flag = rank_flag or deficient
            resids[:, j] = y_cols[:, j] - a[:, rows] @ coef
            column_fits[j] = (rows, coef)
        history.append([float(np.linalg.norm(resids[:, j])) for j in range(n_cols)])
    return {
        "anchors": np.asarray(anchors, dtype=int),
        "columns": column_fits,
        "residual_history": np.asarray(history, dtype=float).reshape(len(history), n_cols),
        "rank_deficient": rank_flag,
        "group_collision": collision,
    }


def estimate_triple_structured(inp: EstimatorInput) -> EstimateReport:
    """Three-stage structured estimator.

    Stage 1 detects the shared column support from summed measurement power.
    Stage 2 runs per-column OMP to obtain coarse columns, from which stage 3
    estimates the shared circular-shift offsets; the final stage re-estimates
    every user with the offset-coupled joint greedy recovery.  With a single
    occupied column the offset is zero by definition and the coarse pass is
    skipped.
    """
    a = inp.sensing_matrix
    n = a.shape[1]
    n_bs = inp.Y[0].shape[1]
    cols = joint_column_support(inp.Y, inp.n_columns)
    diagnostics: dict = {"offset_fallback": [], "rank_deficient": False, "group_collision": False}
    if inp.n_columns == 1:
        offsets: list[Offset] = [_zero(inp.geometry)]
    else:
        coarse_cols = []
        for k, Y_k in enumerate(inp.Y):
            h0 = np.column_stack(
                [coarse_omp(Y_k[:, c], a, inp.row_counts[k]) for c in cols]
            )
            coarse_cols.append(h0)
        try:
            offsets = estimate_common_offsets(coarse_cols, inp.geometry)
        except OffsetUndetermined as err:
            offsets = err.offsets
            diagnostics["offset_fallback"] = list(err.failed)
    H_hat = []
    row_patterns = []
    residual_histories = []
    for k, Y_k in enumerate(inp.Y):
        fit = offset_structured_somp(Y_k[:, cols], a, offsets, inp.row_counts[k], inp.geometry)
        H_k = np.zeros((n, n_bs), dtype=complex)
        for j, c in enumerate(cols):
            rows, coef = fit["columns"][j]
            H_k[rows, c] = coef
        H_hat.append(H_k)
        row_patterns.append(fit["anchors"])
        residual_histories.append(fit["residual_history"])
        diagnostics["rank_deficient"] = diagnostics["rank_deficient"] or fit["rank_deficient"]
        diagnostics["group_collision"] = diagnostics["group_collision"] or fit["group_collision"]
    diagnostics["residual_history"] = residual_histories
    return EstimateReport(
        H_hat=H_hat,
        col_support=cols,
        offsets=offsets,
        row_patterns=row_patterns,
        diagnostics=diagnostics,
    )


def estimate_row_structured(inp: EstimatorInput) -> EstimateReport:
    """Baseline keeping only the cross-user column coupling.

    Columns are detected jointly as in the structured estimator, but each
    user's retained columns are then recovered independently by per-column
    OMP, with no offset coupling between columns.
    """
    a = inp.sensing_matrix
    n = a.shape[1]
    n_bs = inp.Y[0].shape[1]
    cols = joint_column_support(inp.Y, inp.n_columns)
    H_hat = []
    rank_flag = False
    for k, Y_k in enumerate(inp.Y):
        H_k = np.zeros((n, n_bs), dtype=complex)
        for c in cols:
            support, coef, deficient, _ = _omp(Y_k[:, c], a, inp.row_counts[k])
            rank_flag = rank_flag or deficient
            H_k[support, c] = coef
        H_hat.append(H_k)
    return EstimateReport(
        H_hat=H_hat,
        col_support=cols,
        offsets=None,
        row_patterns=None,
        diagnostics={"rank_deficient": rank_flag},
    )


def estimate_conventional_omp(inp: EstimatorInput) -> EstimateReport:
    """Baseline with no sharing at all: per-user column pruning, per-column OMP.

    Each user keeps its own top-power columns (the same count as the shared
    support) and recovers each retained column independently, so the total
    atom budget per user is n_columns * row_count.
    """
    a = inp.sensing_matrix
    n = a.shape[1]
    n_bs = inp.Y[0].shape[1]
    H_hat = []
    rank_flag = False
    supports = []
    for k, Y_k in enumerate(inp.Y):
        power = np.sum(np.abs(Y_k) ** 2, axis=0)
        cols_k = top_l_indices(power, inp.n_columns)
        supports.append(cols_k)
        H_k = np.zeros((n, n_bs), dtype=complex)
        for c in cols_k:
            support, coef, deficient, _ = _omp(Y_k[:, c], a, inp.row_counts[k])
            rank_flag = rank_flag or deficient
            H_k[support, c] = coef
        H_hat.append(H_k)
    col_support = np.unique(np.concatenate(supports))
    return EstimateReport(
        H_hat=H_hat,
        col_support=col_support,
        offsets=None,
        row_patterns=None,
        diagnostics={"rank_deficient": rank_flag, "per_user_col_support": supports},
    )


def estimate_oracle_ls(inp: EstimatorInput, truth: GroundTruth) -> EstimateReport:
    """Least squares on the true supports; the performance bound for support-aware recovery."""
    a = inp.sensing_matrix
    n = a.shape[1]
    n_bs = inp.Y[0].shape[1]
    H_hat = []
    rank_flag = False
    for k, Y_k in enumerate(inp.Y):
        pattern = truth.row_patterns[k]
        H_k = np.zeros((n, n_bs), dtype=complex)
        for j, c in enumerate(truth.col_support):
            rows = shift_indices(pattern, truth.offsets[j], inp.geometry)
            coef, deficient = ls_solve(a[:, rows], Y_k[:, c])
            rank_flag = rank_flag or deficient
            H_k[rows, c] = coef
        H_hat.append(H_k)
    return EstimateReport(
        H_hat=H_hat,
        col_support=np.array(truth.col_support, dtype=int, copy=True),
        offsets=list(truth.offsets),
        row_patterns=[np.array(p, dtype=int, copy=True) for p in truth.row_patterns],
        diagnostics={"rank_deficient": rank_flag},
    )
