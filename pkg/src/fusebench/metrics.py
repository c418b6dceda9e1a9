"""Verification performance metrics: FAR/FRR, threshold sweeps, EER, HTER, AUC.

Conventions used throughout (similarity scores, higher = more genuine):

* a comparison is *accepted* when its score is >= the decision threshold,
  so FAR(t) is the fraction of impostor scores >= t and FRR(t) the fraction
  of genuine scores < t;
* FAR is non-increasing and FRR non-decreasing in the threshold;
* EER is approximated on a 1000-point linear threshold grid spanning the
  observed score range, as (FAR_i + FRR_i) / 2 at the grid index i that
  minimizes |FAR_i - FRR_i| (lowest index on ties).

:func:`exact_eer` evaluates every threshold where the rates can change and
exists so the grid approximation can be checked against ground truth.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import UndefinedGainError, ValidationError

SWEEP_POINTS = 1000


def _as_score_vector(values, what: str) -> np.ndarray:
    arr = np.array(values, dtype=np.float64, copy=True).ravel()
    if arr.size == 0:
        raise ValidationError(f"no {what} scores to evaluate")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"non-finite value among {what} scores")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class FusedScores:
    """Post-fusion scores for both classes, ready for thresholding."""

    genuine: np.ndarray
    impostor: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "genuine", _as_score_vector(self.genuine, "genuine"))
        object.__setattr__(self, "impostor", _as_score_vector(self.impostor, "impostor"))


@dataclass(frozen=True, eq=False)
class RocCurve:
    """Threshold sweep result: parallel threshold/FAR/FRR arrays plus EER.

    ``eer`` is (FAR + FRR) / 2 at the sweep index minimizing |FAR - FRR|,
    except in the degenerate all-scores-equal case where it is defined as
    the chance level 0.5.
    """

    thresholds: np.ndarray
    far: np.ndarray
    frr: np.ndarray
    eer: float
    eer_threshold: float

    def __post_init__(self):
        for field in ("thresholds", "far", "frr"):
            arr = np.asarray(getattr(self, field), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, field, arr)
        if not (self.thresholds.shape == self.far.shape == self.frr.shape):
            raise ValidationError("threshold/FAR/FRR arrays must align")

    def points(self) -> list[tuple[float, float, float]]:
        return list(zip(self.thresholds.tolist(), self.far.tolist(), self.frr.tolist()))


def far_at(impostor, threshold: float) -> float:
    """Fraction of impostor scores accepted (>= threshold)."""
    impostor = np.asarray(impostor, dtype=np.float64)
    return float(np.count_nonzero(impostor >= threshold) / impostor.size)


def frr_at(genuine, threshold: float) -> float:
    """Fraction of genuine scores rejected (< threshold)."""
    genuine = np.asarray(genuine, dtype=np.float64)
    return float(np.count_nonzero(genuine < threshold) / genuine.size)


def _counts_at(fs: FusedScores, thresholds: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Integer (impostors >= t, genuines < t) counts per threshold.

    searchsorted on the sorted class scores gives exact counts in O(log n)
    per threshold; 'left' matches the >= / < pair of conventions.
    """
    gen = np.sort(fs.genuine)
    imp = np.sort(fs.impostor)
    gen_lt = np.searchsorted(gen, thresholds, side="left")
    imp_ge = imp.size - np.searchsorted(imp, thresholds, side="left")
    return imp_ge, gen_lt


def _rates_at(fs: FusedScores, thresholds: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    imp_ge, gen_lt = _counts_at(fs, thresholds)
    return imp_ge / fs.impostor.size, gen_lt / fs.genuine.size


def _eer_index(fs: FusedScores, imp_ge: np.ndarray, gen_lt: np.ndarray) -> int:
    # |FAR - FRR| compared exactly via integer cross-multiplication, so the
    # lowest-index tie rule is immune to float rounding of the rates.
    diff = np.abs(imp_ge * fs.genuine.size - gen_lt * fs.impostor.size)
    return int(np.argmin(diff))


def sweep_roc(fs: FusedScores) -> RocCurve:
    """Evaluate FAR/FRR on a 1000-point linear grid over the score range.

    Grid point k is lo + k * (hi - lo) / 999 where lo/hi are the minimum
    and maximum over both classes pooled.  If every fused score is equal
    the sweep carries no information; the curve degenerates to a single
    repeated point and EER is defined as 0.5 (with a warning), which
    correctly scores an uninformative fusion as chance level.
    """
    lo = float(min(fs.genuine.min(), fs.impostor.min()))
    hi = float(max(fs.genuine.max(), fs.impostor.max()))
    if hi == lo:
        warnings.warn(
            "all fused scores are identical; EER defined as 0.5",
            RuntimeWarning,
            stacklevel=2,
        )
        thresholds = np.full(SWEEP_POINTS, lo)
        far, frr = _rates_at(fs, thresholds)
        return RocCurve(thresholds, far, frr, eer=0.5, eer_threshold=lo)
    k = np.arange(SWEEP_POINTS, dtype=np.float64)
    thresholds = lo + k * (hi - lo) / (SWEEP_POINTS - 1)
    imp_ge, gen_lt = _counts_at(fs, thresholds)
    far = imp_ge / fs.impostor.size
    frr = gen_lt / fs.genuine.size
    i = _eer_index(fs, imp_ge, gen_lt)
    eer = float((far[i] + frr[i]) / 2.0)
    return RocCurve(thresholds, far, frr, eer=eer, eer_threshold=float(thresholds[i]))


def exact_eer(fs: FusedScores) -> float:
    """EER with no grid error, for auditing :func:`sweep_roc`.

    FAR and FRR are step functions that only change at observed score
    values, so evaluating every distinct score, every midpoint between
    consecutive distinct scores, and sentinels beyond both ends visits
    every achievable (FAR, FRR) pair.  Returns (FAR + FRR) / 2 at the
    lowest candidate threshold minimizing |FAR - FRR|.
    """
    distinct = np.unique(np.concatenate([fs.genuine, fs.impostor]))
    mids = (distinct[:-1] + distinct[1:]) / 2.0
    candidates = np.sort(np.concatenate([[-np.inf], distinct, mids, [np.inf]]))
    imp_ge, gen_lt = _counts_at(fs, candidates)
    i = _eer_index(fs, imp_ge, gen_lt)
    return float((imp_ge[i] / fs.impostor.size + gen_lt[i] / fs.genuine.size) / 2.0)


def hter(fs: FusedScores, threshold: float) -> float:
    """Half total error rate at one fixed, externally chosen threshold."""
    return (far_at(fs.impostor, threshold) + frr_at(fs.genuine, threshold)) / 2.0


def auc(curve: RocCurve) -> float:
    """Area under FRR as a function of FAR; smaller is better.

    Sweep points are sorted by FAR ascending and duplicate FAR values are
    collapsed by averaging their FRR before trapezoidal integration, so
    the flat segments a step-shaped sweep produces do not double-count.
    """
    if curve.far.size < 2:
        raise ValidationError("AUC needs a curve with at least two points")
    order = np.argsort(curve.far, kind="stable")
    far = curve.far[order]
    frr = curve.frr[order]
    uniq_far, starts = np.unique(far, return_index=True)
    if uniq_far.size == 1:
        return 0.0
    sums = np.add.reduceat(frr, starts)
    counts = np.diff(np.append(starts, far.size))
    return float(np.trapezoid(sums / counts, uniq_far))


def gain(ref: float, new: float) -> float:
    """Relative improvement of ``new`` over ``ref`` in percent.

    Positive when ``new`` is the smaller (better) rate.  Applies to EER and
    AUC alike.  A non-positive reference makes the ratio meaningless and
    raises :class:`UndefinedGainError`.
    """
    if ref <= 0:
        raise UndefinedGainError(f"reference rate must be positive, got {ref!r}")
    return 100.0 * (ref - new) / ref


def roc_to_csv(curve: RocCurve, precision: int = 6) -> str:
    """Render a curve as ``threshold,far,frr`` CSV text (LF line endings)."""
    lines = ["threshold,far,frr"]
    for t, fa, fr in zip(curve.thresholds, curve.far, curve.frr):
        lines.append(f"{t:.{precision}f},{fa:.{precision}f},{fr:.{precision}f}")
    return "\n".join(lines) + "\n"
