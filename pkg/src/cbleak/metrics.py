"""Biometric verification metrics: score generation, EER/threshold, FMR,
SAR, and the attack-vs-normal false-match gap.

All schemes expose similarity in [0, 1] (1 - native normalized distance),
so one threshold convention serves every scheme: a comparison is accepted
when similarity >= theta.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import schemes
from .rng import stream
from .synthdata import BinaryCodeSet, RealFeatureSet

__all__ = [
    "ScoreSet",
    "EvalReport",
    "generate_scores",
    "eer_and_threshold",
    "fmr_at",
    "fnmr_at",
    "sar",
    "delta_fmr",
    "evaluate_scheme",
]

MAX_NON_MATED_PAIRS = 100_000


@dataclass(frozen=True)
class ScoreSet:
    """Similarity scores: same-identity, cross-identity, and attack."""

    mated: np.ndarray
    non_mated: np.ndarray
    mated_imposter: Optional[np.ndarray] = None
    n_non_mated_total: int = 0  # cross-class pairs available before subsampling

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="ascii") as fh:
            writer = csv.writer(fh)
            writer.writerow(["kind", "score"])
            for name in ("mated", "non_mated", "mated_imposter"):
                scores = getattr(self, name)
                if scores is None:
                    continue
                for v in scores:
                    writer.writerow([name, f"{v:.17g}"])


@dataclass(frozen=True)
class EvalReport:
    """One experiment row: normal metrics plus optional attack/leakage columns."""

    eer: float
    theta: float
    fmr_at_et: float
    sar: Optional[float] = None
    delta_fmr: Optional[float] = None
    lambda_max: Optional[float] = None
    n_mated: int = 0
    n_non_mated: int = 0
    n_attack: int = 0

    def __post_init__(self):
        for name in ("eer", "fmr_at_et"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.sar is not None and not 0.0 <= self.sar <= 1.0:
            raise ValueError("sar must lie in [0, 1]")
        if self.sar is not None and self.delta_fmr is not None:
            if abs(self.delta_fmr - (self.sar - self.fmr_at_et)) > 1e-12:
                raise ValueError("delta_fmr must equal sar - fmr_at_et")

    def to_dict(self) -> dict:
        return {
            "eer": self.eer,
            "theta": self.theta,
            "fmr_at_et": self.fmr_at_et,
            "sar": self.sar,
            "delta_fmr": self.delta_fmr,
            "lambda_max_bits": self.lambda_max,
            "n_mated": self.n_mated,
            "n_non_mated": self.n_non_mated,
            "n_attack": self.n_attack,
        }

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"
        if path is not None:
            with open(path, "w", encoding="ascii") as fh:
                fh.write(text)
        return text


def _pair_similarities(key, payloads, ia, ib) -> np.ndarray:
    return 1.0 - schemes.pair_distance(key, payloads, ia, ib)


def generate_scores(
    dataset: RealFeatureSet | BinaryCodeSet,
    key,
    max_non_mated: int = MAX_NON_MATED_PAIRS,
    seed: int = 0,
) -> ScoreSet:
    """Mated scores from every within-class pair; non-mated scores from the
    cross-class pairs, subsampled with a seeded stream above max_non_mated."""
    labels = dataset.labels
    n = len(labels)
    inputs = dataset.features if isinstance(dataset, RealFeatureSet) else dataset.codes
    payloads = schemes.transform_batch(key, inputs)
    ia, ib = np.triu_indices(n, k=1)
    same = labels[ia] == labels[ib]
    mated = _pair_similarities(key, payloads, ia[same], ib[same])
    cross_a, cross_b = ia[~same], ib[~same]
    n_total = cross_a.size
    if n_total > max_non_mated:
        pick = stream(seed, "non-mated-pairs").choice(n_total, size=max_non_mated, replace=False)
        pick.sort()
        cross_a, cross_b = cross_a[pick], cross_b[pick]
    non_mated = _pair_similarities(key, payloads, cross_a, cross_b)
    return ScoreSet(mated=mated, non_mated=non_mated, n_non_mated_total=n_total)


def fmr_at(non_mated: np.ndarray, theta: float) -> float:
    """Fraction of non-mated comparisons accepted at theta."""
    non_mated = np.asarray(non_mated)
    return float((non_mated >= theta).mean())


def fnmr_at(mated: np.ndarray, theta: float) -> float:
    """Fraction of mated comparisons rejected at theta."""
    mated = np.asarray(mated)
    return float((mated < theta).mean())


def eer_and_threshold(scores) -> tuple[float, float]:
    """Equal error rate and its decision threshold.

    Sweeps the observed score values; FMR is non-increasing and FNMR
    non-decreasing in theta, so their difference crosses zero exactly once.
    When the crossing lands between two observed scores (including the
    fully separable case) theta is the midpoint of the bracketing scores;
    when the sign flips across a score step, theta and the EER are linearly
    interpolated between the bracketing thresholds.
    """
    if isinstance(scores, ScoreSet):
        mated, non_mated = scores.mated, scores.non_mated
    else:
        mated, non_mated = scores
    mated = np.asarray(mated, dtype=np.float64)
    non_mated = np.asarray(non_mated, dtype=np.float64)
    if mated.size == 0 or non_mated.size == 0:
        raise ValueError("both mated and non-mated score lists must be nonempty")

    cands = np.unique(np.concatenate([mated, non_mated]))
    cands = np.concatenate([[cands[0] - 1.0], cands, [cands[-1] + 1.0]])
    fmr = (non_mated[None, :] >= cands[:, None]).mean(axis=1)
    fnmr = (mated[None, :] < cands[:, None]).mean(axis=1)
    diff = fmr - fnmr  # non-increasing in theta, +1 at the low sentinel, -1 at the high

    i = int(np.flatnonzero(diff > 0)[-1])
    j = i + 1
    if diff[j] == 0.0:
        # diff stays zero on a plateau of thresholds; take the midpoint of
        # the bracketing observed scores (ties resolve toward the lower one)
        k = j
        while k + 1 < len(cands) and diff[k + 1] == 0.0:
            k += 1
        theta = 0.5 * (cands[i] + cands[k])
        eer = 0.5 * (fmr_at(non_mated, theta) + fnmr_at(mated, theta))
    else:
        w = diff[i] / (diff[i] - diff[j])
        theta = cands[i] + w * (cands[j] - cands[i])
        eer = 0.5 * ((fmr[i] + w * (fmr[j] - fmr[i])) + (fnmr[i] + w * (fnmr[j] - fnmr[i])))
    return float(eer), float(theta)


def sar(mated_imposter, theta: float) -> float:
    """Successful attack rate: fraction of attack scores accepted at theta."""
    scores = np.asarray(mated_imposter, dtype=np.float64)
    if scores.size == 0:
        raise ValueError("mated_imposter scores must be nonempty")
    return float((scores >= theta).mean())


def delta_fmr(sar_value: float, fmr_at_et: float) -> float:
    """Attack-induced false-match excess; negative means the attack does
    worse than zero-effort impostors."""
    return sar_value - fmr_at_et


def evaluate_scheme(
    dataset,
    key,
    max_non_mated: int = MAX_NON_MATED_PAIRS,
    seed: int = 0,
) -> tuple[EvalReport, ScoreSet]:
    """Normal-situation evaluation: EER, theta, and FMR at that threshold."""
    scores = generate_scores(dataset, key, max_non_mated=max_non_mated, seed=seed)
    eer, theta = eer_and_threshold(scores)
    report = EvalReport(
        eer=eer,
        theta=theta,
        fmr_at_et=fmr_at(scores.non_mated, theta),
        n_mated=scores.mated.size,
        n_non_mated=scores.non_mated.size,
    )
    return report, scores
