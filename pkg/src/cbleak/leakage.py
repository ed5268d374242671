"""Score-level information leakage of a distance-preserving transform.

A transform is treated as a channel from input-space distances S to
transform-space distances T.  Distances are quantized into width-e bins,
the row-stochastic transition matrix C[i, j] = p(t_j | s_i) is estimated
by count ratios, and the channel capacity

    lambda_max = max_q I(S; T)

is computed with the Blahut-Arimoto iteration: starting from a uniform
input distribution q, alternate the posterior update

    Phi(i|j) = q(i) C(j|i) / sum_k q(k) C(j|k)

with the input update

    q'(i) proportional to exp( sum_j C(j|i) ln Phi(i|j) )

and track lambda = J(q', Phi) = sum_ij C(j|i) q'(i) log2(Phi(i|j)/q'(i))
until successive values differ by less than delta.  lambda_max reads in
bits; it measures how much an observed transform-space distance reveals
about the input-space distance, not the total leakage of the scheme.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from . import kernels, schemes
from .rng import stream
from .synthdata import BinaryCodeSet, RealFeatureSet

__all__ = [
    "TransitionMatrix",
    "LeakageResult",
    "estimate_transition_matrix",
    "mutual_information",
    "blahut_arimoto",
    "discrete_mi_oracle",
    "joint_mutual_information",
    "conditional_mutual_information",
    "collect_distance_pairs",
    "leakage_for_scheme",
]

BA_MAX_ITERATIONS = 100_000


@dataclass(frozen=True)
class TransitionMatrix:
    """Row-stochastic p(t-bin | s-bin) with the bin geometry that built it."""

    probs: np.ndarray  # (I, J)
    s_bins: np.ndarray  # (I, 2) [lo, hi) intervals of the retained s-bins
    t_edges: np.ndarray  # (J + 1,) edges of the t-bins
    bin_width: float
    counts: np.ndarray  # (I,) pair count per retained s-bin

    def __post_init__(self):
        rows = self.probs.sum(axis=1)
        if not np.allclose(rows, 1.0, atol=1e-9):
            raise ValueError("rows must sum to 1 within 1e-9")
        if (self.probs < 0).any() or (self.probs > 1).any():
            raise ValueError("entries must lie in [0, 1]")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="ascii") as fh:
            writer = csv.writer(fh)
            writer.writerow(["# cbleak-transition-v1", f"bin_width={self.bin_width!r}"])
            writer.writerow(["t_edges"] + [f"{v:.17g}" for v in self.t_edges])
            writer.writerow(["s_lo", "s_hi", "count"] + [f"t{j}" for j in range(self.probs.shape[1])])
            for (lo, hi), cnt, row in zip(self.s_bins, self.counts, self.probs):
                writer.writerow(
                    [f"{lo:.17g}", f"{hi:.17g}", int(cnt)] + [f"{p:.17g}" for p in row]
                )


@dataclass(frozen=True)
class LeakageResult:
    """Blahut-Arimoto output: capacity in bits plus convergence diagnostics."""

    lambda_max: float
    iterations: int
    q: np.ndarray  # capacity-achieving input distribution over retained s-bins
    delta: float
    converged: bool
    lambda_trace: np.ndarray = field(repr=False, default=None)

    def to_json(self, path=None) -> str:
        doc = {
            "lambda_max_bits": self.lambda_max,
            "iterations": self.iterations,
            "delta": self.delta,
            "converged": self.converged,
            "input_distribution": [float(v) for v in self.q],
        }
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
        if path is not None:
            with open(path, "w", encoding="ascii") as fh:
                fh.write(text)
        return text


def _as_pair_array(pairs) -> np.ndarray:
    arr = np.asarray(pairs, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] == 0:
        raise ValueError("pairs must be a nonempty (n, 2) array of (s, t)")
    if not np.isfinite(arr).all() or (arr < 0).any():
        raise ValueError("distances must be finite and non-negative")
    return arr


def _bin_indices(values: np.ndarray, e: float):
    vmin = values.min()
    vmax = values.max()
    n_bins = max(1, int(np.ceil((vmax - vmin) / e))) if vmax > vmin else 1
    idx = np.minimum(((values - vmin) / e).astype(np.int64), n_bins - 1)
    edges = vmin + e * np.arange(n_bins + 1)
    return idx, n_bins, edges


def estimate_transition_matrix(pairs, e: float) -> TransitionMatrix:
    """Quantize (s, t) pairs into width-e bins and estimate p(t-bin | s-bin).

    s-bins that received no pairs are dropped: capacity is defined over
    realizable inputs and empty rows would inject spurious capacity.
    """
    arr = _as_pair_array(pairs)
    if not e > 0:
        raise ValueError("bin width e must be positive")
    s_idx, n_s, s_edges = _bin_indices(arr[:, 0], e)
    t_idx, n_t, t_edges = _bin_indices(arr[:, 1], e)
    counts = np.zeros((n_s, n_t), dtype=np.int64)
    np.add.at(counts, (s_idx, t_idx), 1)
    keep = counts.sum(axis=1) > 0
    kept_counts = counts[keep]
    probs = kept_counts / kept_counts.sum(axis=1, keepdims=True)
    s_bins = np.column_stack([s_edges[:-1][keep], s_edges[1:][keep]])
    return TransitionMatrix(
        probs=probs,
        s_bins=s_bins,
        t_edges=t_edges,
        bin_width=float(e),
        counts=kept_counts.sum(axis=1),
    )


def _validate_channel(C) -> np.ndarray:
    C = np.asarray(getattr(C, "probs", C), dtype=np.float64)
    if C.ndim != 2 or C.shape[0] < 1 or C.shape[1] < 1:
        raise ValueError("channel matrix must be 2-D and nonempty")
    if (C < 0).any():
        raise ValueError("channel entries must be non-negative")
    if not np.allclose(C.sum(axis=1), 1.0, atol=1e-6):
        raise ValueError("channel matrix must be row-stochastic")
    return C / C.sum(axis=1, keepdims=True)


def mutual_information(C, q) -> float:
    """I(S;T) in bits for channel C and input distribution q; 0 log 0 = 0."""
    C = _validate_channel(C)
    q = np.asarray(q, dtype=np.float64)
    if q.shape != (C.shape[0],) or (q < 0).any() or not np.isclose(q.sum(), 1.0, atol=1e-9):
        raise ValueError("q must be a distribution over the channel rows")
    out = q @ C
    with np.errstate(divide="ignore", invalid="ignore"):
        log_ratio = np.log2(C / out[None, :])
    terms = np.where((C > 0) & (q[:, None] > 0), C * q[:, None] * log_ratio, 0.0)
    return float(terms.sum())


def blahut_arimoto(C, delta: float = 1e-6, max_iterations: int = BA_MAX_ITERATIONS) -> LeakageResult:
    """Channel capacity of C in bits via the Blahut-Arimoto iteration."""
    C = _validate_channel(C)
    if not delta > 0:
        raise ValueError("delta must be positive")
    n_in = C.shape[0]
    q = np.full(n_in, 1.0 / n_in)
    support = C > 0
    trace = [mutual_information(C, q)]
    converged = False
    iterations = 0
    for _ in range(max_iterations):
        iterations += 1
        # Phi(i|j) = q(i) C(j|i) / sum_k q(k) C(j|k)
        joint = q[:, None] * C
        out = joint.sum(axis=0)
        with np.errstate(divide="ignore", invalid="ignore"):
            phi = np.where(out[None, :] > 0, joint / out[None, :], 0.0)
            ln_phi = np.where(support & (phi > 0), np.log(np.where(phi > 0, phi, 1.0)), 0.0)
        # q'(i) proportional to exp(sum_j C(j|i) ln Phi(i|j))
        score = (C * ln_phi).sum(axis=1)
        score -= score.max()
        q_next = np.exp(score)
        q_next /= q_next.sum()
        # lambda(l+1) = J(q^{l+1}, Phi^l)
        with np.errstate(divide="ignore", invalid="ignore"):
            log_ratio = np.log2(np.where(phi > 0, phi, 1.0) / np.where(q_next[:, None] > 0, q_next[:, None], 1.0))
        terms = np.where(support & (phi > 0) & (q_next[:, None] > 0), C * q_next[:, None] * log_ratio, 0.0)
        lam = float(terms.sum())
        q = q_next
        done = abs(lam - trace[-1]) < delta
        trace.append(lam)
        if done:
            converged = True
            break
    return LeakageResult(
        lambda_max=trace[-1],
        iterations=iterations,
        q=q,
        delta=float(delta),
        converged=converged,
        lambda_trace=np.array(trace),
    )


# ---------------------------------------------------------------------------
# Discrete mutual-information oracle over explicit joint distributions.
# Everything is direct summation in bits; used as the independent check for
# the capacity machinery and the multi-template chain-rule reasoning.

def _entropy(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def _check_joint(joint, ndim: int) -> np.ndarray:
    joint = np.asarray(joint, dtype=np.float64)
    if joint.ndim != ndim:
        raise ValueError(f"joint must be {ndim}-D")
    if (joint < 0).any() or not np.isclose(joint.sum(), 1.0, atol=1e-9):
        raise ValueError("joint must be a probability distribution")
    return joint


def discrete_mi_oracle(joint) -> tuple[float, float, float]:
    """(H(X), H(X|Y), I(X;Y)) in bits from an explicit joint p(x, y)."""
    joint = _check_joint(joint, 2)
    h_x = _entropy(joint.sum(axis=1))
    h_xy = _entropy(joint.ravel())
    h_y = _entropy(joint.sum(axis=0))
    h_x_given_y = h_xy - h_y
    return h_x, h_x_given_y, h_x - h_x_given_y


def joint_mutual_information(joint3) -> float:
    """I(X; (Y1, Y2)) in bits from an explicit joint p(x, y1, y2)."""
    joint3 = _check_joint(joint3, 3)
    flat = joint3.reshape(joint3.shape[0], -1)
    return discrete_mi_oracle(flat)[2]


def conditional_mutual_information(joint3) -> float:
    """I(X; Y2 | Y1) = H(X|Y1) - H(X|Y1, Y2) in bits from p(x, y1, y2)."""
    joint3 = _check_joint(joint3, 3)
    h_x_y1 = _entropy(joint3.sum(axis=2).ravel()) - _entropy(joint3.sum(axis=(0, 2)))
    h_x_y1y2 = _entropy(joint3.ravel()) - _entropy(joint3.sum(axis=0).ravel())
    return h_x_y1 - h_x_y1y2


# ---------------------------------------------------------------------------
# End-to-end leakage of a scheme on a dataset.

def _input_distances(dataset, ia, ib) -> np.ndarray:
    if isinstance(dataset, RealFeatureSet):
        return kernels.pair_euclidean(dataset.features, ia, ib)
    if isinstance(dataset, BinaryCodeSet):
        flat = dataset.codes.reshape(dataset.codes.shape[0], -1)
        return kernels.pair_mismatch(flat, ia, ib)
    raise ValueError(f"unknown dataset type {type(dataset)!r}")


def collect_distance_pairs(dataset, key, max_pairs: int | None = None, seed: int = 0) -> np.ndarray:
    """All (or a seeded subsample of) intra- and inter-class (s, t) pairs,
    both axes min-max normalized to [0, 1]."""
    n = len(dataset.labels)
    ia, ib = np.triu_indices(n, k=1)
    if max_pairs is not None and ia.size > max_pairs:
        pick = stream(seed, "leakage-pairs").choice(ia.size, size=max_pairs, replace=False)
        pick.sort()
        ia, ib = ia[pick], ib[pick]
    s = _input_distances(dataset, ia, ib)
    inputs = dataset.features if isinstance(dataset, RealFeatureSet) else dataset.codes
    payloads = schemes.transform_batch(key, inputs)
    t = schemes.pair_distance(key, payloads, ia, ib)

    def norm(v):
        span = v.max() - v.min()
        return (v - v.min()) / span if span > 0 else np.zeros_like(v)

    return np.column_stack([norm(s), norm(t)])


def leakage_for_scheme(
    dataset,
    key,
    e: float = 0.01,
    delta: float = 1e-6,
    max_pairs: int | None = 200_000,
    seed: int = 0,
) -> tuple[LeakageResult, TransitionMatrix]:
    """Distance pairs -> transition matrix -> Blahut-Arimoto capacity."""
    pairs = collect_distance_pairs(dataset, key, max_pairs=max_pairs, seed=seed)
    tm = estimate_transition_matrix(pairs, e)
    return blahut_arimoto(tm.probs, delta=delta), tm
