"""Genetic-algorithm pre-image attack engine and campaign runner.

Under Kerckhoffs's assumption the attacker holds n protected templates of
one identity plus the compromised system's transform and key, and searches
feature space for a pre-image whose template minimizes the mean native
distance to the stolen templates.  The GA uses rank-truncation selection
(top half survives), single-point crossover, Gaussian gene mutation with a
linearly shrinking scale for real chromosomes and per-bit flips for binary
ones, and elitist replacement of the least-fit half, stopping when the
best objective improves by less than the tolerance between consecutive
generations (best-so-far reading) or the generation cap is reached.

A campaign reconstructs a pre-image per identity from its compromised
templates, transforms it under the *target* system's key (same scheme or
a different one), and scores it against that identity's enrolled target
template, yielding the mated-imposter scores that SAR summarizes.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import csv
import numpy as np

from . import schemes
from .rng import derive_seed, stream
from .synthdata import BinaryCodeSet, RealFeatureSet

__all__ = [
    "GaConfig",
    "AttackResult",
    "AttackScenario",
    "CampaignRecord",
    "CampaignResult",
    "UnsupportedSchemeError",
    "Prop1Report",
    "objective",
    "ga_minimize",
    "ga_attack",
    "feature_bounds",
    "run_campaign",
    "check_proposition1",
]


class UnsupportedSchemeError(ValueError):
    """Raised when a linear-projection bound is requested for a non-linear scheme."""


@dataclass(frozen=True)
class GaConfig:
    """GA hyperparameters; defaults follow the attack's standard setup."""

    population_size: int = 200
    crossover_fraction: float = 0.9
    mutation_rate: float = 0.01
    mutation_sigma: Optional[float] = None  # None: 0.1 x per-gene bound range
    max_generations: int = 100
    tolerance: float = 1e-6
    stall_generations: int = 15  # tolerance window: stop when the best
    # objective improves by less than `tolerance` over this many generations
    seed: int = 0
    bounds: Optional[np.ndarray] = None  # (d, 2) per-gene [lo, hi] for real genes
    n_bits: Optional[int] = None  # chromosome length for binary genes

    def __post_init__(self):
        if self.population_size < 4:
            raise ValueError("population_size must be >= 4")
        if not 0.0 <= self.crossover_fraction <= 1.0:
            raise ValueError("crossover_fraction must lie in [0, 1]")
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise ValueError("mutation_rate must lie in [0, 1]")
        if self.max_generations < 1:
            raise ValueError("max_generations must be >= 1")
        if not self.tolerance >= 0.0:
            raise ValueError("tolerance must be non-negative")
        if self.stall_generations < 1:
            raise ValueError("stall_generations must be >= 1")


@dataclass(frozen=True)
class AttackResult:
    """Best pre-image found plus the per-generation best-so-far trace."""

    preimage: np.ndarray
    objective_trace: np.ndarray
    generations_used: int
    converged: bool

    @property
    def final_objective(self) -> float:
        return float(self.objective_trace[-1])


@dataclass(frozen=True)
class AttackScenario:
    """Compromised system (templates leak) and target system (attacked)."""

    sys_c_key: schemes.SchemeKey
    sys_t_key: schemes.SchemeKey
    n_templates: int = 1
    identities: Optional[Sequence[int]] = None

    def __post_init__(self):
        if self.n_templates < 1:
            raise ValueError("n_templates must be >= 1")
        kind_c = schemes.input_kind(self.sys_c_key)
        kind_t = schemes.input_kind(self.sys_t_key)
        if kind_c != kind_t:
            raise ValueError("both systems must consume the same feature space")
        if schemes.input_dim(self.sys_c_key) != schemes.input_dim(self.sys_t_key):
            raise ValueError("feature dimensions of the two systems differ")


def objective(x_hat: np.ndarray, templates, key) -> float:
    """Mean native distance between the transform of x_hat and each
    compromised template; with one template this is the plain pre-image
    objective."""
    refs = _stack_templates(templates, key)
    payload = schemes.transform_batch(key, np.asarray(x_hat)[None, ...])
    return float(schemes.distance_to_refs(key, payload, refs)[0])


def _stack_templates(templates, key) -> np.ndarray:
    if isinstance(templates, np.ndarray) and templates.ndim >= 2:
        return templates
    items = list(templates)
    if not items:
        raise ValueError("template list must be nonempty")
    name = schemes.scheme_name(key)
    payloads = []
    for t in items:
        if isinstance(t, schemes.ProtectedTemplate):
            if t.scheme != name:
                raise ValueError(f"template scheme {t.scheme!r} does not match key scheme {name!r}")
            payloads.append(t.payload)
        else:
            payloads.append(np.asarray(t))
    return np.stack(payloads)


# ---------------------------------------------------------------------------
# GA engine

def ga_minimize(batch_objective: Callable[[np.ndarray], np.ndarray], config: GaConfig) -> AttackResult:
    """Minimize a batched objective over real (bounded) or binary genes.

    `batch_objective` maps a (batch, n_genes) chromosome matrix to a
    (batch,) objective vector.  Exactly one of config.bounds / config.n_bits
    selects the encoding.
    """
    if (config.bounds is None) == (config.n_bits is None):
        raise ValueError("set exactly one of bounds (real genes) or n_bits (binary genes)")
    rng = stream(config.seed, "ga")
    binary = config.n_bits is not None

    if binary:
        n_genes = int(config.n_bits)
        pop = rng.integers(0, 2, size=(config.population_size, n_genes), dtype=np.uint8)
    else:
        bounds = np.asarray(config.bounds, dtype=np.float64)
        if bounds.ndim != 2 or bounds.shape[1] != 2 or (bounds[:, 0] > bounds[:, 1]).any():
            raise ValueError("bounds must be (n_genes, 2) with lo <= hi")
        lo, hi = bounds[:, 0], bounds[:, 1]
        n_genes = len(lo)
        span = hi - lo
        if config.mutation_sigma is not None:
            sigma0 = np.full(n_genes, float(config.mutation_sigma))
        else:
            sigma0 = 0.1 * span
        pop = lo + rng.random((config.population_size, n_genes)) * span

    fitness = np.asarray(batch_objective(pop), dtype=np.float64)
    n_keep = config.population_size // 2
    n_children = config.population_size - n_keep
    n_cross = int(round(n_children * config.crossover_fraction))
    n_mut = n_children - n_cross
    n_pairs = (n_mut + 1) // 2

    if not binary:
        sig = sigma0.astype(np.float64).copy()

    best_so_far = float(fitness.min())
    history = [best_so_far]  # l(0), l(1), ... best-so-far per generation
    converged = False
    generations = 0

    for gen in range(1, config.max_generations + 1):
        generations = gen
        order = np.argsort(fitness, kind="stable")[:n_keep]
        pop = pop[order]
        fitness = fitness[order]

        # crossover children: single-point recombination of survivors picked
        # by rank (better-ranked survivors parent more children)
        parents_a = np.minimum(rng.integers(0, n_keep, size=(2, n_cross)).min(axis=0), n_keep - 1)
        parents_b = np.minimum(rng.integers(0, n_keep, size=(2, n_cross)).min(axis=0), n_keep - 1)
        cuts = rng.integers(1, n_genes, size=n_cross) if n_genes > 1 else np.ones(n_cross, dtype=np.int64)
        take_first = np.arange(n_genes)[None, :] < cuts[:, None]
        cross = np.where(take_first, pop[parents_a], pop[parents_b])

        if binary:
            flips = rng.random((n_cross, n_genes)) < config.mutation_rate
            cross = cross ^ flips.astype(np.uint8)
            anchors = pop[rng.integers(0, n_keep, size=n_mut)]
            mut_flips = rng.random((n_mut, n_genes)) < config.mutation_rate
            mut = anchors ^ mut_flips.astype(np.uint8)
            children = np.concatenate([cross, mut], axis=0)
        else:
            per_gene = rng.random((n_cross, n_genes)) < config.mutation_rate
            cross = cross + rng.standard_normal((n_cross, n_genes)) * sig * per_gene
            # mutation children: antithetic Gaussian pairs around the current
            # best on a geometric scale ladder, so some pair always probes at
            # the scale that can still improve it; step stds shrink with
            # 1/sqrt(n_genes) so the ladder controls the total step norm
            rungs = sig[None, :] * (4.0 ** -np.arange(n_pairs))[:, None] / np.sqrt(n_genes)
            steps = rng.standard_normal((n_pairs, n_genes)) * rungs
            mut = np.concatenate([pop[0] + steps, pop[0] - steps], axis=0)[:n_mut]
            children = np.clip(np.concatenate([cross, mut], axis=0), lo, hi)

        child_fit = np.asarray(batch_objective(children), dtype=np.float64)
        if not binary:
            # re-center the ladder on the rung that produced the best child,
            # keeping the mutation scale matched to the remaining progress
            winner = int(np.argmin(child_fit))
            if child_fit[winner] < best_so_far and winner >= n_cross:
                k_win = (winner - n_cross) % n_pairs
                sig = np.clip(sig * 2.0 ** (1 - k_win), 1e-14, span)
        pop = np.concatenate([pop, children], axis=0)
        fitness = np.concatenate([fitness, child_fit])

        best_so_far = min(best_so_far, float(fitness.min()))
        history.append(best_so_far)
        window = config.stall_generations
        if len(history) > window and abs(history[-1] - history[-1 - window]) < config.tolerance:
            converged = True
            break

    best_idx = int(np.argmin(fitness))
    return AttackResult(
        preimage=pop[best_idx].copy(),
        objective_trace=np.asarray(history[1:]),
        generations_used=generations,
        converged=converged,
    )


def feature_bounds(features: np.ndarray, widen: float = 0.1) -> np.ndarray:
    """Per-gene [lo, hi] from observed features, widened by `widen` x range."""
    feats = np.asarray(features, dtype=np.float64)
    lo = feats.min(axis=0)
    hi = feats.max(axis=0)
    pad = widen * (hi - lo)
    return np.column_stack([lo - pad, hi + pad])


def ga_attack(
    templates,
    key,
    config: GaConfig,
    code_shape: Optional[tuple[int, int]] = None,
) -> AttackResult:
    """Reconstruct a pre-image of the given compromised templates.

    Real-feature schemes need config.bounds; binary-code schemes need the
    code shape (chromosome = flattened code).  The returned preimage is a
    feature vector or an H x W code matching the scheme's input space.
    """
    refs = _stack_templates(templates, key)
    if schemes.input_kind(key) == "binary":
        if code_shape is None:
            raise ValueError("code_shape is required for binary-code schemes")
        height, width = code_shape
        cfg = replace(config, n_bits=height * width, bounds=None)

        def batch_objective(pop):
            codes = pop.reshape(pop.shape[0], height, width)
            return schemes.distance_to_refs(key, schemes.transform_batch(key, codes), refs)

        result = ga_minimize(batch_objective, cfg)
        return replace(result, preimage=result.preimage.reshape(height, width))

    if config.bounds is None:
        raise ValueError("bounds are required for real-feature schemes")

    def batch_objective(pop):
        return schemes.distance_to_refs(key, schemes.transform_batch(key, pop), refs)

    return ga_minimize(batch_objective, config)


# ---------------------------------------------------------------------------
# Campaigns

@dataclass(frozen=True)
class CampaignRecord:
    identity: int
    n_templates: int
    final_objective: float
    generations: int
    converged: bool
    mated_imposter_score: float


@dataclass
class CampaignResult:
    records: list[CampaignRecord]
    traces: dict[int, np.ndarray] = field(default_factory=dict)

    @property
    def mated_imposter_scores(self) -> np.ndarray:
        return np.array([r.mated_imposter_score for r in self.records])

    @property
    def convergence_fraction(self) -> float:
        return float(np.mean([r.converged for r in self.records]))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="ascii") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["identity", "n_templates", "final_objective", "generations", "converged", "mated_imposter_score"]
            )
            for r in self.records:
                writer.writerow(
                    [
                        r.identity,
                        r.n_templates,
                        f"{r.final_objective:.17g}",
                        r.generations,
                        int(r.converged),
                        f"{r.mated_imposter_score:.17g}",
                    ]
                )

    def traces_to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="ascii") as fh:
            writer = csv.writer(fh)
            writer.writerow(["identity", "generation", "best_objective"])
            for identity in sorted(self.traces):
                for gen, val in enumerate(self.traces[identity], start=1):
                    writer.writerow([identity, gen, f"{val:.17g}"])


_WORKER_STATE: dict = {}


def _campaign_init(scenario, config, bounds, code_shape):
    _WORKER_STATE["scenario"] = scenario
    _WORKER_STATE["config"] = config
    _WORKER_STATE["bounds"] = bounds
    _WORKER_STATE["code_shape"] = code_shape


def _attack_one(task):
    identity, comp_inputs, enrolled_input = task
    scenario = _WORKER_STATE["scenario"]
    config = _WORKER_STATE["config"]
    cfg = replace(
        config,
        seed=derive_seed(config.seed, "ga", identity),
        bounds=_WORKER_STATE["bounds"],
    )
    refs = schemes.transform_batch(scenario.sys_c_key, comp_inputs)
    result = ga_attack(refs, scenario.sys_c_key, cfg, code_shape=_WORKER_STATE["code_shape"])
    attempt = schemes.transform(scenario.sys_t_key, result.preimage)
    enrolled = schemes.transform(scenario.sys_t_key, enrolled_input)
    score = schemes.similarity(scenario.sys_t_key, attempt, enrolled)
    record = CampaignRecord(
        identity=identity,
        n_templates=len(comp_inputs),
        final_objective=result.final_objective,
        generations=result.generations_used,
        converged=result.converged,
        mated_imposter_score=score,
    )
    return record, result.objective_trace


def run_campaign(
    scenario: AttackScenario,
    config: GaConfig,
    dataset: RealFeatureSet | BinaryCodeSet,
    workers: int = 1,
    keep_traces: bool = True,
) -> CampaignResult:
    """Attack every listed identity and score the pre-images in Sys T.

    Per identity the first n_templates enrolled samples are the compromised
    Sys C templates, and the identity's first enrolled Sys T template (its
    first sample under the target key - the worst case where the same
    instance is enrolled in both systems with different keys) is the
    mated-imposter reference.  Per-identity GA runs draw seeds from named
    streams, so results are independent of worker count and ordering.
    """
    if scenario.n_templates > dataset.samples_per_class:
        raise ValueError("n_templates cannot exceed samples_per_class")
    is_real = isinstance(dataset, RealFeatureSet)
    if is_real != (schemes.input_kind(scenario.sys_c_key) == "real"):
        raise ValueError("dataset kind does not match the scenario's schemes")
    identities = list(scenario.identities) if scenario.identities is not None else list(range(dataset.n_classes))
    if not identities:
        raise ValueError("identity list must be nonempty")

    bounds = feature_bounds(dataset.features) if is_real else None
    code_shape = None if is_real else (dataset.height, dataset.width)

    tasks = []
    for identity in identities:
        rows = dataset.class_rows(identity)
        tasks.append((identity, rows[: scenario.n_templates], rows[0]))

    if workers <= 1:
        _campaign_init(scenario, config, bounds, code_shape)
        outcomes = [_attack_one(t) for t in tasks]
    else:
        with ProcessPoolExecutor(
            max_workers=workers,
            initializer=_campaign_init,
            initargs=(scenario, config, bounds, code_shape),
        ) as pool:
            outcomes = list(pool.map(_attack_one, tasks))

    outcomes.sort(key=lambda rt: rt[0].identity)
    result = CampaignResult(records=[r for r, _ in outcomes])
    if keep_traces:
        result.traces = {r.identity: t for r, t in outcomes}
    return result


# ---------------------------------------------------------------------------
# Linear-projection feasibility bounds

@dataclass(frozen=True)
class Prop1Report:
    """Numeric check of the two attack-transfer bounds for projections.

    With epsilon the compromised-system objective value, delta the
    intra-person noise, and M a bound on the operator norms of the two
    projections and of the connecting map solving W_C X = W_T:

        ||x_hat W_C - x1 W_C||  <=  epsilon + M ||delta||
        ||x_hat W_T - x1 W_T||  <=  M (epsilon + M ||delta||)
    """

    epsilon: float
    m_bound: float
    delta_norm: float
    lhs_compromised: float
    bound_compromised: float
    lhs_target: float
    bound_target: float
    holds_compromised: bool
    holds_target: bool
    w_delta_residual: float


def _as_projection(w) -> np.ndarray:
    if isinstance(w, schemes.BioHashKey):
        return w.matrix
    if isinstance(w, np.ndarray) and w.ndim == 2:
        return np.asarray(w, dtype=np.float64)
    raise UnsupportedSchemeError(
        "feasibility bounds are stated for linear projections only; pass a matrix or a BioHash key"
    )


def check_proposition1(x_hat, x0, x1, w_c, w_t, epsilon: Optional[float] = None) -> Prop1Report:
    """Verify both transfer bounds for row-vector projections y = x W.

    epsilon defaults to the measured compromised-system distance
    ||x_hat W_C - x0 W_C||.  The target-side bound relies on expressing
    W_T as W_C W_delta; the least-squares residual of that representation
    is reported and is ~0 whenever W_C has full row rank.
    """
    w_c = _as_projection(w_c)
    w_t = _as_projection(w_t)
    x_hat = np.asarray(x_hat, dtype=np.float64)
    x0 = np.asarray(x0, dtype=np.float64)
    x1 = np.asarray(x1, dtype=np.float64)
    delta = x1 - x0

    measured = float(np.linalg.norm(x_hat @ w_c - x0 @ w_c))
    eps = measured if epsilon is None else float(epsilon)
    w_delta, *_ = np.linalg.lstsq(w_c, w_t, rcond=None)
    residual = float(np.linalg.norm(w_c @ w_delta - w_t))
    m_bound = max(
        float(np.linalg.norm(w_c, 2)),
        float(np.linalg.norm(w_t, 2)),
        float(np.linalg.norm(w_delta, 2)),
    )
    delta_norm = float(np.linalg.norm(delta))

    lhs_c = float(np.linalg.norm(x_hat @ w_c - x1 @ w_c))
    bound_c = eps + m_bound * delta_norm
    lhs_t = float(np.linalg.norm(x_hat @ w_t - x1 @ w_t))
    bound_t = m_bound * (eps + m_bound * delta_norm)
    slack = 1e-9
    return Prop1Report(
        epsilon=eps,
        m_bound=m_bound,
        delta_norm=delta_norm,
        lhs_compromised=lhs_c,
        bound_compromised=bound_c,
        lhs_target=lhs_t,
        bound_target=bound_t,
        holds_compromised=lhs_c <= bound_c * (1 + slack) + slack,
        holds_target=lhs_t <= bound_t * (1 + slack) + slack,
        w_delta_residual=residual,
    )
