"""cbleak: cancelable biometric transforms, GA pre-image attacks, and
score-level leakage quantification on seeded synthetic data."""

from . import attack, kernels, leakage, metrics, schemes, synthdata
from .attack import AttackResult, AttackScenario, GaConfig, check_proposition1, ga_attack, run_campaign
from .leakage import LeakageResult, TransitionMatrix, blahut_arimoto, estimate_transition_matrix
from .metrics import EvalReport, ScoreSet, eer_and_threshold, generate_scores
from .synthdata import BinaryCodeSet, RealFeatureSet, gen_binary_dataset, gen_real_dataset

__version__ = "0.1.0"

__all__ = [
    "attack",
    "kernels",
    "leakage",
    "metrics",
    "schemes",
    "synthdata",
    "AttackResult",
    "AttackScenario",
    "GaConfig",
    "check_proposition1",
    "ga_attack",
    "run_campaign",
    "LeakageResult",
    "TransitionMatrix",
    "blahut_arimoto",
    "estimate_transition_matrix",
    "EvalReport",
    "ScoreSet",
    "eer_and_threshold",
    "generate_scores",
    "BinaryCodeSet",
    "RealFeatureSet",
    "gen_binary_dataset",
    "gen_real_dataset",
    "__version__",
]
