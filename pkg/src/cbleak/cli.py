"""End-to-end experiment orchestration from a declarative JSON config.

Subcommands: gen, eval, attack, leakage, sweep.  Every command copies the
effective config into the output directory and writes timestamp-free
reports, so re-running a config reproduces its outputs byte for byte.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import leakage as leakage_mod
from . import metrics, schemes
from .attack import AttackScenario, GaConfig, run_campaign
from .config import ConfigError, apply_seed_override, load_config, set_by_path
from .synthdata import gen_binary_dataset, gen_real_dataset, save_dataset

__all__ = ["main", "cmd_gen", "cmd_eval", "cmd_attack", "cmd_leakage", "cmd_sweep"]


def _build_dataset(config):
    ds = config["dataset"]
    if ds["kind"] == "real":
        return gen_real_dataset(
            ds["n_classes"], ds["samples_per_class"], ds["dim"], ds["intra_sigma"], ds["seed"]
        )
    return gen_binary_dataset(
        ds["n_classes"], ds["samples_per_class"], ds["height"], ds["width"], ds["flip_rate"], ds["seed"]
    )


def _build_key(config, which, dataset):
    if which not in config:
        raise ConfigError([f"{which}: section required for this command"])
    spec = config[which]
    return schemes.make_key(spec["scheme"], dataset, spec["params"], spec["seed"])


def _ga_config(config) -> GaConfig:
    a = config.get("attack", {"seed": 0})
    return GaConfig(
        population_size=a.get("population_size", 200),
        crossover_fraction=a.get("crossover_fraction", 0.9),
        mutation_rate=a.get("mutation_rate", 0.01),
        mutation_sigma=a.get("mutation_sigma"),
        max_generations=a.get("max_generations", 100),
        tolerance=a.get("tolerance", 1e-6),
        seed=a.get("seed", 0),
    )


def _identities(config, dataset):
    ids = config.get("attack", {}).get("identities")
    if ids is None:
        return None
    if isinstance(ids, int):
        return list(range(min(ids, dataset.n_classes)))
    return list(ids)


def _write_config_copy(config, out: Path):
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "config.json", "w", encoding="utf-8") as fh:
        json.dump(config, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _normal_eval(config, dataset, key):
    m = config["metrics"]
    return metrics.evaluate_scheme(
        dataset, key, max_non_mated=m.get("max_non_mated", metrics.MAX_NON_MATED_PAIRS), seed=m["seed"]
    )


def cmd_gen(config, out: Path):
    """Generate the dataset and persist it in the columnar text format."""
    _write_config_copy(config, out)
    dataset = _build_dataset(config)
    save_dataset(dataset, out / "dataset.txt")
    return dataset


def cmd_eval(config, out: Path) -> metrics.EvalReport:
    """Normal-situation evaluation of the target system: theta, EER, FMR@ET."""
    _write_config_copy(config, out)
    dataset = _build_dataset(config)
    key = _build_key(config, "sys_t", dataset)
    report, scores = _normal_eval(config, dataset, key)
    report.to_json(out / "eval_report.json")
    if config.get("output", {}).get("dump_scores", False):
        scores.to_csv(out / "scores.csv")
    return report


def cmd_attack(config, out: Path, workers: int = 1) -> metrics.EvalReport:
    """Full campaign: normal eval of Sys T, per-identity GA pre-images from
    Sys C templates, SAR and delta-FMR at the normal threshold."""
    _write_config_copy(config, out)
    dataset = _build_dataset(config)
    sys_c_key = _build_key(config, "sys_c", dataset)
    sys_t_key = _build_key(config, "sys_t", dataset)
    normal_report, scores = _normal_eval(config, dataset, sys_t_key)

    scenario = AttackScenario(
        sys_c_key=sys_c_key,
        sys_t_key=sys_t_key,
        n_templates=config.get("attack", {}).get("n_templates", 1),
        identities=_identities(config, dataset),
    )
    campaign = run_campaign(scenario, _ga_config(config), dataset, workers=workers)
    attack_scores = campaign.mated_imposter_scores
    sar_value = metrics.sar(attack_scores, normal_report.theta)
    report = metrics.EvalReport(
        eer=normal_report.eer,
        theta=normal_report.theta,
        fmr_at_et=normal_report.fmr_at_et,
        sar=sar_value,
        delta_fmr=metrics.delta_fmr(sar_value, normal_report.fmr_at_et),
        n_mated=normal_report.n_mated,
        n_non_mated=normal_report.n_non_mated,
        n_attack=attack_scores.size,
    )
    report.to_json(out / "attack_report.json")
    campaign.to_csv(out / "attack_results.csv")
    if config.get("output", {}).get("dump_traces", True):
        campaign.traces_to_csv(out / "traces.csv")
    if config.get("output", {}).get("dump_scores", False):
        metrics.ScoreSet(
            mated=scores.mated, non_mated=scores.non_mated, mated_imposter=attack_scores
        ).to_csv(out / "scores.csv")
    return report


def cmd_leakage(config, out: Path) -> leakage_mod.LeakageResult:
    """Transition matrix and Blahut-Arimoto max leakage of the target system."""
    _write_config_copy(config, out)
    dataset = _build_dataset(config)
    key = _build_key(config, "sys_t", dataset)
    lk = config.get("leakage", {"seed": 0})
    result, tm = leakage_mod.leakage_for_scheme(
        dataset,
        key,
        e=lk.get("bin_width", 0.01),
        delta=lk.get("delta", 1e-6),
        max_pairs=lk.get("max_pairs", 200_000),
        seed=lk["seed"],
    )
    result.to_json(out / "leakage.json")
    tm.to_csv(out / "transition_matrix.csv")
    return result


def cmd_sweep(config, parameter: str, values, out: Path, workers: int = 1) -> list[dict]:
    """Re-run eval (and optionally attack / leakage) for each parameter value."""
    if not values:
        raise ValueError("sweep needs a nonempty value list")
    _write_config_copy(config, out)
    sweep_cfg = config.get("sweep", {})
    with_attack = sweep_cfg.get("with_attack", "sys_c" in config)
    with_leakage = sweep_cfg.get("with_leakage", False)
    rows = []
    for value in values:
        variant = set_by_path(config, parameter, value)
        subdir = out / f"{parameter.replace('.', '_')}={value}"
        if with_attack:
            report = cmd_attack(variant, subdir, workers=workers)
        else:
            report = cmd_eval(variant, subdir)
        row = {"parameter": parameter, "value": value, **report.to_dict()}
        if with_leakage:
            row["lambda_max_bits"] = cmd_leakage(variant, subdir).lambda_max
        rows.append(row)

    columns = ["parameter", "value", "theta", "eer", "fmr_at_et", "sar", "delta_fmr", "lambda_max_bits"]
    with open(out / "sweep.csv", "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow(["" if row.get(c) is None else row.get(c) for c in columns])
    with open(out / "sweep.json", "w", encoding="ascii") as fh:
        json.dump(rows, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return rows


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cbleak",
        description="Cancelable-biometric transforms, pre-image attack campaigns, and leakage quantification",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("gen", "generate and persist the configured dataset"),
        ("eval", "normal evaluation of the target system"),
        ("attack", "run the pre-image attack campaign"),
        ("leakage", "estimate transition matrix and max leakage"),
        ("sweep", "sweep a config parameter re-running eval/attack"),
    ]:
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True, help="path to the experiment JSON config")
        cmd.add_argument("--out", required=True, help="output directory for reports")
        cmd.add_argument("--workers", type=int, default=1, help="parallel attack workers")
        cmd.add_argument("--seed-override", type=int, default=None, help="re-derive all config seeds from this value")
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        json.dump({"error": "config-invalid", "messages": exc.messages}, sys.stderr)
        sys.stderr.write("\n")
        return 2
    if args.seed_override is not None:
        config = apply_seed_override(config, args.seed_override)
    out = Path(args.out)

    if args.command == "gen":
        cmd_gen(config, out)
    elif args.command == "eval":
        report = cmd_eval(config, out)
        sys.stdout.write(report.to_json())
    elif args.command == "attack":
        report = cmd_attack(config, out, workers=args.workers)
        sys.stdout.write(report.to_json())
    elif args.command == "leakage":
        result = cmd_leakage(config, out)
        sys.stdout.write(result.to_json())
    elif args.command == "sweep":
        sweep_cfg = config.get("sweep")
        if not sweep_cfg:
            json.dump({"error": "config-invalid", "messages": ["sweep: section required"]}, sys.stderr)
            sys.stderr.write("\n")
            return 2
        rows = cmd_sweep(config, sweep_cfg["parameter"], sweep_cfg["values"], out, workers=args.workers)
        sys.stdout.write(json.dumps(rows, indent=2, sort_keys=True) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
