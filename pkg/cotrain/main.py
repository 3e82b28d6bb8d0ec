"""Command-line entry point: `python -m cotrain <group> <verb> ...`."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple

import yaml

from cotrain import __version__, log
from cotrain.compose import dataset_stats, diff, open_loop_gap, summarize
from cotrain.config import default_seed
from cotrain.errors import ConfigError, CotrainError
from cotrain.experiments.config import load_experiment
from cotrain.experiments.results import read_results
from cotrain.experiments.runner import report, run_experiment, summary_table
from cotrain.mimicgen.generate import generate
from cotrain.policy.checkpoint import load_checkpoint, save_checkpoint
from cotrain.policy.evaluate import evaluate_episodes
from cotrain.policy.train import TrainConfig, train_run
from cotrain.sampler import MixtureSpec
from cotrain.trajectory.storage import load_dataset, save_dataset
from cotrain.trajectory.types import SourceTag
from cotrain.world.collect import collect_demos
from cotrain.world.expert import ExpertController
from cotrain.world.presets import get_preset, load_world_file
from cotrain.world.spec import WorldConfig

logger = logging.getLogger(__name__)

TRAIN_LOG = "train_log.json"


def resolve_world(entry: str) -> WorldConfig:
    """A preset name or a path to a YAML world file."""
    if Path(entry).exists():
        return load_world_file(entry)
    return get_preset(entry)


def _read_yaml(path: str) -> Dict[str, Any]:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    data = yaml.safe_load(p.read_text(encoding="utf-8"))
    if not isinstance(data, dict):
        raise ConfigError(f"config file must be a mapping: {p}")
    return data


def _print_json(doc: Any) -> None:
    print(json.dumps(doc, indent=2, sort_keys=True))


# -- toyworld -------------------------------------------------------------


def cmd_collect(args: argparse.Namespace) -> int:
    world = resolve_world(args.world)
    dataset = collect_demos(world, args.n, args.seed, name=args.name)
    save_dataset(dataset, args.out)
    print(f"{len(dataset)} demos ({dataset.frame_count} frames) -> {args.out}")
    return 0


# -- mimicgen -------------------------------------------------------------


def cmd_generate(args: argparse.Namespace) -> int:
    sources = load_dataset(args.sources)
    if args.world:
        world = resolve_world(args.world)
    elif sources.world_spec:
        world = WorldConfig.from_dict(sources.world_spec)
    else:
        raise ConfigError(f"{args.sources} stores no world; pass --config")
    tag = SourceTag(args.tag) if args.tag else None
    dataset, report = generate(sources, world, args.n, args.seed, tag=tag, threads=args.threads)
    save_dataset(dataset, args.out)
    if args.report:
        Path(args.report).write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True), encoding="utf-8")
    print(
        f"{report.successes} generated in {report.attempts} attempts "
        f"(rate {report.generation_success_rate:.2f}) -> {args.out}"
    )
    return 0


# -- policy ---------------------------------------------------------------


def mixture_from_entry(entry: Dict[str, Any]) -> MixtureSpec:
    """MixtureSpec from a train config: dataset directories per pool, alpha and sim sub-weights."""
    real = [load_dataset(p) for p in entry.get("real") or []]
    sim = [load_dataset(p) for p in entry.get("sim") or []]
    alpha = float(entry.get("alpha", 0.0 if not sim else 0.99))
    weights = entry.get("sim_subweights")
    return MixtureSpec(real_pool=real, sim_pool=sim, alpha=alpha, sim_subweights=weights)


def cmd_train(args: argparse.Namespace) -> int:
    entry = _read_yaml(args.config)
    mixture = mixture_from_entry(entry)
    config = TrainConfig.from_dict(entry.get("train") or {})
    if args.seed is not None:
        config.seed = args.seed
    out = Path(args.out or entry.get("out") or "checkpoints")
    run = train_run(mixture, config)
    written = []
    for ckpt in run.checkpoints:
        path = save_checkpoint(ckpt, out / f"ckpt_{ckpt.step:07d}.ckpt", extra={"alpha": mixture.alpha})
        written.append({"step": ckpt.step, "train_loss": ckpt.train_loss, "path": path.name})
    doc = {"initial_loss": run.initial_loss, "checkpoints": written, "train": config.to_dict(), "alpha": mixture.alpha}
    (out / TRAIN_LOG).write_text(json.dumps(doc, indent=2, sort_keys=True), encoding="utf-8")
    for w in written:
        print(f"step {w['step']}: probe loss {w['train_loss']:.6f} -> {out / w['path']}")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    world = resolve_world(args.world)
    if args.expert:
        policy: Any = ExpertController(world.task)
    elif args.checkpoint:
        policy = load_checkpoint(args.checkpoint).params
    else:
        raise ConfigError("policy eval needs --checkpoint or --expert")
    scores = evaluate_episodes(policy, world, args.episodes, args.seed, threads=args.threads)
    _print_json({"world": world.name, "episodes": len(scores), "mean_success": sum(scores) / len(scores)})
    return 0


# -- compose --------------------------------------------------------------


def diff_outputs(out: Path) -> Tuple[Path, Path]:
    """(text, json) paths for `compose diff --out`."""
    if out.suffix == ".json":
        return out.with_suffix(".txt"), out
    return out, out.with_suffix(".json")


def cmd_diff(args: argparse.Namespace) -> int:
    delta = diff(summarize(load_dataset(args.a)), summarize(load_dataset(args.b)))
    if args.out:
        text_path, json_path = diff_outputs(Path(args.out))
        text_path.parent.mkdir(parents=True, exist_ok=True)
        text_path.write_text(delta.table() + "\n", encoding="utf-8")
        json_path.write_text(json.dumps(delta.to_dict(), indent=2, sort_keys=True), encoding="utf-8")
        logger.info("diff written to %s and %s", text_path, json_path)
    if args.json:
        _print_json(delta.to_dict())
    else:
        print(delta.table())
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    _print_json([dataset_stats(load_dataset(d)) for d in args.dir])
    return 0


def cmd_gap(args: argparse.Namespace) -> int:
    gap = open_loop_gap(load_dataset(args.dir), resolve_world(args.world), limit=args.limit)
    _print_json(gap.to_dict())
    return 0


# -- experiments ----------------------------------------------------------


def cmd_exp_run(args: argparse.Namespace) -> int:
    cfg = load_experiment(args.config)
    run = run_experiment(cfg, args.out, threads=args.threads)
    print(summary_table(run.rows))
    if run.diverged:
        print("one or more cells diverged", file=sys.stderr)
    return run.exit_code


def cmd_exp_report(args: argparse.Namespace) -> int:
    print(summary_table(read_results(args.dir)))
    checks = report(args.dir)
    for check in checks:
        print(check.line())
    return 0 if all(c.passed for c in checks) else 1


# -- parser ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cotrain", description="Sim-and-real co-training workbench")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=None, help="overrides COTRAIN_LOG_LEVEL")
    parser.add_argument("--debug-log", default=None, help="append DEBUG output to this file")
    groups = parser.add_subparsers(dest="group", required=True)

    toy = groups.add_parser("toyworld", help="collect scripted demos").add_subparsers(dest="verb", required=True)
    p = toy.add_parser("collect")
    p.add_argument("--config", "--world", dest="world", required=True, help="world YAML file or preset name")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=default_seed)
    p.add_argument("--name", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_collect)

    mg = groups.add_parser("mimicgen", help="multiply source demos").add_subparsers(dest="verb", required=True)
    p = mg.add_parser("generate")
    p.add_argument("--sources", required=True, help="source dataset directory")
    p.add_argument(
        "--config", "--world", dest="world", default=None,
        help="target world YAML file or preset name; defaults to the sources' stored world",
    )
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=default_seed)
    p.add_argument("--tag", choices=[t.value for t in SourceTag], default=None)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--report", default=None, help="write the generation report JSON here")
    p.set_defaults(func=cmd_generate)

    pol = groups.add_parser("policy", help="train and evaluate policies").add_subparsers(dest="verb", required=True)
    p = pol.add_parser("train")
    p.add_argument("--config", required=True, help="YAML with real/sim dataset dirs, alpha and a train block")
    p.add_argument("--out", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_train)
    p = pol.add_parser("eval")
    p.add_argument("--checkpoint", default=None)
    p.add_argument("--expert", action="store_true", help="score the scripted expert instead")
    p.add_argument("--world", required=True)
    p.add_argument("--episodes", type=int, default=100)
    p.add_argument("--seed", type=int, default=default_seed)
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=cmd_eval)

    comp = groups.add_parser("compose", help="dataset composition").add_subparsers(dest="verb", required=True)
    p = comp.add_parser("diff")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--json", action="store_true", help="print JSON instead of the text table")
    p.add_argument("--out", default=None, help="write the text table here and its JSON next to it")
    p.set_defaults(func=cmd_diff)
    p = comp.add_parser("stats")
    p.add_argument("--dir", required=True, nargs="+")
    p.set_defaults(func=cmd_stats)
    p = comp.add_parser("gap")
    p.add_argument("--dir", required=True)
    p.add_argument("--world", required=True)
    p.add_argument("--limit", type=int, default=None)
    p.set_defaults(func=cmd_gap)

    exp = groups.add_parser("exp", help="experiment protocols").add_subparsers(dest="verb", required=True)
    p = exp.add_parser("run")
    p.add_argument("--config", required=True, help="experiment YAML or a shipped config name")
    p.add_argument("--out", required=True)
    p.add_argument("--threads", type=int, default=None, help="overrides COTRAIN_THREADS")
    p.set_defaults(func=cmd_exp_run)
    p = exp.add_parser("report")
    p.add_argument("--dir", required=True)
    p.set_defaults(func=cmd_exp_report)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(list(argv) if argv is not None else None)
    log.configure(args.log_level, args.debug_log)
    try:
        return int(args.func(args))
    except (CotrainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        logger.debug("command failed", exc_info=True)
        return 2


if __name__ == "__main__":
    sys.exit(main())
