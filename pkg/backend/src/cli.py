"""
Command Line Module
`bwset generate | characterize | report | serve`

Exit codes: 0 success, 1 partial failure (some traces failed), 2 invalid input.
"""
import argparse
import json
import logging
import sys
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import List, Optional, Sequence

from pydantic import ValidationError

from src import config
from src.app import (generate_traces, load_model_file, run_characterize, run_report,
                     sweep_preset_manifest)
from src.errors import BwsetError, ConfigurationError
from src.models import (GenerateSpec, PredictorKind, ProfileConfig, ProfileMode, RunManifest,
                        PREDICTOR_CONFIG_ADAPTER)
from src.predictors import load_predictor_config

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_INVALID = 2

SWEEP_PRESET = "paper-sweep"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bwset", description="Branch working set characterization toolkit")
    commands = parser.add_subparsers(dest="command", required=True)

    generate = commands.add_parser("generate", help="Generate synthetic traces from a spec file")
    generate.add_argument("spec", help="Generate spec (.json or .toml)")
    generate.add_argument("--output", default="traces", help="Directory for .bwt files and manifest")

    characterize = commands.add_parser("characterize", help="Profile, simulate and report a trace corpus")
    characterize.add_argument("manifest", nargs="?", help="Run manifest (.json or .toml)")
    characterize.add_argument("--preset", choices=[SWEEP_PRESET],
                              help="Generate the standard synthetic corpus and run the full sweep")
    characterize.add_argument("--output", help="Output directory (overrides the manifest)")
    characterize.add_argument("--mode", choices=[mode.value for mode in ProfileMode])
    characterize.add_argument("--global-hist", type=int, action="append", dest="global_hist",
                              help="Global history length N (repeatable)")
    characterize.add_argument("--local-hist", type=int, action="append", dest="local_hist",
                              help="Local history length M (repeatable)")
    characterize.add_argument("--theta", type=float, help="BWSET threshold (default 0.95)")
    characterize.add_argument("--predictor", action="append", choices=[kind.value for kind in PredictorKind],
                              help="Predictor kind with default geometry (repeatable)")
    characterize.add_argument("--predictor-config", action="append", default=[],
                              help="Predictor config file (.json or .toml, repeatable)")
    characterize.add_argument("--threads", type=int, help="Worker processes (BWSET_THREADS wins)")
    characterize.add_argument("--seed", type=int, default=0, help="Seed for the preset corpus")
    characterize.add_argument("--records-per-trace", type=int, default=config.STANDARD_CORPUS_RECORDS,
                              help="Records per preset trace")
    characterize.add_argument("--dump-profiles", action="store_true", help="Write per-trace profile dumps")

    report = commands.add_parser("report", help="Rebuild reports from a characterize output directory")
    report.add_argument("directory")

    serve = commands.add_parser("serve", help="Start the HTTP service")
    serve.add_argument("--host", default="0.0.0.0")
    serve.add_argument("--port", type=int, default=8000)
    return parser


def _profiles_from_args(args: argparse.Namespace, base: Sequence[ProfileConfig]) -> List[ProfileConfig]:
    if not (args.mode or args.global_hist or args.local_hist):
        if args.theta is None:
            return list(base)
        return [ProfileConfig(mode=profile.mode, global_history=profile.global_history,
                              local_history=profile.local_history, theta=args.theta) for profile in base]

    theta = config.DEFAULT_THETA if args.theta is None else args.theta
    modes = [ProfileMode(args.mode)] if args.mode else list(ProfileMode)
    profiles = []
    for mode in modes:
        if mode is ProfileMode.PC_ONLY:
            profiles.append(ProfileConfig.pc_only(theta))
        elif mode is ProfileMode.GLOBAL_TUPLE:
            profiles += [ProfileConfig.global_tuple(n, theta)
                         for n in args.global_hist or config.GLOBAL_HISTORY_LENGTHS]
        else:
            profiles += [ProfileConfig.global_local_tuple(n, m, theta)
                         for n in args.global_hist or config.GLOBAL_LOCAL_HISTORY_LENGTHS
                         for m in args.local_hist or config.LOCAL_HISTORY_LENGTHS]
    return profiles


def _predictors_from_args(args: argparse.Namespace, base):
    if not args.predictor and not args.predictor_config:
        return list(base)
    predictors = [PREDICTOR_CONFIG_ADAPTER.validate_python({"kind": kind}) for kind in args.predictor or []]
    predictors += [load_predictor_config(path) for path in args.predictor_config]
    return predictors


def cmd_generate(args: argparse.Namespace) -> int:
    spec = load_model_file(args.spec, GenerateSpec)
    paths, manifest_path = generate_traces(spec, args.output)
    print(f"Wrote {len(paths)} traces and {manifest_path}")
    return EXIT_OK


def cmd_characterize(args: argparse.Namespace) -> int:
    base_dir = None
    if args.preset == SWEEP_PRESET:
        manifest = sweep_preset_manifest(args.output or "sweep_output", seed=args.seed,
                                         records_per_trace=args.records_per_trace)
    elif args.manifest:
        manifest = load_model_file(args.manifest, RunManifest)
        base_dir = Path(args.manifest).parent
    else:
        raise ConfigurationError("characterize needs a manifest or --preset")

    updates = {
        "profiles": _profiles_from_args(args, manifest.profiles),
        "predictors": _predictors_from_args(args, manifest.predictors),
        "dump_profiles": manifest.dump_profiles or args.dump_profiles,
    }
    if args.output:
        updates["output_dir"] = args.output
    if args.threads:
        updates["parallelism"] = args.threads
    # Re-validate so the overrides obey the manifest invariants
    manifest = RunManifest.model_validate({**manifest.model_dump(), **updates})

    outcome = run_characterize(manifest, base_dir=base_dir)
    print(f"{len(outcome.summaries)} summary rows, {len(outcome.results)} predictor results, "
          f"{len(outcome.reports)} reports in {manifest.output_dir}")
    for failure in outcome.failures:
        print(f"FAILED {failure.trace_id}: {failure.error}", file=sys.stderr)
    return outcome.exit_code


def cmd_report(args: argparse.Namespace) -> int:
    reports = run_report(args.directory)
    print(f"Rebuilt {len(reports)} reports in {args.directory}")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn
    uvicorn.run("main:app", host=args.host, port=args.port)
    return EXIT_OK


COMMANDS = {
    "generate": cmd_generate,
    "characterize": cmd_characterize,
    "report": cmd_report,
    "serve": cmd_serve,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    config.configure_logging()
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ValidationError, ConfigurationError, BwsetError, FileNotFoundError,
            json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        logger.error("Invalid input: %s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
