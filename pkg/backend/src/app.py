"""
Main Application Module
Orchestrates the characterization pipeline: trace generation and ingestion,
predictor simulation, tuple profiling, aggregation and report emission
"""
import json
import logging
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field
from multiprocessing import Pool
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Type, TypeVar, Union

from pydantic import BaseModel

from src import config
from src.analysis import bin_aggregate, select_best_config
from src.bwset import dump_profile, profile_many, summarize
from src.errors import ConfigurationError
from src.models import (BranchRecord, BwsetSummary, CorrelationReport, GenerateSpec,
                        PredictorConfig, PredictorResult, ProfileConfig, RunManifest,
                        SyntheticTraceEntry, TraceEntry, TraceMeta)
from src.predictors import run_predictor
from src.report import (emit_all, read_results, read_summaries, write_results,
                        write_summaries)
from src.trace_io import (generate_synthetic, load_records, read_meta_sidecar,
                          standard_synthetic_corpus, write_synthetic)

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
ModelT = TypeVar("ModelT", bound=BaseModel)

SUMMARIES_FILE = "summaries.csv"
RESULTS_FILE = "predictor_results.csv"
FAILURES_FILE = "failed_traces.json"
BEST_CONFIG_FILE = "best_config.json"
REPORTS_DIR = "reports"
PROFILES_DIR = "profiles"
TRACES_DIR = "traces"


def load_model_file(path: PathLike, model: Type[ModelT]) -> ModelT:
    """Parse a .json or .toml file into a pydantic model"""
    path = Path(path)
    if path.suffix.lower() == ".toml":
        return model.model_validate(tomllib.loads(path.read_text()))
    return model.model_validate_json(path.read_text())


def write_model_file(instance: BaseModel, path: PathLike) -> Path:
    path = Path(path)
    path.write_text(json.dumps(instance.model_dump(mode="json", exclude_defaults=True),
                               indent=2, sort_keys=True) + "\n")
    return path


# ---------------------------------------------------------------------------
# Generation
# ---------------------------------------------------------------------------

def generate_traces(spec: GenerateSpec, out_dir: PathLike) -> Tuple[List[Path], Path]:
    """
    Write every synthetic trace of a generate spec plus a run manifest listing them.

    Returns:
        Tuple of (trace paths, manifest path)
    """
    out_dir = Path(out_dir)
    ids = [entry.trace_id for entry in spec.traces]
    if len(set(ids)) != len(ids):
        raise ConfigurationError(f"duplicate trace_id in generate spec: {ids}")
    paths = [write_synthetic(entry, out_dir) for entry in spec.traces]
    manifest = RunManifest(
        traces=[TraceEntry(path=path.name, trace_id=entry.trace_id, source_tag=entry.source_tag)
                for path, entry in zip(paths, spec.traces)],
    )
    manifest_path = write_model_file(manifest, out_dir / "manifest.json")
    logger.info("Generated %d traces into %s", len(paths), out_dir)
    return paths, manifest_path


def sweep_preset_manifest(output_dir: PathLike, seed: int = 0,
                          records_per_trace: int = config.STANDARD_CORPUS_RECORDS) -> RunManifest:
    """Generate the standard synthetic corpus and a manifest running the full default sweep"""
    output_dir = Path(output_dir)
    corpus = standard_synthetic_corpus(seed, records_per_trace)
    paths, _ = generate_traces(GenerateSpec(traces=corpus), output_dir / TRACES_DIR)
    return RunManifest(
        traces=[TraceEntry(path=str(path), trace_id=entry.trace_id, source_tag=entry.source_tag)
                for path, entry in zip(paths, corpus)],
        output_dir=str(output_dir),
        rng_seed=seed,
    )


# ---------------------------------------------------------------------------
# Per-trace work
# ---------------------------------------------------------------------------

@dataclass
class TraceTask:
    trace_id: str
    profiles: List[ProfileConfig]
    predictors: List[PredictorConfig]
    reference_label: str
    entry: Optional[TraceEntry] = None
    synthetic: Optional[SyntheticTraceEntry] = None
    base_dir: Optional[str] = None
    dump_dir: Optional[str] = None


@dataclass
class TraceOutcome:
    trace_id: str
    summaries: List[BwsetSummary] = field(default_factory=list)
    results: List[PredictorResult] = field(default_factory=list)
    error: Optional[str] = None


def _load_task_records(task: TraceTask) -> Tuple[TraceMeta, List[BranchRecord]]:
    if task.synthetic is not None:
        records = generate_synthetic(task.synthetic.spec)
        meta = TraceMeta(trace_id=task.synthetic.trace_id, record_count=len(records),
                         source_tag=task.synthetic.source_tag)
        return meta, records
    path = Path(task.entry.path)
    if not path.is_absolute() and task.base_dir:
        path = Path(task.base_dir) / path
    sidecar = read_meta_sidecar(path)
    source_tag = task.entry.source_tag
    if source_tag is None:
        source_tag = sidecar.source_tag if sidecar else ""
    return load_records(path, trace_id=task.trace_id, source_tag=source_tag)


def characterize_records(meta: TraceMeta, records: Sequence[BranchRecord],
                         profiles: Sequence[ProfileConfig], predictors: Sequence[PredictorConfig],
                         reference_label: Optional[str] = None):
    """
    Run every predictor and every profile configuration over one in-memory trace.

    The reference predictor's prediction stream is attached to the profiler so
    each tuple carries its misprediction count.

    Returns:
        Tuple of (ProfileRuns, BwsetSummaries, PredictorResults), runs and
        summaries in profile order
    """
    results, reference_stream = [], None
    for predictor_config in predictors:
        result, predictions = run_predictor(records, predictor_config, trace_id=meta.trace_id)
        results.append(result)
        if predictor_config.label == reference_label:
            reference_stream = predictions

    runs = profile_many(records, profiles, reference_stream, reference_label)
    summaries = [summarize(run, meta) for run in runs]
    return runs, summaries, results


def characterize_trace(task: TraceTask) -> TraceOutcome:
    """
    Characterize one manifest trace. Failures are captured in the outcome
    instead of raised, so one bad trace never affects the others.
    """
    try:
        meta, records = _load_task_records(task)
        runs, summaries, results = characterize_records(meta, records, task.profiles,
                                                        task.predictors, task.reference_label)
        if task.dump_dir:
            dump_dir = Path(task.dump_dir)
            dump_dir.mkdir(parents=True, exist_ok=True)
            for run in runs:
                dump_profile(run, dump_dir / f"{meta.trace_id}_{run.config.label}.csv")
        logger.info("Characterized %s (%d records)", meta.trace_id, meta.record_count)
        return TraceOutcome(trace_id=meta.trace_id, summaries=summaries, results=results)
    except Exception as exc:
        logger.error("Trace %s failed: %s", task.trace_id, exc)
        return TraceOutcome(trace_id=task.trace_id, error=f"{type(exc).__name__}: {exc}")


def _build_tasks(manifest: RunManifest, base_dir: Optional[Path]) -> List[TraceTask]:
    dump_dir = str(Path(manifest.output_dir) / PROFILES_DIR) if manifest.dump_profiles else None
    common = dict(profiles=list(manifest.profiles), predictors=list(manifest.predictors),
                  reference_label=manifest.reference_label,
                  base_dir=str(base_dir) if base_dir else None, dump_dir=dump_dir)
    tasks = [TraceTask(trace_id=entry.trace_id or Path(entry.path).stem, entry=entry, **common)
             for entry in manifest.traces]
    tasks += [TraceTask(trace_id=entry.trace_id, synthetic=entry, **common) for entry in manifest.synthetic]
    ids = [task.trace_id for task in tasks]
    if len(set(ids)) != len(ids):
        raise ConfigurationError(f"duplicate trace ids in manifest: {sorted(i for i in set(ids) if ids.count(i) > 1)}")
    return tasks


# ---------------------------------------------------------------------------
# Corpus-level pipeline
# ---------------------------------------------------------------------------

@dataclass
class CharacterizeOutcome:
    summaries: List[BwsetSummary]
    results: List[PredictorResult]
    reports: List[CorrelationReport]
    failures: List[TraceOutcome]

    @property
    def exit_code(self) -> int:
        return 1 if self.failures else 0


def build_reports(summaries: Sequence[BwsetSummary], results: Sequence[PredictorResult],
                  profiles: Sequence[ProfileConfig], out_dir: PathLike,
                  reference_label: Optional[str] = None) -> List[CorrelationReport]:
    """Aggregate and emit one report per configuration, plus the best-config pick"""
    out_dir = Path(out_dir)
    reports = []
    for profile_config in profiles:
        members = [summary for summary in summaries if summary.config == profile_config]
        member_ids = {summary.trace_id for summary in members}
        report = bin_aggregate(members, [r for r in results if r.trace_id in member_ids], profile_config)
        emit_all(report, out_dir / REPORTS_DIR)
        reports.append(report)

    if reference_label is None and results:
        reference_label = results[0].predictor
    best = select_best_config(reports, reference_label) if reference_label else None
    best_payload = {
        "predictor": reference_label,
        "config": best.label if best else None,
        "spearman_pred_mpkb": next((r.spearman_pred_mpkb.get(reference_label) for r in reports
                                    if best is not None and r.config == best), None),
    }
    (out_dir / BEST_CONFIG_FILE).write_text(json.dumps(best_payload, indent=2, sort_keys=True) + "\n")
    return reports


def run_characterize(manifest: RunManifest, base_dir: Optional[PathLike] = None) -> CharacterizeOutcome:
    """
    Execute a run manifest end to end.

    Args:
        manifest: Traces, configuration sweep and predictors
        base_dir: Directory relative trace paths are resolved against

    Returns:
        CharacterizeOutcome; failed traces are listed, never fatal to the rest
    """
    out_dir = Path(manifest.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    tasks = _build_tasks(manifest, Path(base_dir) if base_dir else None)
    threads = min(config.get_thread_count(manifest.parallelism), len(tasks))
    logger.info("Characterizing %d traces x %d configs x %d predictors on %d workers",
                len(tasks), len(manifest.profiles), len(manifest.predictors), threads)

    if threads <= 1:
        outcomes = [characterize_trace(task) for task in tasks]
    else:
        with Pool(threads) as pool:
            outcomes = list(pool.imap(characterize_trace, tasks))

    summaries = [summary for outcome in outcomes for summary in outcome.summaries]
    results = [result for outcome in outcomes for result in outcome.results]
    failures = [outcome for outcome in outcomes if outcome.error]

    write_summaries(summaries, results, out_dir / SUMMARIES_FILE)
    write_results(results, out_dir / RESULTS_FILE)
    (out_dir / FAILURES_FILE).write_text(json.dumps(
        [{"trace_id": failure.trace_id, "error": failure.error} for failure in failures],
        indent=2, sort_keys=True) + "\n")
    reports = build_reports(summaries, results, manifest.profiles, out_dir, manifest.reference_label)

    if failures:
        logger.error("%d of %d traces failed, see %s", len(failures), len(tasks), out_dir / FAILURES_FILE)
    return CharacterizeOutcome(summaries=summaries, results=results, reports=reports, failures=failures)


def run_report(directory: PathLike) -> List[CorrelationReport]:
    """Rebuild reports from the summary and result tables of a previous characterize run"""
    directory = Path(directory)
    summaries = read_summaries(directory / SUMMARIES_FILE)
    results = read_results(directory / RESULTS_FILE)
    profiles = list(dict.fromkeys(summary.config for summary in summaries))
    reference = next((summary.reference_predictor for summary in summaries if summary.reference_predictor), None)
    return build_reports(summaries, results, profiles, directory, reference)
