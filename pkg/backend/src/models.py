"""
Models Module
Domain types: hot-loop record types plus pydantic models for configuration and results
"""
import math
from dataclasses import dataclass
from enum import Enum
from typing import Annotated, Dict, List, Literal, NamedTuple, Optional, Union

from pydantic import (AliasChoices, BaseModel, ConfigDict, Field, NonNegativeInt,
                      PositiveInt, TypeAdapter, model_validator)

from src import config


# ---------------------------------------------------------------------------
# Record-level types (kept as tuples/slots: these live in the per-record loops)
# ---------------------------------------------------------------------------

class BranchRecord(NamedTuple):
    """One conditional branch event"""
    pc: int
    taken: bool


class TupleKey(NamedTuple):
    """Branch context: PC plus optional global and local history bits (newest in LSB)"""
    pc: int
    global_bits: int = 0
    local_bits: int = 0


@dataclass(slots=True)
class TupleStats:
    occurrence_count: int = 0
    taken_count: int = 0
    mispredict_count: int = 0


# ---------------------------------------------------------------------------
# Traces
# ---------------------------------------------------------------------------

class TraceMeta(BaseModel):
    trace_id: str
    record_count: NonNegativeInt = 0
    source_tag: str = ""


class PatternBranch(BaseModel):
    """Static branch that replays a fixed outcome pattern (T/N or 1/0 characters)"""
    index: NonNegativeInt
    pattern: str = Field(min_length=1, pattern=r"^[TNtn01]+$")

    def outcomes(self) -> List[bool]:
        return [bit in "Tt1" for bit in self.pattern]


class SyntheticSpec(BaseModel):
    num_static_branches: PositiveInt
    bias_per_branch: List[Annotated[float, Field(ge=0.0, le=1.0)]]
    pattern_branches: List[PatternBranch] = Field(default_factory=list)
    total_records: PositiveInt
    rng_seed: int = Field(default=0, ge=0, lt=2 ** 64)
    round_robin: bool = False

    @model_validator(mode="after")
    def _check_shapes(self) -> "SyntheticSpec":
        if len(self.bias_per_branch) != self.num_static_branches:
            raise ValueError(
                f"bias_per_branch has {len(self.bias_per_branch)} entries, "
                f"num_static_branches is {self.num_static_branches}"
            )
        for branch in self.pattern_branches:
            if branch.index >= self.num_static_branches:
                raise ValueError(f"pattern_branches index {branch.index} out of range")
        return self

    @classmethod
    def uniform(cls, num_static_branches: int, bias: float, total_records: int,
                rng_seed: int = 0, round_robin: bool = False) -> "SyntheticSpec":
        return cls(
            num_static_branches=num_static_branches,
            bias_per_branch=[bias] * num_static_branches,
            total_records=total_records,
            rng_seed=rng_seed,
            round_robin=round_robin,
        )


class SyntheticTraceEntry(BaseModel):
    trace_id: str = Field(min_length=1)
    source_tag: str = "synthetic"
    spec: SyntheticSpec


class GenerateSpec(BaseModel):
    traces: List[SyntheticTraceEntry] = Field(min_length=1)


# ---------------------------------------------------------------------------
# Profiling
# ---------------------------------------------------------------------------

class ProfileMode(str, Enum):
    PC_ONLY = "pc"
    GLOBAL_TUPLE = "global"
    GLOBAL_LOCAL_TUPLE = "global_local"


class ProfileConfig(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    mode: ProfileMode = ProfileMode.PC_ONLY
    global_history: NonNegativeInt = Field(default=0, validation_alias=AliasChoices("global_history", "N"))
    local_history: NonNegativeInt = Field(default=0, validation_alias=AliasChoices("local_history", "M"))
    theta: float = Field(default=config.DEFAULT_THETA, gt=0.0, le=1.0)

    @model_validator(mode="after")
    def _check_grid(self) -> "ProfileConfig":
        n, m = self.global_history, self.local_history
        if self.mode is ProfileMode.PC_ONLY and (n or m):
            raise ValueError("PC_ONLY mode requires N = 0 and M = 0")
        if self.mode is ProfileMode.GLOBAL_TUPLE:
            if n not in config.GLOBAL_HISTORY_LENGTHS or m:
                raise ValueError(f"GLOBAL_TUPLE mode requires N in {config.GLOBAL_HISTORY_LENGTHS} and M = 0")
        if self.mode is ProfileMode.GLOBAL_LOCAL_TUPLE:
            if n not in config.GLOBAL_LOCAL_HISTORY_LENGTHS or m not in config.LOCAL_HISTORY_LENGTHS:
                raise ValueError(
                    f"GLOBAL_LOCAL_TUPLE mode requires N in {config.GLOBAL_LOCAL_HISTORY_LENGTHS} "
                    f"and M in {config.LOCAL_HISTORY_LENGTHS}"
                )
        return self

    @property
    def label(self) -> str:
        if self.mode is ProfileMode.PC_ONLY:
            return "pc"
        if self.mode is ProfileMode.GLOBAL_TUPLE:
            return f"global_{self.global_history}g"
        return f"global_local_{self.global_history}g_{self.local_history}l"

    @classmethod
    def pc_only(cls, theta: float = config.DEFAULT_THETA) -> "ProfileConfig":
        return cls(mode=ProfileMode.PC_ONLY, theta=theta)

    @classmethod
    def global_tuple(cls, n: int, theta: float = config.DEFAULT_THETA) -> "ProfileConfig":
        return cls(mode=ProfileMode.GLOBAL_TUPLE, global_history=n, theta=theta)

    @classmethod
    def global_local_tuple(cls, n: int, m: int, theta: float = config.DEFAULT_THETA) -> "ProfileConfig":
        return cls(mode=ProfileMode.GLOBAL_LOCAL_TUPLE, global_history=n, local_history=m, theta=theta)

    @classmethod
    def standard_sweep(cls, theta: float = config.DEFAULT_THETA) -> List["ProfileConfig"]:
        """PC-only, the six global tuples and the sixteen global-local combinations"""
        sweep = [cls.pc_only(theta)]
        sweep += [cls.global_tuple(n, theta) for n in config.GLOBAL_HISTORY_LENGTHS]
        sweep += [
            cls.global_local_tuple(n, m, theta)
            for n in config.GLOBAL_LOCAL_HISTORY_LENGTHS
            for m in config.LOCAL_HISTORY_LENGTHS
        ]
        return sweep


# ---------------------------------------------------------------------------
# Predictors
# ---------------------------------------------------------------------------

class PredictorKind(str, Enum):
    SMITH = "smith"
    GSHARE = "gshare"
    PERCEPTRON = "perceptron"
    TAGE = "tage"


class _PredictorConfigBase(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: Optional[str] = None

    @property
    def label(self) -> str:
        return self.name or PredictorKind(self.kind).value  # type: ignore[attr-defined]


class SmithConfig(_PredictorConfigBase):
    kind: Literal[PredictorKind.SMITH] = PredictorKind.SMITH
    index_bits: int = Field(default=config.SMITH_INDEX_BITS, ge=0, le=30)


class GshareConfig(_PredictorConfigBase):
    kind: Literal[PredictorKind.GSHARE] = PredictorKind.GSHARE
    index_bits: int = Field(default=config.GSHARE_INDEX_BITS, ge=1, le=30)
    history_bits: int = Field(default=config.GSHARE_HISTORY_BITS, ge=0, le=config.GLOBAL_HISTORY_MAX)


class PerceptronConfig(_PredictorConfigBase):
    kind: Literal[PredictorKind.PERCEPTRON] = PredictorKind.PERCEPTRON
    index_bits: int = Field(default=config.PERCEPTRON_INDEX_BITS, ge=0, le=20)
    global_history: int = Field(default=config.PERCEPTRON_GLOBAL_HISTORY, ge=0, le=config.GLOBAL_HISTORY_MAX)
    local_history: int = Field(default=config.PERCEPTRON_LOCAL_HISTORY, ge=0, le=config.LOCAL_HISTORY_MAX)
    weight_bits: int = Field(default=config.PERCEPTRON_WEIGHT_BITS, ge=2, le=16)
    feature_tables: int = Field(default=config.PERCEPTRON_FEATURE_TABLES, ge=1)
    threshold: Optional[int] = Field(default=None, ge=0)

    @model_validator(mode="after")
    def _check_segments(self) -> "PerceptronConfig":
        if self.global_history and self.feature_tables > self.global_history:
            raise ValueError("feature_tables cannot exceed global_history")
        return self

    @property
    def training_threshold(self) -> int:
        if self.threshold is not None:
            return self.threshold
        return math.floor(1.93 * (self.global_history + self.local_history) + 14)


class TageConfig(_PredictorConfigBase):
    kind: Literal[PredictorKind.TAGE] = PredictorKind.TAGE
    base_index_bits: int = Field(default=config.TAGE_BASE_INDEX_BITS, ge=0, le=24)
    tagged_tables: int = Field(default=config.TAGE_TAGGED_TABLES, ge=1, le=16)
    tagged_index_bits: int = Field(default=config.TAGE_TAGGED_INDEX_BITS, ge=1, le=20)
    min_history: int = Field(default=config.TAGE_MIN_HISTORY, ge=1, le=config.GLOBAL_HISTORY_MAX)
    max_history: int = Field(default=config.TAGE_MAX_HISTORY, ge=1, le=config.GLOBAL_HISTORY_MAX)
    tag_bits: int = Field(default=config.TAGE_TAG_BITS, ge=2, le=20)
    counter_bits: int = Field(default=config.TAGE_COUNTER_BITS, ge=2, le=5)
    useful_bits: int = Field(default=config.TAGE_USEFUL_BITS, ge=1, le=4)
    u_reset_period: PositiveInt = config.TAGE_U_RESET_PERIOD

    @model_validator(mode="after")
    def _check_series(self) -> "TageConfig":
        lengths = self.history_lengths
        if any(later <= earlier for earlier, later in zip(lengths, lengths[1:])):
            raise ValueError(f"TAGE history lengths must strictly increase, got {lengths}")
        return self

    @property
    def history_lengths(self) -> List[int]:
        """Geometric series from min_history to max_history, one length per tagged table"""
        if self.tagged_tables == 1:
            return [self.max_history]
        ratio = (self.max_history / self.min_history) ** (1.0 / (self.tagged_tables - 1))
        return [int(round(self.min_history * ratio ** i)) for i in range(self.tagged_tables)]


PredictorConfig = Annotated[
    Union[SmithConfig, GshareConfig, PerceptronConfig, TageConfig],
    Field(discriminator="kind"),
]
PREDICTOR_CONFIG_ADAPTER = TypeAdapter(PredictorConfig)


def default_predictors() -> List[PredictorConfig]:
    return [SmithConfig(), GshareConfig(), PerceptronConfig(), TageConfig()]


def check_unique_labels(predictors: List[PredictorConfig]) -> List[str]:
    """Labels key predictor results; two configs must never share one"""
    labels = [predictor.label for predictor in predictors]
    if len(set(labels)) != len(labels):
        raise ValueError(f"predictor labels must be unique, got {labels}")
    return labels


class PredictorResult(BaseModel):
    trace_id: str
    predictor: str
    kind: PredictorKind
    branches: NonNegativeInt
    mispredicts: NonNegativeInt
    mpkb: float
    accuracy_pct: float

    @classmethod
    def from_counts(cls, trace_id: str, predictor: str, kind: PredictorKind,
                    branches: int, mispredicts: int) -> "PredictorResult":
        mpkb = mispredicts * 1000.0 / branches if branches else 0.0
        return cls(
            trace_id=trace_id,
            predictor=predictor,
            kind=kind,
            branches=branches,
            mispredicts=mispredicts,
            mpkb=mpkb,
            accuracy_pct=100.0 - mpkb / 10.0,
        )


# ---------------------------------------------------------------------------
# Characterization
# ---------------------------------------------------------------------------

class SizeBin(str, Enum):
    LOW1 = "BWSET-LOW1"
    LOW2 = "BWSET-LOW2"
    MEDIUM1 = "BWSET-MEDIUM1"
    MEDIUM2 = "BWSET-MEDIUM2"
    HIGH1 = "BWSET-HIGH1"
    HIGH2 = "BWSET-HIGH2"
    HIGH3 = "BWSET-HIGH3"


class PredBin(str, Enum):
    VLOW1 = "Pred-VLOW1"
    LOW1 = "Pred-LOW1"
    LOW2 = "Pred-LOW2"
    LOW3 = "Pred-LOW3"
    MEDIUM1 = "Pred-MEDIUM1"
    MEDIUM2 = "Pred-MEDIUM2"
    HIGH1 = "Pred-HIGH1"
    HIGH2 = "Pred-HIGH2"
    HIGH3 = "Pred-HIGH3"


class Baselines(BaseModel):
    taken_rate: float
    transition_rate: float
    shannon_entropy: float  # binary outcome entropy, bits
    linear_entropy: float


class BwsetSummary(BaseModel):
    trace_id: str
    source_tag: str = ""
    config: ProfileConfig
    bwset_size: NonNegativeInt
    bwset_coverage: float
    predictability: float = Field(ge=0.5, le=1.0)
    size_bin: SizeBin
    pred_bin: PredBin
    baselines: Baselines
    static_count: NonNegativeInt = 0
    dynamic_count: NonNegativeInt = 0
    distinct_tuples: NonNegativeInt = 0
    total_occurrences: NonNegativeInt = 0
    reference_predictor: Optional[str] = None
    bwset_mpkb: Optional[float] = None

    def to_row(self) -> Dict[str, object]:
        """Flat per-trace summary row"""
        return {
            "trace_id": self.trace_id,
            "source_tag": self.source_tag,
            "mode": self.config.mode.value,
            "N": self.config.global_history,
            "M": self.config.local_history,
            "theta": self.config.theta,
            "bwset_size": self.bwset_size,
            "coverage": self.bwset_coverage,
            "predictability": self.predictability,
            "size_bin": self.size_bin.value,
            "pred_bin": self.pred_bin.value,
            "taken_rate": self.baselines.taken_rate,
            "transition_rate": self.baselines.transition_rate,
            "shannon_entropy": self.baselines.shannon_entropy,
            "linear_entropy": self.baselines.linear_entropy,
            "static_count": self.static_count,
            "dynamic_count": self.dynamic_count,
            "distinct_tuples": self.distinct_tuples,
            "total_occurrences": self.total_occurrences,
            "reference_predictor": self.reference_predictor or "",
            "bwset_mpkb": self.bwset_mpkb,
        }

    @classmethod
    def from_row(cls, row: Dict[str, object]) -> "BwsetSummary":
        bwset_mpkb = row.get("bwset_mpkb")
        if bwset_mpkb is not None and isinstance(bwset_mpkb, float) and math.isnan(bwset_mpkb):
            bwset_mpkb = None
        return cls(
            trace_id=str(row["trace_id"]),
            source_tag="" if _is_missing(row.get("source_tag")) else str(row["source_tag"]),
            config=ProfileConfig(
                mode=ProfileMode(row["mode"]),
                global_history=int(row["N"]),
                local_history=int(row["M"]),
                theta=float(row["theta"]),
            ),
            bwset_size=int(row["bwset_size"]),
            bwset_coverage=float(row["coverage"]),
            predictability=float(row["predictability"]),
            size_bin=SizeBin(row["size_bin"]),
            pred_bin=PredBin(row["pred_bin"]),
            baselines=Baselines(
                taken_rate=float(row["taken_rate"]),
                transition_rate=float(row["transition_rate"]),
                shannon_entropy=float(row["shannon_entropy"]),
                linear_entropy=float(row["linear_entropy"]),
            ),
            static_count=int(row.get("static_count", 0)),
            dynamic_count=int(row.get("dynamic_count", 0)),
            distinct_tuples=int(row.get("distinct_tuples", 0)),
            total_occurrences=int(row.get("total_occurrences", 0)),
            reference_predictor=None if _is_missing(row.get("reference_predictor")) else str(row["reference_predictor"]),
            bwset_mpkb=bwset_mpkb,
        )


def _is_missing(value: object) -> bool:
    return value is None or value == "" or (isinstance(value, float) and math.isnan(value))


# ---------------------------------------------------------------------------
# Analysis
# ---------------------------------------------------------------------------

class SizeBinRow(BaseModel):
    size_bin: SizeBin
    trace_count: NonNegativeInt
    mean_mpkb: Dict[str, Optional[float]]


class PredBinRow(BaseModel):
    pred_bin: PredBin
    trace_count: NonNegativeInt
    mean_projection: Optional[float]
    median_projection: Optional[float]
    mean_accuracy_pct: Dict[str, Optional[float]]


class SourceTagRow(BaseModel):
    source_tag: str
    trace_count: NonNegativeInt
    mean_bwset_size: float
    mean_predictability: float
    mean_mpkb: Dict[str, Optional[float]]


class CategoryRow(BaseModel):
    size_bin: SizeBin
    pred_bin: PredBin
    trace_count: PositiveInt


class CorrelationReport(BaseModel):
    config: ProfileConfig
    predictors: List[str]
    trace_count: NonNegativeInt
    per_size_bin: List[SizeBinRow]
    per_pred_bin: List[PredBinRow]
    per_source_tag: List[SourceTagRow] = Field(default_factory=list)
    categories: List[CategoryRow] = Field(default_factory=list)
    spearman_size_mpkb: Dict[str, Optional[float]] = Field(default_factory=dict)
    spearman_pred_mpkb: Dict[str, Optional[float]] = Field(default_factory=dict)


# ---------------------------------------------------------------------------
# Orchestration
# ---------------------------------------------------------------------------

class TraceEntry(BaseModel):
    path: str
    trace_id: Optional[str] = None
    source_tag: Optional[str] = None


class RunManifest(BaseModel):
    traces: List[TraceEntry] = Field(default_factory=list)
    synthetic: List[SyntheticTraceEntry] = Field(default_factory=list)
    profiles: List[ProfileConfig] = Field(default_factory=ProfileConfig.standard_sweep, min_length=1)
    predictors: List[PredictorConfig] = Field(default_factory=default_predictors, min_length=1)
    output_dir: str = "bwset_out"
    parallelism: Optional[PositiveInt] = None
    rng_seed: int = Field(default=0, ge=0, lt=2 ** 64)
    reference_predictor: Optional[str] = None
    dump_profiles: bool = False

    @model_validator(mode="after")
    def _check_sources(self) -> "RunManifest":
        if not self.traces and not self.synthetic:
            raise ValueError("manifest needs at least one trace path or synthetic trace")
        labels = check_unique_labels(self.predictors)
        if self.reference_predictor is not None and self.reference_predictor not in labels:
            raise ValueError(f"reference_predictor {self.reference_predictor!r} is not among {labels}")
        return self

    @property
    def reference_label(self) -> str:
        """Predictor attached to the profiler; defaults to the first TAGE entry"""
        if self.reference_predictor:
            return self.reference_predictor
        for predictor in self.predictors:
            if predictor.kind == PredictorKind.TAGE:
                return predictor.label
        return self.predictors[0].label
