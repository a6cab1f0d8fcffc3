"""
FastAPI Backend for the Branch Working Set toolkit
Main application entry point
"""
import logging
import os
import sys
from functools import lru_cache
from typing import Dict, List, Optional

from fastapi import Depends, FastAPI, File, Form, HTTPException, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field, ValidationError, model_validator

# Add backend/ to Python path so the src package resolves from any cwd
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from src import config
from src.analysis import bin_aggregate
from src.app import characterize_records
from src.errors import BwsetError, ConfigurationError
from src.models import (BwsetSummary, CorrelationReport, PredictorConfig, PredictorKind, PredictorResult,
                        ProfileConfig, SyntheticSpec, TraceMeta, check_unique_labels,
                        default_predictors)
from src.trace_io import generate_synthetic
from src.trace_store import TraceStore

config.configure_logging()
logger = logging.getLogger(__name__)

# Initialize FastAPI app
app = FastAPI(
    title="BWSET API",
    description="REST API for branch working set characterization of stored branch traces",
    version="1.0.0"
)

# Configure CORS
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],  # In production, replace with specific origins
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


@lru_cache
def get_store() -> TraceStore:
    return TraceStore(config.get_store_path())


# Pydantic models for request/response
class GenerateRequest(BaseModel):
    trace_id: str = Field(min_length=1)
    source_tag: str = "synthetic"
    spec: SyntheticSpec


class CharacterizeRequest(BaseModel):
    trace_id: str
    profile: ProfileConfig = Field(default_factory=ProfileConfig.pc_only)
    predictors: List[PredictorConfig] = Field(default_factory=default_predictors, min_length=1)
    reference_predictor: Optional[str] = None

    @model_validator(mode="after")
    def _check_labels(self) -> "CharacterizeRequest":
        check_unique_labels(self.predictors)
        return self


class CharacterizeResponse(BaseModel):
    summary: BwsetSummary
    results: List[PredictorResult]


class ReportRequest(BaseModel):
    trace_ids: List[str] = Field(min_length=1)
    profile: ProfileConfig = Field(default_factory=ProfileConfig.pc_only)
    predictors: List[PredictorConfig] = Field(default_factory=default_predictors, min_length=1)

    @model_validator(mode="after")
    def _check_labels(self) -> "ReportRequest":
        check_unique_labels(self.predictors)
        return self


class TraceResponse(BaseModel):
    message: str
    success: bool
    trace: Optional[TraceMeta] = None


def _reference_label(predictors: List[PredictorConfig], requested: Optional[str]) -> str:
    labels = [predictor.label for predictor in predictors]
    if requested is not None:
        if requested not in labels:
            raise ConfigurationError(f"reference_predictor {requested!r} is not among {labels}")
        return requested
    return next((p.label for p in predictors if p.kind == PredictorKind.TAGE), labels[0])


def _load(store: TraceStore, trace_id: str):
    try:
        return store.get(trace_id)
    except KeyError:
        raise HTTPException(status_code=404, detail=f"Unknown trace {trace_id!r}")


# Health check endpoint
@app.get("/")
async def root():
    """Root endpoint - health check"""
    return {"message": "BWSET API is running", "status": "healthy"}


@app.get("/health")
async def health_check():
    """Health check endpoint"""
    return {"status": "healthy", "service": "bwset-api"}


# Trace management endpoints
@app.post("/api/traces/upload", response_model=TraceResponse)
def upload_trace_endpoint(file: UploadFile = File(...), source_tag: str = Form(""),
                          store: TraceStore = Depends(get_store)):
    """
    Upload a branch trace

    Args:
        file: Trace file (.bwt binary or .csv with a pc,taken header)
        source_tag: Application group the trace belongs to

    Returns:
        TraceResponse with the stored trace metadata
    """
    try:
        meta = store.add_file(file.filename or "", file.file.read(), source_tag=source_tag)
        return TraceResponse(message=f"Stored trace {meta.trace_id}", success=True, trace=meta)
    except BwsetError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        logger.exception("Upload of %s failed", file.filename)
        raise HTTPException(status_code=500, detail=str(e))


@app.post("/api/traces/generate", response_model=TraceResponse)
def generate_trace_endpoint(request: GenerateRequest, store: TraceStore = Depends(get_store)):
    """Generate a synthetic trace into the store"""
    try:
        records = generate_synthetic(request.spec)
        meta = store.add_records(records, TraceMeta(trace_id=request.trace_id, source_tag=request.source_tag))
        return TraceResponse(message=f"Generated trace {meta.trace_id}", success=True, trace=meta)
    except BwsetError as e:
        raise HTTPException(status_code=400, detail=str(e))


@app.get("/api/traces", response_model=List[Dict])
def list_traces(store: TraceStore = Depends(get_store)):
    """List stored traces with their metadata"""
    return store.list_traces()


@app.delete("/api/traces/clear/all", response_model=TraceResponse)
def clear_all_traces_endpoint(store: TraceStore = Depends(get_store)):
    removed = store.clear()
    return TraceResponse(message=f"Removed {removed} traces", success=True)


@app.delete("/api/traces/{trace_id}", response_model=TraceResponse)
def delete_trace_endpoint(trace_id: str, store: TraceStore = Depends(get_store)):
    try:
        store.delete(trace_id)
    except KeyError:
        raise HTTPException(status_code=404, detail=f"Unknown trace {trace_id!r}")
    except BwsetError as e:
        raise HTTPException(status_code=400, detail=str(e))
    return TraceResponse(message=f"Deleted trace {trace_id}", success=True)


# Characterization endpoints
@app.post("/api/characterize", response_model=CharacterizeResponse)
def characterize_endpoint(request: CharacterizeRequest, store: TraceStore = Depends(get_store)):
    """
    Characterize one stored trace under one profile configuration

    Returns:
        CharacterizeResponse with the BWSET summary and every predictor's result
    """
    try:
        reference = _reference_label(request.predictors, request.reference_predictor)
        meta, records = _load(store, request.trace_id)
        _, summaries, results = characterize_records(meta, records, [request.profile],
                                                     request.predictors, reference)
        return CharacterizeResponse(summary=summaries[0], results=results)
    except HTTPException:
        raise
    except (BwsetError, ValidationError) as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        logger.exception("Characterization of %s failed", request.trace_id)
        raise HTTPException(status_code=500, detail=str(e))


@app.post("/api/report", response_model=CorrelationReport)
def report_endpoint(request: ReportRequest, store: TraceStore = Depends(get_store)):
    """Aggregate several stored traces into a correlation report"""
    try:
        reference = _reference_label(request.predictors, None)
        summaries, results = [], []
        for trace_id in dict.fromkeys(request.trace_ids):
            meta, records = _load(store, trace_id)
            _, trace_summaries, trace_results = characterize_records(
                meta, records, [request.profile], request.predictors, reference)
            summaries += trace_summaries
            results += trace_results
        return bin_aggregate(summaries, results, request.profile)
    except HTTPException:
        raise
    except BwsetError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        logger.exception("Report failed")
        raise HTTPException(status_code=500, detail=str(e))


if __name__ == "__main__":
    import uvicorn
    uvicorn.run(app, host="0.0.0.0", port=8000)
