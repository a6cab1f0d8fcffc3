"""
Errors Module
Exception hierarchy shared by the trace, profiling and analysis layers
"""
from typing import Iterable, List, Optional


class BwsetError(Exception):
    """Base class for all toolkit errors"""


class TraceFormatError(BwsetError):
    """Trace file does not follow the BWT1 layout (or CSV import layout)"""

    def __init__(self, message: str, offset: Optional[int] = None):
        super().__init__(message if offset is None else f"{message} (at byte offset {offset})")
        self.offset = offset


class TraceTruncatedError(BwsetError):
    """Trace body ends before the record count declared in its header"""

    def __init__(self, records_read: int, expected: int):
        super().__init__(
            f"Trace truncated: {records_read} complete records read, header declares {expected}"
        )
        self.records_read = records_read
        self.expected = expected


class ConfigurationError(BwsetError, ValueError):
    """Invalid history length, predictor geometry or manifest content"""


class AlignmentError(BwsetError):
    """Prediction stream is not aligned 1:1 with the record stream"""

    def __init__(self, index: int):
        super().__init__(f"Prediction stream misaligned at record index {index}")
        self.index = index


class EmptyTraceError(BwsetError):
    """Operation requires at least one branch occurrence"""


class ContractViolation(BwsetError, ValueError):
    """Caller broke an operation's precondition"""


class JoinError(BwsetError):
    """Summaries and predictor results do not join on trace_id"""

    def __init__(self, orphans: Iterable[str]):
        self.orphans: List[str] = sorted(set(orphans))
        super().__init__(f"Unmatched trace_ids: {', '.join(self.orphans)}")
