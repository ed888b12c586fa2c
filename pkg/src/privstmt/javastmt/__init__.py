"""Java method statement segmentation and categorization."""

from .kernel import KERNEL_IMPL, scan
from .segmenter import (
    ALL_CATEGORIES,
    SEVEN_CORE,
    EmptySource,
    MethodCode,
    Statement,
    StatementCategory,
    UnbalancedSource,
    categorize,
    extract,
    segment,
    write_statements_jsonl,
)

__all__ = [
    "ALL_CATEGORIES",
    "SEVEN_CORE",
    "EmptySource",
    "KERNEL_IMPL",
    "MethodCode",
    "Statement",
    "StatementCategory",
    "UnbalancedSource",
    "categorize",
    "extract",
    "scan",
    "segment",
    "write_statements_jsonl",
]
