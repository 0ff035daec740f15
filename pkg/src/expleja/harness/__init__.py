"""Benchmark harness: configuration, runs, sweeps and CSV output."""
from .config import RunConfig, expand, read_sweep, tolerance_grid
from .runner import (
    SUMMARY_HEADER,
    TRACE_HEADER,
    clear_reference_cache,
    compute_reference,
    execute,
    run_single,
    run_sweep,
    summary_csv,
    trace_csv,
    write_outputs,
)

__all__ = [
    "RunConfig", "expand", "read_sweep", "tolerance_grid",
    "SUMMARY_HEADER", "TRACE_HEADER", "clear_reference_cache", "compute_reference",
    "execute", "run_single", "run_sweep", "summary_csv", "trace_csv", "write_outputs",
]
