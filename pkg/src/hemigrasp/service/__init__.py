"""Service layer: wire protocol, trial persistence, benchmark harness."""

from .bench import bench_perturb, bench_run, run_scripted_session
from .records import TrialLog, TrialRecord

__all__ = ["bench_perturb", "bench_run", "run_scripted_session", "TrialLog", "TrialRecord"]
