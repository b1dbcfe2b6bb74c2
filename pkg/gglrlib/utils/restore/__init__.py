from . import formation, solvers, runners, report, tuning, bench

__all__ = ["formation", "solvers", "runners", "report", "tuning", "bench"]
