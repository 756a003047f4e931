"""Terminal summary hook: one verdict line per release-gate criterion."""

import re

CRITERIA = {
    1: "peak-ratio SINR inside the expected window, solved in under a millisecond",
    2: "saturating-ratio model falls back to an epsilon equilibrium",
    3: "sharing-probability values and large-K decay rate",
    4: "simultaneous sharing frequency vs the analytic reference curve",
    5: "sequential sharing is a subset of simultaneous sharing",
    6: "closed-form leader strategy matches the grid oracle",
    7: "hierarchy never hurts the leader; role-order comparisons hold",
    8: "spectral efficiency concentrates at the peak-ratio rate",
    9: "per-trial welfare sandwiched by the equilibrium ratio bound",
    10: "efficiency gap under full user correlation, reported per carrier count",
    11: "sweep reruns are byte-identical",
}

_NODE = re.compile(r"test_acceptance\.py::test_c(\d{2})")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    verdicts = {}
    for category, label in (("passed", "PASS"), ("failed", "FAIL"),
                            ("error", "ERROR")):
        for report in terminalreporter.stats.get(category, []):
            match = _NODE.search(getattr(report, "nodeid", ""))
            if match:
                verdicts[int(match.group(1))] = label
    if not verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(CRITERIA):
        if num in verdicts:
            terminalreporter.write_line(
                f"C{num:02d} {verdicts[num]:5s} {CRITERIA[num]}"
            )
    for line in getattr(config, "_observed_ee_gap", ()):
        terminalreporter.write_line(line)
