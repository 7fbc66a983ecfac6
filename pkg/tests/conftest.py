"""Shared fixtures and the acceptance summary printer."""

from __future__ import annotations

import numpy as np
import pytest

from gtscope.model import DataSource, GroundTruthMatrix


def _gt_from_events(dataset_id, n_samples, feature_names, events, sampling_period=60.0):
    """events: list of (start, end, feature index list)."""
    labels = np.zeros((n_samples, len(feature_names)), dtype=np.uint8)
    for start, end, features in events:
        for j in features:
            labels[start : end + 1, j] = 1
    return GroundTruthMatrix(dataset_id, sampling_period, labels, tuple(feature_names))


@pytest.fixture
def toy_source() -> DataSource:
    """Two datasets, six events: three with footprint {a,b}, three with {c}."""
    ds_x = _gt_from_events(
        "toy-x",
        20,
        ("a", "b", "c"),
        [(2, 3, [0, 1]), (6, 6, [2]), (10, 12, [0, 1])],
    )
    ds_y = _gt_from_events(
        "toy-y",
        15,
        ("a", "b", "c"),
        [(1, 1, [2]), (5, 6, [0, 1]), (9, 9, [2])],
    )
    return DataSource("toy", (ds_x, ds_y), "spatio-temporal", "manual")


@pytest.fixture
def temporal_source() -> DataSource:
    vec1 = np.array([0, 1, 1, 0, 1, 0, 0, 1, 1, 1], dtype=np.uint8)
    vec2 = np.array([1, 0, 0, 1, 1, 0], dtype=np.uint8)
    ds1 = GroundTruthMatrix("t-1", 60.0, vec1)
    ds2 = GroundTruthMatrix("t-2", 60.0, vec2)
    return DataSource("temporal-toy", (ds1, ds2), "temporal", "controlled")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One line per acceptance criterion at the end of the run."""
    lines = []
    for status in ("passed", "failed", "skipped"):
        for report in terminalreporter.stats.get(status, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance.py" not in nodeid or "::" not in nodeid:
                continue
            name = nodeid.split("::")[-1]
            note = ""
            if status == "skipped":
                reason = getattr(report, "longrepr", None)
                if isinstance(reason, tuple):
                    note = f" ({reason[2]})"
            lines.append((name, status.upper() + note))
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name, status in sorted(lines):
            terminalreporter.write_line(f"ACCEPTANCE {name}: {status}")
