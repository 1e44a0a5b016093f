"""Shared fixtures.

The citation fixture is the canonical two-graph instance used across
suites: a researcher graph joined to a citation graph on
Name = 1Author.  Its expected outputs are frozen by hand below and
asserted exactly in the logical and engine suites.
"""

from contextlib import contextmanager

import pytest
from hypothesis import settings

from graphjoin.model import PropertyGraph, Record, component_from_payloads

settings.register_profile("suite", max_examples=50, deadline=None)
settings.load_profile("suite")


_ACCEPTANCE: list[tuple[int, str, str]] = []


@contextmanager
def _criterion(num: int, desc: str):
    try:
        yield
    except BaseException:
        _ACCEPTANCE.append((num, desc, "FAIL"))
        raise
    _ACCEPTANCE.append((num, desc, "PASS"))


@pytest.fixture
def criterion():
    """Context manager recording a pass/fail line for the terminal
    summary: ``with criterion(3, "..."):``"""
    return _criterion


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _ACCEPTANCE:
        terminalreporter.write_sep("-", "acceptance criteria")
        for num, desc, verdict in sorted(_ACCEPTANCE):
            terminalreporter.write_line(f"{verdict} criterion {num}: {desc}")


@pytest.fixture
def citation_instance():
    """Researcher and citation graphs in one database.

    researcher: alice --follows--> bob, payloads keyed by Name
    citation:   paperA --cites--> paperB, payloads keyed by 1Author

    All payloads are distinct so every element has replica 1.  Joining
    on Name = 1Author matches alice with paperA and bob with paperB,
    and the single edge pair bonds.
    """
    db = PropertyGraph()
    researcher = component_from_payloads(
        db,
        [Record({"Name": "Alice"}), Record({"Name": "Bob"})],
        [(0, 1, Record({"Since": "2020"}))],
        vertex_labels=[["User"], ["User"]],
        edge_labels=[["Follows"]],
    )
    citation = component_from_payloads(
        db,
        [Record({"1Author": "Alice", "Title": "Graphs"}), Record({"1Author": "Bob"})],
        [(0, 1, Record({"Since": "2020"}))],
        vertex_labels=[["Paper"], ["Paper"]],
        edge_labels=[["Cites"]],
    )
    return db, researcher, citation
