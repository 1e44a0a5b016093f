"""File ingestion, result serialization, and a synthetic generator.

Formats:

* vertex file: CSV with a header row; the first column is a unique
  non-negative integer id consumed as identity (not an attribute
  unless ``keep_id``); an empty cell means the attribute is absent on
  that row.
* edge file: tab-separated, no header, exactly two columns ``src`` and
  ``dst`` referencing ids from the paired vertex file.  Edges carry
  empty payloads.

Replica indices are assigned by occurrence counting per payload, and
the counting continues across everything already registered in the
target database, so two file pairs loaded into one database never
collide on (payload, replica).
"""

from __future__ import annotations

import csv
import hashlib
import os
from dataclasses import dataclass
from datetime import date
from typing import Iterable

import numpy as np

from .model import (
    EMPTY_RECORD,
    DataFormatError,
    Element,
    Graph,
    IndexedSet,
    PropertyGraph,
    Record,
    ValidationError,
    component_from_payloads,
)

__all__ = [
    "MalformedRowError",
    "DuplicateIdError",
    "DanglingEndpointError",
    "load_graph_pair",
    "write_graph",
    "write_join_result",
    "GeneratorParams",
    "generate_rows",
    "build_graph",
    "generate",
    "read_config",
]


class MalformedRowError(DataFormatError):
    pass


class DuplicateIdError(DataFormatError):
    pass


class DanglingEndpointError(DataFormatError):
    pass


# ---------------------------------------------------------------------------
# loading


def _parse_id(cell: str, line: int) -> int:
    try:
        value = int(cell)
    except ValueError:
        raise MalformedRowError(f"id {cell!r} is not an integer", line) from None
    if value < 0:
        raise MalformedRowError(f"id {value} is negative", line)
    return value


def load_graph_pair(
    db: PropertyGraph,
    vertex_path,
    edge_path,
    *,
    vertex_labels: Iterable[str] = (),
    edge_labels: Iterable[str] = (),
    keep_id: bool = False,
) -> Graph:
    """Load one vertex/edge file pair as a new component of ``db``."""
    vertex_labels = frozenset(vertex_labels)
    edge_labels = frozenset(edge_labels)

    with open(vertex_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedRowError("vertex file has no header row", 1) from None
        if len(header) < 1 or any(not c for c in header):
            raise MalformedRowError("empty column name in header", 1)
        attr_names = header[1:] if not keep_id else header[:]
        seen_ids: set[int] = set()
        local_mu: dict[Record, int] = {}
        by_id: dict[int, Element] = {}
        elements = []
        for line, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise MalformedRowError(
                    f"expected {len(header)} cells, found {len(row)}", line
                )
            vid = _parse_id(row[0], line)
            if vid in seen_ids:
                raise DuplicateIdError(f"vertex id {vid} repeats", line)
            seen_ids.add(vid)
            cells = row if keep_id else row[1:]
            rec = Record(
                (name, cell) for name, cell in zip(attr_names, cells) if cell != ""
            )
            n = local_mu.get(rec, 0)
            local_mu[rec] = n + 1
            el = Element(rec, db.vertex_multiplicity(rec) + n + 1)
            by_id[vid] = el
            elements.append(el)

    with open(edge_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter="\t")
        edge_mu: dict[Record, int] = {}
        edges = []
        endpoints = {}
        for line, row in enumerate(reader, start=1):
            if len(row) != 2:
                raise MalformedRowError(f"expected 2 cells, found {len(row)}", line)
            sid = _parse_id(row[0], line)
            did = _parse_id(row[1], line)
            src = by_id.get(sid)
            dst = by_id.get(did)
            if src is None:
                raise DanglingEndpointError(f"unknown vertex id {sid}", line)
            if dst is None:
                raise DanglingEndpointError(f"unknown vertex id {did}", line)
            n = edge_mu.get(EMPTY_RECORD, 0)
            edge_mu[EMPTY_RECORD] = n + 1
            el = Element(EMPTY_RECORD, db.edge_multiplicity(EMPTY_RECORD) + n + 1)
            edges.append(el)
            endpoints[el] = (src, dst)

    vlabs = {v: vertex_labels for v in elements}
    elabs = {e: edge_labels for e in edges}
    cid = db.register_component(
        IndexedSet(elements), IndexedSet(edges), endpoints, vlabs, elabs
    )
    return db.get_graph(cid)


# ---------------------------------------------------------------------------
# writing


def _attr_union(elements) -> list[str]:
    names: set[str] = set()
    for el in elements:
        names.update(el.record.domain)
    return sorted(names)


def write_graph(graph: Graph, vertex_path, edge_path) -> None:
    """Serialize one component in the load format.  Canonical element
    order, sequential ids.  Labels and edge payloads have no place in
    the format and are not written."""
    attrs = _attr_union(graph.vertices)
    if "id" in attrs:
        raise DataFormatError("attribute name 'id' collides with the id column")
    ids = {v: i for i, v in enumerate(graph.vertices)}
    with open(vertex_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["id"] + attrs)
        for v in graph.vertices:
            rec = v.record
            w.writerow([ids[v]] + [rec.get(a, "") for a in attrs])
    with open(edge_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, delimiter="\t")
        for e in graph.edges:
            src, dst = graph.db.endpoints_of(e)
            w.writerow([ids[src], ids[dst]])


def _leaf_token(leaf: Element) -> str:
    digest = hashlib.blake2b(
        repr(leaf.record.items).encode("utf-8"), digest_size=4
    ).hexdigest()
    tag = "~" if leaf.synthetic else ""
    return f"{tag}{digest}:{leaf.replica}"


def provenance_token(element: Element) -> str:
    """Compact description of an element's operand tree leaves."""
    return "+".join(_leaf_token(l) for l in element.leaves())


def write_join_result(result, out_dir) -> tuple[str, str]:
    """Write a join result as a loadable file pair: vertex CSV with the
    union of attribute columns plus a provenance column, edge TSV with
    src/dst ids.  Returns the two paths."""
    os.makedirs(out_dir, exist_ok=True)
    vertex_path = os.path.join(out_dir, "vertices.csv")
    edge_path = os.path.join(out_dir, "edges.tsv")
    attrs = _attr_union(result.vertices)
    for reserved in ("id", "_provenance"):
        if reserved in attrs:
            raise DataFormatError(
                f"attribute name {reserved!r} collides with a reserved column"
            )
    ids = {v: i for i, v in enumerate(result.vertices)}
    with open(vertex_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["id"] + attrs + ["_provenance"])
        for v in result.vertices:
            rec = v.record
            w.writerow(
                [ids[v]]
                + [rec.get(a, "") for a in attrs]
                + [provenance_token(v)]
            )
    with open(edge_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, delimiter="\t")
        for e in result.edges:
            src, dst = result.db.endpoints_of(e)
            w.writerow([ids[src], ids[dst]])
    return vertex_path, edge_path


# ---------------------------------------------------------------------------
# synthetic data


@dataclass(frozen=True)
class GeneratorParams:
    """Recursive-matrix graph with attribute enrichment.

    ``scale`` is log2 of the vertex count.  ``dob_values`` and
    ``company_values`` size the value domains of the two join-key
    attributes and therefore set join selectivity; the remaining
    attribute domains are cosmetic.

    ``attr_suffix`` is appended to every attribute name except ``id``.
    Two operands generated with different suffixes have disjoint
    schemas, so joining them constrains nothing beyond the equality
    predicate.  With equal suffixes the shared unique email column
    vetoes every merge.
    """

    scale: int
    seed: int = 1
    edge_factor: int = 2
    dob_values: int = 365
    company_values: int = 512
    name_values: int = 128
    surname_values: int = 128
    residence_values: int = 64
    scale_cap: int = 22
    attr_suffix: str = ""

    def __post_init__(self):
        if self.scale < 0:
            raise ValidationError("scale must be non-negative")
        if self.scale > self.scale_cap:
            raise ValidationError(
                f"scale {self.scale} exceeds the configured cap {self.scale_cap}"
            )
        if self.edge_factor < 0:
            raise ValidationError("edge_factor must be non-negative")
        for fieldname in ("dob_values", "company_values", "name_values",
                          "surname_values", "residence_values"):
            if getattr(self, fieldname) < 1:
                raise ValidationError(f"{fieldname} must be positive")
        if not all(c.isalnum() or c == "_" for c in self.attr_suffix):
            raise ValidationError("attr_suffix must be alphanumeric")


VERTEX_HEADER = ("id", "sex", "name", "surname", "dob", "email", "company", "residence")

# community-standard recursive-matrix quadrant probabilities
_RMAT_P = (0.57, 0.19, 0.19, 0.05)


def generate_rows(params: GeneratorParams):
    """All file content in memory: (header, vertex rows, edge pairs).
    Deterministic for fixed params."""
    n = 1 << params.scale
    m = params.edge_factor * n
    rng = np.random.Generator(np.random.PCG64(params.seed))

    sex_pick = rng.integers(0, 2, size=n)
    name_pick = rng.integers(0, params.name_values, size=n)
    surname_pick = rng.integers(0, params.surname_values, size=n)
    dob_pick = rng.integers(0, params.dob_values, size=n)
    company_pick = rng.integers(0, params.company_values, size=n)
    residence_pick = rng.integers(0, params.residence_values, size=n)

    dob_pool = [date.fromordinal(710000 + k).isoformat() for k in range(params.dob_values)]

    vrows = []
    for i in range(n):
        vrows.append(
            (
                str(i),
                "F" if sex_pick[i] else "M",
                f"name{name_pick[i]}",
                f"surname{surname_pick[i]}",
                dob_pool[dob_pick[i]],
                f"user{i}@example.net",
                f"company{company_pick[i]}",
                f"city{residence_pick[i]}",
            )
        )

    src = np.zeros(m, dtype=np.int64)
    dst = np.zeros(m, dtype=np.int64)
    for _ in range(params.scale):
        q = rng.choice(4, size=m, p=_RMAT_P)
        src = src * 2 + (q >> 1)
        dst = dst * 2 + (q & 1)
    erows = [(int(s), int(d)) for s, d in zip(src, dst)]

    header = VERTEX_HEADER
    if params.attr_suffix:
        header = ("id",) + tuple(a + params.attr_suffix for a in VERTEX_HEADER[1:])
    return header, vrows, erows


def build_graph(
    db: PropertyGraph,
    params: GeneratorParams,
    *,
    vertex_labels: Iterable[str] = (),
    edge_labels: Iterable[str] = (),
) -> Graph:
    """Generate directly into ``db``, skipping the filesystem.  Output
    is element-for-element what generate + load_graph_pair would give."""
    header, vrows, erows = generate_rows(params)
    attr_names = header[1:]
    records = [
        Record((nm, cell) for nm, cell in zip(attr_names, row[1:]) if cell != "")
        for row in vrows
    ]
    triples = [(s, d, EMPTY_RECORD) for s, d in erows]
    return component_from_payloads(
        db,
        records,
        triples,
        vertex_labels=[vertex_labels] * len(records),
        edge_labels=[edge_labels] * len(triples),
    )


def generate(params: GeneratorParams, out_dir, basename: str = "graph") -> tuple[str, str]:
    """Write the generated graph as a loadable file pair; returns the
    two paths."""
    os.makedirs(out_dir, exist_ok=True)
    header, vrows, erows = generate_rows(params)
    vertex_path = os.path.join(out_dir, f"{basename}.vertices.csv")
    edge_path = os.path.join(out_dir, f"{basename}.edges.tsv")
    with open(vertex_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(vrows)
    with open(edge_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, delimiter="\t")
        w.writerows(erows)
    return vertex_path, edge_path


# ---------------------------------------------------------------------------
# config files


def read_config(path) -> dict[str, str]:
    """key=value lines; blank lines and #-comments ignored."""
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise DataFormatError(f"expected key=value, got {line!r}", line_no)
            key, _, value = line.partition("=")
            key = key.strip()
            if not key:
                raise DataFormatError("empty key", line_no)
            out[key] = value.strip()
    return out
