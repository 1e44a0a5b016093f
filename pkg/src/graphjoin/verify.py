"""Randomized law checking: oracle vs engine, algebraic laws, and the
signatures that decide result equality.

Checkers build their instances deterministically from a seed, so any
reported counterexample is reproducible by seed alone.  Two equality
notions appear:

* *raw* signatures compare payload, replica index, labels, operand
  tree, and endpoints exactly.  Oracle/engine equivalence and
  commutativity hold at this level.
* *structural* signatures drop replica indices and compare operand
  tree leaves instead.  Associativity holds at this level; the merged
  indices themselves differ between bracketings, which
  :func:`check_associativity` also measures and reports.

Each checker returns ``None`` on success or a counterexample string.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional

from .engine import prepare, run_join
from .logical import CONJUNCTIVE, DISJUNCTIVE, JoinSpec, graph_join
from .model import (
    EMPTY_RECORD,
    IndexedSet,
    PropertyGraph,
    Record,
    component_from_payloads,
)
from .relational import ThetaPredicate, invert_predicate, theta_join

__all__ = [
    "raw_signature",
    "structural_signature",
    "build_pair",
    "build_triple",
    "check_oracle_engine",
    "check_commutativity",
    "check_associativity",
    "check_relational_commutativity",
    "check_containment",
    "SuiteResult",
    "run_suites",
]

_LABEL_POOL = ("L", "M", "N")


# ---------------------------------------------------------------------------
# equality signatures


def _vsig_raw(db, v):
    return (v.record.items, v.replica, tuple(sorted(db.vertex_labels_of(v))), v.decomposition_key())


def _esig_raw(db, e):
    src, dst = db.endpoints_of(e)
    return (
        e.record.items,
        e.replica,
        tuple(sorted(db.edge_labels_of(e))),
        e.decomposition_key(),
        (src.record.items, src.replica),
        (dst.record.items, dst.replica),
    )


def raw_signature(result):
    """Exact content of a join result: payloads, replica indices,
    labels, operand trees, endpoint identities.  Works for reference
    and engine results alike."""
    db = result.db
    return (
        tuple(sorted(_vsig_raw(db, v) for v in result.vertices)),
        tuple(sorted(_esig_raw(db, e) for e in result.edges)),
    )


def _vsig_struct(db, v):
    return (v.record.items, v.decomposition_key(), tuple(sorted(db.vertex_labels_of(v))))


def _esig_struct(db, e):
    src, dst = db.endpoints_of(e)
    return (
        e.record.items,
        e.real_decomposition_key(),
        tuple(sorted(db.edge_labels_of(e))),
        _vsig_struct(db, src),
        _vsig_struct(db, dst),
    )


def structural_signature(result):
    """Bracketing-independent content: payloads, operand leaves
    (placeholders excluded on edges), labels, endpoint structure."""
    db = result.db
    return (
        tuple(sorted(_vsig_struct(db, v) for v in result.vertices)),
        tuple(sorted(_esig_struct(db, e) for e in result.edges)),
    )


# ---------------------------------------------------------------------------
# instance builders


def _rand_labels(rng):
    return [l for l in _LABEL_POOL if rng.random() < 0.25]


def _rand_vertices(rng, n, attr_specs):
    recs = []
    for _ in range(n):
        items = []
        for name, domain, present_p in attr_specs:
            if rng.random() < present_p:
                items.append((name, str(rng.randrange(domain))))
        recs.append(Record(items))
    return recs


def _rand_edges(rng, n_vertices, max_edges, payload_p, payload_domain=2):
    if n_vertices == 0:
        return []
    triples = []
    for _ in range(rng.randrange(max_edges + 1)):
        payload = EMPTY_RECORD
        if rng.random() < payload_p:
            payload = Record([("w", str(rng.randrange(payload_domain)))])
        triples.append((rng.randrange(n_vertices), rng.randrange(n_vertices), payload))
    return triples


def build_pair(
    seed: int,
    *,
    max_vertices: int = 12,
    max_edges: int = 20,
    key_domain: Optional[int] = None,
    missing_p: float = 0.12,
    edge_payload_p: float = 0.5,
):
    """Two random components in one database plus the equality
    condition joining them.  Deterministic per seed."""
    rng = random.Random(seed)
    dom = key_domain if key_domain is not None else rng.randrange(2, 5)
    right_key = rng.choice(("k", "k2"))
    # "s" appears on both sides so payload agreement actually bites
    left_specs = [("k", dom, 1.0 - missing_p), ("a", 3, 0.7), ("s", 2, 0.4)]
    right_specs = [(right_key, dom, 1.0 - missing_p), ("b", 3, 0.7), ("s", 2, 0.4)]

    db = PropertyGraph()
    nl = rng.randrange(max_vertices + 1)
    nr = rng.randrange(max_vertices + 1)
    lrecs = _rand_vertices(rng, nl, left_specs)
    rrecs = _rand_vertices(rng, nr, right_specs)
    ledges = _rand_edges(rng, nl, max_edges, edge_payload_p)
    redges = _rand_edges(rng, nr, max_edges, edge_payload_p)
    left = component_from_payloads(
        db, lrecs, ledges,
        vertex_labels=[_rand_labels(rng) for _ in lrecs],
        edge_labels=[_rand_labels(rng) for _ in ledges],
    )
    right = component_from_payloads(
        db, rrecs, redges,
        vertex_labels=[_rand_labels(rng) for _ in rrecs],
        edge_labels=[_rand_labels(rng) for _ in redges],
    )
    return db, left, right, (("k", right_key),)


def build_triple(seed: int, *, max_vertices: int = 4, max_edges: int = 5):
    """Three components whose payloads are distinct within each
    component (a per-vertex tag attribute), so merged values never
    coincide and the bracketing laws can be checked structurally."""
    rng = random.Random(seed)
    db = PropertyGraph()
    graphs = []
    for tag in ("ta", "tb", "tc"):
        n = rng.randrange(1, max_vertices + 1)
        recs = [
            Record([("k", str(rng.randrange(2))), (tag, str(i))]) for i in range(n)
        ]
        etag = "e" + tag
        edges = [
            (rng.randrange(n), rng.randrange(n), Record([(etag, str(j))]))
            for j in range(rng.randrange(max_edges + 1))
        ]
        graphs.append(
            component_from_payloads(
                db, recs, edges,
                vertex_labels=[_rand_labels(rng) for _ in recs],
                edge_labels=[_rand_labels(rng) for _ in edges],
            )
        )
    return db, graphs[0], graphs[1], graphs[2]


# ---------------------------------------------------------------------------
# law checkers


def check_oracle_engine(seed: int, semantics: str = CONJUNCTIVE, **build_kw) -> Optional[str]:
    """The optimized engine must reproduce the reference join exactly."""
    db, left, right, pairs = build_pair(seed, **build_kw)
    theta = ThetaPredicate.equalities(pairs)
    oracle = graph_join(left, right, JoinSpec(theta, semantics))
    a = prepare(left, [p[0] for p in pairs])
    b = prepare(right, [p[1] for p in pairs])
    run = run_join(a, b, semantics)
    if raw_signature(oracle) != raw_signature(run):
        return (
            f"seed={seed} semantics={semantics}: engine diverges from reference "
            f"(|V|={len(oracle.vertices)}/{len(run.vertices)}, "
            f"|E|={len(oracle.edges)}/{len(run.edges)})"
        )
    return None


def check_commutativity(seed: int, semantics: str = CONJUNCTIVE, **build_kw) -> Optional[str]:
    """join(A, B, theta) equals join(B, A, inverted theta) exactly."""
    db1, l1, r1, pairs = build_pair(seed, **build_kw)
    theta = ThetaPredicate.equalities(pairs)
    fwd = graph_join(l1, r1, JoinSpec(theta, semantics))
    # same instance rebuilt fresh: the swapped result re-derives the
    # same elements and one database cannot hold them twice
    db2, l2, r2, _ = build_pair(seed, **build_kw)
    rev = graph_join(r2, l2, JoinSpec(invert_predicate(theta), semantics))
    if raw_signature(fwd) != raw_signature(rev):
        return f"seed={seed} semantics={semantics}: swapped operands changed the result"
    return None


def check_associativity(
    seed: int, semantics: str = CONJUNCTIVE, **build_kw
) -> tuple[Optional[str], tuple[int, int]]:
    """(A ⋈ B) ⋈ C equals A ⋈ (B ⋈ C) structurally.  Also returns
    (matching, total) for how many merged vertices carry identical
    replica indices across the two bracketings; indices are not
    expected to agree and this is reported, not asserted."""
    theta = ThetaPredicate.equalities((("k", "k"),))

    db1, a1, b1, c1 = build_triple(seed, **build_kw)
    ab = graph_join(a1, b1, JoinSpec(theta, semantics))
    left_assoc = graph_join(ab.graph, c1, JoinSpec(theta, semantics))

    db2, a2, b2, c2 = build_triple(seed, **build_kw)
    bc = graph_join(b2, c2, JoinSpec(theta, semantics))
    right_assoc = graph_join(a2, bc.graph, JoinSpec(theta, semantics))

    # Signature SETS, not multisets: on duplicate payloads the two
    # bracketings can collapse intermediate merges differently and
    # produce different cardinalities of the same signatures.
    lv, le = structural_signature(left_assoc)
    rv, re_ = structural_signature(right_assoc)
    err = None
    if set(lv) != set(rv) or set(le) != set(re_):
        err = (
            f"seed={seed} semantics={semantics}: bracketing changed the result "
            f"(|V|={len(left_assoc.vertices)}/{len(right_assoc.vertices)}, "
            f"|E|={len(left_assoc.edges)}/{len(right_assoc.edges)})"
        )

    lmap = {_vsig_struct(left_assoc.db, v): v.replica for v in left_assoc.vertices}
    rmap = {_vsig_struct(right_assoc.db, v): v.replica for v in right_assoc.vertices}
    shared = set(lmap) & set(rmap)
    matching = sum(1 for s in shared if lmap[s] == rmap[s])
    return err, (matching, len(shared))


def check_relational_commutativity(seed: int, *, max_size: int = 10) -> Optional[str]:
    """theta_join(R, S, theta) mirrors theta_join(S, R, theta⁻¹)."""
    rng = random.Random(seed)
    specs = [("k", rng.randrange(2, 5), 0.9), ("a", 3, 0.6), ("s", 2, 0.4)]
    r = IndexedSet.from_records(_rand_vertices(rng, rng.randrange(max_size + 1), specs))
    s = IndexedSet.from_records(_rand_vertices(rng, rng.randrange(max_size + 1), specs))
    if rng.random() < 0.25:
        theta = ThetaPredicate.always_true()
    else:
        theta = ThetaPredicate.equalities((("k", "k"),))
    fwd = theta_join(r, s, theta)
    rev = theta_join(s, r, invert_predicate(theta))
    fsig = sorted((e.record.items, e.replica, e.decomposition_key()) for e in fwd)
    rsig = sorted((e.record.items, e.replica, e.decomposition_key()) for e in rev)
    if fsig != rsig:
        return f"seed={seed}: relational join not symmetric ({len(fwd)} vs {len(rev)})"
    return None


def check_containment(seed: int, **build_kw) -> Optional[str]:
    """Disjunctive output contains the conjunctive output: identical
    vertices, edge superset."""
    db1, l1, r1, pairs = build_pair(seed, **build_kw)
    theta = ThetaPredicate.equalities(pairs)
    conj = graph_join(l1, r1, JoinSpec(theta, CONJUNCTIVE))
    db2, l2, r2, _ = build_pair(seed, **build_kw)
    disj = graph_join(l2, r2, JoinSpec(theta, DISJUNCTIVE))
    cv, ce = raw_signature(conj)
    dv, de = raw_signature(disj)
    if cv != dv:
        return f"seed={seed}: vertex sets differ between semantics"
    if not set(ce) <= set(de):
        return f"seed={seed}: conjunctive edge missing from disjunctive result"
    return None


# ---------------------------------------------------------------------------
# suite driver


@dataclass
class SuiteResult:
    name: str
    trials: int
    failures: int
    first_counterexample: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.failures == 0


def run_suites(*, trials: int = 100, max_vertices: int = 8, seed: int = 0) -> list[SuiteResult]:
    """Run every law suite; used by the command-line verify command."""
    results = []

    def drive(name, fn, n):
        failures = 0
        first = None
        for t in range(n):
            err = fn(seed + t)
            if err is not None:
                failures += 1
                if first is None:
                    first = err
        results.append(SuiteResult(name, n, failures, first))

    for semantics in (CONJUNCTIVE, DISJUNCTIVE):
        drive(
            f"oracle-engine/{semantics}",
            lambda s, sem=semantics: check_oracle_engine(s, sem, max_vertices=max_vertices),
            trials,
        )
        drive(
            f"commutativity/{semantics}",
            lambda s, sem=semantics: check_commutativity(s, sem, max_vertices=max_vertices),
            trials,
        )
        drive(
            f"associativity/{semantics}",
            lambda s, sem=semantics: check_associativity(s, sem)[0],
            max(1, trials // 2),
        )
    drive("relational-commutativity", check_relational_commutativity, trials)
    drive(
        "containment",
        lambda s: check_containment(s, max_vertices=max_vertices),
        max(1, trials // 2),
    )
    return results
