"""Causal Bayesian networks annotated with potential levels.

A network is a finite DAG of discrete nodes. Every node carries a
conditional probability table (CPT) over its states, one row per joint
parent assignment, plus a *potential level* (``pl``): a real number that
places the node strictly after all of its parents on the model's time
axis. In a closed-past network every parentless node sits exactly at the
time origin ``t0``; an open-past network is a truncation of some larger
model, so its roots may sit later than ``t0``.

The on-disk format is a UTF-8 JSON document::

    {"t0": 0.0, "open_past": false, "nodes": [
        {"name": "c", "states": ["0", "1"], "pl": 0.0,
         "parents": [], "cpt": [[0.7, 0.3]]},
        {"name": "e", "states": ["0", "1"], "pl": 1.0,
         "parents": ["c"], "cpt": [[0.9, 0.1], [0.2, 0.8]]}]}

``cpt[i][j]`` is the probability that the node takes its ``j``-th state
given the ``i``-th joint parent assignment. Assignments enumerate the
declared parent list in odometer order with the *last* parent varying
fastest; columns follow the declared state order. ``"t0": "-inf"``
encodes an unbounded past. A ``null`` CPT marks a truncation stub: a
parentless placeholder whose prior was cut away during materialization;
stubs are legal only in open-past networks.

Unbounded models are represented by :class:`LazyNetwork`, a deterministic
name-to-spec resolver. :func:`materialize` expands the finite fragment
needed for a given retrieval floor.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Iterator, Mapping

from .errors import (
    ExpansionCapError,
    InvalidNetworkError,
    NetworkFormatError,
    QueryError,
    UnknownNodeError,
    UnknownStateError,
)

ROW_SUM_TOL = 1e-9
DEFAULT_EXPANSION_CAP = 1_000_000

#: An assignment maps node names to state labels.
Assignment = Mapping[str, str]


@dataclass(frozen=True)
class NodeSpec:
    """One node: states, declared parents, CPT rows, and potential level."""

    name: str
    states: tuple[str, ...]
    parents: tuple[str, ...]
    cpt: tuple[tuple[float, ...], ...] | None
    pl: float

    @property
    def is_stub(self) -> bool:
        """True for a truncation stub (parentless, prior cut away)."""
        return self.cpt is None


@dataclass(frozen=True)
class Network:
    """A finite, immutable network. Construction does not validate; run
    :func:`validate` (or go through :func:`load_network`) first."""

    t0: float
    open_past: bool
    nodes: dict[str, NodeSpec]

    def spec(self, name: str) -> NodeSpec:
        try:
            return self.nodes[name]
        except KeyError:
            raise UnknownNodeError(f"unknown node: {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self.nodes

    def __len__(self) -> int:
        return len(self.nodes)

    def __iter__(self) -> Iterator[str]:
        return iter(self.nodes)


@dataclass(frozen=True)
class LazyNetwork:
    """An on-demand network: ``resolver`` maps a node name to its spec.

    The resolver must be deterministic: resolving the same name twice
    yields the same spec. Results are memoized here, which also gives
    repeated retrievals over the same instance an incrementally growing
    cache. The cache is a plain dict; share one instance across threads
    only if the resolver itself is safe to call concurrently.
    """

    resolver: Callable[[str], NodeSpec]
    t0: float
    open_past: bool = True
    _cache: dict[str, NodeSpec] = field(default_factory=dict, repr=False, compare=False)

    def resolve(self, name: str) -> NodeSpec:
        spec = self._cache.get(name)
        if spec is not None:
            return spec
        try:
            spec = self.resolver(name)
        except KeyError:
            raise UnknownNodeError(f"unknown node: {name!r}") from None
        problems = _local_spec_violations(spec)
        if spec.name != name:
            problems.append(Violation("resolver-name", f"asked for {name!r}, got {spec.name!r}"))
        if problems:
            raise InvalidNetworkError(problems)
        self._cache[name] = spec
        return spec


@dataclass(frozen=True)
class Query:
    """A conditional query: probability of ``objective`` given ``evidence``.

    The two assignments must name disjoint sets of nodes and the
    objective must be nonempty.
    """

    objective: dict[str, str]
    evidence: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.objective:
            raise QueryError("query objective must name at least one node")
        overlap = set(self.objective) & set(self.evidence)
        if overlap:
            raise QueryError(f"objective and evidence overlap on {sorted(overlap)}")

    @property
    def names(self) -> set[str]:
        return set(self.objective) | set(self.evidence)


@dataclass(frozen=True)
class Violation:
    """One broken invariant; ``rule`` is a stable machine-readable tag."""

    rule: str
    message: str


def _local_spec_violations(spec: NodeSpec) -> list[Violation]:
    """Checks that need no other node: states, parent list, CPT shape, PL."""
    out: list[Violation] = []
    if len(spec.states) < 2:
        out.append(Violation("state-count", f"node {spec.name!r} needs at least 2 states"))
    if len(set(spec.states)) != len(spec.states):
        out.append(Violation("duplicate-state", f"node {spec.name!r} repeats a state label"))
    if len(set(spec.parents)) != len(spec.parents):
        out.append(Violation("duplicate-parent", f"node {spec.name!r} repeats a parent name"))
    if not math.isfinite(spec.pl):
        out.append(Violation("pl-not-finite", f"node {spec.name!r} has pl={spec.pl!r}"))
    if spec.cpt is None:
        if spec.parents:
            out.append(
                Violation("cpt-missing", f"node {spec.name!r} has parents but no CPT")
            )
        return out
    for i, row in enumerate(spec.cpt):
        if len(row) != len(spec.states):
            out.append(
                Violation(
                    "cpt-row-length",
                    f"node {spec.name!r} row {i} has {len(row)} entries, expected {len(spec.states)}",
                )
            )
            continue
        if any(not (0.0 <= p <= 1.0) for p in row):
            out.append(Violation("cpt-entry-range", f"node {spec.name!r} row {i} leaves [0, 1]"))
        if abs(sum(row) - 1.0) > ROW_SUM_TOL:
            out.append(
                Violation(
                    "cpt-row-sum",
                    f"node {spec.name!r} row {i} sums to {sum(row)!r}, expected 1",
                )
            )
    return out


def validate(net: Network) -> list[Violation]:
    """Return every violated invariant; an empty list means the network is valid.

    Violations are data, not exceptions: a network that fails several
    rules reports all of them, each naming the offending nodes.
    """
    out: list[Violation] = []
    if math.isnan(net.t0) or (math.isinf(net.t0) and net.t0 > 0):
        out.append(Violation("t0-invalid", f"t0={net.t0!r} is not a time origin"))
    elif math.isinf(net.t0) and not net.open_past:
        out.append(Violation("t0-not-finite", "closed-past networks need a finite t0"))

    for key, spec in net.nodes.items():
        if key != spec.name:
            out.append(Violation("node-key", f"node keyed {key!r} is named {spec.name!r}"))
        out.extend(_local_spec_violations(spec))
        if spec.cpt is None and not spec.parents and not net.open_past:
            out.append(
                Violation("cpt-missing", f"closed-past node {spec.name!r} has no prior (stub)")
            )
        for p in spec.parents:
            if p not in net.nodes:
                out.append(Violation("unknown-parent", f"node {spec.name!r} lists missing parent {p!r}"))
        if spec.cpt is not None and all(p in net.nodes for p in spec.parents):
            expected = 1
            for p in spec.parents:
                expected *= len(net.nodes[p].states)
            if len(spec.cpt) != expected:
                out.append(
                    Violation(
                        "cpt-shape",
                        f"node {spec.name!r} has {len(spec.cpt)} CPT rows, expected {expected}",
                    )
                )

    for spec in net.nodes.values():
        for p in spec.parents:
            parent = net.nodes.get(p)
            if parent is not None and not (parent.pl < spec.pl):
                out.append(
                    Violation(
                        "temporal-precedence",
                        f"edge {p!r}->{spec.name!r} has pl({p!r})={parent.pl:g} >= pl({spec.name!r})={spec.pl:g}",
                    )
                )
        if not spec.parents:
            if not net.open_past and spec.pl != net.t0:
                out.append(
                    Violation(
                        "root-pl",
                        f"root {spec.name!r} has pl={spec.pl:g}, closed-past roots must sit at t0={net.t0:g}",
                    )
                )
            elif net.open_past and spec.pl < net.t0:
                out.append(
                    Violation("root-pl", f"root {spec.name!r} has pl={spec.pl:g} before t0={net.t0:g}")
                )

    cycle = _cycle_nodes(net)
    if cycle:
        out.append(Violation("cycle", f"parent relation is cyclic through {sorted(cycle)}"))
    return out


def _cycle_nodes(net: Network) -> set[str]:
    indeg = {n: 0 for n in net.nodes}
    children: dict[str, list[str]] = {n: [] for n in net.nodes}
    for name, spec in net.nodes.items():
        for p in set(spec.parents):
            if p in net.nodes:
                indeg[name] += 1
                children[p].append(name)
    ready = deque(n for n, d in indeg.items() if d == 0)
    seen = 0
    while ready:
        n = ready.popleft()
        seen += 1
        for c in children[n]:
            indeg[c] -= 1
            if indeg[c] == 0:
                ready.append(c)
    return set() if seen == len(net.nodes) else {n for n, d in indeg.items() if d > 0}


def check_assignment(net: Network, assignment: Assignment) -> None:
    """Raise unless every named node exists and every label is one of its states."""
    for name, label in assignment.items():
        spec = net.spec(name)
        if label not in spec.states:
            raise UnknownStateError(
                f"node {name!r} has no state {label!r}; states are {list(spec.states)}"
            )


def check_query(net: Network, query: Query) -> None:
    check_assignment(net, query.objective)
    check_assignment(net, query.evidence)


# ---------------------------------------------------------------------------
# document parsing and serialization


def _reject_constant(token: str):
    raise NetworkFormatError(f"non-finite literal {token!r} is not allowed in network documents")


def load_network(text: str) -> Network:
    """Parse and validate a network document.

    Raises :class:`NetworkFormatError` on malformed syntax and
    :class:`InvalidNetworkError` (carrying the full report) when the
    parsed network breaks an invariant.
    """
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise NetworkFormatError(f"not valid JSON: {exc}") from None
    net = network_from_document(doc)
    report = validate(net)
    if report:
        raise InvalidNetworkError(report)
    return net


def network_from_document(doc) -> Network:
    """Build a :class:`Network` from a decoded document without validating it."""
    if not isinstance(doc, dict):
        raise NetworkFormatError("top level must be a JSON object")
    for key in ("t0", "open_past", "nodes"):
        if key not in doc:
            raise NetworkFormatError(f"missing top-level key {key!r}")
    raw_t0 = doc["t0"]
    if raw_t0 == "-inf":
        t0 = float("-inf")
    elif isinstance(raw_t0, (int, float)) and not isinstance(raw_t0, bool):
        t0 = float(raw_t0)
        if math.isnan(t0):
            raise NetworkFormatError("t0 may not be NaN")
    else:
        raise NetworkFormatError(f"t0 must be a number or \"-inf\", got {raw_t0!r}")
    open_past = doc["open_past"]
    if not isinstance(open_past, bool):
        raise NetworkFormatError("open_past must be true or false")
    if not isinstance(doc["nodes"], list):
        raise NetworkFormatError("nodes must be a list")

    nodes: dict[str, NodeSpec] = {}
    for i, raw in enumerate(doc["nodes"]):
        spec = _node_from_document(raw, i)
        if spec.name in nodes:
            raise NetworkFormatError(f"duplicate node name {spec.name!r}")
        nodes[spec.name] = spec
    return Network(t0=t0, open_past=open_past, nodes=nodes)


def _node_from_document(raw, index: int) -> NodeSpec:
    if not isinstance(raw, dict):
        raise NetworkFormatError(f"node #{index} must be an object")
    try:
        name = raw["name"]
        states = raw["states"]
        parents = raw["parents"]
        cpt = raw["cpt"]
        pl = raw["pl"]
    except KeyError as exc:
        raise NetworkFormatError(f"node #{index} is missing key {exc.args[0]!r}") from None
    if not isinstance(name, str):
        raise NetworkFormatError(f"node #{index} name must be a string")
    if not (isinstance(states, list) and all(isinstance(s, str) for s in states)):
        raise NetworkFormatError(f"node {name!r}: states must be a list of strings")
    if not (isinstance(parents, list) and all(isinstance(p, str) for p in parents)):
        raise NetworkFormatError(f"node {name!r}: parents must be a list of strings")
    if not isinstance(pl, (int, float)) or isinstance(pl, bool) or not math.isfinite(float(pl)):
        raise NetworkFormatError(f"node {name!r}: pl must be a finite number, got {pl!r}")
    parsed_cpt: tuple[tuple[float, ...], ...] | None
    if cpt is None:
        parsed_cpt = None
    else:
        if not isinstance(cpt, list):
            raise NetworkFormatError(f"node {name!r}: cpt must be a list of rows or null")
        rows = []
        for r, row in enumerate(cpt):
            if not isinstance(row, list):
                raise NetworkFormatError(f"node {name!r}: cpt row {r} must be a list")
            for p in row:
                if not isinstance(p, (int, float)) or isinstance(p, bool) or math.isnan(p):
                    raise NetworkFormatError(f"node {name!r}: cpt row {r} holds a non-number")
            rows.append(tuple(float(p) for p in row))
        parsed_cpt = tuple(rows)
    return NodeSpec(
        name=name,
        states=tuple(states),
        parents=tuple(parents),
        cpt=parsed_cpt,
        pl=float(pl),
    )


def network_to_document(net: Network) -> dict:
    return {
        "t0": "-inf" if math.isinf(net.t0) else net.t0,
        "open_past": net.open_past,
        "nodes": [
            {
                "name": s.name,
                "states": list(s.states),
                "pl": s.pl,
                "parents": list(s.parents),
                "cpt": None if s.cpt is None else [list(row) for row in s.cpt],
            }
            for s in net.nodes.values()
        ],
    }


def serialize(net: Network) -> str:
    """Inverse of :func:`load_network`; round-trips every field exactly."""
    return json.dumps(network_to_document(net), allow_nan=False)


# ---------------------------------------------------------------------------
# lazy expansion


def materialize(
    lazy: LazyNetwork,
    seeds: Iterable[str],
    floor: float,
    *,
    max_nodes: int = DEFAULT_EXPANSION_CAP,
) -> Network:
    """Expand the finite fragment of ``lazy`` rooted at ``seeds``.

    Every seed is resolved; parents are then chased transitively, except
    that a node whose pl lies below ``floor`` is kept as reached but not
    expanded further. A non-root cut off this way becomes a truncation
    stub (parents and CPT dropped); a genuine root keeps its prior. The
    fragment is returned as an open-past network.

    Lowering ``floor`` only ever grows the fragment, and identical inputs
    produce identical fragments. ``max_nodes`` guards against unbounded
    expansion (e.g. ``floor=-inf`` on a model with an infinite past).
    """
    resolved: dict[str, NodeSpec] = {}
    queue = deque(sorted(set(seeds)))
    while queue:
        name = queue.popleft()
        if name in resolved:
            continue
        spec = lazy.resolve(name)
        if spec.pl < floor and spec.parents:
            spec = replace(spec, parents=(), cpt=None)
        resolved[name] = spec
        if len(resolved) > max_nodes:
            raise ExpansionCapError(
                f"expansion exceeded {max_nodes} nodes above floor {floor:g}; "
                "raise the floor or the cap"
            )
        for p in spec.parents:
            if p not in resolved:
                queue.append(p)
    net = Network(t0=lazy.t0, open_past=True, nodes=resolved)
    report = validate(net)
    if report:
        raise InvalidNetworkError(report)
    return net


def as_lazy(net: Network) -> LazyNetwork:
    """Wrap a finite network behind the resolver interface."""
    return LazyNetwork(resolver=net.spec, t0=net.t0, open_past=net.open_past)
