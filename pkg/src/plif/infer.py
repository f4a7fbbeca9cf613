"""Probability computation: exact enumeration, frontier-conditional
inference on retrieved submodels, certified bounds, and anytime sweeps.

Two routes are deliberately kept independent:

* :func:`exact_query` materializes the full joint table over the
  ancestral closure and sums it. Slow, simple, and the reference that
  everything else is tested against.
* :func:`frontier_conditional` and :func:`bounds_at` run factor
  elimination over the retrieved submodel with the frontier clamped,
  touching nothing outside it.

Bounds come from scanning the unobserved frontier: for every joint clamp
of those stubs the submodel yields one conditional value, and the true
query is a convex combination of them, so their min and max bracket it.
Clamps whose normalizer is zero inside the submodel carry no weight in
that combination and are excluded from the scan.
"""

from __future__ import annotations

import enum
import heapq
import math
from dataclasses import dataclass
from typing import Iterator, Mapping, Sequence

import numpy as np

from .errors import (
    ExpansionCapError,
    OpenPastError,
    PlifError,
    QueryError,
    ThresholdError,
    ZeroEvidenceError,
    FrontierTooWideError,
)
from .model import (
    DEFAULT_EXPANSION_CAP,
    Assignment,
    LazyNetwork,
    Network,
    NodeSpec,
    Query,
    check_query,
)
from .retrieval import (
    NetworkLike,
    RootSetResult,
    Submodel,
    Threshold,
    _spec_of,
    ancestors,
    root_set,
)

DEFAULT_MAX_CLAMPS = 2**16
MAX_JOINT_CELLS = 50_000_000
PROB_TOL = 1e-9


class Exactness(enum.Enum):
    """Why (or whether) a bounds result is known to equal the exact answer."""

    NOT_EXACT = "not_exact"
    FRONTIER_SUBSET_OF_EVIDENCE = "frontier_subset_of_evidence"
    FULL_PAST = "full_past"
    COINCIDENCE = "coincidence"

    @property
    def is_exact(self) -> bool:
        return self is not Exactness.NOT_EXACT


@dataclass(frozen=True)
class QueryBounds:
    """A certified bracket on the query at one threshold."""

    threshold: Threshold
    lower: float
    upper: float
    exactness: Exactness
    frontier_size: int
    interior_size: int


@dataclass(frozen=True)
class Schedule:
    """Strictly decreasing thresholds to sweep, shallowest first."""

    thresholds: tuple[Threshold, ...]

    def __post_init__(self):
        if not self.thresholds:
            raise QueryError("a schedule needs at least one threshold")
        vs = [t.v for t in self.thresholds]
        if any(b >= a for a, b in zip(vs, vs[1:])):
            raise QueryError(f"schedule thresholds must strictly decrease, got {vs}")

    def __iter__(self) -> Iterator[Threshold]:
        return iter(self.thresholds)

    def __len__(self) -> int:
        return len(self.thresholds)


# ---------------------------------------------------------------------------
# factor algebra (internal)

_Axes = tuple[str, ...]
_Factor = tuple[_Axes, np.ndarray]


def _cpt_factor(spec: NodeSpec, sizes: Mapping[str, int]) -> _Factor:
    axes = (*spec.parents, spec.name)
    shape = tuple(sizes[a] for a in axes)
    return axes, np.asarray(spec.cpt, dtype=float).reshape(shape)


def _reduce(factor: _Factor, clamps: Mapping[str, int]) -> _Factor:
    axes, table = factor
    if not any(a in clamps for a in axes):
        return factor
    idx = tuple(clamps[a] if a in clamps else slice(None) for a in axes)
    return tuple(a for a in axes if a not in clamps), table[idx]


def _align(axes: _Axes, table: np.ndarray, out_axes: _Axes) -> np.ndarray:
    order = sorted(range(len(axes)), key=lambda i: out_axes.index(axes[i]))
    t = np.transpose(table, order)
    present = [axes[i] for i in order]
    shape, k = [], 0
    for a in out_axes:
        if k < len(present) and present[k] == a:
            shape.append(t.shape[k])
            k += 1
        else:
            shape.append(1)
    return t.reshape(shape)


def _product(factors: Sequence[_Factor], out_axes: _Axes, sizes: Mapping[str, int]) -> np.ndarray:
    out = np.ones(tuple(sizes[a] for a in out_axes))
    for axes, table in factors:
        out = out * _align(axes, table, out_axes)
    return out


def _eliminate(factors: list[_Factor], hidden: Sequence[str], sizes: Mapping[str, int]) -> list[_Factor]:
    for h in hidden:
        group = [f for f in factors if h in f[0]]
        if not group:
            continue
        union: _Axes = tuple(dict.fromkeys(a for f in group for a in f[0]))
        summed = _product(group, union, sizes).sum(axis=union.index(h))
        factors = [f for f in factors if h not in f[0]]
        factors.append((tuple(a for a in union if a != h), summed))
    return factors


def _topo_order(specs: Mapping[str, NodeSpec]) -> list[str]:
    """Deterministic topological order over the given nodes (external
    parents, e.g. frontier stubs, are ignored)."""
    indeg = {n: 0 for n in specs}
    kids: dict[str, list[str]] = {n: [] for n in specs}
    for name, spec in specs.items():
        for p in set(spec.parents):
            if p in specs:
                indeg[name] += 1
                kids[p].append(name)
    heap = [n for n, d in indeg.items() if d == 0]
    heapq.heapify(heap)
    out: list[str] = []
    while heap:
        n = heapq.heappop(heap)
        out.append(n)
        for c in sorted(kids[n]):
            indeg[c] -= 1
            if indeg[c] == 0:
                heapq.heappush(heap, c)
    return out


def _submodel_sizes(sub: Submodel) -> dict[str, int]:
    sizes = {n: len(s.states) for n, s in sub.interior.items()}
    sizes.update({n: len(f.states) for n, f in sub.frontier.items()})
    return sizes


def _state_index(sub: Submodel, name: str, label: str) -> int:
    states = sub.states_of(name)
    try:
        return states.index(label)
    except ValueError:
        raise QueryError(f"node {name!r} has no state {label!r}") from None


def _contract_scalar(
    sub: Submodel, clamps: Mapping[str, int], sizes: Mapping[str, int]
) -> float:
    factors = [_reduce(_cpt_factor(s, sizes), clamps) for s in sub.interior.values()]
    hidden = [n for n in reversed(_topo_order(sub.interior)) if n not in clamps]
    factors = _eliminate(factors, hidden, sizes)
    return float(_product(factors, (), sizes))


# ---------------------------------------------------------------------------
# operations


def cpl(net: NetworkLike, query: Query) -> tuple[str, float]:
    """The objective node furthest into the past and its potential level.

    Ties break lexicographically on the node name.
    """
    pl_star, o_star = min((_spec_of(net, n).pl, n) for n in query.objective)
    return o_star, pl_star


def exact_query(net: Network, query: Query, *, max_cells: int = MAX_JOINT_CELLS) -> float:
    """P(objective | evidence) by direct summation of the factored joint
    over the ancestral closure of the query variables.

    Needs a closed past: every root must carry its prior.
    """
    if not isinstance(net, Network):
        raise QueryError("exact_query needs a finite Network; materialize lazy models first")
    if net.open_past:
        raise OpenPastError("exact inference needs a closed past; truncated roots have no priors")
    check_query(net, query)

    closure = tuple(sorted(query.names | ancestors(net, query.names)))
    sizes = {n: len(net.spec(n).states) for n in closure}
    cells = math.prod(sizes.values())
    if cells > max_cells:
        raise PlifError(f"ancestral closure needs a {cells}-cell joint table; refusing")

    joint = np.ones(tuple(sizes[n] for n in closure))
    for n in closure:
        axes, table = _cpt_factor(net.spec(n), sizes)
        joint = joint * _align(axes, table, closure)

    def mass(assignment: Assignment) -> float:
        idx = tuple(
            net.spec(n).states.index(assignment[n]) if n in assignment else slice(None)
            for n in closure
        )
        return float(joint[idx].sum())

    p_evidence = mass(query.evidence)
    if p_evidence == 0.0:
        raise ZeroEvidenceError(f"evidence {dict(query.evidence)!r} has probability zero")
    return mass({**query.evidence, **query.objective}) / p_evidence


def frontier_conditional(
    sub: Submodel,
    objective: Assignment,
    frontier_values: Assignment,
    evidence_plus: Assignment | None = None,
) -> float:
    """P(objective | frontier clamp, elevated evidence) inside the submodel.

    Every frontier stub must be clamped; objective and evidence nodes
    must be interior. Only the submodel's own CPTs are consulted.
    """
    evidence_plus = dict(evidence_plus or {})
    missing = set(sub.frontier) - set(frontier_values)
    if missing:
        raise QueryError(f"frontier nodes {sorted(missing)} are unassigned")
    stray = set(frontier_values) - set(sub.frontier)
    if stray:
        raise QueryError(f"{sorted(stray)} are not frontier nodes of this submodel")
    for name in list(objective) + list(evidence_plus):
        if name not in sub.interior:
            raise QueryError(f"node {name!r} is not interior to the submodel")

    sizes = _submodel_sizes(sub)
    base = {n: _state_index(sub, n, v) for n, v in frontier_values.items()}
    base.update({n: _state_index(sub, n, v) for n, v in evidence_plus.items()})
    num_clamps = dict(base)
    num_clamps.update({n: _state_index(sub, n, v) for n, v in objective.items()})

    denominator = _contract_scalar(sub, base, sizes)
    if denominator == 0.0:
        raise ZeroEvidenceError(
            "zero normalizer: this frontier clamp is inconsistent with the elevated evidence"
        )
    return _contract_scalar(sub, num_clamps, sizes) / denominator


def frontier_clamp_table(
    rs: RootSetResult, query: Query
) -> tuple[tuple[str, ...], np.ndarray, np.ndarray]:
    """Conditional numerators/denominators for every clamp of the
    unobserved frontier, in one contraction.

    Returns ``(scan_nodes, num, den)``: arrays indexed by the state of
    each unobserved frontier node (sorted by name, odometer order), where
    ``num/den`` at a clamp equals :func:`frontier_conditional` there.
    """
    sub = rs.submodel
    sizes = _submodel_sizes(sub)
    scan = tuple(sorted(rs.frontier - rs.evidence_in_frontier))

    base = {e: _state_index(sub, e, query.evidence[e]) for e in rs.evidence_in_frontier}
    base.update({e: _state_index(sub, e, query.evidence[e]) for e in rs.evidence_plus})
    num_clamps = dict(base)
    num_clamps.update({n: _state_index(sub, n, v) for n, v in query.objective.items()})

    def table(clamps: Mapping[str, int]) -> np.ndarray:
        factors = [_reduce(_cpt_factor(s, sizes), clamps) for s in sub.interior.values()]
        hidden = [
            n for n in reversed(_topo_order(sub.interior)) if n not in clamps and n not in scan
        ]
        factors = _eliminate(factors, hidden, sizes)
        return _product(factors, scan, sizes)

    return scan, table(num_clamps), table(base)


def exactness_status(
    rs: RootSetResult, threshold: Threshold, t0: float, lower: float, upper: float
) -> Exactness:
    """Classify a retrieval per the first matching exactness condition.

    In order: (1) the frontier lies entirely inside the evidence, so no
    clamp is free; (2) every frontier node sits at the time origin and no
    evidence was left below the threshold, so the retrieved past is
    complete; (3) the bounds coincide anyway. Under inclusive thresholds
    condition (2)'s evidence clause is exactly "evidence_minus is empty".
    """
    if rs.frontier == rs.evidence_in_frontier:
        return Exactness.FRONTIER_SUBSET_OF_EVIDENCE
    if not rs.evidence_minus and all(f.pl == t0 for f in rs.submodel.frontier.values()):
        return Exactness.FULL_PAST
    if abs(upper - lower) < PROB_TOL:
        return Exactness.COINCIDENCE
    return Exactness.NOT_EXACT


def _exact_from_retrieval(net: NetworkLike, rs: RootSetResult, query: Query) -> float | None:
    """Exact value when the retrieval closed the past: interior CPTs plus
    the frontier roots' own priors. None when a frontier prior is missing
    (truncated fragment), in which case exactness cannot be certified."""
    sub = rs.submodel
    frontier_specs = []
    for name in sorted(rs.frontier):
        spec = _spec_of(net, name)
        if spec.parents or spec.cpt is None:
            return None
        frontier_specs.append(spec)

    sizes = _submodel_sizes(sub)
    clamps = {n: _state_index(sub, n, v) for n, v in query.evidence.items()}
    num_clamps = dict(clamps)
    num_clamps.update({n: _state_index(sub, n, v) for n, v in query.objective.items()})

    specs = dict(sub.interior)
    specs.update({s.name: s for s in frontier_specs})

    def scalar(cl: Mapping[str, int]) -> float:
        factors = [_reduce(_cpt_factor(s, sizes), cl) for s in specs.values()]
        hidden = [n for n in reversed(_topo_order(specs)) if n not in cl]
        return float(_product(_eliminate(factors, hidden, sizes), (), sizes))

    denominator = scalar(clamps)
    if denominator == 0.0:
        raise ZeroEvidenceError(f"evidence {dict(query.evidence)!r} has probability zero")
    return scalar(num_clamps) / denominator


def bounds_at(
    net: NetworkLike,
    query: Query,
    threshold: Threshold,
    *,
    max_clamps: int | None = None,
    max_nodes: int = DEFAULT_EXPANSION_CAP,
) -> QueryBounds:
    """Certified bounds on the query from the submodel retrieved at
    ``threshold``.

    The threshold must not exceed the critical potential level (the
    earliest objective node); the full-past sentinel additionally needs a
    closed past. Frontier clamps with a zero normalizer are skipped; if
    all of them are, the evidence is unreachable and an error is raised.
    """
    o_star, pl_star = cpl(net, query)
    if threshold.v > pl_star:
        raise ThresholdError(threshold.v, pl_star, o_star)
    if threshold.is_full_past and net.open_past:
        raise OpenPastError("the full-past threshold needs a closed past (roots with priors)")

    rs = root_set(net, query, threshold, max_nodes=max_nodes)
    cap = DEFAULT_MAX_CLAMPS if max_clamps is None else max_clamps
    width = math.prod(
        len(rs.submodel.frontier[n].states)
        for n in rs.frontier - rs.evidence_in_frontier
    )
    if width > cap:
        raise FrontierTooWideError(width, cap)
    scan, num, den = frontier_clamp_table(rs, query)

    valid = den > 0.0
    if not valid.any():
        raise ZeroEvidenceError("every frontier clamp has a zero normalizer")
    # num <= den holds exactly in real arithmetic; the clip only absorbs
    # last-ulp drift between the two contractions
    ratios = np.clip(num[valid] / den[valid], 0.0, 1.0)
    lower = float(ratios.min())
    upper = float(ratios.max())

    if threshold.is_full_past:
        status = Exactness.FULL_PAST
    else:
        status = exactness_status(rs, threshold, net.t0, lower, upper)
        if status is Exactness.FULL_PAST:
            exact = _exact_from_retrieval(net, rs, query)
            if exact is None:
                status = Exactness.NOT_EXACT
            else:
                lower = upper = exact
    return QueryBounds(
        threshold=threshold,
        lower=lower,
        upper=upper,
        exactness=status,
        frontier_size=len(rs.frontier),
        interior_size=len(rs.interior),
    )


def default_schedule(
    net: NetworkLike,
    query: Query,
    *,
    max_steps: int | None = None,
    max_nodes: int = DEFAULT_EXPANSION_CAP,
) -> Schedule:
    """Thresholds at every distinct ancestor potential level, starting at
    the critical potential level and ending with the full-past sentinel
    when the network's past is closed.

    Unbounded (lazy, open-past) models have infinitely many ancestor
    levels, so ``max_steps`` is required there and caps the list length.
    """
    o_star, pl_star = cpl(net, query)
    closed = not net.open_past

    if isinstance(net, LazyNetwork):
        values = _lazy_schedule_values(net, query, pl_star, max_steps, max_nodes)
    else:
        pool = {net.spec(a).pl for a in ancestors(net, query.names)}
        pool.add(pl_star)
        values = sorted((p for p in pool if p <= pl_star), reverse=True)

    if closed:
        values = [v for v in values if v > net.t0]
    else:
        # never schedule below a truncation stub: it would surface as a
        # CPD-less interior node
        stub_pls = (
            [s.pl for s in net.nodes.values() if s.is_stub] if isinstance(net, Network) else []
        )
        limit = max(stub_pls) if stub_pls else net.t0
        values = [v for v in values if v > limit]
    if max_steps is not None:
        values = values[:max_steps]

    thresholds = [Threshold(v) for v in values]
    if closed and (max_steps is None or len(thresholds) < max_steps):
        thresholds.append(Threshold.full_past())
    if not thresholds:
        raise QueryError("no usable thresholds: the objective sits at or below the retrieval limit")
    return Schedule(tuple(thresholds))


def _lazy_schedule_values(
    net: LazyNetwork, query: Query, pl_star: float, max_steps: int | None, max_nodes: int
) -> list[float]:
    if max_steps is None and net.open_past:
        raise QueryError("an unbounded model needs max_steps to bound the schedule")
    values = [pl_star]
    heap: list[tuple[float, str]] = []
    seen = set(query.names)
    for name in sorted(query.names):
        for p in net.resolve(name).parents:
            if p not in seen:
                seen.add(p)
                heapq.heappush(heap, (-net.resolve(p).pl, p))
    expanded = 0
    while heap and (max_steps is None or len(values) < max_steps):
        neg_pl, name = heapq.heappop(heap)
        pl = -neg_pl
        expanded += 1
        if expanded > max_nodes:
            raise ExpansionCapError(f"schedule expansion exceeded {max_nodes} nodes")
        # the heap streams ancestors in nonincreasing pl order, so a
        # strict-decrease check is all dedup needs
        if pl <= pl_star and pl < values[-1]:
            values.append(pl)
        for p in net.resolve(name).parents:
            if p not in seen:
                seen.add(p)
                heapq.heappush(heap, (-net.resolve(p).pl, p))
    return values


def anytime_sweep(
    net: NetworkLike,
    query: Query,
    schedule: Schedule,
    *,
    stop_on_exact: bool = True,
    max_clamps: int | None = None,
    max_nodes: int = DEFAULT_EXPANSION_CAP,
) -> list[QueryBounds]:
    """Bounds at each scheduled threshold, shallowest first.

    Deeper thresholds revisit a superset of the shallower retrieval; on
    lazy models the resolver cache makes that reuse incremental. With
    ``stop_on_exact`` (the default) the sweep ends as soon as a result is
    certified exact, since nothing deeper can move it.
    """
    out: list[QueryBounds] = []
    for th in schedule:
        qb = bounds_at(net, query, th, max_clamps=max_clamps, max_nodes=max_nodes)
        out.append(qb)
        if stop_on_exact and qb.exactness.is_exact:
            break
    return out


def map_decision(
    net: NetworkLike,
    query: Query,
    schedule: Schedule,
    *,
    max_clamps: int | None = None,
) -> tuple[str, Threshold] | None:
    """Sweep until the most likely state of a binary objective is settled.

    Returns the winning state label and the first threshold that decided
    it, or None when the schedule runs out (or the answer is certified
    exact) without separating the two states.
    """
    if len(query.objective) != 1:
        raise QueryError("map_decision needs exactly one objective node")
    ((name, label),) = query.objective.items()
    states = _spec_of(net, name).states
    if len(states) != 2:
        raise QueryError(f"map_decision needs a binary objective; {name!r} has {len(states)} states")
    other = states[0] if states[1] == label else states[1]

    for th in schedule:
        qb = bounds_at(net, query, th, max_clamps=max_clamps)
        # separation must clear the probability tolerance, so an exact
        # tie at 0.5 never decides on float noise
        if qb.lower > 0.5 + PROB_TOL:
            return label, th
        if qb.upper < 0.5 - PROB_TOL:
            return other, th
        if qb.exactness.is_exact:
            return None
    return None
