"""Evaluation of bonded diagrams in the framed and topological skein modules.

Pipeline for :func:`evaluate_framed`:

1. fold even framing markers into units ``(-A^{±3})``;
2. slide every strand off every bond through a bond vertex (an isotopy), so that
   only chain strands cross;
3. state sum over the chain crossings, merging equal partial connectivity states;
4. each crossingless state is split into components and every component is reduced
   bond by bond with ``[D] = alpha [g0 D] + beta [ginf D]``, memoized on a canonical
   code of the component.
"""

from __future__ import annotations

import random
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from ._graph import Graph
from .diagram import (
    BOND,
    CHAIN,
    BondedDiagram,
    DiagramError,
    ValidationError,
    validate,
    writhe,
)
from .laurent import (
    DELTA,
    F1,
    F2,
    BivariateLaurent,
    Coefficient,
    IntLaurent,
    SkeinValue,
    constants,
    exact_div,
    subst_topological,
)
from .moves import _slide

__all__ = [
    "EvaluationOptions",
    "EvaluationResult",
    "EngineError",
    "FramingError",
    "smooth_crossing",
    "fold_markers",
    "delete_free_circles",
    "g0_remove",
    "ginf_remove",
    "extract_bond",
    "connected_sum_shortcut",
    "clear_bond_crossings",
    "evaluate",
    "evaluate_framed",
    "evaluate_topological",
    "normalized_value",
    "reduced_polynomial",
    "classical_bracket",
]

A = IntLaurent.monomial(1)
A_INV = IntLaurent.monomial(-1)
_, _, ALPHA, BETA = constants()
THETA = SkeinValue.theta()
HANDCUFF = SkeinValue.handcuff()
INV_DELTA = Coefficient(1) / Coefficient.from_poly(DELTA)
THETA_OVER_DELTA = THETA.scale(INV_DELTA)
HANDCUFF_OVER_DELTA = HANDCUFF.scale(INV_DELTA)


class EngineError(DiagramError):
    """Internal-consistency failure or unsupported input in the evaluator."""


class FramingError(EngineError):
    pass


@dataclass(frozen=True)
class EvaluationOptions:
    mode: str = "framed"
    use_connected_sum_shortcut: bool = True
    memoize: bool = True
    parallel: bool = False
    order_seed: int | None = None
    workers: int = 4

    def __post_init__(self):
        if self.mode not in ("framed", "topological"):
            raise ValueError(f"mode must be 'framed' or 'topological', not {self.mode!r}")


@dataclass(frozen=True)
class EvaluationResult:
    value: SkeinValue
    writhe: int
    bond_count: int
    stats: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# port view of a diagram (used by the diagram-level operations)


class _Ports:
    """Diagram as a perfect matching of node slots, for local surgery and rebuild."""

    def __init__(self, d: BondedDiagram):
        self.deg = {n: len(refs) for n, refs in d.node_map.items()}
        self.partner: dict[tuple, tuple] = {}
        self.info: dict[tuple, tuple] = {}  # port -> (edge id, kind, twists, is_tail)
        for e in d.edges:
            tail, head = d.ends[e.id]
            if tail is None:
                continue
            self.partner[tail], self.partner[head] = head, tail
            self.info[tail] = (e.id, e.kind, e.half_twists, True)
            self.info[head] = (e.id, e.kind, e.half_twists, False)
        self.loops = [(e.id, e.half_twists) for e in d.free_loops()]
        self.bond_tails = {b.tail for b in d.bonds}

    def fuse(self, p: tuple, q: tuple) -> None:
        """Remove ports ``p`` and ``q`` and join the arcs that ended there."""
        a, b = self.partner.pop(p), self.partner.pop(q)
        (ea, ka, ta, _), (eb, kb, tb, _) = self.info.pop(p), self.info.pop(q)
        if ka != kb:
            raise EngineError(f"cannot join a {ka} arc with a {kb} arc")
        if a == q:
            self.loops.append((min(ea, eb), ta))
            self.info.pop(a, None)
            return
        self.partner[a], self.partner[b] = b, a
        eid, tw = min(ea, eb), ta + tb
        self.info[a] = (eid, ka, tw, self.info[a][3])
        self.info[b] = (eid, ka, tw, self.info[b][3])

    def drop_arc(self, p: tuple) -> None:
        q = self.partner.pop(p)
        del self.partner[q]
        self.info.pop(p)
        self.info.pop(q)

    def drop_node(self, n: int) -> None:
        if any((n, s) in self.partner for s in range(self.deg[n])):
            raise EngineError(f"node {n} still has arcs")
        del self.deg[n]

    def _through(self, n: int, s: int):
        if self.deg[n] == 4:
            return n, (s + 2) % 4
        if s == 0:
            return None
        return n, 3 - s

    def to_diagram(self) -> BondedDiagram:
        g = Graph()
        g.nodes = {n: [None] * k for n, k in self.deg.items()}
        g.under = {n: 0 for n, k in self.deg.items() if k == 4}
        g._next_node = max(self.deg, default=-1) + 1
        g._next_edge = 0
        seen: set = set()
        starts = [(n, 0) for n in sorted(self.bond_tails) if (n, 0) in self.partner]
        starts += sorted(p for p in self.partner if self.info[p][3])
        starts += sorted(self.partner)
        used_ids: set[int] = set()
        pending = []
        for st in starts:
            if st in seen:
                continue
            cur = st
            while cur is not None and cur not in seen:
                q = self.partner[cur]
                seen.add(cur)
                seen.add(q)
                eid, kind, tw, _ = self.info[cur]
                pending.append((eid, kind, tw, cur, q))
                cur = self._through(*q)
        for eid, tw in self.loops:
            pending.append((eid, CHAIN, tw, None, None))
        for eid, kind, tw, tail, head in sorted(pending, key=lambda t: t[0]):
            if eid in used_ids:
                eid = max(max(used_ids) + 1, max(p[0] for p in pending) + 1)
            used_ids.add(eid)
            g.edges[eid] = {"kind": kind, "tw": tw, "tail": None, "head": None}
            if tail is not None:
                g._put(eid, False, tail)
                g._put(eid, True, head)
        return g.to_diagram()


def _bond_path(d: BondedDiagram, tail: int) -> list[tuple[int, int]]:
    """Crossing ports ``(x, slot)`` where the bond leaving ``tail`` enters crossings."""
    out = []
    end = d.other_end(tail, 0)
    while end is not None and d.is_crossing(end[0]):
        out.append(end)
        end = d.other_end(end[0], (end[1] + 2) % 4)
    return out


def _find_bond(d: BondedDiagram, b: int):
    for bond in d.bonds:
        if bond.id == b:
            return bond
    raise EngineError(f"{b} is not a bond of the diagram")


def _require(d: BondedDiagram) -> None:
    bad = validate(d)
    if bad:
        raise ValidationError(bad)


# ---------------------------------------------------------------------------
# diagram-level operations


def smooth_crossing(d: BondedDiagram, c: int) -> tuple[BondedDiagram, BondedDiagram]:
    """A- and A^-1-smoothings of chain crossing ``c``.

    Bond strands are rigid; crossings involving a bond are cleared by sliding the
    strand over a bond vertex (:func:`clear_bond_crossings`) rather than smoothed.
    """
    if c not in d.node_map or not d.is_crossing(c):
        raise EngineError(f"{c} is not a crossing")
    kinds = {d.edge_map[r.edge].kind for r in d.node_map[c]}
    if BOND in kinds:
        raise EngineError(f"crossing {c} involves a bond; slide it off instead of smoothing")
    out = []
    for pairs in (((0, 1), (2, 3)), ((1, 2), (3, 0))):
        p = _Ports(d)
        for s, t in pairs:
            p.fuse((c, s), (c, t))
        p.drop_node(c)
        out.append(p.to_diagram())
    return out[0], out[1]


def fold_markers(d: BondedDiagram) -> tuple[BondedDiagram, Coefficient]:
    """Clear even half-twist counts into units; an odd count is an error."""
    unit = IntLaurent.const(1)
    edges = []
    for e in d.edges:
        t = e.half_twists
        if t % 2:
            raise FramingError(f"non-blackboard framing unsupported (edge {e.id} has {t} half twists)")
        if t:
            unit = unit * IntLaurent.monomial(3 * t // 2, -1 if (t // 2) % 2 else 1)
            e = type(e)(e.id, e.kind, 0)
        edges.append(e)
    return BondedDiagram(tuple(edges), d.crossings, d.bond_vertices), Coefficient.from_poly(unit)


def delete_free_circles(d: BondedDiagram) -> tuple[BondedDiagram, int]:
    if d.crossings:
        raise EngineError("delete_free_circles expects a crossingless diagram")
    loops = {e.id for e in d.free_loops()}
    rest = tuple(e for e in d.edges if e.id not in loops)
    return BondedDiagram(rest, d.crossings, d.bond_vertices), len(loops)


def g0_remove(d: BondedDiagram, b: int) -> BondedDiagram:
    """Delete bond ``b``; the chain at each end vertex closes up along itself."""
    bond = _find_bond(d, b)
    path = _bond_path(d, bond.tail)
    p = _Ports(d)
    on_bond = {x for x, _ in path}
    self_cross = {x for x in on_bond if sum(1 for y, _ in path if y == x) == 2}
    for x, j in path:
        if (x, j) in p.partner:
            p.drop_arc((x, j))
    if (bond.tail, 0) in p.partner:
        p.drop_arc((bond.tail, 0))
    for x in on_bond:
        if x not in self_cross:
            j = next(s for y, s in path if y == x)
            if (x, (j + 2) % 4) in p.partner:
                p.drop_arc((x, (j + 2) % 4))
            p.fuse((x, (j + 1) % 4), (x, (j + 3) % 4))
        else:
            for s in range(4):
                if (x, s) in p.partner:
                    p.drop_arc((x, s))
        p.drop_node(x)
    for v in (bond.tail, bond.head):
        p.fuse((v, 1), (v, 2))
        p.drop_node(v)
    p.bond_tails.discard(bond.tail)
    return p.to_diagram()


def ginf_remove(d: BondedDiagram, b: int) -> BondedDiagram:
    """Contract bond ``b``; the strands at its two ends are rejoined across it."""
    bond = _find_bond(d, b)
    if len(bond.segments) != 1:
        raise EngineError(f"bond {b} is crossed; clear its crossings before contracting")
    v, w = bond.tail, bond.head
    p = _Ports(d)
    p.drop_arc((v, 0))
    p.fuse((v, 1), (w, 2))
    p.fuse((v, 2), (w, 1))
    p.drop_node(v)
    p.drop_node(w)
    p.bond_tails.discard(v)
    return p.to_diagram()


def extract_bond(d: BondedDiagram, b: int):
    """``(alpha, g0_remove(d, b), beta, ginf_remove(d, b))`` for a crossingless ``d``."""
    if d.crossings:
        raise EngineError("bond extraction is only applied to crossingless diagrams")
    return ALPHA, g0_remove(d, b), BETA, ginf_remove(d, b)


def connected_sum_shortcut(d: BondedDiagram):
    """Split off a theta or handcuff summand: ``(factor, remainder)`` or ``None``."""
    if d.crossings:
        raise EngineError("the connected-sum shortcut expects a crossingless diagram")
    for bond in d.bonds:
        v, w = bond.tail, bond.head
        for a, b_ in ((v, w), (w, v)):
            for i in (1, 2):
                q = d.other_end(a, i)
                if q[0] != b_ or q[1] == 0:
                    continue
                i2, j2 = 3 - i, 3 - q[1]
                if d.other_end(a, i2) == (b_, j2):
                    continue
                p = _Ports(d)
                p.drop_arc((v, 0))
                p.drop_arc((a, i))
                p.fuse((a, i2), (b_, j2))
                p.drop_node(v)
                p.drop_node(w)
                p.bond_tails.discard(v)
                return THETA_OVER_DELTA, p.to_diagram()
            if d.other_end(b_, 1) == (b_, 2) and d.other_end(a, 1) != (a, 2):
                p = _Ports(d)
                p.drop_arc((v, 0))
                p.drop_arc((b_, 1))
                p.fuse((a, 1), (a, 2))
                p.drop_node(v)
                p.drop_node(w)
                p.bond_tails.discard(v)
                return HANDCUFF_OVER_DELTA, p.to_diagram()
    return None


def clear_bond_crossings(d: BondedDiagram, max_steps: int = 10000) -> tuple[BondedDiagram, int]:
    """Slide strands off bonds through bond vertices until no bond is crossed."""
    g = Graph.from_diagram(d)
    steps = 0
    while True:
        moved = False
        for v in sorted(g.nodes):
            if g.is_crossing(v):
                continue
            k = next(s for s in range(3) if g.kind(g.edge_at(v, s)) == BOND)
            other = g.other_end(v, k)
            if other is not None and g.is_crossing(other[0]):
                _slide(g, v, k, None, strict=False)
                moved = True
                steps += 1
                break
        if not moved:
            return g.to_diagram(), steps
        if steps > max_steps:
            raise EngineError("bond crossings did not clear")


# ---------------------------------------------------------------------------
# crossingless states: vertices with a bond partner and two chain ports


def _fuse(m: dict, p, q) -> int:
    a, b = m.pop(p), m.pop(q)
    if a == q:
        return 1
    m[a], m[b] = b, a
    return 0


def _cl_components(bp: dict, m: dict) -> list[list[int]]:
    seen: set[int] = set()
    comps = []
    for r in sorted(bp):
        if r in seen:
            continue
        stack, comp = [r], []
        seen.add(r)
        while stack:
            v = stack.pop()
            comp.append(v)
            for u in (bp[v], m[(v, 1)][0], m[(v, 2)][0]):
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        comps.append(comp)
    return comps


def _cl_code(vs: list[int], bp: dict, m: dict) -> tuple:
    """Relabeling-invariant code of one component; also a compact encoding of it."""
    best = None
    for root in vs:
        idx = {root: 0}
        order = [root]
        i = 0
        while i < len(order):
            v = order[i]
            i += 1
            for u in (bp[v], m[(v, 1)][0], m[(v, 2)][0]):
                if u not in idx:
                    idx[u] = len(order)
                    order.append(u)
        code = tuple(
            (idx[bp[v]], idx[m[(v, 1)][0]], m[(v, 1)][1], idx[m[(v, 2)][0]], m[(v, 2)][1])
            for v in order
        )
        if best is None or code < best:
            best = code
    return best


def _cl_decode(code: tuple) -> tuple[dict, dict]:
    bp, m = {}, {}
    for v, (b, u1, t1, u2, t2) in enumerate(code):
        bp[v] = b
        m[(v, 1)] = (u1, t1)
        m[(v, 2)] = (u2, t2)
    return bp, m


class _Evaluator:
    def __init__(self, opts: EvaluationOptions):
        self.opts = opts
        self.topological = opts.mode == "topological"
        self.memo: dict[tuple, SkeinValue] = {}
        self.rng = random.Random(opts.order_seed) if opts.order_seed is not None else None
        self.lock = threading.Lock()
        self.stats = {"states_expanded": 0, "cache_hits": 0, "bond_slides": 0}

    def _count(self, key: str) -> None:
        with self.lock:
            self.stats[key] += 1

    # -- crossingless part --------------------------------------------------

    def state(self, bp: dict, m: dict, loops: int = 0) -> SkeinValue:
        value = SkeinValue.scalar(DELTA**loops)
        for comp in _cl_components(bp, m):
            value = value * self.component(_cl_code(comp, bp, m))
        return value

    def component(self, code: tuple) -> SkeinValue:
        if self.opts.memoize:
            hit = self.memo.get(code)
            if hit is not None:
                self._count("cache_hits")
                return hit
        value = self._component(code)
        if self.opts.memoize:
            with self.lock:
                value = self.memo.setdefault(code, value)
        return value

    def _component(self, code: tuple) -> SkeinValue:
        self._count("states_expanded")
        bp, m = _cl_decode(code)
        if self.opts.use_connected_sum_shortcut:
            found = _summand(bp, m)
            if found is not None:
                factor, loops = found
                if self.topological:
                    factor = subst_topological(factor)
                return factor * self.state(bp, m, loops)
        v = self.rng.choice(sorted(bp)) if self.rng else 0
        w = bp[v]
        m0 = dict(m)
        loops0 = _fuse(m0, (v, 1), (v, 2)) + _fuse(m0, (w, 1), (w, 2))
        bp0 = {x: y for x, y in bp.items() if x not in (v, w)}
        if self.topological:
            return THETA_OVER_DELTA * self.state(bp0, m0, loops0)
        mi = dict(m)
        loopsi = _fuse(mi, (v, 1), (w, 2)) + _fuse(mi, (v, 2), (w, 1))
        return ALPHA * self.state(bp0, m0, loops0) + BETA * self.state(dict(bp0), mi, loopsi)

    # -- crossings ------------------------------------------------------------

    def diagram(self, d: BondedDiagram) -> SkeinValue:
        d, unit = fold_markers(d)
        d, slides = clear_bond_crossings(d)
        self.stats["bond_slides"] += slides
        states = self._state_sum(d)
        keys = sorted(states)
        if self.opts.parallel and len(keys) > 1:
            with ThreadPoolExecutor(max_workers=self.opts.workers) as pool:
                values = list(pool.map(lambda k: self._final(k), keys))
        else:
            values = [self._final(k) for k in keys]
        total = SkeinValue.zero()
        for k, v in zip(keys, values):
            total = total + v.scale(states[k])
        return total.scale(unit)

    def _final(self, key: tuple) -> SkeinValue:
        bp, m = {}, {}
        for v, b, p1, p2 in key:
            bp[v] = b
            m[(v, 1)] = p1
            m[(v, 2)] = p2
        return self.state(bp, m)

    def _crossing_order(self, d: BondedDiagram) -> list[int]:
        xs = [c.id for c in d.crossings]
        if self.rng is not None:
            self.rng.shuffle(xs)
            return xs
        # grow a connected front so that partial states stay few
        if not xs:
            return []
        adj = {x: set() for x in xs}
        for x in xs:
            for s in range(4):
                y = d.other_end(x, s)[0]
                if y in adj and y != x:
                    adj[x].add(y)
        order, done = [], set()
        remaining = set(xs)
        while remaining:
            best = min(remaining, key=lambda x: (-len(adj[x] & done), x))
            order.append(best)
            done.add(best)
            remaining.discard(best)
        return order

    def _state_sum(self, d: BondedDiagram) -> dict[tuple, Coefficient]:
        ports: dict[tuple[int, int], int] = {}
        for n, refs in sorted(d.node_map.items()):
            for s in range(len(refs)):
                ports[(n, s)] = len(ports)
        names = list(ports)
        partner = [-1] * len(ports)
        for e in d.edges:
            tail, head = d.ends[e.id]
            if tail is not None:
                partner[ports[tail]], partner[ports[head]] = ports[head], ports[tail]
        loops0 = len(d.free_loops())
        states: dict[tuple, IntLaurent] = {tuple(partner): DELTA**loops0}
        weights = ((((0, 1), (2, 3)), A), (((1, 2), (3, 0)), A_INV))
        for x in self._crossing_order(d):
            new: dict[tuple, IntLaurent] = {}
            for m, c in states.items():
                for pairs, wgt in weights:
                    mm = list(m)
                    loops = 0
                    for s, t in pairs:
                        p, q = ports[(x, s)], ports[(x, t)]
                        a, b = mm[p], mm[q]
                        mm[p] = mm[q] = -1
                        if a == q:
                            loops += 1
                        else:
                            mm[a], mm[b] = b, a
                    key = tuple(mm)
                    coef = c * wgt * DELTA**loops if loops else c * wgt
                    prev = new.get(key)
                    new[key] = coef if prev is None else prev + coef
            states = {k: v for k, v in new.items() if v}
            self.stats["states_expanded"] += len(states)
        out: dict[tuple, Coefficient] = {}
        for m, c in states.items():
            key = []
            for v in sorted(n for n in d.node_map if not d.is_crossing(n)):
                b = names[m[ports[(v, 0)]]][0]
                key.append((v, b, names[m[ports[(v, 1)]]], names[m[ports[(v, 2)]]]))
            key = tuple(key)
            prev = out.get(key)
            out[key] = Coefficient.from_poly(c) if prev is None else prev + Coefficient.from_poly(c)
        return {k: v for k, v in out.items() if v}


def _summand(bp: dict, m: dict):
    """Find and cut a theta or handcuff summand in place; ``(factor, loops)`` or None."""
    for v in sorted(bp):
        w = bp[v]
        for i in (1, 2):
            u, j = m[(v, i)]
            if u != w:
                continue
            i2, j2 = 3 - i, 3 - j
            if m[(v, i2)] == (w, j2):
                continue
            del m[(v, i)], m[(w, j)]
            loops = _fuse(m, (v, i2), (w, j2))
            del bp[v], bp[w]
            return THETA_OVER_DELTA, loops
        if m[(w, 1)] == (w, 2) and m[(v, 1)] != (v, 2):
            del m[(w, 1)], m[(w, 2)]
            loops = _fuse(m, (v, 1), (v, 2))
            del bp[v], bp[w]
            return HANDCUFF_OVER_DELTA, loops
    return None


# ---------------------------------------------------------------------------
# public evaluation entry points


def evaluate(d: BondedDiagram, opts: EvaluationOptions | None = None) -> EvaluationResult:
    opts = opts or EvaluationOptions()
    _require(d)
    ev = _Evaluator(opts)
    value = ev.diagram(d)
    if opts.mode == "topological" and any(n for _, n in value.terms):
        raise EngineError("topological value carries handcuff terms")
    return EvaluationResult(value, writhe(d), d.bond_count, dict(ev.stats))


def evaluate_framed(d: BondedDiagram, opts: EvaluationOptions | None = None) -> EvaluationResult:
    opts = opts or EvaluationOptions()
    if opts.mode != "framed":
        opts = EvaluationOptions("framed", *_rest(opts))
    return evaluate(d, opts)


def evaluate_topological(
    d: BondedDiagram, opts: EvaluationOptions | None = None, cross_check: bool = True
) -> EvaluationResult:
    """Direct topological evaluation, cross-checked against the framed value under H = delta*Theta."""
    opts = opts or EvaluationOptions()
    top = EvaluationOptions("topological", *_rest(opts))
    res = evaluate(d, top)
    if cross_check:
        framed = evaluate(d, EvaluationOptions("framed", *_rest(opts)))
        if subst_topological(framed.value) != res.value:
            raise EngineError("topological value disagrees with the substituted framed value")
    return res


def _rest(opts: EvaluationOptions) -> tuple:
    return (opts.use_connected_sum_shortcut, opts.memoize, opts.parallel, opts.order_seed, opts.workers)


def _writhe_unit(w: int) -> Coefficient:
    # (-A^3)^(-w)
    return Coefficient.from_poly(IntLaurent.monomial(-3 * w, -1 if w % 2 else 1))


def normalized_value(d: BondedDiagram, mode: str = "framed", opts: EvaluationOptions | None = None) -> SkeinValue:
    opts = opts or EvaluationOptions()
    if mode == "topological":
        res = evaluate_topological(d, opts)
    else:
        res = evaluate_framed(d, opts)
    return res.value.scale(_writhe_unit(res.writhe))


def reduced_polynomial(d: BondedDiagram, opts: EvaluationOptions | None = None) -> BivariateLaurent:
    """The normalized framed value times ``(f1 f2)^(n-1)``; must be a polynomial."""
    n = d.bond_count
    if n < 1:
        raise EngineError("the reduced polynomial needs at least one bond")
    value = normalized_value(d, "framed", opts)
    mult = Coefficient(F1 * F2) ** (n - 1)
    scaled = value.scale(mult)
    for _, c in scaled.items():
        if not c.is_polynomial():
            raise EngineError(
                f"residual denominator {c.denominator().to_text()} in the reduced polynomial"
            )
    return BivariateLaurent.from_skein(scaled)


def classical_bracket(d: BondedDiagram, opts: EvaluationOptions | None = None) -> IntLaurent:
    """Kauffman bracket of a bondless diagram, normalized so the unknot is 1."""
    if d.bond_vertices:
        raise EngineError("classical_bracket is defined for bondless diagrams only")
    value = evaluate_framed(d, opts).value
    c = value.coefficient(0, 0)
    if set(value.terms) - {(0, 0)} or not c.is_polynomial():
        raise EngineError("bondless value is not a Laurent polynomial")
    q = exact_div(c.num, DELTA)
    if q is None:
        raise EngineError("bondless value is not divisible by delta")
    return q
