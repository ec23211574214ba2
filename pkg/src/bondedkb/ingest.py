"""3D polymer structures (backbone trace plus bonds) to bonded diagrams.

Two input formats are read:

* native JSON ``{"chains": [[[x, y, z], ...], ...], "bonds": [[ci, ri, cj, rj], ...]}``;
* a small subset of PDB text: ``CA`` atoms from ``ATOM`` records of the first model,
  and ``SSBOND`` records pairing residue numbers.

Projection is orthogonal.  Crossings get over/under from depth along the viewing
axis (larger depth is closer to the viewer), and each bonded residue becomes a
trivalent vertex.  Non-generic views are retried with a seeded perturbation.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field, replace
from pathlib import Path

from ._graph import Graph
from .diagram import BOND, CHAIN, BondedDiagram, DiagramError, ParseError, ValidationError, validate

__all__ = [
    "PolymerStructure",
    "ProjectionConfig",
    "GenericityError",
    "load_structure",
    "parse_structure_json",
    "parse_pdb",
    "close_chain",
    "project",
]

Point = tuple[float, float, float]


class GenericityError(DiagramError):
    """No generic projection was found within the retry budget."""


class _Degenerate(Exception):
    pass


@dataclass(frozen=True)
class PolymerStructure:
    chains: tuple[tuple[Point, ...], ...]
    bonds: tuple[tuple[int, int, int, int], ...] = ()
    closed: tuple[bool, ...] = ()
    residue_ids: tuple[tuple[str, ...], ...] = field(default=(), compare=False)

    def __post_init__(self):
        if not self.closed:
            object.__setattr__(self, "closed", tuple(False for _ in self.chains))


@dataclass(frozen=True)
class ProjectionConfig:
    seed: int = 0
    direction: Point | None = None
    perturbation: float = 1e-3
    max_retries: int = 25

    def __post_init__(self):
        if not self.perturbation > 0:
            raise ValueError("perturbation must be positive")
        if self.max_retries < 1:
            raise ValueError("max_retries must be at least 1")


# ---------------------------------------------------------------------------
# loading


def _check(s: PolymerStructure) -> PolymerStructure:
    if not s.chains:
        raise ValidationError(["structure has no chains"])
    for ci, ch in enumerate(s.chains):
        if not ch:
            raise ValidationError([f"chain {ci} is empty"])
    used: set[tuple[int, int]] = set()
    for ci, ri, cj, rj in s.bonds:
        for c, r in ((ci, ri), (cj, rj)):
            if not (0 <= c < len(s.chains) and 0 <= r < len(s.chains[c])):
                raise ValidationError([f"bond endpoint (chain {c}, residue {r}) does not exist"])
            if (c, r) in used:
                raise ValidationError([f"residue {r} of chain {c} carries more than one bond"])
            used.add((c, r))
        if (ci, ri) == (cj, rj):
            raise ValidationError([f"bond joins residue {ri} of chain {ci} to itself"])
    return s


def parse_structure_json(text: str) -> PolymerStructure:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(obj, dict) or "chains" not in obj:
        raise ParseError("expected an object with a 'chains' list")
    try:
        chains = tuple(
            tuple((float(p[0]), float(p[1]), float(p[2])) for p in ch) for ch in obj["chains"]
        )
        for ch in obj["chains"]:
            for p in ch:
                if len(p) != 3:
                    raise ValueError(f"point {p!r} does not have 3 coordinates")
        bonds = tuple(tuple(int(x) for x in b) for b in obj.get("bonds", []))
    except (TypeError, ValueError, IndexError) as exc:
        raise ParseError(f"bad chain or bond data: {exc}") from exc
    for b in bonds:
        if len(b) != 4:
            raise ParseError(f"bond {list(b)} must be [chain, residue, chain, residue]")
    return _check(PolymerStructure(chains, bonds))


def parse_pdb(text: str, chain: str | None = None) -> PolymerStructure:
    """CA trace and SSBOND pairs from PDB-format text (first model only)."""
    residues: dict[str, dict[int, Point]] = {}
    order: list[str] = []
    ssbonds: list[tuple[int, str, int, str, int]] = []
    seen_model = False
    for lineno, line in enumerate(text.splitlines(), 1):
        rec = line[:6].strip()
        if rec == "MODEL":
            if seen_model:
                break
            seen_model = True
        elif rec == "ENDMDL":
            break
        elif rec == "ATOM":
            if line[12:16].strip() != "CA":
                continue
            alt = line[16:17].strip()
            try:
                cid = line[21:22].strip() or "_"
                seq = int(line[22:26])
                xyz = (float(line[30:38]), float(line[38:46]), float(line[46:54]))
            except ValueError as exc:
                raise ParseError(f"line {lineno}: malformed ATOM record ({exc})") from exc
            if chain is not None and cid != chain:
                continue
            if cid not in residues:
                residues[cid] = {}
                order.append(cid)
            if seq in residues[cid] and alt:
                continue
            residues[cid].setdefault(seq, xyz)
        elif rec == "SSBOND":
            try:
                c1, r1 = line[15:16].strip() or "_", int(line[17:21])
                c2, r2 = line[29:30].strip() or "_", int(line[31:35])
            except ValueError as exc:
                raise ParseError(f"line {lineno}: malformed SSBOND record ({exc})") from exc
            ssbonds.append((lineno, c1, r1, c2, r2))
    if not order:
        what = f"chain {chain}" if chain else "the input"
        raise ValidationError([f"no CA atoms found in {what}"])
    index = {}
    chains = []
    ids = []
    for ci, cid in enumerate(order):
        seqs = sorted(residues[cid])
        chains.append(tuple(residues[cid][s] for s in seqs))
        ids.append(tuple(f"{cid}:{s}" for s in seqs))
        for ri, s in enumerate(seqs):
            index[(cid, s)] = (ci, ri)
    bonds = []
    for lineno, c1, r1, c2, r2 in ssbonds:
        if chain is not None and c1 != chain and c2 != chain:
            continue
        for c, r in ((c1, r1), (c2, r2)):
            if (c, r) not in index:
                raise ValidationError([f"line {lineno}: SSBOND residue {c}:{r} has no CA atom"])
        bonds.append(index[(c1, r1)] + index[(c2, r2)])
    return _check(PolymerStructure(tuple(chains), tuple(bonds), residue_ids=tuple(ids)))


def load_structure(src: str | Path, fmt: str = "auto", chain: str | None = None) -> PolymerStructure:
    """Load from a path, or from literal text when ``src`` is not an existing file."""
    text = None
    if isinstance(src, Path) or (isinstance(src, str) and "\n" not in src and Path(src).is_file()):
        text = Path(src).read_text()
    else:
        text = str(src)
    if fmt == "auto":
        fmt = "json" if text.lstrip().startswith("{") else "pdb"
    if fmt == "json":
        return parse_structure_json(text)
    if fmt == "pdb":
        return parse_pdb(text, chain)
    raise ValueError(f"unknown structure format {fmt!r}")


def close_chain(s: PolymerStructure) -> PolymerStructure:
    """Close each open chain with the straight segment from its last point to its first."""
    chains, closed = [], []
    for ch, was in zip(s.chains, s.closed):
        if not was and len(ch) > 1 and ch[0] == ch[-1]:
            ch = ch[:-1]
        chains.append(ch)
        closed.append(True)
    return replace(s, chains=tuple(chains), closed=tuple(closed))


# ---------------------------------------------------------------------------
# projection


def _sub(a, b):
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def _dot(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def _cross(a, b):
    return (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])


def _unit(a):
    n = math.sqrt(_dot(a, a))
    if n == 0:
        raise _Degenerate("zero direction")
    return (a[0] / n, a[1] / n, a[2] / n)


def _frame(n):
    """Orthonormal ``(u, v)`` with ``u x v = n``: counterclockwise as seen from ``+n``."""
    helper = (1.0, 0.0, 0.0) if abs(n[0]) < 0.9 else (0.0, 1.0, 0.0)
    u = _unit(_cross(helper, n))
    v = _cross(n, u)
    return u, v


def _random_direction(rng: random.Random):
    while True:
        d = (rng.gauss(0, 1), rng.gauss(0, 1), rng.gauss(0, 1))
        if _dot(d, d) > 1e-6:
            return _unit(d)


@dataclass
class _Seg:
    kind: str
    a: int  # point index of the start (in traversal direction)
    b: int
    owner: int  # chain index, or bond index for bonds
    pos: int  # segment position along its chain
    events: list = field(default_factory=list)  # (t, crossing id)


def _segments(s: PolymerStructure):
    """Flatten points; chain segments in traversal order; bond segments."""
    pts: list[Point] = []
    base = []
    for ch in s.chains:
        base.append(len(pts))
        pts.extend(ch)
    segs: list[_Seg] = []
    for ci, ch in enumerate(s.chains):
        n = len(ch)
        for k in range(n):
            if n == 1:
                break
            segs.append(_Seg(CHAIN, base[ci] + k, base[ci] + (k + 1) % n, ci, k))
    bond_at = {}
    for bi, (ci, ri, cj, rj) in enumerate(s.bonds):
        p, q = base[ci] + ri, base[cj] + rj
        segs.append(_Seg(BOND, p, q, bi, 0))
        bond_at[p] = bi
        bond_at[q] = bi
    return pts, base, segs, bond_at


def _project_once(s: PolymerStructure, n) -> BondedDiagram:
    u, v = _frame(n)
    pts, base, segs, bond_at = _segments(s)
    xy = [(_dot(p, u), _dot(p, v)) for p in pts]
    depth = [_dot(p, n) for p in pts]
    scale = max((max(abs(c) for c in p) for p in pts), default=1.0) or 1.0
    tol = 1e-9 * scale

    for sg in segs:
        (x1, y1), (x2, y2) = xy[sg.a], xy[sg.b]
        if math.hypot(x2 - x1, y2 - y1) <= tol:
            raise _Degenerate("segment projects to a point")
    # distinct projected points
    seen_pts = sorted(range(len(xy)), key=lambda i: xy[i])
    for i, j in zip(seen_pts, seen_pts[1:]):
        if math.hypot(xy[i][0] - xy[j][0], xy[i][1] - xy[j][1]) <= tol:
            raise _Degenerate("two points project together")

    crossings = []  # (id, seg i, t, seg j, s, point)
    for i in range(len(segs)):
        for j in range(i + 1, len(segs)):
            si, sj = segs[i], segs[j]
            shared = {si.a, si.b} & {sj.a, sj.b}
            p, r = xy[si.a], _sub2(xy[si.b], xy[si.a])
            q, w = xy[sj.a], _sub2(xy[sj.b], xy[sj.a])
            den = r[0] * w[1] - r[1] * w[0]
            qp = _sub2(q, p)
            if shared:
                # adjacent segments: reject folding back onto each other
                if abs(den) <= tol * (math.hypot(*r) + math.hypot(*w)):
                    if len(shared) == 2:
                        raise _Degenerate("segments coincide")
                    c = shared.pop()
                    d1 = _sub2(xy[si.b if si.a == c else si.a], xy[c])
                    d2 = _sub2(xy[sj.b if sj.a == c else sj.a], xy[c])
                    if d1[0] * d2[0] + d1[1] * d2[1] > 0:
                        raise _Degenerate("adjacent segments overlap")
                continue
            if abs(den) <= tol * (math.hypot(*r) + math.hypot(*w)):
                if abs(qp[0] * r[1] - qp[1] * r[0]) <= tol * math.hypot(*r):
                    # collinear: overlapping is degenerate
                    rr = r[0] * r[0] + r[1] * r[1]
                    t0 = (qp[0] * r[0] + qp[1] * r[1]) / rr
                    t1 = t0 + (w[0] * r[0] + w[1] * r[1]) / rr
                    if max(t0, t1) >= -1e-12 and min(t0, t1) <= 1 + 1e-12:
                        raise _Degenerate("collinear overlap")
                continue
            t = (qp[0] * w[1] - qp[1] * w[0]) / den
            sp = (qp[0] * r[1] - qp[1] * r[0]) / den
            lt = tol / math.hypot(*r)
            ls = tol / math.hypot(*w)
            if -lt <= t <= 1 + lt and -ls <= sp <= 1 + ls:
                if t <= lt or t >= 1 - lt or sp <= ls or sp >= 1 - ls:
                    raise _Degenerate("crossing at a segment end")
                di = depth[si.a] + t * (depth[si.b] - depth[si.a])
                dj = depth[sj.a] + sp * (depth[sj.b] - depth[sj.a])
                if abs(di - dj) <= tol:
                    raise _Degenerate("strands meet in space")
                pt = (p[0] + t * r[0], p[1] + t * r[1])
                crossings.append([i, t, j, sp, pt, di > dj])
    cpts = sorted(range(len(crossings)), key=lambda k: crossings[k][4])
    for a, b in zip(cpts, cpts[1:]):
        pa, pb = crossings[a][4], crossings[b][4]
        if math.hypot(pa[0] - pb[0], pa[1] - pb[1]) <= tol:
            raise _Degenerate("triple point")

    # node ids: bond vertices in point order, then crossings in discovery order
    g = Graph()
    vid = {}
    for p in sorted(bond_at):
        vid[p] = g.add_node(3)
    angles: dict[int, list] = {}  # node -> list of (angle, key)
    xid = []
    for k, (i, t, j, sp, pt, i_over) in enumerate(crossings):
        xid.append(g.add_node(4))
        segs[i].events.append((t, k))
        segs[j].events.append((sp, k))

    def ang(vec):
        return math.atan2(vec[1], vec[0])

    def seg_dir(sg):
        return _sub2(xy[sg.b], xy[sg.a])

    # half-edge records: node -> list of (angle, (edge key, is_head))
    half: dict[int, list] = {}

    def attach(node, angle, key, is_head):
        half.setdefault(node, []).append((angle, key, is_head))

    # walk chains and bonds, cutting at events; each piece becomes an edge
    pieces = []  # (kind, tail node, tail angle, head node, head angle)
    for ci, ch in enumerate(s.chains):
        chain_segs = [sg for sg in segs if sg.kind == CHAIN and sg.owner == ci]
        stops = []  # (node, in-angle, out-angle) in traversal order
        for sg in chain_segs:
            d = seg_dir(sg)
            if sg.a in bond_at:
                prev = chain_segs[sg.pos - 1]
                stops.append((vid[sg.a], ang(_neg(seg_dir(prev))), ang(d)))
            for t, k in sorted(sg.events):
                stops.append((xid[k], ang(_neg(d)), ang(d)))
        if not stops:
            pieces.append((CHAIN, None, None, None, None))
            continue
        for a_stop, b_stop in zip(stops, stops[1:] + stops[:1]):
            pieces.append((CHAIN, a_stop[0], a_stop[2], b_stop[0], b_stop[1]))
    for sg in segs:
        if sg.kind != BOND:
            continue
        d = seg_dir(sg)
        va, vb = vid[sg.a], vid[sg.b]
        stops = [(va, None, ang(d))]
        for t, k in sorted(sg.events):
            stops.append((xid[k], ang(_neg(d)), ang(d)))
        stops.append((vb, ang(_neg(d)), None))
        if va > vb:  # canonical bond orientation: tail at the lower vertex id
            stops = [(n_, o_, i_) for n_, i_, o_ in reversed(stops)]
        for a_stop, b_stop in zip(stops, stops[1:]):
            pieces.append((BOND, a_stop[0], a_stop[2], b_stop[0], b_stop[1]))

    edge_ids = []
    for kind, tn, ta, hn, ha in pieces:
        e = g.add_edge(kind)
        edge_ids.append(e)
        if tn is not None:
            attach(tn, ta, e, False)
            attach(hn, ha, e, True)
    for node, items in half.items():
        items.sort(key=lambda it: it[0])
        for a_ in range(len(items)):
            b_ = (a_ + 1) % len(items)
            if abs(items[a_][0] - items[b_][0]) <= 1e-12 and a_ != b_:
                raise _Degenerate("two strands leave a node in the same direction")
        for slot, (_, e, is_head) in enumerate(items):
            g._put(e, is_head, (node, slot))
    # under parity at crossings: slots of the under segment
    for k, (i, t, j, sp, pt, i_over) in enumerate(crossings):
        x = xid[k]
        under_seg = j if i_over else i
        under_kind_angles = {ang(seg_dir(segs[under_seg])), ang(_neg(seg_dir(segs[under_seg])))}
        slot = next(
            sl for sl, (a_, _, _) in enumerate(sorted(half[x], key=lambda it: it[0]))
            if a_ in under_kind_angles
        )
        g.under[x] = slot % 2
    d = g.to_diagram()
    bad = validate(d)
    if bad:
        raise _Degenerate("; ".join(bad))
    return d


def _sub2(a, b):
    return (a[0] - b[0], a[1] - b[1])


def _neg(a):
    return (-a[0], -a[1])


def project(s: PolymerStructure, cfg: ProjectionConfig | None = None) -> BondedDiagram:
    """Generic orthogonal projection of a closed structure to a bonded diagram."""
    cfg = cfg or ProjectionConfig()
    if not all(s.closed):
        raise ValidationError(["project needs closed chains; call close_chain first"])
    rng = random.Random(cfg.seed)
    base = _unit(cfg.direction) if cfg.direction is not None else _random_direction(rng)
    n = base
    reasons = []
    for attempt in range(cfg.max_retries):
        try:
            return _project_once(s, n)
        except _Degenerate as exc:
            reasons.append(str(exc))
            jitter = _random_direction(rng)
            n = _unit(tuple(b + cfg.perturbation * (attempt + 1) * j for b, j in zip(base, jitter)))
    raise GenericityError(
        f"no generic projection after {cfg.max_retries} attempts (last: {reasons[-1]})"
    )
