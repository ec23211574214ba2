"""Independent reference computations used by the test suite.

Nothing here imports the package's ring arithmetic or its state-sum engine: values
are rebuilt in sympy and the classical bracket is recomputed by plain enumeration of
all ``2^c`` smoothings.
"""

from __future__ import annotations

import itertools
import json
from pathlib import Path

import sympy as sp

A, T, H = sp.symbols("A T H")

DELTA = -A**2 - A**-2
MU = A**-4 + 1 + A**4
ALPHA = (DELTA * H - T) / (DELTA * MU)
BETA = (DELTA * T - H) / (DELTA * MU)

DATA = Path(__file__).resolve().parent.parent / "data"


def coefficient_expr(c) -> sp.Expr:
    num = sum(k * A**e for e, k in c.num.items())
    return num / ((1 + A**4) ** c.d1 * (1 + A**4 + A**8) ** c.d2)


def skein_expr(value) -> sp.Expr:
    """A ``SkeinValue`` as a sympy expression in ``A``, ``T`` (theta) and ``H``."""
    return sum((coefficient_expr(c) * T**m * H**n for (m, n), c in value.items()), sp.Integer(0))


def same(value, expr) -> bool:
    """Exact symbolic equality of a package value and a sympy expression."""
    diff = sp.together(skein_expr(value) - expr)
    return sp.expand(sp.numer(diff)) == 0


def laurent_expr(p) -> sp.Expr:
    return sum((k * A**e for e, k in p.items()), sp.Integer(0))


def bivariate_expr(b) -> sp.Expr:
    return sum((k * A**e * T**m * H**n for (e, m, n), k in b), sp.Integer(0))


def load_json(name: str) -> dict:
    return json.loads((DATA / name).read_text())


def brute_bracket(d) -> sp.Expr:
    """Classical Kauffman bracket of a bondless diagram by full state enumeration.

    Crossing slots are listed counterclockwise from the incoming under-strand.  The
    A-smoothing joins the slot pairs (0, 1) and (2, 3); the B-smoothing joins (1, 2)
    and (3, 0).  Each state contributes ``A^(a-b) * delta^(loops-1)``.
    """
    slot_of_end: dict[tuple[int, bool], tuple[int, int]] = {}
    for c in d.crossings:
        for s, r in enumerate(c.incident):
            slot_of_end[(r.edge, r.out)] = (c.id, s)
    chain = [e.id for e in d.edges]
    if any(v for v in d.bond_vertices):
        raise ValueError("oracle handles bondless diagrams only")
    free = [e for e in chain if (e, True) not in slot_of_end]
    xs = list(d.crossings)
    total = sp.Integer(0)
    for state in itertools.product((0, 1), repeat=len(xs)):
        parent: dict = {}

        def find(p):
            while parent.setdefault(p, p) != p:
                parent[p] = parent[parent[p]]
                p = parent[p]
            return p

        def union(p, q):
            parent[find(p)] = find(q)

        for e in chain:
            if e in free:
                continue
            union(slot_of_end[(e, True)], slot_of_end[(e, False)])
        for c, bit in zip(xs, state):
            pairs = ((0, 1), (2, 3)) if bit == 0 else ((1, 2), (3, 0))
            for i, j in pairs:
                union((c.id, i), (c.id, j))
        loops = len({find(p) for p in list(parent)}) + len(free)
        a = state.count(0)
        total += A ** (a - (len(xs) - a)) * DELTA ** (loops - 1)
    return sp.expand(total)


REPORT: list[str] = []


def record(n: int, title: str, ok: bool, detail: str = "") -> None:
    """Remember and print one acceptance line; conftest repeats them in the summary."""
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} {title}" + (f" ({detail})" if detail else "")
    REPORT.append(line)
    print(line)
