"""Exact Laurent polynomials in ``A`` and the coefficient ring used by the skein module.

Three layers live here:

* :class:`IntLaurent` -- sparse Laurent polynomials in ``A`` with ``int`` coefficients.
* :class:`Coefficient` -- ``num / ((1+A^4)^d1 (1+A^4+A^8)^d2)``, the only denominators the
  bonded bracket ever produces.
* :class:`SkeinValue` -- finite sums ``sum p_{m,n} T^m H^n`` over :class:`Coefficient`,
  where ``T`` is the theta curve and ``H`` the handcuff graph.

All values are immutable and hashable.
"""

from __future__ import annotations

import json
from typing import Iterable, Iterator, Mapping

__all__ = [
    "IntLaurent",
    "Coefficient",
    "SkeinValue",
    "BivariateLaurent",
    "poly_add",
    "poly_mul",
    "exact_div",
    "coeff_reduce",
    "skein_add",
    "skein_mul",
    "subst_topological",
    "constants",
    "DELTA",
    "MU",
    "F1",
    "F2",
]


class IntLaurent:
    """Sparse Laurent polynomial ``sum c_k A^k`` with integer coefficients."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[int, int] | Iterable[tuple[int, int]] = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[int, int] = {}
        for e, c in items:
            if c:
                acc[e] = acc.get(e, 0) + c
        self._terms = {e: c for e, c in acc.items() if c}
        self._hash = None

    @classmethod
    def _raw(cls, terms: dict[int, int]) -> "IntLaurent":
        # terms already free of zeros
        obj = cls.__new__(cls)
        obj._terms = terms
        obj._hash = None
        return obj

    @classmethod
    def monomial(cls, exponent: int, coefficient: int = 1) -> "IntLaurent":
        return cls._raw({exponent: coefficient} if coefficient else {})

    @classmethod
    def const(cls, c: int) -> "IntLaurent":
        return cls.monomial(0, c)

    @property
    def terms(self) -> dict[int, int]:
        return dict(self._terms)

    def items(self) -> list[tuple[int, int]]:
        return sorted(self._terms.items())

    def is_zero(self) -> bool:
        return not self._terms

    def is_monomial(self) -> bool:
        return len(self._terms) == 1

    def min_degree(self) -> int:
        return min(self._terms)

    def max_degree(self) -> int:
        return max(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, int):
            other = IntLaurent.const(other)
        if not isinstance(other, IntLaurent):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __neg__(self) -> "IntLaurent":
        return IntLaurent._raw({e: -c for e, c in self._terms.items()})

    def __add__(self, other: "IntLaurent | int") -> "IntLaurent":
        if isinstance(other, int):
            other = IntLaurent.const(other)
        if not isinstance(other, IntLaurent):
            return NotImplemented
        out = dict(self._terms)
        for e, c in other._terms.items():
            s = out.get(e, 0) + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return IntLaurent._raw(out)

    __radd__ = __add__

    def __sub__(self, other: "IntLaurent | int") -> "IntLaurent":
        if isinstance(other, int):
            other = IntLaurent.const(other)
        return self + (-other)

    def __rsub__(self, other: int) -> "IntLaurent":
        return IntLaurent.const(other) - self

    def __mul__(self, other: "IntLaurent | int") -> "IntLaurent":
        if isinstance(other, int):
            if not other:
                return IntLaurent()
            return IntLaurent._raw({e: c * other for e, c in self._terms.items()})
        if not isinstance(other, IntLaurent):
            return NotImplemented
        out: dict[int, int] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = e1 + e2
                out[e] = out.get(e, 0) + c1 * c2
        return IntLaurent._raw({e: c for e, c in out.items() if c})

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "IntLaurent":
        if k < 0:
            if not self.is_monomial():
                raise ValueError("negative power of a non-monomial Laurent polynomial")
            (e, c), = self._terms.items()
            if c not in (1, -1):
                raise ValueError("negative power of a non-unit monomial")
            return IntLaurent.monomial(e * k, c ** (-k))
        result = IntLaurent.const(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def shift(self, k: int) -> "IntLaurent":
        """Multiply by ``A^k``."""
        return IntLaurent._raw({e + k: c for e, c in self._terms.items()})

    def __call__(self, a):
        """Evaluate at ``A = a`` (exact for ``Fraction``/``int`` input)."""
        return sum(c * a**e for e, c in self._terms.items())

    def __repr__(self) -> str:
        return f"IntLaurent({self.to_text()!r})"

    def to_text(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for i, (e, c) in enumerate(self.items()):
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            if e == 0:
                body = str(mag)
            else:
                var = "A" if e == 1 else f"A^{e}"
                body = var if mag == 1 else f"{mag}{var}"
            if i == 0:
                parts.append(("-" if c < 0 else "") + body)
            else:
                parts.append(f" {sign} {body}")
        return "".join(parts)

    __str__ = to_text


def poly_add(p: IntLaurent, q: IntLaurent) -> IntLaurent:
    return p + q


def poly_mul(p: IntLaurent, q: IntLaurent) -> IntLaurent:
    return p * q


def exact_div(p: IntLaurent, f: IntLaurent) -> IntLaurent | None:
    """Return ``q`` with ``p == f * q`` in ``Z[A, A^-1]``, or ``None`` if no such ``q`` exists."""
    if f.is_zero():
        raise ZeroDivisionError("division by the zero Laurent polynomial")
    if p.is_zero():
        return IntLaurent()
    # strip powers of A; divide polynomials with nonzero constant term from the top
    fs, ps = f.min_degree(), p.min_degree()
    g = {e - fs: c for e, c in f._terms.items()}
    h = {e - ps: c for e, c in p._terms.items()}
    gdeg = max(g)
    glead = g[gdeg]
    quot: dict[int, int] = {}
    while h:
        hdeg = max(h)
        if hdeg < gdeg:
            return None
        q, r = divmod(h[hdeg], glead)
        if r:
            return None
        shift = hdeg - gdeg
        quot[shift] = q
        for e, c in g.items():
            k = e + shift
            v = h.get(k, 0) - q * c
            if v:
                h[k] = v
            else:
                h.pop(k, None)
    return IntLaurent._raw({e + ps - fs: c for e, c in quot.items()})


F1 = IntLaurent({0: 1, 4: 1})
F2 = IntLaurent({0: 1, 4: 1, 8: 1})
DELTA = IntLaurent({2: -1, -2: -1})
MU = IntLaurent({-4: 1, 0: 1, 4: 1})

_F_POWERS: dict[tuple[int, int], IntLaurent] = {}


def _fpow(which: int, k: int) -> IntLaurent:
    key = (which, k)
    val = _F_POWERS.get(key)
    if val is None:
        val = (F1 if which == 1 else F2) ** k
        _F_POWERS[key] = val
    return val


class Coefficient:
    """An element ``num / (f1^d1 * f2^d2)`` of the ring ``Z[A^{+-1}, f1^-1, f2^-1]``.

    Stored in cancelled form: ``f1`` does not divide ``num`` when ``d1 > 0`` and likewise
    for ``f2``, so structural equality is equality of ring elements.
    """

    __slots__ = ("num", "d1", "d2", "_hash")

    def __init__(self, num: IntLaurent | int = 0, d1: int = 0, d2: int = 0, *, reduce: bool = True):
        if isinstance(num, int):
            num = IntLaurent.const(num)
        if d1 < 0 or d2 < 0:
            raise ValueError("denominator exponents must be nonnegative")
        if num.is_zero():
            d1 = d2 = 0
        elif reduce:
            num, d1, d2 = _cancel(num, d1, d2)
        self.num = num
        self.d1 = d1
        self.d2 = d2
        self._hash = None

    @classmethod
    def from_poly(cls, p: IntLaurent | int) -> "Coefficient":
        return cls(p)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_polynomial(self) -> bool:
        return self.d1 == 0 and self.d2 == 0

    def __bool__(self) -> bool:
        return not self.num.is_zero()

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, IntLaurent)):
            other = Coefficient(other)
        if not isinstance(other, Coefficient):
            return NotImplemented
        return self.d1 == other.d1 and self.d2 == other.d2 and self.num == other.num

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.num, self.d1, self.d2))
        return self._hash

    def __neg__(self) -> "Coefficient":
        return Coefficient(-self.num, self.d1, self.d2, reduce=False)

    def __add__(self, other: "Coefficient | IntLaurent | int") -> "Coefficient":
        if isinstance(other, (int, IntLaurent)):
            other = Coefficient(other)
        if not isinstance(other, Coefficient):
            return NotImplemented
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        d1 = max(self.d1, other.d1)
        d2 = max(self.d2, other.d2)
        a = self.num * _fpow(1, d1 - self.d1) * _fpow(2, d2 - self.d2)
        b = other.num * _fpow(1, d1 - other.d1) * _fpow(2, d2 - other.d2)
        return Coefficient(a + b, d1, d2)

    __radd__ = __add__

    def __sub__(self, other: "Coefficient | IntLaurent | int") -> "Coefficient":
        if isinstance(other, (int, IntLaurent)):
            other = Coefficient(other)
        return self + (-other)

    def __rsub__(self, other):
        return Coefficient(other) - self

    def __mul__(self, other: "Coefficient | IntLaurent | int") -> "Coefficient":
        if isinstance(other, (int, IntLaurent)):
            other = Coefficient(other, reduce=False)
        if not isinstance(other, Coefficient):
            return NotImplemented
        if self.is_zero() or other.is_zero():
            return Coefficient()
        return Coefficient(self.num * other.num, self.d1 + other.d1, self.d2 + other.d2)

    __rmul__ = __mul__

    def inverse(self) -> "Coefficient":
        """Invert; only defined when the numerator is ``+-A^k f1^i f2^j``."""
        num, i, j = self.num, 0, 0
        if num.is_zero():
            raise ZeroDivisionError("zero coefficient")
        while not num.is_monomial():
            q = exact_div(num, F1)
            if q is not None:
                num, i = q, i + 1
                continue
            q = exact_div(num, F2)
            if q is None:
                raise ValueError(f"{self} is not a unit of the coefficient ring")
            num, j = q, j + 1
        (e, c), = num.items()
        if c not in (1, -1):
            raise ValueError(f"{self} is not a unit of the coefficient ring")
        inv = IntLaurent.monomial(-e, c) * _fpow(1, self.d1) * _fpow(2, self.d2)
        return Coefficient(inv, i, j)

    def __truediv__(self, other: "Coefficient | IntLaurent | int") -> "Coefficient":
        if isinstance(other, (int, IntLaurent)):
            other = Coefficient(other)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return Coefficient(other) * self.inverse()

    def __pow__(self, k: int) -> "Coefficient":
        if k < 0:
            return self.inverse() ** (-k)
        return Coefficient(self.num**k, self.d1 * k, self.d2 * k)

    def denominator(self) -> IntLaurent:
        return _fpow(1, self.d1) * _fpow(2, self.d2)

    def __repr__(self) -> str:
        return f"Coefficient({self.to_text()!r})"

    def to_text(self) -> str:
        num = f"({self.num.to_text()})"
        if self.is_polynomial():
            return num
        den = " ".join(
            f"{name}^{k}" if k > 1 else name
            for name, k in (("f1", self.d1), ("f2", self.d2))
            if k
        )
        return f"{num}/({den})"

    __str__ = to_text


def _cancel(num: IntLaurent, d1: int, d2: int) -> tuple[IntLaurent, int, int]:
    while d1:
        q = exact_div(num, F1)
        if q is None:
            break
        num, d1 = q, d1 - 1
    while d2:
        q = exact_div(num, F2)
        if q is None:
            break
        num, d2 = q, d2 - 1
    return num, d1, d2


def coeff_reduce(c: Coefficient) -> Coefficient:
    num, d1, d2 = _cancel(c.num, c.d1, c.d2)
    return Coefficient(num, d1, d2, reduce=False)


Basis = tuple[int, int]


class SkeinValue:
    """A module element ``sum p_{m,n} T^m H^n``; key ``(0, 0)`` is the empty link."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Basis, Coefficient | IntLaurent | int] | None = None):
        out: dict[Basis, Coefficient] = {}
        for (m, n), c in (terms or {}).items():
            if m < 0 or n < 0:
                raise ValueError("basis degrees must be nonnegative")
            if not isinstance(c, Coefficient):
                c = Coefficient(c)
            if not c.is_zero():
                out[(m, n)] = c
        self._terms = out
        self._hash = None

    @classmethod
    def _raw(cls, terms: dict[Basis, Coefficient]) -> "SkeinValue":
        obj = cls.__new__(cls)
        obj._terms = terms
        obj._hash = None
        return obj

    @classmethod
    def zero(cls) -> "SkeinValue":
        return cls._raw({})

    @classmethod
    def unit(cls) -> "SkeinValue":
        return cls._raw({(0, 0): Coefficient(1)})

    @classmethod
    def theta(cls, k: int = 1) -> "SkeinValue":
        return cls._raw({(k, 0): Coefficient(1)})

    @classmethod
    def handcuff(cls, k: int = 1) -> "SkeinValue":
        return cls._raw({(0, k): Coefficient(1)})

    @classmethod
    def scalar(cls, c: Coefficient | IntLaurent | int) -> "SkeinValue":
        return cls({(0, 0): c})

    @property
    def terms(self) -> dict[Basis, Coefficient]:
        return dict(self._terms)

    def items(self) -> list[tuple[Basis, Coefficient]]:
        return sorted(self._terms.items())

    def coefficient(self, m: int, n: int) -> Coefficient:
        return self._terms.get((m, n), Coefficient())

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SkeinValue):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __neg__(self) -> "SkeinValue":
        return SkeinValue._raw({k: -c for k, c in self._terms.items()})

    def __add__(self, other: "SkeinValue") -> "SkeinValue":
        if not isinstance(other, SkeinValue):
            return NotImplemented
        out = dict(self._terms)
        for k, c in other._terms.items():
            s = out[k] + c if k in out else c
            if s.is_zero():
                out.pop(k, None)
            else:
                out[k] = s
        return SkeinValue._raw(out)

    def __sub__(self, other: "SkeinValue") -> "SkeinValue":
        return self + (-other)

    def scale(self, c: Coefficient | IntLaurent | int) -> "SkeinValue":
        if not isinstance(c, Coefficient):
            c = Coefficient(c)
        if c.is_zero():
            return SkeinValue.zero()
        return SkeinValue._raw({k: v * c for k, v in self._terms.items()})

    def __mul__(self, other: "SkeinValue | Coefficient | IntLaurent | int") -> "SkeinValue":
        if isinstance(other, (Coefficient, IntLaurent, int)):
            return self.scale(other)
        if not isinstance(other, SkeinValue):
            return NotImplemented
        out: dict[Basis, Coefficient] = {}
        for (m1, n1), c1 in self._terms.items():
            for (m2, n2), c2 in other._terms.items():
                k = (m1 + m2, n1 + n2)
                p = c1 * c2
                out[k] = out[k] + p if k in out else p
        return SkeinValue._raw({k: c for k, c in out.items() if not c.is_zero()})

    def __rmul__(self, other):
        if isinstance(other, (Coefficient, IntLaurent, int)):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, k: int) -> "SkeinValue":
        out = SkeinValue.unit()
        for _ in range(k):
            out = out * self
        return out

    def bond_degrees(self) -> set[int]:
        return {m + n for m, n in self._terms}

    def __repr__(self) -> str:
        return f"SkeinValue({self.to_text()!r})"

    def to_text(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for (m, n), c in self.items():
            basis = _basis_text(m, n)
            if basis and c == Coefficient(1):
                parts.append(basis)
            elif basis:
                parts.append(f"{c.to_text()} * {basis}")
            else:
                parts.append(c.to_text())
        return " + ".join(parts)

    __str__ = to_text

    def to_json_obj(self) -> dict:
        return {
            "terms": [
                {
                    "theta": m,
                    "h": n,
                    "num": [[e, k] for e, k in c.num.items()],
                    "d1": c.d1,
                    "d2": c.d2,
                }
                for (m, n), c in self.items()
            ]
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), separators=(",", ":"))

    @classmethod
    def from_json_obj(cls, obj: dict) -> "SkeinValue":
        terms: dict[Basis, Coefficient] = {}
        for t in obj["terms"]:
            key = (int(t["theta"]), int(t["h"]))
            num = IntLaurent((int(e), int(k)) for e, k in t["num"])
            c = Coefficient(num, int(t.get("d1", 0)), int(t.get("d2", 0)))
            terms[key] = terms[key] + c if key in terms else c
        return cls(terms)


def _basis_text(m: int, n: int) -> str:
    parts = []
    if m:
        parts.append("T" if m == 1 else f"T^{m}")
    if n:
        parts.append("H" if n == 1 else f"H^{n}")
    return "*".join(parts)


class BivariateLaurent:
    """Element of ``Z[A^{+-1}, T, H]`` keyed by ``(A-exponent, T-degree, H-degree)``."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[tuple[int, int, int], int] | None = None):
        self._terms = {k: c for k, c in (terms or {}).items() if c}

    @classmethod
    def from_skein(cls, value: SkeinValue) -> "BivariateLaurent":
        out: dict[tuple[int, int, int], int] = {}
        for (m, n), c in value.items():
            if not c.is_polynomial():
                raise ValueError(f"coefficient of T^{m} H^{n} has a denominator: {c}")
            for e, k in c.num.items():
                out[(e, m, n)] = k
        return cls(out)

    @property
    def terms(self) -> dict[tuple[int, int, int], int]:
        return dict(self._terms)

    def coefficient(self, m: int, n: int) -> IntLaurent:
        return IntLaurent({e: c for (e, mm, nn), c in self._terms.items() if (mm, nn) == (m, n)})

    def to_skein(self) -> SkeinValue:
        grouped: dict[Basis, dict[int, int]] = {}
        for (e, m, n), c in self._terms.items():
            grouped.setdefault((m, n), {})[e] = c
        return SkeinValue({k: IntLaurent(v) for k, v in grouped.items()})

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BivariateLaurent):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        return hash(frozenset(self._terms.items()))

    def __iter__(self) -> Iterator[tuple[tuple[int, int, int], int]]:
        return iter(sorted(self._terms.items(), key=lambda kv: (kv[0][1], kv[0][2], kv[0][0])))

    def __repr__(self) -> str:
        return f"BivariateLaurent({self.to_text()!r})"

    def to_text(self) -> str:
        return self.to_skein().to_text()

    __str__ = to_text

    def to_json_obj(self) -> dict:
        return self.to_skein().to_json_obj()

    def to_json(self) -> str:
        return self.to_skein().to_json()


def skein_add(u: SkeinValue, v: SkeinValue) -> SkeinValue:
    return u + v


def skein_mul(u: SkeinValue, v: SkeinValue) -> SkeinValue:
    return u * v


def subst_topological(u: SkeinValue) -> SkeinValue:
    """Apply ``H -> delta * T``; the result has no ``H`` terms."""
    out = SkeinValue.zero()
    for (m, n), c in u.items():
        out = out + SkeinValue._raw({(m + n, 0): c * (DELTA**n)})
    return out


def constants() -> tuple[IntLaurent, IntLaurent, SkeinValue, SkeinValue]:
    """Return ``(delta, mu, alpha, beta)``.

    ``alpha = (delta H - T)/(delta mu)`` multiplies the diagram with the bond deleted,
    ``beta = (delta T - H)/(delta mu)`` the diagram with the bond contracted.
    """
    inv = Coefficient(DELTA * MU).inverse()
    t, h = SkeinValue.theta(), SkeinValue.handcuff()
    alpha = (h.scale(DELTA) - t).scale(inv)
    beta = (t.scale(DELTA) - h).scale(inv)
    return DELTA, MU, alpha, beta
