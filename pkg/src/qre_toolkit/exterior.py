"""Multivectors in the exterior algebra of R^n.

Basis elements are strictly increasing 1-based index tuples, so ``(1, 3)``
stands for ``e1 ^ e3``. A multivector is either *exact* (``Fraction``
coefficients) or *numeric* (``float``); the two never mix silently, use
:meth:`Multivector.to_numeric` / :meth:`Multivector.to_exact`.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import comb
from numbers import Rational
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np

from . import exact

Index = tuple[int, ...]


@lru_cache(maxsize=None)
def basis(n: int, k: int) -> tuple[Index, ...]:
    """Degree-k basis of the exterior algebra in lexicographic order."""
    return tuple(combinations(range(1, n + 1), k))


@lru_cache(maxsize=None)
def basis_position(n: int, k: int) -> Mapping[Index, int]:
    return MappingProxyType({idx: i for i, idx in enumerate(basis(n, k))})


def merge_sign(a: Index, b: Index) -> int:
    """Sign of ``e_a ^ e_b`` relative to ``e_{sorted(a+b)}``; 0 on collision."""
    if set(a) & set(b):
        return 0
    inversions = sum(1 for i in a for j in b if j < i)
    return -1 if inversions % 2 else 1


def complement(n: int, idx: Index) -> Index:
    s = set(idx)
    return tuple(i for i in range(1, n + 1) if i not in s)


class Multivector:
    """Immutable element of the exterior algebra of R^n."""

    __slots__ = ("_n", "_terms", "_exact")

    def __init__(self, n: int, terms: Mapping[Index, object] | Iterable = (), exact: bool = True):
        if not isinstance(n, int) or n < 1:
            raise ValueError(f"ambient dimension must be a positive integer, got {n!r}")
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[Index, object] = {}
        for idx, coeff in items:
            idx = tuple(int(i) for i in idx)
            if any(b <= a for a, b in zip(idx, idx[1:])):
                raise ValueError(f"index tuple {idx} is not strictly increasing")
            if idx and (idx[0] < 1 or idx[-1] > n):
                raise ValueError(f"index tuple {idx} out of range 1..{n}")
            c = _coerce(coeff, exact)
            acc[idx] = acc.get(idx, 0) + c
        self._n = n
        self._exact = exact
        self._terms = tuple(sorted(((i, c) for i, c in acc.items() if c != 0), key=_order))

    # constructors -------------------------------------------------------

    @classmethod
    def e(cls, n: int, *idx: int, exact: bool = True) -> "Multivector":
        """Basis element; indices may come unsorted, the sign is absorbed."""
        srt = tuple(sorted(idx))
        if len(set(srt)) != len(srt):
            return cls(n, {}, exact)
        sign = _perm_sign(idx)
        return cls(n, {srt: sign}, exact)

    @classmethod
    def scalar(cls, n: int, value, exact: bool = True) -> "Multivector":
        return cls(n, {(): value}, exact)

    @classmethod
    def top(cls, n: int, value=1, exact: bool = True) -> "Multivector":
        return cls(n, {tuple(range(1, n + 1)): value}, exact)

    @classmethod
    def from_vector(cls, n: int, k: int, vec, exact: bool = False) -> "Multivector":
        return cls(n, zip(basis(n, k), (v if exact else float(v) for v in vec)), exact)

    # accessors ----------------------------------------------------------

    @property
    def n(self) -> int:
        return self._n

    @property
    def exact(self) -> bool:
        return self._exact

    @property
    def terms(self) -> Mapping[Index, object]:
        return MappingProxyType(dict(self._terms))

    def degrees(self) -> set[int]:
        return {len(i) for i, _ in self._terms}

    def is_zero(self) -> bool:
        return not self._terms

    def pure_degree(self) -> int | None:
        """The degree if homogeneous (zero counts as any degree -> None)."""
        d = self.degrees()
        return d.pop() if len(d) == 1 else None

    def grade(self, k: int) -> "Multivector":
        return Multivector(self._n, {i: c for i, c in self._terms if len(i) == k}, self._exact)

    def coefficient(self, idx: Index):
        return dict(self._terms).get(tuple(idx), Fraction(0) if self._exact else 0.0)

    def top_coefficient(self):
        return self.coefficient(tuple(range(1, self._n + 1)))

    def as_vector(self, k: int) -> np.ndarray:
        """Degree-k coefficients in lexicographic basis order (floats)."""
        pos = basis_position(self._n, k)
        out = np.zeros(len(pos))
        for idx, c in self._terms:
            if len(idx) == k:
                out[pos[idx]] = float(c)
        return out

    # conversions --------------------------------------------------------

    def to_numeric(self) -> "Multivector":
        return Multivector(self._n, {i: float(c) for i, c in self._terms}, exact=False)

    def to_exact(self) -> "Multivector":
        # Fraction(float) is exact: no rounding happens here
        return Multivector(self._n, {i: Fraction(c) for i, c in self._terms}, exact=True)

    # arithmetic ---------------------------------------------------------

    def _check(self, other: "Multivector") -> None:
        if not isinstance(other, Multivector):
            raise TypeError(f"expected Multivector, got {type(other).__name__}")
        if other._n != self._n:
            raise ValueError(f"dimension mismatch: {self._n} vs {other._n}")
        if other._exact != self._exact:
            raise TypeError("cannot mix exact and numeric multivectors; convert explicitly")

    def __add__(self, other: "Multivector") -> "Multivector":
        self._check(other)
        return Multivector(self._n, list(self._terms) + list(other._terms), self._exact)

    def __neg__(self) -> "Multivector":
        return Multivector(self._n, {i: -c for i, c in self._terms}, self._exact)

    def __sub__(self, other: "Multivector") -> "Multivector":
        return self + (-other)

    def __mul__(self, s) -> "Multivector":
        if isinstance(s, Multivector):
            raise TypeError("use wedge() or ^ for the exterior product")
        s = _coerce(s, self._exact)
        return Multivector(self._n, {i: c * s for i, c in self._terms}, self._exact)

    __rmul__ = __mul__

    def __xor__(self, other: "Multivector") -> "Multivector":
        return wedge(self, other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Multivector):
            return NotImplemented
        return self._n == other._n and self._exact == other._exact and self._terms == other._terms

    def __hash__(self) -> int:
        return hash((self._n, self._exact, self._terms))

    def __repr__(self) -> str:
        if not self._terms:
            return f"Multivector({self._n}, 0)"
        parts = []
        for idx, c in self._terms:
            name = "e" + "".join(map(str, idx)) if idx else "1"
            parts.append(f"{c}*{name}")
        return f"Multivector({self._n}, " + " + ".join(parts) + ")"

    # serialization ------------------------------------------------------

    def to_json(self) -> dict:
        terms = []
        for idx, c in self._terms:
            if self._exact:
                terms.append({"idx": list(idx), "num": c.numerator, "den": c.denominator})
            else:
                terms.append({"idx": list(idx), "val": c})
        return {"n": self._n, "terms": terms}

    @classmethod
    def from_json(cls, data: Mapping) -> "Multivector":
        terms = data.get("terms", [])
        if any("val" in t for t in terms):
            if any("num" in t for t in terms):
                raise ValueError("mixed exact/numeric terms in multivector JSON")
            return cls(int(data["n"]), [(t["idx"], float(t["val"])) for t in terms], exact=False)
        return cls(int(data["n"]), [(t["idx"], Fraction(int(t["num"]), int(t.get("den", 1)))) for t in terms])


def _order(item):
    idx, _ = item
    return (len(idx), idx)


def _coerce(c, exact: bool):
    if exact:
        if isinstance(c, bool) or not isinstance(c, (Rational, Fraction)):
            raise TypeError(f"exact multivector needs int/Fraction coefficients, got {type(c).__name__}")
        return Fraction(c)
    return float(c)


def _perm_sign(seq) -> int:
    inv = sum(1 for a in range(len(seq)) for b in range(a + 1, len(seq)) if seq[a] > seq[b])
    return -1 if inv % 2 else 1


def wedge(a: Multivector, b: Multivector) -> Multivector:
    """Exterior product; bilinear extension of the shuffle rule on basis elements."""
    a._check(b)
    out = []
    for ia, ca in a._terms:
        for ib, cb in b._terms:
            s = merge_sign(ia, ib)
            if s:
                out.append((tuple(sorted(ia + ib)), s * ca * cb))
    return Multivector(a.n, out, a.exact)


def top_pairing(a: Multivector, b: Multivector):
    """Coefficient of ``e_1...e_n`` in ``a ^ b`` for complementary pure degrees."""
    a._check(b)
    da, db = a.pure_degree(), b.pure_degree()
    if (da is None and not a.is_zero()) or (db is None and not b.is_zero()):
        raise ValueError("top_pairing needs pure-degree arguments")
    if da is not None and db is not None and da + db != a.n:
        raise ValueError(f"degrees {da} and {db} are not complementary in dimension {a.n}")
    return wedge(a, b).top_coefficient()


@dataclass(frozen=True)
class PairingMatrix:
    """Gram matrix of ``(a, b) -> top coefficient of a ^ b`` on degree k."""

    n: int
    k: int
    gram: np.ndarray

    def __post_init__(self):
        self.gram.setflags(write=False)


@lru_cache(maxsize=None)
def pairing_matrix(n: int, k: int) -> PairingMatrix:
    if not 0 <= k <= n:
        raise ValueError(f"degree {k} out of range for dimension {n}")
    if 2 * k != n:
        raise ValueError("the middle pairing needs n = 2k")
    bs = basis(n, k)
    pos = basis_position(n, k)
    g = np.zeros((len(bs), len(bs)), dtype=np.int64)
    for i, idx in enumerate(bs):
        comp = complement(n, idx)
        g[i, pos[comp]] = merge_sign(idx, comp)
    return PairingMatrix(n, k, g)


def pairing_signature(n: int, k: int) -> tuple[int, int]:
    """Inertia (p, q) of the middle pairing on degree-k forms, n = 2k, k even."""
    if 2 * k != n:
        raise ValueError("pairing_signature needs n = 2k")
    if k % 2:
        raise ValueError(f"k={k} is odd: the middle pairing is antisymmetric, signature undefined")
    g = pairing_matrix(n, k).gram
    p, q, z = exact.signature([[Fraction(int(v)) for v in row] for row in g])
    assert z == 0, "middle pairing is nondegenerate"
    return p, q


def max_definite_dimension(n: int, k: int) -> int:
    return max(pairing_signature(n, k))


@lru_cache(maxsize=None)
def wedge_tensor(n: int, j: int, k: int) -> np.ndarray:
    """Float structure tensor W with (x ^ y)_r = sum_pq x_p y_q W[p, q, r]."""
    bj, bk = basis(n, j), basis(n, k)
    w = np.zeros((len(bj), len(bk), comb(n, j + k) if j + k <= n else 0))
    if j + k <= n:
        pos = basis_position(n, j + k)
        for p, ip in enumerate(bj):
            for q, iq in enumerate(bk):
                s = merge_sign(ip, iq)
                if s:
                    w[p, q, pos[tuple(sorted(ip + iq))]] = s
    w.setflags(write=False)
    return w
