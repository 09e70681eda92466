"""Finite-dimensional graded-commutative Poincare-duality algebras.

A :class:`RingPresentation` stores a basis per degree and the full table of
structure constants ``sc[(j, k)][a, b, c]``: the coefficient of basis class
``c`` of degree ``j + k`` in the product of basis classes ``a`` (degree j) and
``b`` (degree k). Coefficients are ``Fraction``. The fundamental functional
evaluates degree-n classes; the volume class is normalized to evaluate to 1.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Mapping, Sequence

import numpy as np

from . import exact
from .exterior import basis as ext_basis
from .exterior import basis_position, merge_sign

ZERO = Fraction(0)
ONE = Fraction(1)


def _zeros(*shape) -> np.ndarray:
    a = np.empty(shape, dtype=object)
    a.fill(ZERO)
    return a


@dataclass(frozen=True, eq=False)
class RingPresentation:
    n: int
    betti: tuple[int, ...]
    labels: tuple[tuple[str, ...], ...]
    sc: Mapping[tuple[int, int], np.ndarray]
    fundamental: tuple[Fraction, ...]
    name: str = ""

    def products(self, j: int, k: int) -> np.ndarray:
        if j + k > self.n:
            raise ValueError(f"degree {j}+{k} exceeds formal dimension {self.n}")
        return self.sc[(j, k)]

    def basis_classes(self, k: int) -> list["CohomologyClass"]:
        return [CohomologyClass.basis(self, k, a) for a in range(self.betti[k])]

    def unit(self) -> "CohomologyClass":
        return CohomologyClass.basis(self, 0, 0)

    def evaluate(self, top: "CohomologyClass") -> Fraction:
        """Fundamental functional on a degree-n class."""
        if top.degree != self.n:
            raise ValueError("only degree-n classes can be evaluated on [N]")
        return sum((c * f for c, f in zip(top.coords, self.fundamental)), ZERO)

    def pairing_matrix(self, k: int) -> exact.Matrix:
        """Matrix of (x, y) -> <x.y, [N]> on H^k x H^(n-k)."""
        s = self.sc[(k, self.n - k)]
        return [
            [sum((s[a, b, c] * self.fundamental[c] for c in range(self.betti[self.n])), ZERO)
             for b in range(self.betti[self.n - k])]
            for a in range(self.betti[k])
        ]

    def intersection_matrix(self) -> exact.Matrix:
        if self.n % 4:
            raise ValueError(f"intersection form needs dimension 4m, got {self.n}")
        return self.pairing_matrix(self.n // 2)

    def intersection_form(self):
        """Middle-degree form as an :class:`~qre_toolkit.classifier.IntersectionForm`.

        Non-integral matrices are returned with ``integral=False`` and are not
        checked for unimodularity.
        """
        from .classifier import IntersectionForm, analyze_form

        g = self.intersection_matrix()
        for i in range(len(g)):
            for j in range(i):
                if g[i][j] != g[j][i]:
                    raise AssertionError(f"intersection matrix not symmetric at ({i}, {j})")
        if all(v.denominator == 1 for row in g for v in row):
            return analyze_form([[int(v) for v in row] for row in g])
        return IntersectionForm.from_rational(g)

    # serialization ------------------------------------------------------

    def to_json(self) -> dict:
        sc = []
        for j in range(self.n + 1):
            row = []
            for k in range(self.n + 1):
                if j + k > self.n:
                    row.append(None)
                else:
                    row.append(_encode_tensor(self.sc[(j, k)]))
            sc.append(row)
        return {
            "n": self.n,
            "name": self.name,
            "betti": list(self.betti),
            "labels": [list(l) for l in self.labels],
            "sc": sc,
            "fundamental": [_encode_q(f) for f in self.fundamental],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "RingPresentation":
        try:
            n = int(data["n"])
            betti = tuple(int(b) for b in data["betti"])
            labels = tuple(tuple(str(s) for s in l) for l in data.get("labels") or _default_labels(betti))
            raw = data["sc"]
            fundamental = tuple(_decode_q(f) for f in data["fundamental"])
        except KeyError as exc:
            raise ValueError(f"ring JSON missing field {exc.args[0]!r}") from None
        if len(betti) != n + 1:
            raise ValueError(f"field 'betti': expected {n + 1} entries, got {len(betti)}")
        sc = {}
        for j in range(n + 1):
            for k in range(n + 1 - j):
                t = _decode_tensor(raw[j][k], (betti[j], betti[k], betti[j + k]))
                sc[(j, k)] = t
        return cls(n, betti, labels, sc, fundamental, str(data.get("name", "")))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1, sort_keys=True)

    def __repr__(self) -> str:
        tag = f" {self.name!r}" if self.name else ""
        return f"<RingPresentation{tag} n={self.n} betti={list(self.betti)}>"


@dataclass(frozen=True)
class CohomologyClass:
    degree: int
    coords: tuple[Fraction, ...]

    @classmethod
    def basis(cls, ring: RingPresentation, k: int, a: int) -> "CohomologyClass":
        return cls(k, tuple(ONE if i == a else ZERO for i in range(ring.betti[k])))

    @classmethod
    def of(cls, degree: int, coords: Sequence) -> "CohomologyClass":
        return cls(degree, tuple(Fraction(c) for c in coords))

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coords)

    def __add__(self, other: "CohomologyClass") -> "CohomologyClass":
        if other.degree != self.degree:
            raise ValueError("cannot add classes of different degree")
        return CohomologyClass(self.degree, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def scale(self, s) -> "CohomologyClass":
        return CohomologyClass(self.degree, tuple(Fraction(s) * c for c in self.coords))


def cup(ring: RingPresentation, x: CohomologyClass, y: CohomologyClass) -> CohomologyClass:
    j, k = x.degree, y.degree
    if j + k > ring.n:
        raise ValueError(f"cup product degree {j + k} exceeds formal dimension {ring.n}")
    if len(x.coords) != ring.betti[j] or len(y.coords) != ring.betti[k]:
        raise ValueError("class coordinates do not match the ring's Betti numbers")
    s = ring.sc[(j, k)]
    out = []
    for c in range(ring.betti[j + k]):
        out.append(sum((x.coords[a] * y.coords[b] * s[a, b, c]
                        for a in range(len(x.coords)) if x.coords[a]
                        for b in range(len(y.coords)) if y.coords[b]), ZERO))
    return CohomologyClass(j + k, tuple(out))


# ---------------------------------------------------------------------------
# validation


@dataclass
class ValidationReport:
    valid: bool
    failures: list[tuple[str, dict]] = field(default_factory=list)

    @property
    def first_failure(self) -> tuple[str, dict] | None:
        return self.failures[0] if self.failures else None

    def __bool__(self) -> bool:
        return self.valid


def validate(ring: RingPresentation) -> ValidationReport:
    """Check the Poincare-duality-algebra axioms; each failing axiom gets one witness."""
    n, b = ring.n, ring.betti
    failures: list[tuple[str, dict]] = []

    if len(b) != n + 1 or any(x < 0 for x in b):
        return ValidationReport(False, [("betti", {"betti": list(b)})])
    if b[0] != 1 or b[n] != 1:
        failures.append(("connected_closed", {"b0": b[0], "bn": b[n]}))
        return ValidationReport(False, failures)
    if len(ring.labels) != n + 1 or any(len(ring.labels[k]) != b[k] for k in range(n + 1)):
        failures.append(("labels", {"expected": list(b), "got": [len(l) for l in ring.labels]}))
    if len(ring.fundamental) != b[n]:
        failures.append(("fundamental", {"expected_length": b[n], "got": len(ring.fundamental)}))
        return ValidationReport(False, failures)
    for j in range(n + 1):
        for k in range(n + 1 - j):
            t = ring.sc.get((j, k))
            if t is None or t.shape != (b[j], b[k], b[j + k]):
                failures.append(("shape", {"j": j, "k": k, "shape": None if t is None else list(t.shape)}))
                return ValidationReport(False, failures)

    # unit: the degree-0 basis class acts as the identity on both sides
    for k in range(n + 1):
        left, right = ring.sc[(0, k)], ring.sc[(k, 0)]
        bad = _first(
            (a, c) for a in range(b[k]) for c in range(b[k])
            if left[0, a, c] != int(a == c) or right[a, 0, c] != int(a == c)
        )
        if bad:
            failures.append(("unit", {"degree": k, "basis": bad[0], "coefficient": bad[1]}))
            break

    # graded commutativity x.y = (-1)^{jk} y.x
    w = None
    for j in range(1, n + 1):
        for k in range(1, n + 1 - j):
            s1, s2 = ring.sc[(j, k)], ring.sc[(k, j)]
            sign = -1 if (j * k) % 2 else 1
            w = _first(
                (j, a, k, bb, c) for a in range(b[j]) for bb in range(b[k]) for c in range(b[j + k])
                if s1[a, bb, c] != sign * s2[bb, a, c]
            )
            if w:
                break
        if w:
            break
    if w:
        failures.append(("graded_commutativity", dict(zip(("j", "a", "k", "b", "c"), w))))

    # associativity (x.y).z = x.(y.z) on basis triples
    w = _associativity_witness(ring)
    if w:
        failures.append(("associativity", w))

    # Poincare duality: H^k x H^(n-k) -> R has full rank
    for k in range(n + 1):
        if b[k] != b[n - k]:
            failures.append(("poincare_duality", {"degree": k, "b_k": b[k], "b_n_minus_k": b[n - k]}))
            break
        m = ring.pairing_matrix(k)
        r = exact.rank(m) if m else 0
        if r != b[k]:
            kern = exact.nullspace(exact.transpose(m), b[k]) if m else []
            failures.append(("poincare_duality", {
                "degree": k, "rank": r, "expected": b[k],
                "kernel_vector": [str(v) for v in kern[0]] if kern else [],
            }))
            break
    return ValidationReport(not failures, failures)


def _first(gen):
    return next(iter(gen), None)


def _associativity_witness(ring: RingPresentation) -> dict | None:
    n, b = ring.n, ring.betti
    for i in range(1, n + 1):
        for j in range(1, n + 1 - i):
            for k in range(1, n + 1 - i - j):
                if not (b[i] and b[j] and b[k]):
                    continue
                s_ij, s_ijk = ring.sc[(i, j)], ring.sc[(i + j, k)]
                s_jk, s_i_jk = ring.sc[(j, k)], ring.sc[(i, j + k)]
                # ((x y) z)[a,b,c,d] and (x (y z))[a,b,c,d]
                left = np.tensordot(s_ij, s_ijk, axes=([2], [0]))
                right = np.transpose(np.tensordot(s_jk, s_i_jk, axes=([2], [1])), (2, 0, 1, 3))
                diff = np.argwhere(np.asarray(left != right, dtype=bool))
                if len(diff):
                    a, bb, c, d = (int(v) for v in diff[0])
                    return {"degrees": [i, j, k], "basis": [a, bb, c], "component": d,
                            "left": str(left[a, bb, c, d]), "right": str(right[a, bb, c, d])}
    return None


# ---------------------------------------------------------------------------
# builders


def _default_labels(betti: Sequence[int]) -> tuple[tuple[str, ...], ...]:
    return tuple(tuple(f"x{k}_{a}" for a in range(bk)) for k, bk in enumerate(betti))


def from_products(
    n: int,
    betti: Sequence[int],
    products: Mapping[tuple[tuple[int, int], tuple[int, int]], Mapping[int, object]],
    labels: Sequence[Sequence[str]] | None = None,
    fundamental: Sequence = (1,),
    name: str = "",
    symmetrize: bool = True,
) -> RingPresentation:
    """Assemble a ring from sparse positive-degree products.

    ``products[((j, a), (k, b))] = {c: coeff}`` gives ``x_a . y_b``. The unit is
    filled in automatically and, with ``symmetrize``, so is every product
    implied by graded commutativity that was not given explicitly.
    """
    betti = tuple(int(v) for v in betti)
    sc = {(j, k): _zeros(betti[j], betti[k], betti[j + k]) for j in range(n + 1) for k in range(n + 1 - j)}
    for k in range(n + 1):
        for a in range(betti[k]):
            sc[(0, k)][0, a, a] = ONE
            sc[(k, 0)][a, 0, a] = ONE
    given = set()
    for ((j, a), (k, bb)), out in products.items():
        if j == 0 or k == 0:
            raise ValueError("unit products are implied; give positive-degree products only")
        for c, v in out.items():
            sc[(j, k)][a, bb, c] = Fraction(v)
        given.add((j, a, k, bb))
    if symmetrize:
        for (j, a, k, bb) in list(given):
            if (k, bb, j, a) not in given:
                sign = -1 if (j * k) % 2 else 1
                for c in range(betti[j + k]):
                    sc[(k, j)][bb, a, c] = sign * sc[(j, k)][a, bb, c]
    return RingPresentation(
        n, betti,
        tuple(tuple(l) for l in labels) if labels is not None else _default_labels(betti),
        sc, tuple(Fraction(f) for f in fundamental), name,
    )


def _checked(ring: RingPresentation) -> RingPresentation:
    rep = validate(ring)
    if not rep.valid:
        axiom, data = rep.first_failure
        raise ValueError(f"ring {ring.name or ''} fails {axiom}: {data}")
    return ring


def build_sphere(n: int) -> RingPresentation:
    if n < 2:
        raise ValueError("sphere dimension must be >= 2")
    betti = [1] + [0] * (n - 1) + [1]
    labels = [["1"]] + [[] for _ in range(n - 1)] + [["vol"]]
    return _checked(from_products(n, betti, {}, labels, name=f"S^{n}"))


def build_torus(n: int) -> RingPresentation:
    """Full exterior algebra on n degree-1 generators th1..thn."""
    if n < 2:
        raise ValueError("torus dimension must be >= 2")
    betti = [comb(n, k) for k in range(n + 1)]
    labels = [["1"]] + [["^".join(f"th{i}" for i in idx) for idx in ext_basis(n, k)] for k in range(1, n + 1)]
    sc = {(j, k): _zeros(betti[j], betti[k], betti[j + k]) for j in range(n + 1) for k in range(n + 1 - j)}
    for j in range(n + 1):
        for k in range(n + 1 - j):
            pos = basis_position(n, j + k)
            t = sc[(j, k)]
            for a, ia in enumerate(ext_basis(n, j)):
                for bb, ib in enumerate(ext_basis(n, k)):
                    s = merge_sign(ia, ib)
                    if s:
                        t[a, bb, pos[tuple(sorted(ia + ib))]] = Fraction(s)
    return _checked(RingPresentation(n, tuple(betti), tuple(map(tuple, labels)), sc, (ONE,), f"T^{n}"))


def _cp2(sign: int, name: str) -> RingPresentation:
    return _checked(from_products(
        4, [1, 0, 1, 0, 1], {((2, 0), (2, 0)): {0: sign}},
        [["1"], [], ["c"], [], ["vol"]], name=name,
    ))


def build_cp2() -> RingPresentation:
    return _cp2(1, "CP^2")


def build_cp2bar() -> RingPresentation:
    return _cp2(-1, "CP^2bar")


def build_s2xs2() -> RingPresentation:
    return build_sphere_product(2, 2)


def build_sphere_product(p: int, q: int) -> RingPresentation:
    """Cohomology of S^p x S^q: generators x (deg p), y (deg q), x.y = vol."""
    if p < 1 or q < 1:
        raise ValueError("sphere factors need dimension >= 1")
    n = p + q
    betti = [0] * (n + 1)
    betti[0] = betti[n] = 1
    betti[p] += 1
    betti[q] += 1
    labels: list[list[str]] = [[] for _ in range(n + 1)]
    labels[0], labels[n] = ["1"], ["vol"]
    labels[p].append("a")
    labels[q].append("b")
    ia = (p, 0)
    ib = (q, 1 if p == q else 0)
    prods = {(ia, ib): {0: 1}}
    name = "S^2 x S^2" if (p, q) == (2, 2) else f"S^{p} x S^{q}"
    return _checked(from_products(n, betti, prods, labels, name=name))


def connected_sum(a: RingPresentation, b: RingPresentation) -> RingPresentation:
    """Cohomology of a # b: positive-degree parts add, cross products vanish below top."""
    if a.n != b.n:
        raise ValueError(f"dimension mismatch: {a.n} vs {b.n}")
    n = a.n
    for r in (a, b):
        rep = validate(r)
        if not rep.valid:
            raise ValueError(f"summand {r.name!r} invalid: {rep.first_failure}")
    betti = [1] + [a.betti[k] + b.betti[k] for k in range(1, n)] + [1]
    labels = [["1"]] + [_merge_labels(a.labels[k], b.labels[k]) for k in range(1, n)] + [["vol"]]

    def offset(r_is_b: bool, k: int) -> int:
        if k in (0, n):
            return 0
        return a.betti[k] if r_is_b else 0

    sc = {(j, k): _zeros(betti[j], betti[k], betti[j + k]) for j in range(n + 1) for k in range(n + 1 - j)}
    for k in range(n + 1):
        for x in range(betti[k]):
            sc[(0, k)][0, x, x] = ONE
            sc[(k, 0)][x, 0, x] = ONE
    for is_b, r in ((False, a), (True, b)):
        fund = r.fundamental[0]
        for j in range(1, n):
            for k in range(1, n + 1 - j):
                src = r.sc[(j, k)]
                oj, ok, ojk = offset(is_b, j), offset(is_b, k), offset(is_b, j + k)
                for x in range(r.betti[j]):
                    for y in range(r.betti[k]):
                        for z in range(r.betti[j + k]):
                            v = src[x, y, z]
                            if v:
                                # top classes are identified so <., [N]> is preserved
                                sc[(j, k)][oj + x, ok + y, ojk + z] = v * fund if j + k == n else v
    name = f"{a.name} # {b.name}" if a.name and b.name else ""
    if a.name == f"S^{n}" or b.name == f"S^{n}":
        name = b.name if a.name == f"S^{n}" else a.name
    return _checked(RingPresentation(n, tuple(betti), tuple(map(tuple, labels)), sc, (ONE,), name))


def connected_sum_power(ring: RingPresentation, k: int) -> RingPresentation:
    """k-fold connected sum; k = 0 gives the sphere."""
    if k < 0:
        raise ValueError("connected sum power must be >= 0")
    if k == 0:
        return build_sphere(ring.n)
    out = ring
    for _ in range(k - 1):
        out = connected_sum(out, ring)
    return out


def _merge_labels(la: Sequence[str], lb: Sequence[str]) -> list[str]:
    out = list(la)
    for s in lb:
        t, i = s, 1
        while t in out:
            i += 1
            t = f"{s}_{i}"
        out.append(t)
    return out


# ---------------------------------------------------------------------------
# JSON helpers


def _encode_q(v: Fraction):
    v = Fraction(v)
    return v.numerator if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def _decode_q(v) -> Fraction:
    if isinstance(v, float):
        raise ValueError(f"rational expected, got float {v!r}")
    return Fraction(v)


def _encode_tensor(t: np.ndarray):
    return [[[_encode_q(t[a, b, c]) for c in range(t.shape[2])] for b in range(t.shape[1])]
            for a in range(t.shape[0])]


def _decode_tensor(raw, shape) -> np.ndarray:
    t = _zeros(*shape)
    if raw is None:
        raw = []
    try:
        if len(raw) != shape[0]:
            raise ValueError
        for a in range(shape[0]):
            if len(raw[a]) != shape[1]:
                raise ValueError
            for b in range(shape[1]):
                if len(raw[a][b]) != shape[2]:
                    raise ValueError
                for c in range(shape[2]):
                    t[a, b, c] = _decode_q(raw[a][b][c])
    except (ValueError, TypeError):
        raise ValueError(f"structure constant block has wrong shape, expected {list(shape)}") from None
    return t


def named_ring(kind: str, dim: int | None = None, count: int = 1) -> RingPresentation:
    """Builder lookup used by the CLI."""
    kinds = {
        "sphere": lambda: build_sphere(dim or 4),
        "torus": lambda: build_torus(dim or 4),
        "cp2": build_cp2,
        "cp2bar": build_cp2bar,
        "s2xs2": build_s2xs2,
    }
    if kind not in kinds:
        raise ValueError(f"unknown ring kind {kind!r}; choose from {sorted(kinds)}")
    ring = kinds[kind]()
    return connected_sum_power(ring, count) if count != 1 else ring


def sum_cp2(j: int, i: int) -> RingPresentation:
    """Cohomology of #^j CP^2 #^i CP^2bar (the sphere when j = i = 0)."""
    out = build_sphere(4)
    for _ in range(j):
        out = connected_sum(out, build_cp2())
    for _ in range(i):
        out = connected_sum(out, build_cp2bar())
    return out


def sum_s2xs2(k: int) -> RingPresentation:
    out = build_sphere(4)
    for _ in range(k):
        out = connected_sum(out, build_s2xs2())
    return out


def exterior_power_map(ring: RingPresentation, k: int) -> exact.Matrix:
    """Rows: images in H^k of x_{i1}...x_{ik} over sorted k-subsets of the H^1 basis."""
    b1 = ring.betti[1]
    rows = []
    for subset in combinations(range(b1), k):
        cls = ring.unit()
        for i in subset:
            cls = cup(ring, cls, CohomologyClass.basis(ring, 1, i))
        rows.append(list(cls.coords))
    return rows
