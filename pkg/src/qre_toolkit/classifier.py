"""Intersection forms and homeomorphism types of simply connected 4-manifolds.

Within the regime beta^+ <= 3 and beta^- <= 3 a unimodular form is determined
by rank, signature and parity, and every such form is realized by one of

    #^k (S^2 x S^2)            (even, k = beta^+ = beta^-)
    #^j CP^2 #^i CP^2bar       (odd, j = beta^+, i = beta^-)

so the classification is a lookup. Outside the regime E8 summands appear and
we refuse to guess.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import exact

REGIME_BOUND = 3


class FormError(ValueError):
    """A matrix that is not a symmetric unimodular integer form."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


@dataclass(frozen=True)
class IntersectionForm:
    matrix: tuple[tuple, ...]
    rank: int
    signature: tuple[int, int]
    even: bool
    determinant: Fraction
    integral: bool = True

    @property
    def beta_plus(self) -> int:
        return self.signature[0]

    @property
    def beta_minus(self) -> int:
        return self.signature[1]

    @property
    def parity(self) -> str:
        return "even" if self.even else "odd"

    def as_lists(self) -> list[list]:
        return [list(r) for r in self.matrix]

    @classmethod
    def from_rational(cls, rows: Sequence[Sequence]) -> "IntersectionForm":
        """Numeric-mode form for non-integral Gram matrices (no unimodularity check)."""
        m = exact.to_fractions(rows)
        _check_symmetric(m)
        p, q, _ = exact.signature(m)
        return cls(tuple(tuple(r) for r in m), len(m), (p, q), False, exact.determinant(m), integral=False)

    def to_json(self) -> dict:
        return {
            "matrix": [[str(v) if not self.integral else int(v) for v in r] for r in self.matrix],
            "rank": self.rank,
            "signature": list(self.signature),
            "parity": self.parity if self.integral else None,
            "determinant": str(self.determinant),
            "integral": self.integral,
        }


def _check_symmetric(m) -> None:
    for i in range(len(m)):
        if len(m[i]) != len(m):
            raise FormError("matrix is not square", witness={"row": i})
        for j in range(i):
            if m[i][j] != m[j][i]:
                raise FormError(f"matrix not symmetric at ({i}, {j})", witness={"i": i, "j": j})


def analyze_form(matrix: Sequence[Sequence[int]]) -> IntersectionForm:
    """Validate a symmetric unimodular integer matrix and cache its invariants."""
    rows = [list(r) for r in matrix]
    for i, r in enumerate(rows):
        for j, v in enumerate(r):
            if isinstance(v, bool) or not isinstance(v, int):
                if isinstance(v, Fraction) and v.denominator == 1:
                    rows[i][j] = int(v)
                    continue
                raise FormError(f"entry ({i}, {j}) is not an integer: {v!r}", witness={"i": i, "j": j})
    _check_symmetric(rows)
    m = exact.to_fractions(rows)
    det = exact.determinant(m)
    if abs(det) != 1:
        raise FormError(f"form is not unimodular (det = {det})", witness={"determinant": str(det)})
    p, q, z = exact.signature(m)
    assert z == 0
    # Q(x, x) = sum x_i^2 G_ii mod 2, so parity is read off the diagonal
    even = all(rows[i][i] % 2 == 0 for i in range(len(rows)))
    return IntersectionForm(tuple(tuple(r) for r in rows), len(rows), (p, q), even, det)


@dataclass(frozen=True)
class HomeoType:
    kind: str  # Sphere4 | SumS2xS2 | SumCP2 | OutsideSupportedRegime
    k: int = 0
    j: int = 0
    i: int = 0
    reason: str = ""

    def __post_init__(self):
        if min(self.k, self.j, self.i) < 0:
            raise ValueError("connected-sum counts must be nonnegative")
        if self.kind == "SumCP2" and self.j == 0 and self.i == 0:
            raise ValueError("SumCP2(0, 0) is the 4-sphere; use HomeoType.sum_cp2")
        if self.kind == "SumS2xS2" and self.k == 0:
            raise ValueError("SumS2xS2(0) is the 4-sphere; use HomeoType.sum_s2xs2")

    @classmethod
    def sphere(cls) -> "HomeoType":
        return cls("Sphere4")

    @classmethod
    def sum_cp2(cls, j: int, i: int) -> "HomeoType":
        return cls.sphere() if j == i == 0 else cls("SumCP2", j=j, i=i)

    @classmethod
    def sum_s2xs2(cls, k: int) -> "HomeoType":
        return cls.sphere() if k == 0 else cls("SumS2xS2", k=k)

    @classmethod
    def outside(cls, reason: str) -> "HomeoType":
        return cls("OutsideSupportedRegime", reason=reason)

    @property
    def name(self) -> str:
        if self.kind == "Sphere4":
            return "S^4"
        if self.kind == "SumS2xS2":
            return "S^2 x S^2" if self.k == 1 else f"#^{self.k} (S^2 x S^2)"
        if self.kind == "SumCP2":
            out = "" if not self.j else ("CP^2" if self.j == 1 else f"#^{self.j} CP^2")
            if self.i:
                bar = "CP^2bar" if self.i == 1 else f"#^{self.i} CP^2bar"
                if not out:
                    out = bar
                else:
                    out += " # CP^2bar" if self.i == 1 else f" {bar}"
            return out
        return f"outside supported regime ({self.reason})"

    def form(self) -> list[list[int]]:
        """Standard intersection form representing this type."""
        if self.kind == "Sphere4":
            return []
        if self.kind == "SumCP2":
            d = [1] * self.j + [-1] * self.i
            return [[d[a] if a == b else 0 for b in range(len(d))] for a in range(len(d))]
        if self.kind == "SumS2xS2":
            r = 2 * self.k
            return [[1 if (a // 2 == b // 2 and a != b) else 0 for b in range(r)] for a in range(r)]
        raise ValueError("no standard form outside the supported regime")

    def to_json(self) -> dict:
        d = {"kind": self.kind, "name": self.name}
        if self.kind == "SumS2xS2":
            d["k"] = self.k
        elif self.kind == "SumCP2":
            d["j"], d["i"] = self.j, self.i
        elif self.kind == "OutsideSupportedRegime":
            d["reason"] = self.reason
        return d


def classify_simply_connected(form: IntersectionForm) -> HomeoType:
    if not form.integral:
        raise FormError("classification needs an integral unimodular form")
    p, q = form.signature
    if form.rank == 0:
        return HomeoType.sphere()
    if p > REGIME_BOUND or q > REGIME_BOUND:
        return HomeoType.outside(f"beta+={p}, beta-={q} exceeds {REGIME_BOUND}")
    if not form.even:
        return HomeoType.sum_cp2(p, q)
    if p != q:
        # even unimodular forms have signature divisible by 8
        raise FormError(f"no even unimodular form has signature ({p}, {q})", witness={"signature": [p, q]})
    return HomeoType.sum_s2xs2(p)


@dataclass(frozen=True)
class EllipticityDecision:
    elliptic: bool
    homeo: HomeoType | None
    signature: tuple[int, int]

    def to_json(self) -> dict:
        return {
            "elliptic": self.elliptic,
            "homeo": self.homeo.to_json() if self.homeo else None,
            "signature": list(self.signature),
        }


def qre_ellipticity_decision(form: IntersectionForm) -> EllipticityDecision:
    """Quasiregular ellipticity of the closed simply connected 4-manifold with this form."""
    p, q = form.signature
    elliptic = p <= REGIME_BOUND and q <= REGIME_BOUND
    return EllipticityDecision(elliptic, classify_simply_connected(form) if elliptic else None, (p, q))


def candidate_forms(p: int, q: int) -> list[list[list[int]]]:
    """Standard unimodular forms of signature (p, q): odd diagonal first, then even if any."""
    if p == q == 0:
        return [[]]
    forms = [HomeoType.sum_cp2(p, q).form()]
    if p == q:
        forms.append(HomeoType.sum_s2xs2(p).form())
    return forms


def generate_table() -> dict[tuple[int, int], list[HomeoType]]:
    """Homeomorphism types for every (beta+, beta-) in {0..3}^2."""
    table = {}
    for q in range(REGIME_BOUND + 1):
        for p in range(REGIME_BOUND + 1):
            types = []
            for m in candidate_forms(p, q):
                t = classify_simply_connected(analyze_form(m))
                if t not in types:
                    types.append(t)
            table[(p, q)] = types
    return table


def table_to_json(table: dict[tuple[int, int], list[HomeoType]]) -> str:
    """Rows indexed by beta-, columns by beta+ (the layout of the usual table)."""
    size = REGIME_BOUND + 1
    doc = {
        "rows": "beta_minus",
        "columns": "beta_plus",
        "cells": [[[t.name for t in table[(p, q)]] for p in range(size)] for q in range(size)],
    }
    return json.dumps(doc, indent=2) + "\n"


def table_to_text(table: dict[tuple[int, int], list[HomeoType]]) -> str:
    size = REGIME_BOUND + 1
    cells = [[", ".join(t.name for t in table[(p, q)]) for p in range(size)] for q in range(size)]
    width = max(len(c) for row in cells for c in row)
    head = "b- \\ b+ | " + " | ".join(str(p).ljust(width) for p in range(size))
    lines = [head, "-" * len(head)]
    for q, row in enumerate(cells):
        lines.append(f"{q:>7} | " + " | ".join(c.ljust(width) for c in row))
    return "\n".join(lines) + "\n"
