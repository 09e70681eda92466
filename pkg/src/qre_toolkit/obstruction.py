"""Does H*(N) embed as a graded subalgebra of the exterior algebra of R^n?

Necessary conditions are decided exactly (rational arithmetic, re-checkable
certificates). If none fails, a multistart least-squares search looks for an
explicit embedding. A failed search proves nothing, and a found embedding
does not by itself make N quasiregularly elliptic; the report vocabulary
(Obstructed / Embeds / Unknown) keeps that asymmetry visible.
"""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from math import comb

import numpy as np
from scipy.optimize import least_squares

from . import SCHEMA, exact
from .cohomology import RingPresentation, exterior_power_map, validate
from .exterior import Multivector, wedge_tensor

log = logging.getLogger(__name__)

# Images are pushed to injectivity margin >= 1. Any embedding can be rescaled
# (degree-k part by lam^k) to reach this, and it keeps the residual tolerance
# meaningful: shrinking all images would otherwise drive it to 0 for free.
MARGIN_FLOOR = 1.0


@dataclass
class CheckResult:
    name: str
    passed: bool
    data: dict = field(default_factory=dict)
    certificate: dict | None = None
    derived: bool = False  # necessary condition derived here, not stated as such in the literature

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "derived_necessary_condition": self.derived,
            "data": self.data,
            "certificate": self.certificate,
        }


def check_betti_bounds(ring: RingPresentation) -> CheckResult:
    """b_k <= C(n, k) for every k."""
    n = ring.n
    bounds = [comb(n, k) for k in range(n + 1)]
    data = {"betti": list(ring.betti), "bounds": bounds}
    for k in range(n + 1):
        if ring.betti[k] > bounds[k]:
            cert = {"k": k, "betti_k": ring.betti[k], "binomial": bounds[k]}
            return CheckResult("check_betti_bounds", False, data, cert)
    data["tight"] = [k for k in range(n + 1) if ring.betti[k] == bounds[k]]
    return CheckResult("check_betti_bounds", True, data)


def check_exterior_power_h1(ring: RingPresentation) -> CheckResult:
    """The cup-product map Lambda^k H^1 -> H^k must be injective.

    An embedding restricts to an injection H^1 -> Lambda^1 R^n, whose exterior
    powers stay injective, and it intertwines cup and wedge products.
    """
    b1 = ring.betti[1]
    data = {"b1": b1, "ranks": {}}
    for k in range(2, min(ring.n, b1) + 1):
        m = exterior_power_map(ring, k)
        r = exact.rank(m)
        data["ranks"][str(k)] = {"rank": r, "domain_dim": len(m)}
        if r < len(m):
            # kernel of the map = left kernel of m (rows are images)
            kern = exact.nullspace(exact.transpose(m), len(m))[0]
            cert = {
                "k": k,
                "map_rows": [[str(v) for v in row] for row in m],
                "kernel_vector": [str(v) for v in kern],
                "rank": r,
                "domain_dim": len(m),
            }
            return CheckResult("check_exterior_power_h1", False, data, cert, derived=True)
    return CheckResult("check_exterior_power_h1", True, data, derived=True)


def check_definiteness_bounds(ring: RingPresentation) -> CheckResult:
    """beta^+/- of the middle pairing are at most C(4m, 2m) / 2 (n = 4m only)."""
    n = ring.n
    if n % 4:
        return CheckResult("check_definiteness_bounds", True, {"applicable": False})
    g = ring.intersection_matrix()
    diag, p_mat = exact.congruence_diagonalize(g)
    plus = sum(1 for d in diag if d > 0)
    minus = sum(1 for d in diag if d < 0)
    bound = comb(n, n // 2) // 2
    data = {"applicable": True, "beta_plus": plus, "beta_minus": minus, "bound": bound}
    if plus > bound or minus > bound:
        cert = {
            "gram": [[str(v) for v in row] for row in g],
            "congruence": [[str(v) for v in row] for row in p_mat],
            "diagonal": [str(d) for d in diag],
            "beta_plus": plus,
            "beta_minus": minus,
            "bound": bound,
        }
        return CheckResult("check_definiteness_bounds", False, data, cert)
    return CheckResult("check_definiteness_bounds", True, data)


def verify_definiteness_certificate(gram, cert: dict) -> bool:
    """Re-check P^T G P = diag and det P != 0 from a definiteness certificate."""
    g = [[Fraction(v) for v in row] for row in gram]
    p = [[Fraction(v) for v in row] for row in cert["congruence"]]
    d = exact.matmul(exact.matmul(exact.transpose(p), g), p)
    diag = [Fraction(v) for v in cert["diagonal"]]
    ok = all(d[i][j] == (diag[i] if i == j else 0) for i in range(len(d)) for j in range(len(d)))
    return ok and exact.determinant(p) != 0


def necessary_checks(ring: RingPresentation) -> list[CheckResult]:
    checks = [check_betti_bounds(ring), check_exterior_power_h1(ring)]
    if ring.n % 4 == 0:
        checks.append(check_definiteness_bounds(ring))
    return checks


# ---------------------------------------------------------------------------
# numeric search


@dataclass(frozen=True)
class SearchConfig:
    restarts: int = 64
    max_iters: int = 400
    tol_residual: float = 1e-8
    tol_injectivity: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not (self.tol_residual > 0 and self.tol_injectivity > 0):
            raise ValueError("tolerances must be positive")

    @classmethod
    def from_json(cls, data: dict) -> "SearchConfig":
        known = {k: data[k] for k in ("restarts", "max_iters", "tol_residual", "tol_injectivity", "seed") if k in data}
        unknown = set(data) - set(known)
        if unknown:
            raise ValueError(f"unknown config field(s): {sorted(unknown)}")
        return cls(**known)


@dataclass
class EmbeddingWitness:
    images: dict[tuple[int, int], Multivector]  # (degree, basis index) -> image
    residual: float
    injectivity_margins: dict[int, float]
    restart: int

    def to_json(self, ring: RingPresentation) -> dict:
        return {
            "residual": self.residual,
            "injectivity_margins": {str(k): v for k, v in self.injectivity_margins.items()},
            "restart": self.restart,
            "images": [
                {"degree": d, "index": a, "label": ring.labels[d][a], "image": mv.to_json()}
                for (d, a), mv in sorted(self.images.items())
            ],
        }


@dataclass
class NotFound:
    restarts: int
    best_residual: float
    best_margins: dict[int, float]
    best_restart: int


class EmbeddingProblem:
    """Least-squares formulation of the search for a graded algebra embedding.

    Unknowns are the images of all positive-degree basis classes, stored
    degree by degree as matrices ``P[k]`` of shape (b_k, C(n, k)). The degree-0
    class is fixed to map to 1. Residuals are

    * ``P[j][a] ^ P[k][b] - sum_c sc[j,k][a,b,c] P[j+k][c]`` for all basis
      pairs with j, k >= 1 and j + k <= n;
    * one hinge ``max(0, MARGIN_FLOOR - sigma_min(P[k]))`` per degree.
    """

    def __init__(self, ring: RingPresentation):
        self.ring = ring
        n = self.n = ring.n
        b = ring.betti
        self.degrees = [k for k in range(1, n + 1) if b[k]]
        self.shapes = {k: (b[k], comb(n, k)) for k in self.degrees}
        self.offsets = {}
        off = 0
        for k in self.degrees:
            self.offsets[k] = off
            off += b[k] * comb(n, k)
        self.size = off
        self.pairs = []
        for j in self.degrees:
            for k in self.degrees:
                if j + k <= n:
                    s = np.array(ring.sc[(j, k)].astype(float))
                    self.pairs.append((j, k, s, wedge_tensor(n, j, k)))
        self.n_relations = sum(b[j] * b[k] * comb(n, j + k) for j, k, _, _ in self.pairs)

    def unpack(self, theta: np.ndarray) -> dict[int, np.ndarray]:
        return {
            k: theta[self.offsets[k]:self.offsets[k] + self.shapes[k][0] * self.shapes[k][1]].reshape(self.shapes[k])
            for k in self.degrees
        }

    def relation_residuals(self, theta: np.ndarray) -> np.ndarray:
        p = self.unpack(theta)
        out = []
        for j, k, s, w in self.pairs:
            prod = np.einsum("ap,bq,pqr->abr", p[j], p[k], w)
            if self.ring.betti[j + k]:
                prod = prod - np.einsum("abc,cr->abr", s, p[j + k])
            out.append(prod.ravel())
        return np.concatenate(out) if out else np.zeros(0)

    def margins(self, theta: np.ndarray) -> dict[int, float]:
        p = self.unpack(theta)
        return {k: _sigma_min(p[k])[0] for k in self.degrees}

    def residuals(self, theta: np.ndarray) -> np.ndarray:
        hinge = [max(0.0, MARGIN_FLOOR - m) for m in self.margins(theta).values()]
        return np.concatenate([self.relation_residuals(theta), np.array(hinge)])

    def jacobian(self, theta: np.ndarray) -> np.ndarray:
        p = self.unpack(theta)
        jac = np.zeros((self.n_relations + len(self.degrees), self.size))
        row = 0
        for j, k, s, w in self.pairs:
            bj, bk = self.shapes[j][0], self.shapes[k][0]
            cj, ck = self.shapes[j][1], self.shapes[k][1]
            cjk = comb(self.n, j + k)
            nrows = bj * bk * cjk
            blk = slice(row, row + nrows)
            # d/dP_j[a', p] of A[a, b, r] = delta(a, a') sum_q P_k[b, q] W[p, q, r]
            t = np.einsum("bq,pqr->bpr", p[k], w)
            dj = np.einsum("ac,bpr->abrcp", np.eye(bj), t).reshape(nrows, bj * cj)
            # d/dP_k[b', q] of A[a, b, r] = delta(b, b') sum_p P_j[a, p] W[p, q, r]
            u = np.einsum("ap,pqr->aqr", p[j], w)
            dk = np.einsum("bd,aqr->abrdq", np.eye(bk), u).reshape(nrows, bk * ck)
            jac[blk, self.offsets[j]:self.offsets[j] + bj * cj] += dj
            jac[blk, self.offsets[k]:self.offsets[k] + bk * ck] += dk
            if self.ring.betti[j + k]:
                bjk = self.shapes[j + k][0]
                dt = -np.einsum("abc,rs->abrcs", s, np.eye(cjk)).reshape(nrows, bjk * cjk)
                jac[blk, self.offsets[j + k]:self.offsets[j + k] + bjk * cjk] += dt
            row += nrows
        for k in self.degrees:
            sigma, grad = _sigma_min(p[k])
            if sigma < MARGIN_FLOOR and grad is not None:
                bk, ck = self.shapes[k]
                jac[row, self.offsets[k]:self.offsets[k] + bk * ck] = -grad.ravel()
            row += 1
        return jac

    def objective(self, theta: np.ndarray) -> float:
        r = self.residuals(theta)
        return float(r @ r)

    def gradient(self, theta: np.ndarray) -> np.ndarray:
        return 2.0 * self.jacobian(theta).T @ self.residuals(theta)

    def images(self, theta: np.ndarray) -> dict[tuple[int, int], Multivector]:
        p = self.unpack(theta)
        out = {(0, 0): Multivector.scalar(self.n, 1.0, exact=False)}
        for k in self.degrees:
            for a in range(self.shapes[k][0]):
                out[(k, a)] = Multivector.from_vector(self.n, k, p[k][a])
        return out


def _sigma_min(m: np.ndarray) -> tuple[float, np.ndarray | None]:
    """Smallest singular value relevant for injectivity of the rows of m, and its gradient."""
    rows, cols = m.shape
    if rows > cols:
        return 0.0, None
    u, s, vt = np.linalg.svd(m, full_matrices=False)
    return float(s[-1]), np.outer(u[:, -1], vt[-1])


def search_embedding(ring: RingPresentation, config: SearchConfig | None = None) -> EmbeddingWitness | NotFound:
    config = config or SearchConfig()
    problem = EmbeddingProblem(ring)
    seeds = np.random.SeedSequence(config.seed).spawn(config.restarts)
    best = None
    for restart, ss in enumerate(seeds):
        rng = np.random.default_rng(ss)
        theta0 = rng.normal(size=problem.size)
        if problem.size:
            sol = least_squares(
                problem.residuals, theta0, jac=problem.jacobian, method="trf",
                max_nfev=config.max_iters, ftol=1e-15, xtol=1e-15, gtol=1e-15,
            )
            theta = sol.x
        else:
            theta = theta0
        rel = problem.relation_residuals(theta)
        residual = float(rel @ rel)
        margins = problem.margins(theta)
        ok = residual < config.tol_residual and all(m > config.tol_injectivity for m in margins.values())
        log.debug("restart %d: residual %.3e margins %s", restart, residual, margins)
        if ok:
            return EmbeddingWitness(problem.images(theta), residual, margins, restart)
        key = (residual + sum(max(0.0, MARGIN_FLOOR - m) ** 2 for m in margins.values()), restart)
        if best is None or key < best[0]:
            best = (key, residual, margins, restart)
    return NotFound(config.restarts, best[1], best[2], best[3])


def witness_residual(ring: RingPresentation, images: dict[tuple[int, int], Multivector]) -> float:
    """Sum of squared violations of Phi(x) ^ Phi(y) = Phi(x.y), via Multivector.wedge."""
    n = ring.n
    total = 0.0
    for j in range(1, n + 1):
        for k in range(1, n + 1 - j):
            s = ring.sc[(j, k)]
            for a in range(ring.betti[j]):
                for b in range(ring.betti[k]):
                    lhs = images[(j, a)] ^ images[(k, b)]
                    rhs = Multivector(n, {}, exact=False)
                    for c in range(ring.betti[j + k]):
                        if s[a, b, c]:
                            rhs = rhs + images[(j + k, c)] * float(s[a, b, c])
                    diff = lhs - rhs
                    total += sum(float(v) ** 2 for v in diff.terms.values())
    return total


# ---------------------------------------------------------------------------
# verdict


@dataclass
class ObstructionReport:
    verdict: str  # Embeds | Obstructed | Unknown
    checks: list[CheckResult]
    search_stats: dict
    witness: EmbeddingWitness | None = None
    obstructed_by: str | None = None
    note: str = ""

    def to_json(self, ring: RingPresentation, config: SearchConfig) -> dict:
        return {
            "schema": SCHEMA,
            "ring": {"name": ring.name, "n": ring.n, "betti": list(ring.betti)},
            "config": asdict(config),
            "verdict": self.verdict,
            "obstructed_by": self.obstructed_by,
            "note": self.note,
            "checks": [c.to_json() for c in self.checks],
            "search_stats": self.search_stats,
            "witness": self.witness.to_json(ring) if self.witness else None,
        }


NOTE_EMBEDS = (
    "An embedding of graded algebras exists numerically. Embeddability is necessary, "
    "not sufficient, for quasiregular ellipticity; no ellipticity claim is made."
)
NOTE_OBSTRUCTED = "A necessary condition for embeddability fails exactly: N is not quasiregularly elliptic."
NOTE_UNKNOWN = "All exact checks pass but the search found no embedding; this is not an obstruction."


def verdict(ring: RingPresentation, config: SearchConfig | None = None) -> ObstructionReport:
    config = config or SearchConfig()
    rep = validate(ring)
    if not rep.valid:
        raise ValueError(f"invalid ring: {rep.first_failure}")
    checks = necessary_checks(ring)
    failed = next((c for c in checks if not c.passed), None)
    if failed:
        return ObstructionReport("Obstructed", checks, {"skipped": True}, obstructed_by=failed.name,
                                 note=NOTE_OBSTRUCTED)
    result = search_embedding(ring, config)
    if isinstance(result, EmbeddingWitness):
        stats = {
            "restarts_used": result.restart + 1,
            "best_residual": result.residual,
            "min_singular_values": {str(k): v for k, v in result.injectivity_margins.items()},
        }
        return ObstructionReport("Embeds", checks, stats, witness=result, note=NOTE_EMBEDS)
    stats = {
        "restarts_used": result.restarts,
        "best_residual": result.best_residual,
        "min_singular_values": {str(k): v for k, v in result.best_margins.items()},
        "best_restart": result.best_restart,
    }
    return ObstructionReport("Unknown", checks, stats, note=NOTE_UNKNOWN)
