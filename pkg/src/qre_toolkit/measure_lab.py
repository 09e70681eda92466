"""Winding maps f_j : B_2^n -> S^n and the vague limit of their measures.

Conventions: iota is stereographic projection from the north pole
N = (0, ..., 0, 1), so iota(0) is the south pole and iota(B^n) is the lower
hemisphere. The winding map F triples the angle in the plane of the
coordinates (p_1, p_{n+1}) and so fixes the equator {p_{n+1} = 0}.

Inside B_ij the map is f_j = sigma_ij^{-1} o F o sigma_ij o iota with
sigma_ij o iota = iota o rho_ij, rho_ij(x) = j (x - a_ij); outside U_j it is
iota. Everything is vectorized over a leading batch axis.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy import integrate

log = logging.getLogger(__name__)

FD_STEP = 1e-6


# ---------------------------------------------------------------------------
# sphere geometry


@dataclass(frozen=True)
class SpherePoint:
    coords: tuple[float, ...]

    def __post_init__(self):
        if abs(math.fsum(c * c for c in self.coords) - 1.0) > 1e-12:
            raise ValueError("SpherePoint must have unit length")

    @classmethod
    def of(cls, p) -> "SpherePoint":
        return cls(tuple(float(v) for v in np.asarray(p)))


def sphere_volume(n: int) -> float:
    """Volume of the unit n-sphere S^n."""
    return 2 * math.pi ** ((n + 1) / 2) / math.gamma((n + 1) / 2)


def stereographic(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    s = np.sum(x * x, axis=-1, keepdims=True)
    return np.concatenate([2 * x, s - 1], axis=-1) / (s + 1)


def stereographic_inv(p: np.ndarray, pole_tol: float = 1e-14) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    t = 1 - p[..., -1:]
    if np.any(t <= pole_tol):
        raise ValueError("stereographic_inv: point is the projection pole")
    return p[..., :-1] / t


def stereographic_diff(x: np.ndarray) -> np.ndarray:
    """Differential of iota, shape (..., n+1, n)."""
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    s = (np.sum(x * x, axis=-1) + 1)[..., None, None]
    top = 2 * np.eye(n) / s - 4 * x[..., :, None] * x[..., None, :] / s**2
    bottom = 4 * x[..., None, :] / s**2
    return np.concatenate([top, bottom], axis=-2)


def cap_volume(n: int, center: Sequence[float], radius: float) -> float:
    """vol(iota(B(center, radius))), a spherical cap.

    The boundary sphere of the ball maps to a round (n-1)-sphere on S^n, which
    is the section of S^n by a hyperplane; the two image points on the line
    through the centre give a diameter of it.
    """
    a = np.asarray(center, dtype=float)
    norm = np.linalg.norm(a)
    d_hat = a / norm if norm > 0 else np.eye(n)[0]
    p_plus = stereographic(a + radius * d_hat)
    p_minus = stereographic(a - radius * d_hat)
    mid = (p_plus + p_minus) / 2
    dist = np.linalg.norm(mid)
    if dist < 1e-15:
        alpha = math.pi / 2
    else:
        alpha = math.acos(min(1.0, dist))
        if stereographic(a) @ (mid / dist) < dist:
            alpha = math.pi - alpha  # the ball image contains the far side
    return spherical_cap(n, alpha)


def spherical_cap(n: int, alpha: float) -> float:
    """Volume of a geodesic ball of radius alpha in S^n."""
    if n == 2:
        return 2 * math.pi * (1 - math.cos(alpha))
    val, _ = integrate.quad(lambda th: math.sin(th) ** (n - 1), 0, alpha, epsabs=1e-14, epsrel=1e-13)
    return sphere_volume(n - 1) * val


# ---------------------------------------------------------------------------
# the winding map


def winding_F(p: np.ndarray) -> np.ndarray:
    """(x, r e^{i theta}) -> (x, r e^{3 i theta}) with z = p_1 + i p_{n+1}."""
    p = np.asarray(p, dtype=float)
    z = p[..., 0] + 1j * p[..., -1]
    r2 = np.abs(z) ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        w = np.where(r2 > 0, z**3 / np.where(r2 > 0, r2, 1), 0)
    out = p.copy()
    out[..., 0] = w.real
    out[..., -1] = w.imag
    return out


def winding_F_diff(p: np.ndarray) -> np.ndarray:
    """Ambient differential of F, shape (..., n+1, n+1); undefined on the axis z = 0."""
    p = np.asarray(p, dtype=float)
    m = p.shape[-1]
    z = p[..., 0] + 1j * p[..., -1]
    zb = np.conj(z)
    a = 2 * z / zb  # d/dz of z^2 / zbar
    b = -(z**2) / zb**2  # d/dzbar
    dx, dy = a + b, 1j * (a - b)
    out = np.broadcast_to(np.eye(m), p.shape[:-1] + (m, m)).copy()
    out[..., 0, 0], out[..., -1, 0] = dx.real, dx.imag
    out[..., 0, -1], out[..., -1, -1] = dy.real, dy.imag
    return out


def sphere_jacobian(f: np.ndarray, df: np.ndarray) -> np.ndarray:
    """Signed Jacobian of a map into S^n from its value and differential.

    Orientation is chosen so that iota is orientation preserving.
    """
    return -np.linalg.det(np.concatenate([df, f[..., :, None]], axis=-1))


class MapFamily:
    """The maps f_j on B_2^n."""

    def __init__(self, n: int, j: int):
        if n < 2 or j < 1:
            raise ValueError("need n >= 2 and j >= 1")
        self.n, self.j = n, j
        self.radius = 1.0 / j
        self.centers = np.zeros((j, n))
        self.centers[:, 0] = -1 + (2 * np.arange(1, j + 1) - 1) / j

    def check_disjoint(self) -> bool:
        """Exact check in units of 1/j: centres at odd numerators 2i - 1 - j, radius 1."""
        j = self.j
        nums = [2 * i - 1 - j for i in range(1, j + 1)]
        inside = all(abs(c) + 1 <= j for c in nums)
        apart = all(b - a >= 2 for a, b in zip(nums, nums[1:]))
        return inside and apart

    def ball_index(self, x: np.ndarray) -> np.ndarray:
        """Index of the ball B_ij containing x (0-based), or -1."""
        x = np.asarray(x, dtype=float)
        i = np.clip(np.floor((x[..., 0] + 1) * self.j / 2).astype(int), 0, self.j - 1)
        d2 = np.sum((x - self.centers[i]) ** 2, axis=-1)
        return np.where(d2 < self.radius**2, i, -1)

    # sigma_ij^{-1} in closed form, smooth through the pole
    def _sinv(self, q: np.ndarray, a: np.ndarray) -> np.ndarray:
        j = self.j
        t = 1 - q[..., -1]
        qp = q[..., :-1]
        aq = np.sum(a * qp, axis=-1)
        aa = np.sum(a * a, axis=-1)
        den = j * j * t * (aa + 1) + 2 * j * aq + 2 - t
        top = 2 * j * (j * t[..., None] * a + qp)
        last = j * j * t * (aa - 1) + 2 * j * aq + 2 - t
        return np.concatenate([top, last[..., None]], axis=-1) / den[..., None]

    def _sinv_diff(self, q: np.ndarray, a: np.ndarray) -> np.ndarray:
        j, n = self.j, self.n
        t = 1 - q[..., -1]
        qp = q[..., :-1]
        aq = np.sum(a * qp, axis=-1)
        aa = np.sum(a * a, axis=-1)
        den = j * j * t * (aa + 1) + 2 * j * aq + 2 - t
        val = self._sinv(q, a)
        shape = q.shape[:-1]
        dnum = np.zeros(shape + (n + 1, n + 1))
        dnum[..., :n, :n] = 2 * j * np.eye(n)
        dnum[..., :n, n] = -2 * j * j * a
        dnum[..., n, :n] = 2 * j * a
        dnum[..., n, n] = -j * j * (aa - 1) + 1
        dden = np.zeros(shape + (n + 1,))
        dden[..., :n] = 2 * j * a
        dden[..., n] = -j * j * (aa + 1) + 1
        return (dnum - val[..., :, None] * dden[..., None, :]) / den[..., None, None]

    def evaluate_inside(self, i, x: np.ndarray) -> np.ndarray:
        """The ball formula sigma^{-1} F sigma iota, usable up to the ball boundary."""
        x = np.asarray(x, dtype=float)
        a = self.centers[i]
        return self._sinv(winding_F(stereographic(self.j * (x - a))), a)

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        idx = self.ball_index(x)
        out = stereographic(x)
        m = idx >= 0
        if np.any(m):
            out[m] = self.evaluate_inside(idx[m], x[m])
        return out

    def differential(self, x: np.ndarray, method: str = "closed") -> np.ndarray:
        """Df_j, shape (..., n+1, n); ``method`` is "closed" or "central"."""
        x = np.asarray(x, dtype=float)
        if method == "central":
            return self._central(x)
        if method != "closed":
            raise ValueError(f"unknown differential method {method!r}")
        idx = self.ball_index(x)
        out = stereographic_diff(x)
        m = idx >= 0
        if np.any(m):
            xi, a = x[m], self.centers[idx[m]]
            u = self.j * (xi - a)
            p = stereographic(u)
            q = winding_F(p)
            out[m] = self._sinv_diff(q, a) @ winding_F_diff(p) @ stereographic_diff(u) * self.j
        return out

    def _central(self, x: np.ndarray) -> np.ndarray:
        # differences are taken on the formula of the piece containing x
        idx = self.ball_index(x)
        cols = []
        for k in range(self.n):
            e = np.zeros(self.n)
            e[k] = FD_STEP
            plus, minus = stereographic(x + e), stereographic(x - e)
            m = idx >= 0
            if np.any(m):
                plus[m] = self.evaluate_inside(idx[m], x[m] + e)
                minus[m] = self.evaluate_inside(idx[m], x[m] - e)
            cols.append((plus - minus) / (2 * FD_STEP))
        return np.stack(cols, axis=-1)

    def jacobian(self, x: np.ndarray, method: str = "closed") -> np.ndarray:
        return sphere_jacobian(self.evaluate(x), self.differential(x, method))

    def distortion(self, x: np.ndarray) -> np.ndarray:
        """||Df||^n / J_f pointwise (operator norm)."""
        df = self.differential(x)
        f = self.evaluate(x)
        norm = np.linalg.norm(df, ord=2, axis=(-2, -1))
        return norm**self.n / sphere_jacobian(f, df)

    # exact reference values
    def ball_mass_exact(self, i: int) -> float:
        return cap_volume(self.n, self.centers[i], self.radius) + sphere_volume(self.n)

    def mass_exact(self, radius: float) -> float:
        """Total mass over B(0, radius) for radius >= 1 (all balls included)."""
        if radius < 1:
            raise ValueError("closed form needs radius >= 1")
        return cap_volume(self.n, np.zeros(self.n), radius) + self.j * sphere_volume(self.n)


def local_degree(family: MapFamily, x0: Sequence[float], radius: float, samples: int = 4096) -> int:
    """Local degree of f_j at x0 (n = 2) from the winding of a small loop.

    The image loop is charted by stereographic projection from the antipode
    of f_j(x0), then the winding number around the chart image of f_j(x0)
    is counted.
    """
    if family.n != 2:
        raise ValueError("local_degree is implemented for n = 2")
    x0 = np.asarray(x0, dtype=float)
    th = np.linspace(0, 2 * np.pi, samples, endpoint=False)
    loop = x0 + radius * np.stack([np.cos(th), np.sin(th)], axis=-1)
    return _winding(family.evaluate(loop), family.evaluate(x0[None])[0])


def _winding(image: np.ndarray, center: np.ndarray) -> int:
    # rotate so that -center is the north pole, then chart
    c = center / np.linalg.norm(center)
    basis = np.linalg.qr(np.column_stack([-c, np.eye(len(c))]))[0]
    if basis[:, 0] @ -c < 0:
        basis[:, 0] *= -1
    # columns 1.. span the tangent plane; keep orientation consistent with iota
    rot = np.column_stack([basis[:, 1:], basis[:, 0]])
    if np.linalg.det(rot) < 0:
        rot[:, 0] *= -1
    pts = stereographic_inv(image @ rot)
    ctr = stereographic_inv((center @ rot)[None])[0]
    ang = np.arctan2(pts[:, 1] - ctr[1], pts[:, 0] - ctr[0])
    steps = np.diff(np.append(ang, ang[0]))
    steps = (steps + np.pi) % (2 * np.pi) - np.pi
    return int(np.round(steps.sum() / (2 * np.pi)))


# ---------------------------------------------------------------------------
# quadrature


@dataclass(frozen=True)
class QuadratureSpec:
    scheme: str = "midpoint"  # midpoint | stratified
    resolution: int = 2048  # cells per axis on [-2, 2]^n
    refine: int = 8  # subdivisions per axis of cells near discontinuities and peaks
    seed: int = 0
    chunk: int = 1 << 18

    def __post_init__(self):
        if self.scheme not in ("midpoint", "stratified"):
            raise ValueError(f"unknown quadrature scheme {self.scheme!r}")
        if self.resolution < 2 or self.refine < 1 or self.chunk < 1:
            raise ValueError("quadrature counts must be positive")

    def halved(self) -> "QuadratureSpec":
        return QuadratureSpec(self.scheme, self.resolution // 2, self.refine, self.seed, self.chunk)


@dataclass
class Samples:
    points: np.ndarray
    weights: np.ndarray
    jac: np.ndarray

    def integrate(self, values: np.ndarray | None = None, chunk: int = 1 << 18) -> float:
        """Deterministic sum: fixed chunks summed pairwise, chunk totals by fsum."""
        w = self.weights * self.jac if values is None else self.weights * self.jac * values
        return math.fsum(float(np.sum(w[s:s + chunk])) for s in range(0, len(w), chunk))


def sample_family(family: MapFamily, quad: QuadratureSpec, extent: float = 2.0) -> Samples:
    """Grid samples covering B(0, extent) with refinement at the sensitive cells.

    Cells are refined if they meet a discontinuity of the integrand (a ball
    boundary, |x| = 1 or |x| = extent) or sit within 4/j^2 of a ball centre
    while that scale is under-resolved: the map concentrates about half of
    each ball's mass there.
    """
    n, res = family.n, quad.resolution
    h = 2 * extent / res
    half_diag = h * math.sqrt(n) / 2
    axis = -extent + h * (np.arange(res) + 0.5)
    rng = np.random.default_rng(quad.seed)
    pts_out, w_out = [], []
    # process the grid slab by slab along the first axis to bound memory
    slab = max(1, quad.chunk // res ** (n - 1))
    for s in range(0, res, slab):
        grids = np.meshgrid(axis[s:s + slab], *([axis] * (n - 1)), indexing="ij")
        c = np.stack([g.ravel() for g in grids], axis=-1)
        r = np.linalg.norm(c, axis=-1)
        keep = r < extent + half_diag
        c, r = c[keep], r[keep]
        crit = (np.abs(r - extent) <= half_diag) | (np.abs(r - 1) <= half_diag)
        crit |= _near_balls(family, c, half_diag)
        plain = c[~crit]
        inside = np.linalg.norm(plain, axis=-1) < extent
        plain = plain[inside]
        if quad.scheme == "stratified":
            plain = plain + h * (rng.random(plain.shape) - 0.5)
        pts_out.append(plain)
        w_out.append(np.full(len(plain), h**n))
        if np.any(crit):
            sub = _subdivide(c[crit], h, quad.refine, quad.scheme, rng)
            sub = sub[np.linalg.norm(sub, axis=-1) < extent]
            pts_out.append(sub)
            w_out.append(np.full(len(sub), (h / quad.refine) ** n))
    pts = np.concatenate(pts_out)
    w = np.concatenate(w_out)
    jac = np.concatenate([family.jacobian(pts[k:k + quad.chunk]) for k in range(0, len(pts), quad.chunk)])
    return Samples(pts, w, jac)


def _near_balls(family: MapFamily, c: np.ndarray, half_diag: float) -> np.ndarray:
    j = family.j
    i0 = np.clip(np.floor((c[:, 0] + 1) * j / 2).astype(int), 0, j - 1)
    peak = 4.0 / j**2
    resolve_peak = 1.0 / j**2 < 8 * half_diag
    out = np.zeros(len(c), dtype=bool)
    for di in (-1, 0, 1):
        i = np.clip(i0 + di, 0, j - 1)
        d = np.linalg.norm(c - family.centers[i], axis=-1)
        out |= np.abs(d - family.radius) <= half_diag
        if resolve_peak:
            out |= d <= peak + half_diag
    return out


def _subdivide(cells: np.ndarray, h: float, m: int, scheme: str, rng) -> np.ndarray:
    n = cells.shape[1]
    offs = (np.arange(m) + 0.5) / m - 0.5
    grid = np.stack([g.ravel() for g in np.meshgrid(*([offs] * n), indexing="ij")], axis=-1) * h
    sub = (cells[:, None, :] + grid[None, :, :]).reshape(-1, n)
    if scheme == "stratified":
        sub = sub + (h / m) * (rng.random(sub.shape) - 0.5)
    return sub


@dataclass
class AreaResult:
    value: float
    error_estimate: float
    negative_jacobian: int  # samples with J_f < -tol (orientation bug detector)
    flagged: bool


def area(family: MapFamily, center=None, radius: float = 2.0, quad: QuadratureSpec | None = None,
         tol: float = 1e-9) -> AreaResult:
    """Integral of J_f over the ball B(center, radius) contained in B_2^n."""
    quad = quad or QuadratureSpec()
    center = np.zeros(family.n) if center is None else np.asarray(center, dtype=float)
    if np.linalg.norm(center) + radius > 2.0 + 1e-12:
        raise ValueError("region must lie in B_2^n")
    vals = []
    neg = 0
    for q in (quad, quad.halved()):
        smp = sample_family(family, q)
        ind = np.linalg.norm(smp.points - center, axis=-1) < radius
        vals.append(smp.integrate(ind.astype(float), quad.chunk))
        neg = max(neg, int(np.sum(smp.jac[ind] < -tol)))
    return AreaResult(vals[0], abs(vals[0] - vals[1]), neg, neg > 0)


def distortion_estimate(family: MapFamily, quad: QuadratureSpec | None = None, where: str = "all") -> float:
    """Max of ||Df||^n / J_f over grid samples in B_2^n: a lower bound for K.

    ``where`` restricts to the balls ("inside"), to their complement
    ("outside") or uses all samples.
    """
    quad = quad or QuadratureSpec(resolution=256, refine=1)
    smp = sample_family(family, quad)
    idx = family.ball_index(smp.points)
    sel = {"all": np.ones(len(idx), bool), "inside": idx >= 0, "outside": idx < 0}[where]
    pts = smp.points[sel]
    if len(pts) == 0:
        return float("nan")
    ratio = np.concatenate([family.distortion(pts[k:k + quad.chunk]) for k in range(0, len(pts), quad.chunk)])
    if np.any(~np.isfinite(ratio)) or np.any(ratio <= 0):
        log.warning("non-positive Jacobian among distortion samples")
    return float(np.nanmax(ratio))


def polar_ball_mass(family: MapFamily, i: int, n_r: int, n_theta: int | None = None) -> float:
    """Mass of B_ij by midpoint polar quadrature in the rescaled coordinate (n = 2)."""
    if family.n != 2:
        raise ValueError("polar quadrature is implemented for n = 2")
    n_theta = n_theta or 4 * n_r
    r = (np.arange(n_r) + 0.5) / n_r
    th = 2 * np.pi * (np.arange(n_theta) + 0.5) / n_theta
    rr, tt = np.meshgrid(r, th, indexing="ij")
    u = np.stack([rr * np.cos(tt), rr * np.sin(tt)], axis=-1).reshape(-1, 2)
    x = family.centers[i] + u / family.j
    jac = family.jacobian(x).reshape(rr.shape)
    # dx = du / j^n and du = r dr dtheta
    return math.fsum(float(v) for v in np.sum(jac * rr, axis=1)) * (1 / n_r) * (2 * np.pi / n_theta) / family.j**2


# ---------------------------------------------------------------------------
# test functions and the vague-convergence report


@dataclass(frozen=True)
class TestFunction:
    id: str
    type: str  # bump | cutoff | tent
    center: tuple[float, ...]
    radius: float
    inner: float = 0.0  # cutoff only: value 1 on B(center, inner)

    __test__ = False  # not a pytest class

    def __post_init__(self):
        if self.type not in ("bump", "cutoff", "tent"):
            raise ValueError(f"test function {self.id!r}: unknown type {self.type!r}")
        if not self.radius > 0:
            raise ValueError(f"test function {self.id!r}: radius must be positive")
        if self.type == "cutoff" and not 0 <= self.inner < self.radius:
            raise ValueError(f"test function {self.id!r}: need 0 <= inner < radius")
        if math.hypot(*self.center) + self.radius >= 2.0:
            raise ValueError(f"test function {self.id!r}: support leaves B_2")

    def __call__(self, x: np.ndarray) -> np.ndarray:
        c = np.zeros(x.shape[-1])
        c[:len(self.center)] = self.center
        d = np.linalg.norm(x - c, axis=-1)
        if self.type == "bump":
            return np.clip(1 - (d / self.radius) ** 2, 0, None) ** 2
        if self.type == "tent":
            return np.clip(1 - d / self.radius, 0, None)
        return np.clip((self.radius - d) / (self.radius - self.inner), 0, 1)

    def target(self) -> float:
        """Integral against half of H^1 on the segment J = [-1, 1] x 0."""
        def line(t):
            x = np.zeros((1, len(self.center)))
            x[0, 0] = t
            return float(self(x)[0])
        c0 = self.center[0]
        pts = [p for p in (c0 - self.radius, c0 - self.inner, c0, c0 + self.inner, c0 + self.radius) if -1 < p < 1]
        val, _ = integrate.quad(line, -1, 1, points=pts or None, epsabs=1e-13, epsrel=1e-12, limit=200)
        return 0.5 * val

    @classmethod
    def from_json(cls, d: dict) -> "TestFunction":
        allowed = {"id", "type", "center", "radius", "inner"}
        extra = set(d) - allowed
        if extra:
            raise ValueError(f"test function: unknown field(s) {sorted(extra)}")
        return cls(str(d["id"]), d["type"], tuple(float(v) for v in d["center"]), float(d["radius"]),
                   float(d.get("inner", 0.0)))


DEFAULT_BATTERY = [
    TestFunction("cutoff_unit", "cutoff", (0.0, 0.0), 1.5, inner=1.0),
    TestFunction("bump_right", "bump", (0.5, 0.0), 0.4),
    TestFunction("bump_left", "bump", (-0.5, 0.0), 0.3),
    TestFunction("bump_off_axis", "bump", (0.0, 0.5), 0.3),
    TestFunction("tent_positive", "tent", (0.6, 0.0), 0.35),
    TestFunction("bump_wide", "bump", (0.0, 0.0), 1.2),
]


def load_battery(text: str) -> list[TestFunction]:
    data = json.loads(text)
    items = data["functions"] if isinstance(data, dict) else data
    return [TestFunction.from_json(d) for d in items]


def battery_json(battery: Sequence[TestFunction]) -> str:
    return json.dumps({"functions": [asdict(t) for t in battery]}, indent=2) + "\n"


@dataclass
class JRecord:
    j: int
    A: float
    A_exact: float
    total: float
    total_exact: float
    doubling_ratio: float
    K_est: float
    ball_masses: list[float]
    ball_masses_exact: list[float]
    outside_fraction: float
    integrals: dict[str, float] = field(default_factory=dict)
    targets: dict[str, float] = field(default_factory=dict)

    def errors(self) -> dict[str, float]:
        return {k: abs(self.integrals[k] - self.targets[k]) for k in self.integrals}


@dataclass
class MeasureReport:
    n: int
    quad: QuadratureSpec
    records: list[JRecord]

    def to_json(self) -> dict:
        return {"n": self.n, "quadrature": asdict(self.quad), "records": [asdict(r) for r in self.records]}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["j", "A", "total", "doubling_ratio", "K_est", "psi_id", "I_j", "target", "abs_err"])
        for r in self.records:
            for pid in r.integrals:
                w.writerow([r.j, repr(r.A), repr(r.total), repr(r.doubling_ratio), repr(r.K_est), pid,
                            repr(r.integrals[pid]), repr(r.targets[pid]), repr(abs(r.integrals[pid] - r.targets[pid]))])
        return buf.getvalue()


def vague_convergence_report(n: int, j_list: Sequence[int], test_functions: Sequence[TestFunction] | None = None,
                             quad: QuadratureSpec | None = None,
                             k_quad: QuadratureSpec | None = None) -> MeasureReport:
    quad = quad or QuadratureSpec()
    k_quad = k_quad or QuadratureSpec(resolution=min(256, quad.resolution), refine=1, seed=quad.seed)
    battery = list(DEFAULT_BATTERY if test_functions is None else test_functions)
    targets = {t.id: t.target() for t in battery}
    records = []
    for j in j_list:
        fam = MapFamily(n, j)
        smp = sample_family(fam, quad)
        r = np.linalg.norm(smp.points, axis=-1)
        a_val = smp.integrate((r < 1).astype(float), quad.chunk)
        total = smp.integrate(None, quad.chunk)
        idx = fam.ball_index(smp.points)
        balls = [smp.integrate((idx == i).astype(float), quad.chunk) for i in range(j)]
        outside = smp.integrate((idx < 0).astype(float), quad.chunk)
        integrals = {t.id: smp.integrate(t(smp.points), quad.chunk) / a_val for t in battery}
        rec = JRecord(
            j=j, A=a_val, A_exact=fam.mass_exact(1.0), total=total, total_exact=fam.mass_exact(2.0),
            doubling_ratio=total / a_val, K_est=distortion_estimate(fam, k_quad),
            ball_masses=balls, ball_masses_exact=[fam.ball_mass_exact(i) for i in range(j)],
            outside_fraction=outside / a_val, integrals=integrals, targets=dict(targets),
        )
        log.info("j=%d A=%.6f ratio=%.4f", j, a_val, rec.doubling_ratio)
        records.append(rec)
    return MeasureReport(n, quad, records)

