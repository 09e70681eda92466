"""Normalized pullbacks of torus forms under coverings and the rotated family h_Q.

The torus is R^n / 2 pi Z^n with the covering pi(x) = (e^{i x_1}, ...), so
pi^* theta_i = dx_i and the harmonic forms are the constant ones. A constant
form on R^n is a numeric or exact :class:`Multivector`.

For f = pi o G on B_2^n, the normalized pullback is
f^!(alpha) = A(f)^{-k/n} G^*(alpha) with A(f) the integral of J_G over B^n.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy import linalg, stats

from .exterior import Multivector, basis, complement, merge_sign


def unit_ball_volume(n: int) -> float:
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


# ---------------------------------------------------------------------------
# affine rescalings of the covering


@dataclass(frozen=True)
class AffineMapSpec:
    """T_{a,r}(x) = r x + a."""

    a: tuple[float, ...]
    r: float

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError(f"scale r must be positive, got {self.r}")

    @property
    def n(self) -> int:
        return len(self.a)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.r * np.asarray(x, dtype=float) + np.asarray(self.a)


def pullback_affine(form: Multivector, spec: AffineMapSpec) -> Multivector:
    """T_{a,r}^* of a constant form: the degree-k part scales by r^k."""
    if form.n != spec.n:
        raise ValueError("dimension mismatch between form and map")
    r = Fraction(spec.r) if form.exact else float(spec.r)
    return Multivector(form.n, {i: c * r ** len(i) for i, c in form.terms.items()}, form.exact)


def covering_area(spec: AffineMapSpec) -> float:
    """A(pi o T_{a,r}) = r^n m_n(B^n): pi is a local isometry."""
    return spec.r ** spec.n * unit_ball_volume(spec.n)


def normalized_pullback_affine(form: Multivector, spec: AffineMapSpec) -> Multivector:
    """pi_{a,r}^!(form) for a pure degree 1 <= k <= n-1 constant form.

    A^{k/n} = r^k m_n^{k/n}; the r^k from the pullback is divided by the r^k
    from the area in exact rational arithmetic, so the output does not
    depend on (a, r) to the last bit.
    """
    n = form.n
    k = form.pure_degree()
    if k is None or not 1 <= k <= n - 1:
        raise ValueError("normalized_pullback_affine needs a pure degree 1 <= k <= n-1")
    if form.n != spec.n:
        raise ValueError("dimension mismatch between form and map")
    r = Fraction(spec.r)
    ratio = r**k / r**k
    scale = float(ratio) * unit_ball_volume(n) ** (-k / n)
    return Multivector(n, {i: float(c) * scale for i, c in form.terms.items()}, exact=False)


# ---------------------------------------------------------------------------
# rotations


def rotation_log(q: np.ndarray) -> np.ndarray:
    """Principal logarithm of a rotation via the real Schur form.

    Angle-pi planes come out of the Schur form as pairs of -1 entries on
    the diagonal; consecutive pairs are grouped in order, which fixes one of
    the non-unique geodesics.
    """
    q = np.asarray(q, dtype=float)
    t, z = linalg.schur(q, output="real")
    n = len(q)
    gen = np.zeros((n, n))
    i = 0
    neg = []
    while i < n:
        if i + 1 < n and abs(t[i + 1, i]) > 1e-12:
            ang = math.atan2(t[i + 1, i], t[i, i])
            gen[i + 1, i], gen[i, i + 1] = ang, -ang
            i += 2
            continue
        if t[i, i] < 0:
            neg.append(i)
        i += 1
    if len(neg) % 2:
        raise ValueError("matrix is not a rotation (odd number of -1 eigenvalues)")
    for a, b in zip(neg[::2], neg[1::2]):
        gen[b, a], gen[a, b] = math.pi, -math.pi
    return z @ gen @ z.T


@dataclass(frozen=True)
class RotatedFamilySpec:
    """h_Q: rotate by Q on B(a_j, r_j/2), interpolate on the annulus, identity elsewhere.

    Balls are B_j = B(2^j e_1, j) for j >= j_start; they are pairwise
    disjoint only from j = 3 on.
    """

    Q: tuple[tuple[float, ...], ...]
    j_start: int = 3

    def __post_init__(self):
        q = np.asarray(self.Q, dtype=float)
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise ValueError("Q must be a square matrix")
        if np.max(np.abs(q.T @ q - np.eye(len(q)))) > 1e-12 or abs(np.linalg.det(q) - 1) > 1e-12:
            raise ValueError("Q must be special orthogonal")
        if np.allclose(q, np.eye(len(q)), atol=1e-15, rtol=0):
            raise ValueError("Q must not be the identity")
        if self.j_start < 1:
            raise ValueError("j_start must be >= 1")

    @property
    def n(self) -> int:
        return len(self.Q)

    @cached_property
    def q(self) -> np.ndarray:
        return np.asarray(self.Q, dtype=float)

    @cached_property
    def log(self) -> np.ndarray:
        return rotation_log(self.q)

    def q_t(self, t) -> np.ndarray:
        """Q_t = exp(t log Q), vectorized over t."""
        t = np.asarray(t, dtype=float)
        if t.ndim == 0:
            return linalg.expm(float(t) * self.log)
        return np.stack([linalg.expm(float(s) * self.log) for s in t.ravel()]).reshape(t.shape + (self.n, self.n))

    def ball(self, j: int) -> tuple[np.ndarray, float]:
        a = np.zeros(self.n)
        a[0] = 2.0**j
        return a, float(j)

    def balls_disjoint(self, j_max: int) -> bool:
        """Integer check: 2^{j+1} - 2^j >= (j + 1) + j for consecutive balls."""
        return all(2 ** (j + 1) - 2**j >= 2 * j + 1 for j in range(self.j_start, j_max))

    def ball_index(self, x: np.ndarray) -> np.ndarray:
        """Index j of the ball containing x, or 0."""
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1], dtype=int)
        x1 = x[..., 0]
        guess = np.floor(np.log2(np.maximum(x1, 1.0))).astype(int)
        for d in (-1, 0, 1, 2):
            j = np.maximum(guess + d, self.j_start)
            a1 = 2.0**j
            d2 = (x1 - a1) ** 2 + np.sum(x[..., 1:] ** 2, axis=-1)
            hit = (d2 < j.astype(float) ** 2) & (out == 0)
            out = np.where(hit, j, out)
        return out


def quarter_turn(n: int = 2, plane: tuple[int, int] = (0, 1), j_start: int = 3) -> RotatedFamilySpec:
    q = np.eye(n)
    a, b = plane
    q[a, a] = q[b, b] = 0.0
    q[b, a], q[a, b] = 1.0, -1.0
    return RotatedFamilySpec(tuple(map(tuple, q)), j_start)


def _time(s: np.ndarray) -> np.ndarray:
    return np.clip(2 - 2 * s, 0.0, 1.0)


def _expm_batch(spec: RotatedFamilySpec, t: np.ndarray) -> np.ndarray:
    # exp(t L) through the eigen-decomposition of the normal matrix L
    w, v = _log_eig(spec)
    return np.real(np.einsum("ij,...j,kj->...ik", v, np.exp(t[..., None] * w), v.conj()))


_EIG_CACHE: dict = {}


def _log_eig(spec: RotatedFamilySpec):
    key = spec.Q
    if key not in _EIG_CACHE:
        # L is real skew, so i L is Hermitian: unitary eigenvectors
        lam, v = np.linalg.eigh(1j * spec.log)
        _EIG_CACHE[key] = (-1j * lam, v)
    return _EIG_CACHE[key]


def evaluate_hQ(spec: RotatedFamilySpec, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = x.copy()
    idx = spec.ball_index(x)
    m = idx > 0
    if not np.any(m):
        return out
    xm = x[m]
    a = np.zeros_like(xm)
    a[:, 0] = 2.0 ** idx[m]
    r = idx[m].astype(float)
    u = (xm - a) / r[:, None]
    s = np.linalg.norm(u, axis=-1)
    rot = _expm_batch(spec, np.where(s < 0.5, 1.0, _time(s)))
    out[m] = a + r[:, None] * np.einsum("bij,bj->bi", rot, u)
    return out


def hQ_inverse(spec: RotatedFamilySpec, y: np.ndarray) -> np.ndarray:
    """Inverse of h_Q: each sphere about a_j is preserved, so the time is read off |y - a_j|."""
    y = np.asarray(y, dtype=float)
    out = y.copy()
    idx = spec.ball_index(y)
    m = idx > 0
    if not np.any(m):
        return out
    ym = y[m]
    a = np.zeros_like(ym)
    a[:, 0] = 2.0 ** idx[m]
    r = idx[m].astype(float)
    v = (ym - a) / r[:, None]
    s = np.linalg.norm(v, axis=-1)
    rot = _expm_batch(spec, np.where(s < 0.5, 1.0, _time(s)))
    out[m] = a + r[:, None] * np.einsum("bji,bj->bi", rot, v)
    return out


def hQ_differential(spec: RotatedFamilySpec, x: np.ndarray) -> np.ndarray:
    """Dh_Q in closed form: Q_t - 2 (Q_t L u) (x - a)^T / |x - a| on the annulus."""
    x = np.asarray(x, dtype=float)
    n = spec.n
    out = np.broadcast_to(np.eye(n), x.shape[:-1] + (n, n)).copy()
    idx = spec.ball_index(x)
    m = idx > 0
    if not np.any(m):
        return out
    xm = x[m]
    a = np.zeros_like(xm)
    a[:, 0] = 2.0 ** idx[m]
    r = idx[m].astype(float)
    u = (xm - a) / r[:, None]
    s = np.linalg.norm(u, axis=-1)
    inner = s < 0.5
    rot = _expm_batch(spec, np.where(inner, 1.0, _time(s)))
    lu = np.einsum("ij,bj->bi", spec.log, u)
    qlu = np.einsum("bij,bj->bi", rot, lu)
    with np.errstate(invalid="ignore", divide="ignore"):
        unit = u / s[:, None]
    shear = 2 * qlu[:, :, None] * unit[:, None, :]
    out[m] = np.where(inner[:, None, None], rot, rot - shear)
    return out


def hQ_central_differential(spec: RotatedFamilySpec, x: np.ndarray, step: float = 1e-6) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    cols = []
    for k in range(spec.n):
        e = np.zeros(spec.n)
        e[k] = step
        cols.append((evaluate_hQ(spec, x + e) - evaluate_hQ(spec, x - e)) / (2 * step))
    return np.stack(cols, axis=-1)


def annulus_samples(spec: RotatedFamilySpec, j: int, count: int, seed: int = 0,
                    region: str = "annulus") -> np.ndarray:
    """Random points of B_j in the given region: annulus | inner | outside (just beyond B_j)."""
    rng = np.random.default_rng(seed)
    a, r = spec.ball(j)
    lo, hi = {"annulus": (0.5, 1.0), "inner": (0.0, 0.5), "outside": (1.0, 1.2)}[region]
    d = rng.normal(size=(count, spec.n))
    d /= np.linalg.norm(d, axis=-1, keepdims=True)
    # stay off the interfaces, which are measure zero anyway
    s = rng.uniform(lo, hi, count)
    s = np.clip(s, lo + 1e-9, hi - 1e-9)
    return a + r * s[:, None] * d


def hQ_distortion_estimate(spec: RotatedFamilySpec, samples: np.ndarray) -> float:
    """Sampled max of ||Dh||^n / J_h. Degenerate Jacobians raise."""
    dh = hQ_differential(spec, samples)
    jac = np.linalg.det(dh)
    if np.any(jac <= 1e-12):
        raise ValueError("degenerate Jacobian among samples")
    return float(np.max(np.linalg.norm(dh, ord=2, axis=(-2, -1)) ** spec.n / jac))


# ---------------------------------------------------------------------------
# quadrature on balls and test forms


def ball_rule(center: Sequence[float], radius: float, nodes: int, splits: Sequence[float] = ()) -> tuple[np.ndarray, np.ndarray]:
    """Product rule on B(center, radius) for n = 2 or 3.

    Gauss-Legendre in the radius (optionally split at the given radii, so
    interfaces of piecewise-smooth integrands fall on panel edges),
    trapezoid in the periodic angle and Gauss-Legendre in cos(polar angle).
    """
    c = np.asarray(center, dtype=float)
    n = len(c)
    edges = [0.0] + sorted(s for s in splits if 0 < s < radius) + [radius]
    gx, gw = np.polynomial.legendre.leggauss(nodes)
    rs, rw = [], []
    for lo, hi in zip(edges, edges[1:]):
        rs.append(lo + (hi - lo) * (gx + 1) / 2)
        rw.append(gw * (hi - lo) / 2)
    r, wr = np.concatenate(rs), np.concatenate(rw)
    n_phi = 2 * nodes
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    wphi = np.full(n_phi, 2 * np.pi / n_phi)
    if n == 2:
        rr, pp = np.meshgrid(r, phi, indexing="ij")
        pts = np.stack([rr * np.cos(pp), rr * np.sin(pp)], axis=-1).reshape(-1, 2)
        w = (wr[:, None] * r[:, None] * wphi[None, :]).ravel()
        return c + pts, w
    if n == 3:
        cx, cw = np.polynomial.legendre.leggauss(nodes)
        rr, cc, pp = np.meshgrid(r, cx, phi, indexing="ij")
        ss = np.sqrt(1 - cc**2)
        pts = np.stack([rr * ss * np.cos(pp), rr * ss * np.sin(pp), rr * cc], axis=-1).reshape(-1, 3)
        w = (wr[:, None, None] * r[:, None, None] ** 2 * cw[None, :, None] * wphi[None, None, :]).ravel()
        return c + pts, w
    raise NotImplementedError("ball_rule supports n = 2 and n = 3")


def bump_integral(n: int, radius: float) -> float:
    """Integral of (1 - |y|^2 / rho^2)^2 over R^n: rho^n vol(S^{n-1}) * 8 / (n (n+2) (n+4))."""
    sphere = 2 * math.pi ** (n / 2) / math.gamma(n / 2)
    return radius**n * sphere * 8 / (n * (n + 2) * (n + 4))


@dataclass(frozen=True)
class TestForm:
    """phi = b(x) dx_K with the bump b = (1 - |x - c|^2 / rho^2)^2_+."""

    center: tuple[float, ...]
    radius: float
    K: tuple[int, ...]

    __test__ = False

    def profile(self, x: np.ndarray) -> np.ndarray:
        d2 = np.sum((x - np.asarray(self.center)) ** 2, axis=-1)
        return np.clip(1 - d2 / self.radius**2, 0, None) ** 2

    def partner(self, n: int) -> tuple[tuple[int, ...], int]:
        """The multi-index J with dx_K ^ dx_J = sign * vol, and that sign."""
        j = complement(n, self.K)
        return j, merge_sign(self.K, j)

    def to_json(self) -> dict:
        return {"center": list(self.center), "radius": self.radius, "K": list(self.K)}


_BUMP_SITES = [((0.0, 0.0), 0.5), ((0.4, 0.2), 0.3), ((-0.3, 0.35), 0.35), ((0.1, -0.5), 0.3)]


def bump_form_battery(n: int, degree: int) -> list[TestForm]:
    """8 bump-profile test forms of the given degree, all supported in B^n."""
    idx = basis(n, degree)
    forms = []
    for c, rho in _BUMP_SITES:
        center = tuple(list(c) + [0.0] * (n - 2))
        for k in range(2):
            forms.append(TestForm(center, rho, idx[k % len(idx)] if len(idx) > 1 else idx[0]))
    return forms


def _minor_coeffs(df: np.ndarray, rows: tuple[int, ...], cols: tuple[int, ...]) -> np.ndarray:
    """Coefficient of dx_cols in G^* dx_rows: det of the (rows, cols) minor of DG."""
    r = [i - 1 for i in rows]
    c = [i - 1 for i in cols]
    return np.linalg.det(df[..., r, :][..., :, c]) if r else np.ones(df.shape[:-2])


# ---------------------------------------------------------------------------
# limits of normalized pullbacks


@dataclass
class DiscrepancyReport:
    sequence: str
    k: int
    j_values: list[int]
    correct: list[float]  # max over (I, phi) of delta_j against the right target
    wrong: list[float]  # min over pairs with nonzero floor of delta_j / floor against the wrong target
    floor: list[dict] = field(default_factory=list)
    battery: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "sequence": self.sequence, "k": self.k, "j": self.j_values,
            "delta_correct": self.correct, "wrong_over_floor": self.wrong,
            "floors": self.floor, "battery": self.battery,
        }


def sequence_map(spec: RotatedFamilySpec, sequence: str, j: int) -> AffineMapSpec:
    n = spec.n
    if sequence == "centered":
        a = [0.0] * n
        a[0] = -float(j)
        return AffineMapSpec(tuple(a), float(j))
    if sequence == "ball_following":
        a, r = spec.ball(j)
        return AffineMapSpec(tuple(a), r / 2)
    raise ValueError(f"unknown sequence {sequence!r}")


def limit_discrepancy(spec: RotatedFamilySpec, k: int, sequence: str, j_max: int = 8,
                      nodes: int = 48) -> DiscrepancyReport:
    """delta_j = |int phi ^ (f_j^! theta_I - target)| over the shipped battery.

    f = pi o h_Q, f_j = f o T_j. h_Q preserves volume, so A(f_j) = r^n m_n and
    f_j^! theta_I = m_n^{-k/n} (minors of Dh_Q at T_j x). The targets are
    L_pi theta_I = m_n^{-k/n} dx_I and Q^* L_pi theta_I.
    """
    n = spec.n
    if not 1 <= k <= n - 1:
        raise ValueError("need 1 <= k <= n-1")
    if sequence not in ("centered", "ball_following"):
        raise ValueError(f"unknown sequence {sequence!r}")
    norm = unit_ball_volume(n) ** (-k / n)
    battery = bump_form_battery(n, n - k)
    q = spec.q
    j_values = list(range(1 if sequence == "centered" else spec.j_start, j_max + 1))
    rules = [ball_rule(phi.center, phi.radius, nodes) for phi in battery]
    floors = []
    pairs = []
    for I in basis(n, k):
        for p_idx, phi in enumerate(battery):
            J, sign = phi.partner(n)
            lpi = float(I == J)
            qlpi = float(np.linalg.det(q[np.ix_([i - 1 for i in I], [i - 1 for i in J])]))
            floor = abs(sign * norm * (qlpi - lpi)) * bump_integral(n, phi.radius)
            floors.append({"I": list(I), "phi": p_idx, "floor": floor})
            right, wrong = (lpi, qlpi) if sequence == "centered" else (qlpi, lpi)
            pairs.append((I, p_idx, J, sign, right, wrong, floor))
    correct, wrong_ratio = [], []
    for j in j_values:
        t = sequence_map(spec, sequence, j)
        dh = [hQ_differential(spec, t(pts)) for pts, _ in rules]
        worst, ratio = 0.0, math.inf
        for I, p_idx, J, sign, right, wrong, floor in pairs:
            pts, w = rules[p_idx]
            b = battery[p_idx].profile(pts)
            coeff = _minor_coeffs(dh[p_idx], I, J)
            d_right = abs(math.fsum(sign * norm * w * b * (coeff - right)))
            worst = max(worst, d_right)
            if floor > 0:
                d_wrong = abs(math.fsum(sign * norm * w * b * (coeff - wrong)))
                ratio = min(ratio, d_wrong / floor)
        correct.append(worst)
        wrong_ratio.append(ratio)
    return DiscrepancyReport(sequence, k, j_values, correct, wrong_ratio, floors, [p.to_json() for p in battery])


# ---------------------------------------------------------------------------
# norm bounds on the covering


def _form_coeffs(form: Multivector) -> tuple[int, list[tuple[int, ...]], np.ndarray]:
    k = form.pure_degree()
    if k is None:
        k = 1 if form.is_zero() else None
    if k is None:
        raise ValueError("need a pure-degree form")
    idx = list(basis(form.n, k))
    return k, idx, np.array([float(form.coefficient(i)) for i in idx])


@dataclass
class NormBoundResult:
    lhs: float
    rhs: float
    sharper: float
    D: float
    K: float
    alpha_sup: float
    passed: bool

    def to_json(self) -> dict:
        return self.__dict__.copy()


def norm_bound_check(alpha: Multivector, family: str = "covering", spec: RotatedFamilySpec | None = None,
                     j: int = 3, nodes: int = 64, tol: float = 1e-3) -> NormBoundResult:
    """||f^! alpha||_{n/k, B_2} <= D K ||alpha||_inf for a constant form alpha.

    ``family`` is "covering" (f = pi_{0,1}) or "rotated" (f = pi o h_Q o T with
    T mapping B_2 onto B_j). D is the measured ratio of the mass over B_2 to
    the mass over B^n and K the sampled distortion, both from the same rule.
    The pointwise norm is the Euclidean norm of the coefficient vector.
    """
    n = alpha.n
    k, idx, c = _form_coeffs(alpha)
    pts, w = ball_rule(np.zeros(n), 2.0, nodes, splits=[1.0])
    if family == "covering":
        df = np.broadcast_to(np.eye(n), pts.shape[:-1] + (n, n))
    elif family == "rotated":
        spec = spec or quarter_turn(n)
        t = sequence_map(spec, "ball_following", j)
        df = t.r * hQ_differential(spec, t(pts))
    else:
        raise ValueError(f"unknown family {family!r}")
    jac = np.linalg.det(df)
    inner = np.linalg.norm(pts, axis=-1) < 1.0
    area = math.fsum(w[inner] * jac[inner])
    total = math.fsum(w * jac)
    d_meas = total / area
    sv = np.linalg.norm(df, ord=2, axis=(-2, -1))
    k_meas = float(np.max(sv**n / jac))
    # f^! alpha coefficients: A^{-k/n} sum_I c_I minors(I, J)
    pulled = np.zeros((len(pts), len(idx)))
    for a_i, I in enumerate(idx):
        if c[a_i]:
            for b_j, J in enumerate(idx):
                pulled[:, b_j] += c[a_i] * _minor_coeffs(df, I, J)
    pointwise = np.linalg.norm(pulled, axis=-1) * area ** (-k / n)
    p = n / k
    lhs = math.fsum(w * pointwise**p) ** (1 / p)
    sup = float(np.linalg.norm(c))
    rhs = d_meas * k_meas * sup
    sharper = (d_meas * k_meas) ** (k / n) * sup
    return NormBoundResult(lhs, rhs, sharper, d_meas, k_meas, sup, lhs <= rhs + tol)


@dataclass(frozen=True)
class TrigForm:
    """Form on the torus: sum of c * trig(m . x) dx_J with integer frequencies m."""

    n: int
    terms: tuple[tuple[tuple[int, ...], float, tuple[int, ...], str], ...]  # (J, c, m, "sin"|"cos")

    @property
    def degree(self) -> int:
        degs = {len(t[0]) for t in self.terms}
        if len(degs) != 1:
            raise ValueError("TrigForm terms must share one degree")
        return degs.pop()

    def d(self) -> "TrigForm":
        """Exterior derivative, term by term."""
        out = []
        for J, c, m, kind in self.terms:
            for i, mi in enumerate(m, start=1):
                if mi == 0 or i in J:
                    continue
                s = merge_sign((i,), J)
                new = tuple(sorted((i,) + J))
                if kind == "sin":
                    out.append((new, s * c * mi, m, "cos"))
                else:
                    out.append((new, -s * c * mi, m, "sin"))
        return TrigForm(self.n, tuple(out))

    def is_zero(self) -> bool:
        return not any(t[1] for t in self.terms)


def trig_battery(n: int = 2) -> list[tuple[str, TrigForm, TestForm]]:
    """Non-closed forms alpha, with bump test forms phi of degree n - k - 1, plus one closed case."""
    if n != 2:
        raise NotImplementedError("the shipped trig battery is for n = 2")
    return [
        ("sin_x1_cos_x2", TrigForm(2, (((), 1.0, (1, 1), "sin"),)), TestForm((0.3, -0.2), 0.5, (1,))),
        ("cos_x1_dx2", TrigForm(2, (((2,), 1.0, (1, 0), "cos"),)), TestForm((0.3, -0.2), 0.5, ())),
        ("sin_2x2_dx1", TrigForm(2, (((1,), 0.5, (0, 2), "sin"),)), TestForm((-0.25, 0.1), 0.6, ())),
        ("mixed_0form", TrigForm(2, (((), 1.0, (2, -1), "cos"), ((), 0.3, (0, 1), "sin"))), TestForm((0.15, 0.2), 0.45, (2,))),
        ("closed_dx1", TrigForm(2, (((1,), 1.0, (0, 0), "cos"),)), TestForm((0.0, 0.0), 0.5, ())),
    ]


def decay_integral(d_alpha: TrigForm, phi: TestForm, r: float, nodes: int | None = None) -> float:
    """int_{B_2} phi ^ f^!(d alpha) for f = pi_{0,r}.

    f^!(d alpha)(x) = m_n^{-(k+1)/n} (d alpha)(r x) since T^* multiplies a
    (k+1)-form by r^{k+1} and A = r^n m_n.
    """
    n = d_alpha.n
    if d_alpha.is_zero():
        return 0.0
    deg = d_alpha.degree
    J, sign = phi.partner(n)
    if len(J) != deg:
        raise ValueError("test form degree does not complement d alpha")
    freq = max((np.linalg.norm(m) for _, _, m, _ in d_alpha.terms), default=0.0)
    nodes = nodes or int(48 + 2 * r * phi.radius * freq)
    pts, w = ball_rule(phi.center, phi.radius, nodes)
    b = phi.profile(pts)
    vals = np.zeros(len(pts))
    for Jt, c, m, kind in d_alpha.terms:
        if Jt != J or not c:
            continue
        arg = r * (pts @ np.asarray(m, dtype=float))
        vals += c * (np.sin(arg) if kind == "sin" else np.cos(arg))
    norm = unit_ball_volume(n) ** (-deg / n)
    return sign * norm * math.fsum(w * b * vals)


@dataclass
class DecayReport:
    case: str
    j_values: list[int]
    integrals: list[float]
    areas: list[float]
    ratios: list[float]
    kendall_tau: float
    spread: float  # max / min of the ratios
    bounded: bool

    def to_json(self) -> dict:
        return self.__dict__.copy()


def exact_decay_check(case: str, alpha: TrigForm, phi: TestForm, j_values: Sequence[int] = range(1, 9)) -> DecayReport:
    """|int phi ^ f_j^!(d alpha)| for the coverings pi_{0, 2^j}, and its ratio against A(f_j)^{-1/n}."""
    d_alpha = alpha.d()
    n = alpha.n
    js = list(j_values)
    ints, areas, ratios = [], [], []
    for j in js:
        r = 2.0**j
        val = decay_integral(d_alpha, phi, r)
        area = r**n * unit_ball_volume(n)
        ints.append(val)
        areas.append(area)
        ratios.append(abs(val) * area ** (1 / n))
    if all(v == 0 for v in ratios):
        return DecayReport(case, js, ints, areas, ratios, 0.0, 0.0, True)
    tau = float(stats.kendalltau(js, ratios).statistic)
    lo, hi = min(ratios), max(ratios)
    spread = hi / lo if lo > 0 else math.inf
    return DecayReport(case, js, ints, areas, ratios, tau, spread, math.isfinite(spread) and tau <= 0)

