"""Mapping degrees and the torus-knot obstruction sphere.

Domains are given as points: circle maps take t in [0, 1); sphere maps take
unit vectors in R^3 or R^4; maps on S^2 x S^1 take rows (p, t) with p a unit
vector of R^3.  Degrees are computed by quadrature of the pulled-back volume
form, with an independent regular-value count as an oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.spatial.transform import Rotation

from .curves import CurveFamily, Curve
from .errors import (BadParameters, InterpolationDegenerate, NotConverged, NotRegularValue,
                     ResolutionExhausted)
from .families import TAU, stereographic_torus_knot

DOMAINS = ("circle", "sphere2", "sphere2xcircle", "sphere3")
GRID = {"circle": 256, "sphere2": 256, "sphere2xcircle": 64, "sphere3": 64}
ROUND_TOL = 0.05


@dataclass
class SphereMap:
    domain: str
    eval: Callable
    partials: Callable | None = None
    grid: int | None = None
    name: str = ""

    def __post_init__(self):
        if self.domain not in DOMAINS:
            raise BadParameters(f"unknown domain {self.domain!r}")

    def __call__(self, x):
        return np.asarray(self.eval(x), float)


@dataclass(frozen=True)
class DegreeResult:
    degree: int
    raw: float
    grid: int

    @property
    def defect(self) -> float:
        return abs(self.raw - self.degree)


def _normalize(v, axis=-1):
    return v / np.linalg.norm(v, axis=axis, keepdims=True)


def sphere2_point(u, v):
    """Polar angle u in [0, pi], azimuth v."""
    su = np.sin(u)
    return np.stack([su * np.cos(v), su * np.sin(v), np.cos(u)], axis=-1)


def sphere3_point(eta, a, b):
    """Hopf coordinates: (cos eta e^{ia}, sin eta e^{ib})."""
    return np.stack([np.cos(eta) * np.cos(a), np.cos(eta) * np.sin(a),
                     np.sin(eta) * np.cos(b), np.sin(eta) * np.sin(b)], axis=-1)


# --------------------------------------------------------------------------
# circle maps


def winding_number(f: SphereMap, n: int = 256, max_refine: int = 8) -> int:
    """Number of turns of t -> f(t) around the origin of R^2."""
    for _ in range(max_refine + 1):
        t = np.arange(n) / n
        w = f(t)
        if np.any(np.linalg.norm(w, axis=1) == 0):
            raise NotConverged("map vanishes on the sample grid")
        a, b = w, np.roll(w, -1, axis=0)
        step = np.arctan2(a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0], np.sum(a * b, axis=1))
        if np.max(np.abs(step)) < np.pi / 2:
            return int(round(step.sum() / TAU))
        n *= 2
    raise ResolutionExhausted(f"angular steps still >= pi/2 at {n // 2} samples")


# --------------------------------------------------------------------------
# quadrature


def _cell_diffs(F, axes):
    """Cell-centred value and differences of a corner array along ``axes``.

    F has shape (n0+1, n1+1, ..., dim); returns the normalized cell mean and
    one difference per axis, each averaged over the opposite cell edges.
    """
    k = len(axes)
    mean = 0.0
    corners = {}
    for idx in np.ndindex(*([2] * k)):
        sl = tuple(slice(i, None if i else -1) for i in idx)
        corners[idx] = F[sl]
        mean = mean + F[sl]
    diffs = []
    for a in range(k):
        d = 0.0
        for idx, val in corners.items():
            d = d + (val if idx[a] else -val)
        diffs.append(d / 2 ** (k - 1))
    return _normalize(mean), diffs


def _solid_angle(a, b, c):
    """Signed solid angle of the geodesic triangle (a, b, c)."""
    num = np.einsum("...i,...i", a, np.cross(b, c))
    den = 1 + np.einsum("...i,...i", a, b) + np.einsum("...i,...i", b, c) \
        + np.einsum("...i,...i", c, a)
    return 2 * np.arctan2(num, den)


def _s2_raw(f: SphereMap, n: int) -> float:
    """Signed area of the image of a (polar, azimuth) grid, in units of 4 pi.

    Each cell is split into two triangles whose images are replaced by
    geodesic triangles; this integrates f . (f_u x f_v) exactly on the
    piecewise-geodesic interpolant of f.
    """
    F = f(s2_grid(n).reshape(-1, 3)).reshape(n + 1, 2 * n + 1, 3)
    return _image_area(F)


def s2_grid(n: int) -> np.ndarray:
    """Corner points (n+1, 2n+1, 3) of the (polar, azimuth) grid used for S^2."""
    u = np.linspace(0, np.pi, n + 1)
    v = np.linspace(0, TAU, 2 * n + 1)
    U, V = np.meshgrid(u, v, indexing="ij")
    return sphere2_point(U, V)


def _image_area(F: np.ndarray) -> float:
    a, b, c, d = F[:-1, :-1], F[1:, :-1], F[1:, 1:], F[:-1, 1:]
    return float(np.sum(_solid_angle(a, b, c)) + np.sum(_solid_angle(a, c, d))) / (4 * np.pi)


def degree_s2_table(F) -> DegreeResult:
    """Degree from sampled values F on ``s2_grid(n)``; no refinement is possible."""
    F = np.asarray(F, float)
    if F.ndim != 3 or F.shape[2] != 3 or F.shape[1] != 2 * F.shape[0] - 1 or F.shape[0] < 3:
        raise BadParameters(f"table must have shape (n+1, 2n+1, 3), got {F.shape}")
    raw = _image_area(_normalize(F))
    deg = int(round(raw))
    if abs(raw - deg) >= ROUND_TOL:
        raise NotConverged(f"quadrature {raw:.4f} not within {ROUND_TOL} of an integer")
    return DegreeResult(deg, raw, F.shape[0] - 1)


def _rounded(raw_fn, n: int, refine: int = 3) -> DegreeResult:
    for _ in range(refine + 1):
        raw = raw_fn(n)
        deg = int(round(raw))
        if abs(raw - deg) < ROUND_TOL:
            return DegreeResult(deg, raw, n)
        n *= 2
    raise NotConverged(f"quadrature {raw:.4f} not within {ROUND_TOL} of an integer at grid {n // 2}")


def degree_s2_result(f: SphereMap, grid: int | None = None) -> DegreeResult:
    return _rounded(lambda n: _s2_raw(f, n), grid or f.grid or GRID["sphere2"])


def degree_s2(f: SphereMap, grid: int | None = None) -> int:
    """Degree of a map S^2 -> S^2 from the signed area of its image."""
    return degree_s2_result(f, grid).degree


def _chart3(f: SphereMap, n: int):
    if f.domain == "sphere3":
        eta = np.linspace(0, np.pi / 2, n + 1)
        ang = np.linspace(0, TAU, n + 1)
        E, A, B = np.meshgrid(eta, ang, ang, indexing="ij")
        pts = sphere3_point(E, A, B).reshape(-1, 4)
        sign = _hopf_orientation()
    elif f.domain == "sphere2xcircle":
        u = np.linspace(0, np.pi, n + 1)
        v = np.linspace(0, TAU, n + 1)
        t = np.linspace(0, 1, n + 1)
        U, V, T = np.meshgrid(u, v, t, indexing="ij")
        pts = np.concatenate([sphere2_point(U, V), T[..., None]], axis=-1).reshape(-1, 4)
        sign = 1.0
    else:
        raise BadParameters(f"degree_3_to_s3 needs a 3-dimensional domain, not {f.domain}")
    return pts, sign


def _hopf_orientation() -> float:
    """Sign of det[p, p_eta, p_a, p_b] for the Hopf chart."""
    e, a, b, h = 0.4, 0.3, 1.1, 1e-6
    p = sphere3_point(e, a, b)
    J = [(sphere3_point(e + h, a, b) - sphere3_point(e - h, a, b)) / (2 * h),
         (sphere3_point(e, a + h, b) - sphere3_point(e, a - h, b)) / (2 * h),
         (sphere3_point(e, a, b + h) - sphere3_point(e, a, b - h)) / (2 * h)]
    return float(np.sign(np.linalg.det(np.stack([p] + J))))


def _s3_raw(f: SphereMap, n: int) -> float:
    pts, sign = _chart3(f, n)
    F = f(pts).reshape(n + 1, n + 1, n + 1, 4)
    c, diffs = _cell_diffs(F, (0, 1, 2))
    M = np.stack([c] + diffs, axis=-2)
    return sign * float(np.sum(np.linalg.det(M))) / (2 * np.pi ** 2)


def degree_3_to_s3_result(f: SphereMap, grid: int | None = None) -> DegreeResult:
    return _rounded(lambda n: _s3_raw(f, n), grid or f.grid or GRID[f.domain])


def degree_3_to_s3(f: SphereMap, grid: int | None = None) -> int:
    """Degree of a map from S^3 (or S^2 x S^1) to S^3 by quadrature of det[f, df]."""
    return degree_3_to_s3_result(f, grid).degree


# --------------------------------------------------------------------------
# regular-value oracle


def _tangent_basis(p: np.ndarray) -> np.ndarray:
    """Oriented orthonormal basis of the tangent space of the sphere at p."""
    k = len(p)
    q, _ = np.linalg.qr(np.column_stack([p, np.eye(k)]))
    B = q[:, 1:k]
    if q[:, 0] @ p < 0:
        B[:, 0] = -B[:, 0]
    if np.linalg.det(np.column_stack([p, B])) < 0:
        B[:, -1] = -B[:, -1]
    return B.T


def _samples(domain: str, n: int) -> np.ndarray:
    if domain == "circle":
        return np.arange(4 * n) / (4 * n)
    if domain == "sphere2":
        u = (np.arange(n) + 0.5) * np.pi / n
        v = (np.arange(2 * n) + 0.5) * np.pi / n
        U, V = np.meshgrid(u, v, indexing="ij")
        return sphere2_point(U, V).reshape(-1, 3)
    if domain == "sphere3":
        m = max(8, n // 3)
        e = (np.arange(m) + 0.5) * (np.pi / 2) / m
        a = (np.arange(2 * m) + 0.5) * np.pi / m
        E, A, B = np.meshgrid(e, a, a, indexing="ij")
        return sphere3_point(E, A, B).reshape(-1, 4)
    raise BadParameters(f"no regular-value oracle for domain {domain}")


def _local(f: SphereMap, p, B, x):
    """f composed with the chart x -> normalize(p + B^T x)."""
    if f.domain == "circle":
        return f(np.array([p + x[0]]))[0]
    return f(_normalize(p + B.T @ x)[None])[0]


def _local_jac(f, p, B, x, h=1e-7):
    cols = []
    for i in range(len(x)):
        e = np.zeros(len(x))
        e[i] = h
        cols.append((_local(f, p, B, x + e) - _local(f, p, B, x - e)) / (2 * h))
    return np.column_stack(cols)


def degree_regular_value(f: SphereMap, q, grid: int = 64, jac_tol: float = 1e-6) -> int:
    """Signed count of preimages of q found by multistart Newton."""
    q = _normalize(np.asarray(q, float))
    Q = _tangent_basis(q)
    X = _samples(f.domain, grid)
    vals = f(X)
    dist = np.linalg.norm(vals - q, axis=1)
    spacing = np.median(np.linalg.norm(np.diff(vals, axis=0), axis=1)) + 1e-12
    starts = X[np.argsort(dist)[: max(16, int(np.sum(dist < 6 * spacing)))]]
    roots, signs = [], []
    for p in starts:
        p = np.array(p, float) if f.domain != "circle" else float(p)
        for _ in range(50):
            B = None if f.domain == "circle" else _tangent_basis(p)
            dim = 1 if f.domain == "circle" else len(p) - 1
            x = np.zeros(dim)
            r = Q @ _local(f, p, B, x)
            if np.linalg.norm(r) < 1e-13 and q @ _local(f, p, B, x) > 0:
                break
            J = Q @ _local_jac(f, p, B, x)
            try:
                step = np.linalg.solve(J, -r)
            except np.linalg.LinAlgError:
                break
            step *= min(1.0, 0.3 / (np.linalg.norm(step) + 1e-300))
            p = (p + step[0]) % 1.0 if f.domain == "circle" else _normalize(p + B.T @ step)
        B = None if f.domain == "circle" else _tangent_basis(p)
        dim = 1 if f.domain == "circle" else len(p) - 1
        val = _local(f, p, B, np.zeros(dim))
        if np.linalg.norm(val - q) > 1e-9:
            continue
        if f.domain == "circle":
            dup = any(min(abs(p - r0), 1 - abs(p - r0)) < 1e-6 for r0 in roots)
        else:
            dup = any(np.linalg.norm(p - r0) < 1e-6 for r0 in roots)
        if dup:
            continue
        J = Q @ _local_jac(f, p, B, np.zeros(dim))
        det = np.linalg.det(J)
        if abs(det) < jac_tol:
            raise NotRegularValue(f"Jacobian {det:.3g} at a preimage of {q}")
        roots.append(p)
        signs.append(int(np.sign(det)))
    return int(sum(signs))


# --------------------------------------------------------------------------
# Kalman loops


def _j(z):
    """Left multiplication by the quaternion j on C^2 = H (z1 + z2 j)."""
    return np.stack([-np.conj(z[..., 1]), np.conj(z[..., 0])], axis=-1)


def _real(z):
    return np.concatenate([z.real, z.imag], axis=-1)[..., [0, 2, 1, 3]]


@dataclass
class KalmanLoop:
    """theta -> gamma^theta on the Clifford torus of S^3(sqrt 2), with framing F_s."""

    p: int
    q: int
    m: int
    n: int

    def gamma(self, theta, t):
        th, t = np.broadcast_arrays(np.asarray(theta, float), np.asarray(t, float))
        return np.stack([np.exp(1j * TAU * (self.m * th + self.p * t)),
                         np.exp(1j * TAU * (self.n * th + self.q * t))], axis=-1)

    def dgamma(self, theta, t):
        z = self.gamma(theta, t)
        return 1j * TAU * z * np.array([self.p, self.q])

    def framing(self, theta, t, s):
        """F_s = s j gamma + (1 - s) gamma', as complex pairs."""
        s = np.asarray(s, float)[..., None]
        return s * _j(self.gamma(theta, t)) + (1 - s) * self.dgamma(theta, t)

    def family(self, samples: int = 1024) -> CurveFamily:
        def at(theta):
            return Curve(lambda t: _real(self.gamma(theta, t)),
                         lambda t: _real(self.dgamma(theta, t)),
                         frame=None, samples=samples,
                         name=f"kalman({self.p},{self.q},{self.m},{self.n})[{theta:g}]")
        return CurveFamily(at, name=f"kalman({self.p},{self.q},{self.m},{self.n})")

    def min_framing_norm(self, n: int = 64) -> float:
        th, t, s = np.meshgrid(np.arange(n) / n, np.arange(n) / n, np.linspace(0, 1, n),
                               indexing="ij")
        return float(np.min(np.abs(np.linalg.norm(self.framing(th, t, s), axis=-1))))

    def loop_rotation(self, t: float = 0.0, s: float = 0.0) -> int:
        """Turns of theta -> F_s^theta(t) in the frame (j gamma, k gamma) of xi."""
        def w(theta):
            z = self.gamma(theta, t)
            F = self.framing(theta, t, s)
            jz = _j(z)
            kz = 1j * jz
            dot = lambda a, b: np.real(np.sum(a * np.conj(b), axis=-1))
            return np.stack([dot(F, jz), dot(F, kz)], axis=-1)
        return winding_number(SphereMap("circle", w))


def kalman_loop(p: int, q: int, m: int, n: int) -> KalmanLoop:
    if np.gcd(p, q) != 1:
        raise BadParameters(f"gcd({p}, {q}) != 1")
    if m % 2 or n % 2:
        raise BadParameters("m and n must be even")
    loop = KalmanLoop(p, q, m, n)
    if loop.min_framing_norm() <= 0:
        raise BadParameters("framing vanishes")
    return loop


# --------------------------------------------------------------------------
# capping disk in SO(3) and the obstruction sphere


def _rot(axis, angle):
    axis = np.broadcast_to(axis, np.shape(angle) + (3,))
    return Rotation.from_rotvec((axis * np.asarray(angle)[..., None]).reshape(-1, 3))


@dataclass
class RotationPath:
    """Disk z = r e^{2 pi i theta} -> SO(3); points of the radius-pi ball model."""

    alpha: int

    def _axis(self, r):
        # from -e_z at the centre to +e_z on the boundary through e_x
        r = np.asarray(r, float)[..., None]
        return -np.cos(np.pi * r) * np.array([0, 0, 1.0]) + np.sin(np.pi * r) * np.array([1.0, 0, 0])

    def rotation(self, r, theta) -> Rotation:
        r, theta = np.broadcast_arrays(np.asarray(r, float), np.asarray(theta, float))
        ang = TAU * self.alpha * theta
        outer = _rot(self._axis(r), ang)
        inner = _rot(np.array([0, 0, 1.0]), ang)
        return outer * inner

    def eval(self, r, theta) -> np.ndarray:
        """Axis-angle points in the closed ball of radius pi."""
        return self.rotation(r, theta).as_rotvec()

    def matrix(self, r, theta) -> np.ndarray:
        return self.rotation(r, theta).as_matrix()

    def boundary(self, theta) -> np.ndarray:
        """The prescribed loop B_theta: rotation by 4 pi alpha theta about z."""
        return _rot(np.array([0, 0, 1.0]), 2 * TAU * self.alpha * np.asarray(theta, float)).as_matrix()


def kalman_capping_disk(alpha: int) -> RotationPath:
    """A disk in SO(3) bounded by alpha double turns about the z-axis.

    Each of r -> R_{a(r)}(2 pi alpha theta) and R_z(2 pi alpha theta) is a loop
    in theta; their product is R_z(4 pi alpha theta) at r = 1 and the
    identity at r = 0 where a(0) = -e_z.
    """
    if alpha < 1:
        raise BadParameters("alpha must be >= 1")
    return RotationPath(int(alpha))


def kalman_obstruction_sphere(p: int, q: int, alpha: int, t0: float = 0.1) -> SphereMap:
    """S^2 -> S^2: capping disk applied to (gamma^0)'(t0) on the upper
    hemisphere, linear interpolation of (gamma^theta)'(t0) with e_y below.
    """
    if np.gcd(p, q) != 1:
        raise BadParameters(f"gcd({p}, {q}) != 1")
    disk = kalman_capping_disk(alpha)
    v = stereographic_torus_knot(p, q).deriv(np.array([t0]))[0]
    if np.linalg.norm(v) < 1e-9:
        raise InterpolationDegenerate(f"tangent vanishes at t0={t0}")
    v = v / np.linalg.norm(v)
    ey = np.array([0.0, 1.0, 0.0])
    th = np.arange(4096) / 4096
    gap = np.min(np.linalg.norm(disk.boundary(th) @ v + ey, axis=1))
    if gap < 1e-3:
        raise InterpolationDegenerate(f"(gamma^theta)'({t0}) is antiparallel to e_y")

    def ev(x):
        x = np.asarray(x, float)
        polar = np.arccos(np.clip(x[:, 2], -1, 1))
        theta = (np.arctan2(x[:, 1], x[:, 0]) / TAU) % 1.0
        out = np.empty_like(x)
        up = polar <= np.pi / 2
        if np.any(up):
            r = polar[up] / (np.pi / 2)
            out[up] = disk.matrix(r, theta[up]) @ v
        lo = ~up
        if np.any(lo):
            s = (polar[lo] - np.pi / 2) / (np.pi / 2)
            w = (1 - s)[:, None] * (disk.boundary(theta[lo]) @ v) + s[:, None] * ey
            out[lo] = w
        return _normalize(out)

    return SphereMap("sphere2", ev, name=f"kalman({p},{q},alpha={alpha},t0={t0:g})")


def kalman_degree(p: int, q: int, alpha: int, t0: float = 0.1,
                  grid: int = 256) -> DegreeResult:
    """Degree of the obstruction sphere by signed-area quadrature."""
    return degree_s2_result(kalman_obstruction_sphere(p, q, alpha, t0), grid)


# --------------------------------------------------------------------------
# builtin test maps


def identity_s2() -> SphereMap:
    return SphereMap("sphere2", lambda x: np.asarray(x, float), name="identity")


def antipodal_s2() -> SphereMap:
    return SphereMap("sphere2", lambda x: -np.asarray(x, float), name="antipodal")


def antipodal_s3() -> SphereMap:
    return SphereMap("sphere3", lambda x: -np.asarray(x, float), name="antipodal_s3")


def square_s3() -> SphereMap:
    """(z1, z2) -> normalize(z1^2, z2)."""
    def ev(x):
        x = np.asarray(x, float)
        z1 = (x[:, 0] + 1j * x[:, 1]) ** 2
        return _normalize(np.stack([z1.real, z1.imag, x[:, 2], x[:, 3]], axis=1))
    return SphereMap("sphere3", ev, name="square_s3")


def power_circle(k: int) -> SphereMap:
    return SphereMap("circle", lambda t: np.stack([np.cos(TAU * k * np.asarray(t)),
                                                   np.sin(TAU * k * np.asarray(t))], axis=1),
                     name=f"power({k})")


def suspension_s2(k: int) -> SphereMap:
    """Suspension of z -> z^k: degree k."""
    def ev(x):
        x = np.asarray(x, float)
        phi = np.arctan2(x[:, 1], x[:, 0])
        rho = np.hypot(x[:, 0], x[:, 1])
        return np.stack([rho * np.cos(k * phi), rho * np.sin(k * phi), x[:, 2]], axis=1)
    return SphereMap("sphere2", ev, name=f"suspension({k})")


def reflect(f: SphereMap) -> SphereMap:
    """Compose with the reflection x -> -x of the first target coordinate."""
    def ev(x):
        y = f(x).copy()
        y[:, 0] = -y[:, 0]
        return y
    return SphereMap(f.domain, ev, grid=f.grid, name=f"reflect({f.name})")


BUILTIN_MAPS = {
    "identity": identity_s2,
    "antipodal": antipodal_s2,
    "antipodal_s3": antipodal_s3,
    "square_s3": square_s3,
}
