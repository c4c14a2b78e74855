"""Generating functions: direct sums, the exponential representation, recovery.

The exponential representation is

    F(z) = exp(b⁺z + b⁻/z + c + ∫ (1/(s−z) − s/(s²+1)) φ(s) ds).

With L(s) = log(s−z) − ½log(s²+1) on the branch Im log(s−z) ∈ [−π, 0]
(so that real z is reached from the upper half-plane), the kernel
integrates to L(v) − L(u) over [u, v], with L(+∞) = 0 and L(−∞) = −iπ.
Constant pieces of φ therefore never need quadrature.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial import polynomial as P
from scipy import integrate

from .constructors import DiscreteMeasure, PolyaFrequencyParams
from .errors import (
    GridTooCoarse,
    NotAdmissible,
    QuadratureFailure,
    SingularitySampled,
    ZeroCrossing,
)
from .phi import ExponentialRep, PhiFunction, SampledPiece, check_admissible
from .sequences import TwoSidedSequence

INF = math.inf


# ---------------------------------------------------------------------------
# direct evaluation


def eval_direct(seq: TwoSidedSequence, z):
    """Σ a(k) zᵏ over the stored window (Horner in z)."""
    z = np.asarray(z, dtype=complex)
    out = np.polyval(seq.values[::-1], z) * z ** float(seq.offset)
    return complex(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# exponential representation


def _lower_log(s: float, z: np.ndarray) -> np.ndarray:
    """log(s − z) with Im ∈ [−π, 0]; real negative s − z gets −iπ."""
    w = np.empty(z.shape, dtype=complex)
    w.real = s - z.real
    w.imag = -np.abs(z.imag)  # −0.0 on the axis selects the lower side
    with np.errstate(divide="ignore"):
        return np.log(w)


def _L(s: float, z: np.ndarray) -> np.ndarray:
    """log(s−z) − ½log(s²+1)."""
    if s == INF:
        return np.zeros(z.shape, dtype=complex)
    if s == -INF:
        return np.full(z.shape, -1j * math.pi)
    return _lower_log(s, z) - 0.5 * math.log1p(s * s)


def kernel_integral(u: float, v: float, z):
    """∫_u^v (1/(s−z) − s/(s²+1)) ds in closed form, Im z ≥ 0."""
    z0 = np.asarray(z, dtype=complex)
    z = np.atleast_1d(z0)
    out = _L(v, z) - _L(u, z)
    return complex(out[0]) if z0.ndim == 0 else out


def _linear_integral(s0: float, s1: float, v0: float, v1: float, z: np.ndarray):
    """∫ kernel·φ over [s0, s1] for φ linear from v0 to v1 (s1 may be ∞ if flat).

    Uses ∫ s·kernel ds = z·log(s − z) + arctan s.
    """
    if math.isinf(s1) or v0 == v1:
        return v0 * (_L(s1, z) - _L(s0, z))
    b = (v1 - v0) / (s1 - s0)
    a = v0 - b * s0
    lin = z * (_lower_log(s1, z) - _lower_log(s0, z)) + (math.atan(s1) - math.atan(s0))
    return a * (_L(s1, z) - _L(s0, z)) + b * lin


def _kernel(s, z):
    return 1.0 / (s - z) - s / (s * s + 1.0)


def _quad_complex(f, a, b, tol, points=None):
    kw = dict(epsabs=tol, epsrel=0.0, limit=400, complex_func=True)
    if points is not None and math.isfinite(b):
        kw["points"] = points
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(f, a, b, **kw)
    return val, abs(err)


def _adaptive_piece(piece, z: complex, tol: float) -> complex:
    """Scalar adaptive quadrature for one point, split at Re z."""
    lo, hi = piece.lo, piece.hi
    x = z.real
    inside = lo < x < hi
    ref = float(piece(x)) if inside else 0.0
    f = lambda s: _kernel(s, z) * (float(piece(s)) - ref)

    cuts = [lo]
    if math.isinf(hi):
        cuts.append(max(2.0 * lo, abs(x) + 2.0, 2.0))
    cuts.append(hi)
    total, err = 0j, 0.0
    for a, b in zip(cuts, cuts[1:]):
        pts = [x] if (inside and a < x < b) else None
        val, e = _quad_complex(f, a, b, tol / len(cuts), pts)
        total += val
        err += e
    if not math.isfinite(err) or err > 100 * tol:
        raise QuadratureFailure(
            f"piece [{lo}, {hi}) at z={z}: error estimate {err:.3g} above tolerance {tol:.3g}"
        )
    if ref:
        total += ref * complex(kernel_integral(lo, hi, z))
    return total


_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


def _piece_map(lo: float, hi: float):
    """u ∈ (0, 1) -> s with Jacobian, smoothing square-root endpoint behaviour."""
    if math.isinf(hi):
        if lo == 0:
            h = math.pi / 2
            return lambda u: np.tan(h * u) ** 2, lambda u: 2 * h * np.tan(h * u) / np.cos(h * u) ** 2
        return lambda u: lo / (1 - u) ** 2, lambda u: 2 * lo / (1 - u) ** 3
    if lo == 0:
        return lambda u: hi * u * u, lambda u: 2 * hi * u
    w = hi - lo
    return (lambda u: lo + w * (1 - np.cos(np.pi * u)) / 2,
            lambda u: w * np.pi * np.sin(np.pi * u) / 2)


def _gl_rule(panels: int):
    edges = np.linspace(0.0, 1.0, panels + 1)
    half = np.diff(edges) / 2
    u = (edges[:-1, None] + half[:, None] * (_GL_X[None, :] + 1)).ravel()
    w = (half[:, None] * _GL_W[None, :]).ravel()
    return u, w


def _smooth_piece(piece, z: np.ndarray, tol: float, max_panels: int = 256, chunk: int = 256):
    """Vectorised ∫ kernel·φ over a smooth piece with singularity subtraction.

    A composite 16-point Gauss–Legendre rule on the mapped interval is
    doubled until two levels agree to ``tol``; points that never agree
    (typically z close to the support) fall back to adaptive quadrature.
    """
    lo, hi = piece.lo, piece.hi
    smap, jac = _piece_map(lo, hi)
    x = z.real
    inside = (x > lo) & (x < hi)
    ref = np.zeros(z.shape)
    if np.any(inside):
        ref[inside] = piece(x[inside])
    out = np.empty(z.shape, dtype=complex)
    todo = np.arange(z.size)
    rules = {}

    def level(p, idx):
        if p not in rules:
            u, w = _gl_rule(p)
            s = smap(u)
            rules[p] = (s, w * jac(u), np.asarray(piece(s), dtype=float))
        s, wj, ph = rules[p]
        zz = z[idx][None, :]
        K = 1.0 / (s[:, None] - zz) - (s / (s * s + 1.0))[:, None]
        return ((wj[:, None] * (ph[:, None] - ref[idx][None, :])) * K).sum(axis=0)

    for start in range(0, todo.size, chunk):
        idx = todo[start:start + chunk]
        p = 8
        prev = level(p, idx)
        pending = np.ones(idx.size, dtype=bool)
        while p < max_panels and pending.any():
            p *= 2
            cur = level(p, idx[pending])
            ok = np.abs(cur - prev[pending]) <= tol
            sub = np.flatnonzero(pending)
            out[idx[sub[ok]]] = cur[ok]
            prev[pending] = cur
            pending[sub[ok]] = False
        for j in idx[pending]:
            out[j] = _adaptive_piece(piece, complex(z[j]), tol) - ref[j] * complex(
                kernel_integral(lo, hi, z[j]))
    return out + ref * (_L(hi, z) - _L(lo, z))


def log_exponential(rep: ExponentialRep, z, tol: float = 1e-10):
    """Exponent of the representation at z with Im z ≥ 0 (vectorised)."""
    z0 = np.asarray(z, dtype=complex)
    z = np.atleast_1d(z0).ravel()
    if np.any(z.imag < 0):
        raise ValueError("log_exponential is defined on the closed upper half-plane")
    if np.any(z == 0):
        raise SingularitySampled("z = 0")
    out = rep.b_plus * z + rep.b_minus / z + rep.c
    for lo, hi, v in rep.phi.negative_intervals():
        if v:
            out = out + v * (_L(hi, z) - _L(lo, z))
    for piece in rep.phi.positive_pieces:
        if isinstance(piece, SampledPiece):
            xs = piece.xs
            pts = [piece.lo] + [s for s in xs if piece.lo < s < piece.hi] + [piece.hi]
            vals = [float(piece(min(s, xs[-1]))) for s in pts]
            for s0, s1, v0, v1 in zip(pts, pts[1:], vals, vals[1:]):
                out = out + _linear_integral(s0, s1, v0, v1, z)
        elif piece.is_constant:
            v = float(piece(0.5 * (piece.lo + min(piece.hi, piece.lo + 2.0))))
            if v:
                out = out + v * (_L(piece.hi, z) - _L(piece.lo, z))
        else:
            out = out + _smooth_piece(piece, z, tol)
    return complex(out[0]) if z0.ndim == 0 else out.reshape(z0.shape)


def _require_admissible(rep: ExponentialRep):
    report = check_admissible(rep)
    if not report.passed:
        bad = {k: c.witness for k, c in report.conditions.items() if not c.passed}
        raise NotAdmissible(f"representation fails {bad}")


def eval_exponential(rep: ExponentialRep, z, tol: float = 1e-10, check: bool = True):
    """Evaluate the exponential representation.

    Parameters
    ----------
    rep : ExponentialRep
    z : complex or array
        Points with Im z ≥ 0, or on the unit circle (the lower half is
        obtained from F(z̄) = conj F(z)). z = 1 is excluded.
    tol : float
        Absolute quadrature tolerance per non-constant piece.
    check : bool
        Verify conditions (i)–(iv) first.
    """
    if check:
        _require_admissible(rep)
    z0 = np.asarray(z, dtype=complex)
    zs = np.atleast_1d(z0).ravel()
    if np.any(zs == 1):
        raise SingularitySampled("z = 1 is excluded")
    flip = zs.imag < 0
    if np.any(np.abs(np.abs(zs[flip]) - 1) > 1e-12):
        raise ValueError("below the real axis only unit-circle points are allowed")
    w = log_exponential(rep, np.where(flip, zs.conj(), zs), tol)
    with np.errstate(over="ignore"):
        val = np.where(w.real == -INF, 0j, np.exp(np.where(w.real == -INF, 0j, w)))
    if not np.all(np.isfinite(val)):
        raise SingularitySampled(f"F is singular at z = {zs[~np.isfinite(val)][0]}")
    val = np.where(flip, val.conj(), val)
    return complex(val[0]) if z0.ndim == 0 else val.reshape(z0.shape)


def fit_constant(phi: PhiFunction, F_at_i: complex, b_plus=0.0, b_minus=0.0) -> float:
    """c such that the representation matches |F(i)|.

    Re of the kernel vanishes identically at z = i, so c = log|F(i)|.
    """
    return math.log(abs(F_at_i))


# ---------------------------------------------------------------------------
# closed-form representations


def pf_rep(params: PolyaFrequencyParams) -> ExponentialRep:
    """Exponential representation of a Pólya frequency generating function."""
    terms = []
    if params.m:
        terms.append((-INF, 0.0, params.m))
    d = params.c
    for g in params.gamma_plus:
        if g > 0:
            terms.append((-INF, -1 / g, 1))
            d += 0.5 * math.log1p(g * g)
    for g in params.gamma_minus:
        if g > 0:
            terms.append((-g, 0.0, -1))
            d += 0.5 * math.log1p(g * g)
    for q in params.delta_minus:
        if q > 0:
            terms.append((0.0, q, -1))
            d -= 0.5 * math.log1p(q * q)
    for q in params.delta_plus:
        if q > 0:
            terms.append((1 / q, INF, 1))
            d -= 0.5 * math.log1p(q * q)
    return ExponentialRep(params.b_plus, params.b_minus, d, PhiFunction.from_intervals(terms))


def amcm_gf(mu_plus: DiscreteMeasure, mu_minus: DiscreteMeasure, z):
    """∫ sz/(1−sz) μ₊(ds) + ∫ 1/(1−s/z) μ₋(ds)."""
    z = np.asarray(z, dtype=complex)
    out = np.zeros(z.shape, dtype=complex)
    for s, w in mu_plus.atoms:
        out = out + w * s * z / (1 - s * z)
    for s, w in mu_minus.atoms:
        out = out + w / (1 - s / z)
    return complex(out) if out.ndim == 0 else out


def amcm_rep(mu_plus: DiscreteMeasure, mu_minus: DiscreteMeasure) -> ExponentialRep:
    """Exponential representation of an atomic AM–CM generating function.

    F is rational: F(z) = z·N(z) / (Π(1 − aᵢz) Π(z − bⱼ)) with real zeros.
    A zero ζ contributes +1 on (−∞, ζ), a pole −1 on (−∞, ζ); a constant
    shift makes φ vanish on (−∞, 0), and c is fitted at z = i.
    """
    a = [(s, w) for s, w in mu_plus.atoms if s > 0]
    b = list(mu_minus.atoms)
    one = np.array([1.0])
    lin_a = [np.array([1.0, -s]) for s, _ in a]  # 1 − s z
    lin_b = [np.array([-s, 1.0]) for s, _ in b]  # z − s

    def prod(polys):
        out = one
        for p in polys:
            out = P.polymul(out, p)
        return out

    num = np.zeros(1)
    for i, (s, w) in enumerate(a):
        num = P.polyadd(num, w * s * prod(lin_a[:i] + lin_a[i + 1:] + lin_b))
    for j, (s, w) in enumerate(b):
        num = P.polyadd(num, w * prod(lin_a + lin_b[:j] + lin_b[j + 1:]))
    num = P.polymul(np.array([0.0, 1.0]), num)  # the factor z
    num = np.trim_zeros(num, "b")
    zeros = list(P.polyroots(num)) if num.size > 1 else []
    if any(abs(complex(r).imag) > 1e-9 * max(1.0, abs(r)) for r in zeros):
        raise ValueError("non-real zero in an AM–CM generating function")
    zeros = sorted(float(complex(r).real) for r in zeros)
    poles = sorted([1 / s for s, _ in a] + [s for s, _ in b])
    # cancel exact coincidences (an atom of μ₋ at 0 against the factor z)
    for p in list(poles):
        hit = [zz for zz in zeros if abs(zz - p) <= 1e-12 * max(1.0, abs(p))]
        if hit:
            zeros.remove(hit[0])
            poles.remove(p)

    kappa = len(poles) - len(zeros)
    terms = [(-INF, zz, 1) for zz in zeros] + [(-INF, p, -1) for p in poles]
    if kappa:
        terms.append((-INF, INF, kappa))
    phi = PhiFunction.from_intervals(terms)
    F_i = amcm_gf(mu_plus, mu_minus, 1j)
    rep = ExponentialRep(0.0, 0.0, math.log(abs(F_i)), phi)
    got = np.exp(log_exponential(rep, 1j))
    if abs(got - F_i) > 1e-8 * abs(F_i):
        raise ValueError("AM–CM representation does not reproduce F(i)")
    return rep


def geometric_rep(q: float) -> ExponentialRep:
    """Representation of Σ qᵏzᵏ = 1/(1 − qz)."""
    return pf_rep(PolyaFrequencyParams(delta_plus=(q,)))


# ---------------------------------------------------------------------------
# evaluators


CLOSED_FORMS: dict[str, Callable] = {
    "one": lambda z: np.ones_like(z),
    "power": lambda z, k=1: z ** int(k),
    "geometric": lambda z, q=0.5: 1 / (1 - q * z),
    "cauchy": lambda z: 1 / (1 - z),
    "discrete_stable": lambda z, lam=1.0, nu=1.0: np.exp(-lam * (1 - z) ** nu),
}


def register_closed_form(name: str, func: Callable):
    CLOSED_FORMS[name] = func


@dataclass(frozen=True)
class CircleEvaluator:
    """A generating function known on the unit circle.

    ``kind`` is "sequence", "rep" or "closed_form". Closed forms are called
    on Im z ≥ 0 and extended to the lower half of the circle by symmetry;
    representations also evaluate inside the upper half-plane.
    """

    kind: str
    source: object = None
    name: str = ""
    params: dict = field(default_factory=dict)
    excluded_point: bool = False
    tol: float = 1e-10

    @classmethod
    def from_sequence(cls, seq: TwoSidedSequence) -> "CircleEvaluator":
        return cls("sequence", seq)

    @classmethod
    def from_rep(cls, rep: ExponentialRep, tol: float = 1e-10, excluded_point=True):
        _require_admissible(rep)
        return cls("rep", rep, excluded_point=excluded_point, tol=tol)

    @classmethod
    def closed_form(cls, name_or_func, excluded_point: bool = False, **params):
        if callable(name_or_func):
            return cls("closed_form", name_or_func, getattr(name_or_func, "__name__", "f"),
                       params, excluded_point)
        if name_or_func not in CLOSED_FORMS:
            raise ValueError(f"unknown closed form {name_or_func!r}")
        return cls("closed_form", CLOSED_FORMS[name_or_func], name_or_func, params, excluded_point)

    @property
    def half_plane(self) -> bool:
        return self.kind in ("rep", "closed_form")

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        if self.kind == "sequence":
            return eval_direct(self.source, z)
        if self.kind == "rep":
            return eval_exponential(self.source, z, self.tol, check=False)
        zs = np.atleast_1d(z)
        flip = zs.imag < 0
        w = np.where(flip, zs.conj(), zs)
        out = np.asarray(self.source(w, **self.params), dtype=complex) * np.ones(w.shape)
        out = np.where(flip, out.conj(), out)
        return complex(out[0]) if z.ndim == 0 else out.reshape(z.shape)

    def on_circle(self, t):
        return self(np.exp(1j * np.asarray(t, dtype=float)))

    def log_at(self, z: complex) -> complex:
        """Continuous log where it is known exactly (representations)."""
        if self.kind == "rep":
            return complex(log_exponential(self.source, z, self.tol))
        return complex(np.log(self(z)))


def _as_evaluator(F) -> CircleEvaluator:
    if isinstance(F, CircleEvaluator):
        return F
    if isinstance(F, TwoSidedSequence):
        return CircleEvaluator.from_sequence(F)
    if isinstance(F, ExponentialRep):
        return CircleEvaluator.from_rep(F)
    if callable(F):
        return CircleEvaluator.closed_form(F)
    raise TypeError(f"cannot evaluate {type(F).__name__}")


# ---------------------------------------------------------------------------
# recovery, boundary argument and condition (v)


def recover_sequence(F, window, n_points: int, symmetric: bool = True) -> TwoSidedSequence:
    """Fourier coefficients on the half-step offset grid t_j = 2π(j+½)/n.

    Parameters
    ----------
    F : CircleEvaluator or callable
    window : (int, int)
        Inclusive index range to return; must fit in ``n_points``.
    n_points : int
        Power of two.
    symmetric : bool
        Assume real coefficients, F(z̄) = conj F(z), and evaluate only the
        upper half of the grid.
    """
    F = _as_evaluator(F)
    n = int(n_points)
    if n < 2 or n & (n - 1):
        raise GridTooCoarse("n_points must be a power of two")
    lo, hi = int(window[0]), int(window[1])
    if hi - lo + 1 > n:
        raise GridTooCoarse(f"window of {hi - lo + 1} indices needs more than {n} points")
    t = 2 * np.pi * (np.arange(n) + 0.5) / n
    if symmetric:
        half = F.on_circle(t[: n // 2])
        vals = np.concatenate((half, np.conj(half[::-1])))
    else:
        vals = F.on_circle(t)
    if not np.all(np.isfinite(vals)):
        raise SingularitySampled("non-finite value on the sample grid")
    A = np.fft.fft(vals) / n
    k = np.arange(lo, hi + 1)
    coef = np.exp(-1j * np.pi * k / n) * A[k % n]
    return TwoSidedSequence(lo, coef.real, "truncated", INF, True, True)


def _track_arg(F: CircleEvaluator, path, arg, prev, max_steps=200000):
    """Follow the argument of F along path(u), u ∈ [0, 1]."""
    u, h = 0.0, 1.0 / 32
    steps = 0
    while u < 1.0:
        h = min(h, 1.0 - u)
        z = path(u + h)
        val = complex(F(z))
        if not np.isfinite(val) or abs(val) < 1e-300:
            raise ZeroCrossing(f"F vanishes or blows up near z = {z}")
        d = float(np.angle(val / prev))
        if abs(d) > math.pi / 4:
            h *= 0.5
            if h < 1e-15:
                raise ZeroCrossing(f"argument jumps near z = {z}")
            continue
        arg += d
        prev = val
        u += h
        h *= 1.5
        steps += 1
        if steps > max_steps:
            raise ZeroCrossing("argument tracking did not converge")
    return arg, prev


def boundary_phi(F, s: float, t: float = 1e-6) -> float:
    """(1/π)·continuous argument of F at s + it.

    The argument is anchored at z = i (principal value for closed forms,
    the exact exponent for representations) and tracked along the
    horizontal segment from i to s + i, then down to s + it on a
    logarithmic height scale.
    """
    F = _as_evaluator(F)
    if not F.half_plane:
        raise ValueError("boundary_phi needs an evaluator defined on the half-plane")
    if s == 0 or not t > 0:
        raise ValueError("need s ≠ 0 and t > 0")
    val0 = complex(F(1j))
    if val0 == 0 or not np.isfinite(val0):
        raise ZeroCrossing("F vanishes at the anchor z = i")
    arg0 = F.log_at(1j).imag if F.kind == "rep" else float(np.angle(val0))
    arg, prev = _track_arg(F, lambda u: complex(u * s, 1.0), arg0, val0)
    if t < 1:
        lt = math.log(t)
        arg, prev = _track_arg(F, lambda u: complex(s, math.exp(u * lt)), arg, prev)
    return arg / math.pi


@dataclass(frozen=True)
class C5Report:
    t: tuple
    residuals: tuple
    slope: float
    verdict: bool

    def to_dict(self):
        return {"t": list(self.t), "residuals": list(self.residuals), "slope": self.slope,
                "verdict": self.verdict}


def check_c5(F, t_sequence) -> C5Report:
    """Residuals |(e^{it} − 1)F(e^{it})| along decreasing t.

    The verdict asks for a strictly decreasing sequence (each step by a
    relative 1e-6 at least) whose log-log slope in t is at least 1/4.
    This is evidence for the limit being zero, not a proof.
    """
    F = _as_evaluator(F)
    t = np.asarray(t_sequence, dtype=float)
    if t.size < 2 or np.any(np.diff(t) >= 0) or np.any(t <= 0):
        raise ValueError("t_sequence must be positive and strictly decreasing")
    z = np.exp(1j * t)
    r = np.abs((z - 1) * F.on_circle(t))
    with np.errstate(divide="ignore"):
        lr = np.log(np.maximum(r, 1e-300))
    slope = float(np.polyfit(np.log(t), lr, 1)[0])
    decreasing = bool(np.all(r[1:] < r[:-1] * (1 - 1e-6)))
    return C5Report(tuple(t), tuple(r), slope, decreasing and slope >= 0.25)
