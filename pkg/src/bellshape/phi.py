"""Boundary function φ, the exponential representation and their checks.

φ is integer valued and piecewise constant on (−∞, 0) and arbitrary (but
described piece by piece) on (0, ∞). Positive pieces come in three kinds:
constants, sampled grids with linear interpolation, and named closed-form
expressions. Every piece also carries an affine-plus-clip transform so that
splits such as max(φ, 0) or y·φ stay exact instead of being resampled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np
from scipy import integrate, optimize

from .errors import GridTooCoarse, NotAdmissible

INF = math.inf
EPS = 1e-12  # slack for comparisons against integer levels
RW_LO = 3 - 2 * math.sqrt(2)
RW_HI = 3 + 2 * math.sqrt(2)


# ---------------------------------------------------------------------------
# named expressions


def _arccot(x):
    return np.pi / 2 - np.arctan(x)


def rw_arccot(s):
    """Boundary function of the square-lattice hitting law on (0, ∞).

    −1 below 3−2√2, +1 above 3+2√2, and ∓(1/π)·arccot(R(s)) in between,
    the sign following s < 1 or s > 1.
    """
    s0 = np.asarray(s, dtype=float)
    s = np.atleast_1d(s0)
    out = np.where(s < 1, -1.0, 1.0)
    band = (s > RW_LO) & (s < RW_HI) & (s != 1)
    sb = s[band]
    d = (sb - 1) ** 2 / sb  # s + 1/s − 2 without cancellation near s = 1
    out[band] = np.sign(sb - 1) * _arccot((2 - d) / (np.sqrt(d) * np.sqrt(4 - d))) / np.pi
    out[s == 1] = 0.0
    return float(out[0]) if s0.ndim == 0 else out.reshape(s0.shape)


def rrw_arctan(s):
    """(1/π)·arctan((√s − 1/√s)/2) for s > 0."""
    s = np.asarray(s, dtype=float)
    r = np.sqrt(s)
    out = np.arctan((r - 1 / r) / 2) / np.pi
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class Expression:
    func: Callable
    bound: Callable  # params -> sup|f| or None when unbounded
    exponent: Callable = lambda p: 0.0  # growth s^e at 0 and ∞


EXPRESSIONS = {
    "rw_arccot": Expression(lambda s, **p: rw_arccot(s), lambda p: 1.0),
    "rrw_arctan": Expression(lambda s, **p: rrw_arctan(s), lambda p: 0.5),
    "constant": Expression(
        lambda s, value=0.0: np.full(np.shape(s), float(value)) if np.ndim(s) else float(value),
        lambda p: abs(float(p.get("value", 0.0))),
    ),
    "power": Expression(
        lambda s, coef=1.0, exponent=0.0: coef * np.power(s, exponent),
        lambda p: None,
        lambda p: float(p.get("exponent", 0.0)),
    ),
}


def register_expression(name: str, func: Callable, bound: Callable, exponent=None):
    """Make a closed form available to φ descriptors under ``name``."""
    EXPRESSIONS[name] = Expression(func, bound, exponent or (lambda p: 0.0))


# ---------------------------------------------------------------------------
# pieces on (0, ∞)


def _clip_compose(l1, h1, l2, h2):
    # clip(clip(x, l1, h1), l2, h2) == clip(x, L, H)
    return min(max(l1, l2), h2), max(min(h1, h2), l2)


@dataclass(frozen=True)
class Piece:
    lo: float
    hi: float

    kind = "abstract"

    def __post_init__(self):
        if not (0 <= self.lo < self.hi <= INF):
            raise ValueError(f"bad piece interval [{self.lo}, {self.hi})")

    def __call__(self, s):
        raise NotImplementedError

    @property
    def is_constant(self) -> bool:
        return False

    def sup_abs(self) -> float | None:
        """Upper bound of |φ| on the piece, or None if unbounded."""
        raise NotImplementedError

    def nodes(self) -> np.ndarray:
        return np.empty(0)

    def restricted(self, lo, hi) -> "Piece":
        raise NotImplementedError

    def transformed(self, scale=1.0, shift=0.0, clip_lo=-INF, clip_hi=INF) -> "Piece":
        raise NotImplementedError

    def samples(self, density: int) -> np.ndarray:
        """Sample abscissae inside the piece, endpoints nudged inward."""
        lo, hi = self.lo, self.hi
        if math.isinf(hi):
            L = max(lo, 1.0)
            r = np.linspace(0.0, 1.0, density + 1)[:-1]
            s = lo + L * r / (1 - r)
            s = np.concatenate((s, lo + L * np.array([1e3, 1e6, 1e9, 1e12])))
        else:
            s = np.linspace(lo, hi, max(density, 2))
        if lo == 0:
            top = min(hi, 1.0)
            s = np.concatenate((s, top * np.logspace(-12, -1, 12)))
        eta_lo = 1e-9 * max(lo, 1e-3 if lo == 0 else lo)
        s = s[(s > lo) & (s < hi)]
        extra = [lo + eta_lo]
        if not math.isinf(hi):
            extra.append(hi - 1e-9 * max(hi - lo, 0) if hi - lo < 1 else hi * (1 - 1e-10))
        for k in range(3, 10):  # resolve behaviour next to s = 1
            extra += [1 - 10.0**-k, 1 + 10.0**-k]
        extra = np.array(extra)
        s = np.concatenate((s, extra[(extra > lo) & (extra < hi)], self.nodes()))
        s = s[(s > lo) & (s < hi)]
        return np.unique(s)

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantPiece(Piece):
    value: float = 0.0
    kind = "constant"

    def __call__(self, s):
        return np.full(np.shape(s), self.value) if np.ndim(s) else self.value

    @property
    def is_constant(self) -> bool:
        return True

    def sup_abs(self):
        return abs(self.value)

    def restricted(self, lo, hi):
        return ConstantPiece(lo, hi, self.value)

    def transformed(self, scale=1.0, shift=0.0, clip_lo=-INF, clip_hi=INF):
        return ConstantPiece(
            self.lo, self.hi, float(min(max(scale * self.value + shift, clip_lo), clip_hi))
        )

    def to_dict(self):
        return {"from": self.lo, "to": self.hi, "kind": "constant", "params": {"value": self.value}}


@dataclass(frozen=True)
class SampledPiece(Piece):
    """Piecewise-linear interpolation of (s, value) pairs, flat outside the grid."""

    grid: tuple = ()
    kind = "sampled"

    def __post_init__(self):
        super().__post_init__()
        g = tuple((float(s), float(v)) for s, v in self.grid)
        if not g:
            raise ValueError("sampled piece needs at least one node")
        xs = [s for s, _ in g]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("sampled nodes must be strictly increasing")
        if xs[0] < self.lo or xs[-1] > self.hi:
            raise ValueError("sampled nodes must lie inside the piece")
        object.__setattr__(self, "grid", g)

    @property
    def xs(self):
        return np.array([s for s, _ in self.grid])

    @property
    def vs(self):
        return np.array([v for _, v in self.grid])

    def __call__(self, s):
        out = np.interp(s, self.xs, self.vs)
        return float(out) if np.ndim(out) == 0 else out

    @property
    def is_constant(self) -> bool:
        return bool(np.all(self.vs == self.vs[0]))

    def sup_abs(self):
        return float(np.max(np.abs(self.vs)))

    def nodes(self):
        return self.xs

    def restricted(self, lo, hi):
        pts = [(lo, self(lo))] + [(x, v) for x, v in self.grid if lo < x < hi]
        if not math.isinf(hi):
            pts.append((hi, self(hi)))
        return SampledPiece(lo, hi, tuple(pts))

    def transformed(self, scale=1.0, shift=0.0, clip_lo=-INF, clip_hi=INF):
        xs, vs = self.xs, scale * self.vs + shift
        # keep the clip exact by inserting the crossing points of each level
        new_x, new_v = [xs[0]], [vs[0]]
        for x0, x1, v0, v1 in zip(xs, xs[1:], vs, vs[1:]):
            for level in (clip_lo, clip_hi):
                if math.isfinite(level) and (v0 - level) * (v1 - level) < 0:
                    new_x.append(x0 + (level - v0) * (x1 - x0) / (v1 - v0))
                    new_v.append(level)
            new_x.append(x1)
            new_v.append(v1)
        order = np.argsort(new_x, kind="stable")
        xs = np.array(new_x)[order]
        vs = np.clip(np.array(new_v)[order], clip_lo, clip_hi)
        keep = np.concatenate(([True], np.diff(xs) > 0))
        return SampledPiece(self.lo, self.hi, tuple(zip(xs[keep], vs[keep])))

    def to_dict(self):
        return {
            "from": self.lo,
            "to": self.hi,
            "kind": "sampled",
            "params": {"points": [list(p) for p in self.grid]},
        }


@dataclass(frozen=True)
class ExpressionPiece(Piece):
    """clip(scale·f(s; params) + shift, clip_lo, clip_hi) for a named f."""

    name: str = "constant"
    params: tuple = ()  # sorted (key, value) pairs, keeps the piece hashable
    scale: float = 1.0
    shift: float = 0.0
    clip_lo: float = -INF
    clip_hi: float = INF
    kind = "expression"

    def __post_init__(self):
        super().__post_init__()
        if self.name not in EXPRESSIONS:
            raise ValueError(f"unknown expression {self.name!r}")
        if isinstance(self.params, dict):
            object.__setattr__(self, "params", tuple(sorted(self.params.items())))

    @property
    def expr(self) -> Expression:
        return EXPRESSIONS[self.name]

    def __call__(self, s):
        raw = self.expr.func(s, **dict(self.params))
        out = np.clip(self.scale * np.asarray(raw) + self.shift, self.clip_lo, self.clip_hi)
        return float(out) if np.ndim(out) == 0 else out

    @property
    def is_constant(self) -> bool:
        return self.name == "constant" or self.clip_lo == self.clip_hi or self.scale == 0

    def sup_abs(self):
        b = self.expr.bound(dict(self.params))
        if b is None:
            e = self.expr.exponent(dict(self.params))
            if self.lo > 0 and math.isfinite(self.hi):
                b = max(abs(self(self.lo)), abs(self(self.hi)))
            elif (self.lo > 0 or e >= 0) and (math.isfinite(self.hi) or e <= 0):
                ref = [x for x in (self.lo, self.hi, 1.0) if 0 < x < INF]
                b = max(abs(self(x)) for x in ref) if ref else None
        if b is not None:
            b = abs(self.scale) * b + abs(self.shift)
        lim = max(abs(self.clip_lo), abs(self.clip_hi))
        if math.isfinite(lim):
            b = lim if b is None else min(b, lim)
        return b

    def growth_exponent(self) -> float:
        return self.expr.exponent(dict(self.params))

    def restricted(self, lo, hi):
        return ExpressionPiece(
            lo, hi, self.name, self.params, self.scale, self.shift, self.clip_lo, self.clip_hi
        )

    def transformed(self, scale=1.0, shift=0.0, clip_lo=-INF, clip_hi=INF):
        if scale >= 0:
            l1, h1 = scale * self.clip_lo + shift, scale * self.clip_hi + shift
        else:
            l1, h1 = scale * self.clip_hi + shift, scale * self.clip_lo + shift
        if scale == 0:
            l1, h1 = -INF, INF
        L, H = _clip_compose(
            -INF if math.isnan(l1) else l1, INF if math.isnan(h1) else h1, clip_lo, clip_hi
        )
        return ExpressionPiece(
            self.lo, self.hi, self.name, self.params,
            scale * self.scale, scale * self.shift + shift, L, H,
        )

    def to_dict(self):
        params = dict(self.params)
        if self.scale != 1:
            params["scale"] = self.scale
        if self.shift != 0:
            params["shift"] = self.shift
        if math.isfinite(self.clip_lo):
            params["clip_lo"] = self.clip_lo
        if math.isfinite(self.clip_hi):
            params["clip_hi"] = self.clip_hi
        return {"from": self.lo, "to": self.hi, "kind": self.name, "params": params}


def piece_from_dict(d: dict) -> Piece:
    lo = float(d["from"])
    hi = INF if d.get("to") in (None, "inf", "Infinity") else float(d["to"])
    kind = d.get("kind", "constant")
    params = dict(d.get("params", {}))
    if kind == "constant":
        return ConstantPiece(lo, hi, float(params.get("value", 0.0)))
    if kind == "sampled":
        return SampledPiece(lo, hi, tuple(tuple(p) for p in params["points"]))
    if kind == "expression":
        kind = params.pop("name")
    extra = {k: float(params.pop(k)) for k in ("scale", "shift", "clip_lo", "clip_hi") if k in params}
    return ExpressionPiece(lo, hi, kind, tuple(sorted(params.items())), **extra)


# ---------------------------------------------------------------------------
# φ itself


@dataclass(frozen=True)
class PhiFunction:
    """Boundary function φ.

    Parameters
    ----------
    negative_steps : sequence of (breakpoint, value)
        Breakpoints s < 0 in increasing order; ``value`` is the integer value
        of φ to the left of the breakpoint (back to the previous breakpoint).
    value_near_zero : int
        Value on the last interval before 0.
    positive_pieces : sequence of Piece
        Tiling of (0, ∞).
    """

    negative_steps: tuple = ()
    value_near_zero: int = 0
    positive_pieces: tuple = (ConstantPiece(0.0, INF, 0.0),)

    def __post_init__(self):
        steps = tuple((float(b), v) for b, v in self.negative_steps)
        for b, v in steps:
            if not b < 0:
                raise ValueError("negative breakpoints must be < 0")
            if v != int(v):
                raise ValueError("φ is integer valued on (−∞, 0)")
        if any(b2 <= b1 for (b1, _), (b2, _) in zip(steps, steps[1:])):
            raise ValueError("negative breakpoints must increase")
        if self.value_near_zero != int(self.value_near_zero):
            raise ValueError("φ is integer valued on (−∞, 0)")
        object.__setattr__(self, "negative_steps", tuple((b, int(v)) for b, v in steps))
        object.__setattr__(self, "value_near_zero", int(self.value_near_zero))
        pieces = tuple(self.positive_pieces)
        if not pieces or pieces[0].lo != 0 or not math.isinf(pieces[-1].hi):
            raise ValueError("positive pieces must tile (0, ∞)")
        if any(p.hi != q.lo for p, q in zip(pieces, pieces[1:])):
            raise ValueError("positive pieces must be contiguous")
        object.__setattr__(self, "positive_pieces", pieces)

    # -- construction helpers ------------------------------------------
    @classmethod
    def zero(cls) -> "PhiFunction":
        return cls()

    @classmethod
    def from_intervals(cls, terms: Iterable[tuple]) -> "PhiFunction":
        """Sum of weighted indicators w·1_(lo, hi), split at 0.

        The summed weight must be an integer on every negative interval.
        """
        terms = [(float(lo), float(hi), float(w)) for lo, hi, w in terms if hi > lo and w]
        cuts = sorted({x for lo, hi, _ in terms for x in (lo, hi) if math.isfinite(x)} | {0.0})

        def total(a, b):
            mid = _midpoint(a, b)
            return sum(w for lo, hi, w in terms if lo < mid < hi)

        neg = [c for c in cuts if c < 0]
        bounds = [-INF] + neg + [0.0]
        vals = []
        for a, b in zip(bounds, bounds[1:]):
            v = total(a, b)
            if abs(v - round(v)) > 1e-9:
                raise ValueError("weights must sum to integers on (−∞, 0)")
            vals.append(int(round(v)))
        steps = [(b, v) for b, v in zip(neg, vals[:-1])]
        steps = _merge_steps(steps, vals[-1])
        pos = [0.0] + [c for c in cuts if c > 0] + [INF]
        pieces = [ConstantPiece(a, b, total(a, b)) for a, b in zip(pos, pos[1:])]
        return cls(tuple(steps), vals[-1], tuple(_merge_constants(pieces)))

    @classmethod
    def from_dict(cls, d: dict) -> "PhiFunction":
        steps = tuple((float(e["break"]), int(e["value"])) for e in d.get("negative_steps", []))
        pieces = d.get("positive_pieces") or [{"from": 0, "to": None, "kind": "constant", "params": {"value": 0}}]
        return cls(steps, int(d.get("value_near_zero", 0)), tuple(piece_from_dict(p) for p in pieces))

    def to_dict(self) -> dict:
        return {
            "negative_steps": [{"break": b, "value": v} for b, v in self.negative_steps],
            "value_near_zero": self.value_near_zero,
            "positive_pieces": [p.to_dict() for p in self.positive_pieces],
        }

    # -- evaluation ----------------------------------------------------
    @property
    def leftmost_tail_value(self) -> int:
        return self.negative_steps[0][1] if self.negative_steps else self.value_near_zero

    def negative_intervals(self) -> list[tuple[float, float, int]]:
        """(lo, hi, value) for the integer steps on (−∞, 0)."""
        bounds = [-INF] + [b for b, _ in self.negative_steps] + [0.0]
        vals = [v for _, v in self.negative_steps] + [self.value_near_zero]
        return [(a, b, v) for a, b, v in zip(bounds, bounds[1:], vals)]

    def piece_at(self, s: float) -> Piece:
        los = [p.lo for p in self.positive_pieces]
        return self.positive_pieces[int(np.searchsorted(los, s, side="right")) - 1]

    def __call__(self, s):
        s_arr = np.atleast_1d(np.asarray(s, dtype=float))
        if np.any(s_arr == 0) or not np.all(np.isfinite(s_arr)):
            raise ValueError("φ is evaluated at finite s ≠ 0")
        out = np.empty(s_arr.shape)
        neg = s_arr < 0
        if np.any(neg):
            brk = np.array([b for b, _ in self.negative_steps])
            vals = np.array([v for _, v in self.negative_steps] + [self.value_near_zero], float)
            out[neg] = vals[np.searchsorted(brk, s_arr[neg], side="right")]
        pos = ~neg
        if np.any(pos):
            los = np.array([p.lo for p in self.positive_pieces])
            idx = np.searchsorted(los, s_arr[pos], side="right") - 1
            vals = np.empty(idx.size)
            for i in np.unique(idx):
                m = idx == i
                vals[m] = self.positive_pieces[i](s_arr[pos][m])
            out[pos] = vals
        return float(out[0]) if np.ndim(s) == 0 else out.reshape(np.shape(s))

    def samples(self, density: int = 16) -> np.ndarray:
        """Sorted positive sample points, at least ``density`` per piece."""
        return np.unique(np.concatenate([p.samples(density) for p in self.positive_pieces]))

    # -- transforms ----------------------------------------------------
    def map_pieces(self, fn, neg_fn=None) -> "PhiFunction":
        neg_fn = neg_fn or (lambda v: v)
        steps = [(b, neg_fn(v)) for b, v in self.negative_steps]
        near = neg_fn(self.value_near_zero)
        return PhiFunction(
            tuple(_merge_steps(steps, near)), near, tuple(fn(p) for p in self.positive_pieces)
        )

    def scaled(self, y: float) -> "PhiFunction":
        """y·φ; y must keep the negative part integer valued."""

        def neg(v):
            w = y * v
            if abs(w - round(w)) > 1e-12:
                raise ValueError("scaling must keep φ integer valued on (−∞, 0)")
            return int(round(w))

        return self.map_pieces(lambda p: p.transformed(scale=y), neg)


def _midpoint(a, b):
    if math.isinf(a) and math.isinf(b):
        return 0.0
    if math.isinf(a):
        return b - 1.0
    if math.isinf(b):
        return a + 1.0
    return 0.5 * (a + b)


def _merge_steps(steps, near):
    """Drop breakpoints whose two sides carry the same value."""
    out = []
    vals = [v for _, v in steps] + [near]
    for i, (b, v) in enumerate(steps):
        if v != vals[i + 1]:
            out.append((b, v))
    return out


def _merge_constants(pieces):
    out = []
    for p in pieces:
        if out and isinstance(p, ConstantPiece) and isinstance(out[-1], ConstantPiece) \
                and out[-1].value == p.value:
            out[-1] = ConstantPiece(out[-1].lo, p.hi, p.value)
        else:
            out.append(p)
    return out


# ---------------------------------------------------------------------------
# representation types


@dataclass(frozen=True)
class ExponentialRep:
    """Quadruple (b⁺, b⁻, c, φ) of the exponential representation."""

    b_plus: float = 0.0
    b_minus: float = 0.0
    c: float = 0.0
    phi: PhiFunction = field(default_factory=PhiFunction.zero)

    def __post_init__(self):
        if not (self.b_plus >= 0 and self.b_minus >= 0):
            raise ValueError("b± must be nonnegative")
        if not math.isfinite(self.c):
            raise ValueError("c must be finite")

    def scaled(self, y: float) -> "ExponentialRep":
        return ExponentialRep(y * self.b_plus, y * self.b_minus, y * self.c, self.phi.scaled(y))

    def to_dict(self) -> dict:
        return {"b_plus": self.b_plus, "b_minus": self.b_minus, "c": self.c, "phi": self.phi.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "ExponentialRep":
        phi = d.get("phi", {k: d[k] for k in ("negative_steps", "value_near_zero", "positive_pieces") if k in d})
        return cls(
            float(d.get("b_plus", 0.0)), float(d.get("b_minus", 0.0)), float(d.get("c", 0.0)),
            PhiFunction.from_dict(phi),
        )


@dataclass(frozen=True)
class SignedBoundaryMeasure:
    """σ = b⁺δ_∞ − b⁻δ_0 + φ(s)/(s²+1) ds."""

    atom_at_infinity: float
    atom_at_zero: float
    phi: PhiFunction

    @classmethod
    def from_rep(cls, rep: ExponentialRep) -> "SignedBoundaryMeasure":
        return cls(rep.b_plus, -rep.b_minus, rep.phi)

    def density(self, s):
        s = np.asarray(s, dtype=float)
        return self.phi(s) / (s * s + 1)

    def total_variation(self) -> float:
        tv = self.atom_at_infinity - self.atom_at_zero
        for lo, hi, v in self.phi.negative_intervals():
            tv += abs(v) * (math.atan(hi) - math.atan(lo))
        for p in self.phi.positive_pieces:
            if p.is_constant:
                tv += abs(float(p(_midpoint(p.lo, p.hi)))) * (math.atan(p.hi) - math.atan(p.lo))
            else:
                val, _ = integrate.quad(lambda s: abs(p(s)) / (s * s + 1), p.lo, p.hi, limit=200)
                tv += val
        return tv


# ---------------------------------------------------------------------------
# admissibility


@dataclass(frozen=True)
class Condition:
    passed: bool
    witness: str | None = None


@dataclass(frozen=True)
class AdmissibilityReport:
    conditions: dict

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions.values())

    def __getitem__(self, key) -> Condition:
        return self.conditions[key]

    def to_dict(self) -> dict:
        return {k: {"passed": c.passed, "witness": c.witness} for k, c in self.conditions.items()}


def _as_phi(x) -> PhiFunction:
    return x.phi if isinstance(x, ExponentialRep) else x


def _piece_integrable(p: Piece) -> tuple[bool, str | None]:
    if p.sup_abs() is not None:
        return True, None
    if isinstance(p, ExpressionPiece):
        e = p.growth_exponent()
        if math.isinf(p.hi) and e >= 1:
            return False, f"growth s^{e} on [{p.lo}, ∞) is not integrable against 1/(s²+1)"
        if p.lo == 0 and e <= -1:
            return False, f"singularity s^{e} at 0 is not integrable"
        val, err = integrate.quad(lambda s: abs(p(s)) / (s * s + 1), p.lo, p.hi, limit=200)
        if not math.isfinite(val):
            return False, f"quadrature diverges on [{p.lo}, {p.hi})"
        return True, None
    return False, f"piece [{p.lo}, {p.hi}) declares no bound"


def check_admissible(rep, grid_density: int = 16) -> AdmissibilityReport:
    """Conditions (i)–(iv) on φ, decided on a per-piece sample grid.

    (i)   integer, nonincreasing steps on (−∞, 0);
    (ii)  increasing after rounding on (0, ∞): φ(t) ≥ max_{s≤t} ⌈φ(s)⌉ − 1;
    (iii) φ ≤ 0 on (0, 1) and φ ≥ 0 on (1, ∞);
    (iv)  ∫ |φ(s)|/(s²+1) ds < ∞, decided structurally per piece.
    """
    if grid_density < 2:
        raise GridTooCoarse("need at least two samples per piece")
    phi = _as_phi(rep)
    cond = {}

    vals = [v for _, v in phi.negative_steps] + [phi.value_near_zero]
    bad = [i for i in range(len(vals) - 1) if vals[i + 1] > vals[i]]
    cond["i"] = Condition(
        not bad,
        None if not bad else f"value rises from {vals[bad[0]]} to {vals[bad[0] + 1]} "
        f"at s = {phi.negative_steps[bad[0]][0]}",
    )

    s = phi.samples(grid_density)
    v = phi(s)
    runmax = np.maximum.accumulate(np.ceil(v - EPS))
    viol = np.flatnonzero(v < runmax - 1 - EPS)
    cond["ii"] = Condition(
        viol.size == 0,
        None if viol.size == 0 else f"φ({s[viol[0]]:.6g}) = {v[viol[0]]:.6g} below "
        f"running ceiling {runmax[viol[0]]:.0f} − 1",
    )

    below = np.flatnonzero((s < 1) & (v > EPS))
    above = np.flatnonzero((s > 1) & (v < -EPS))
    wit = None
    if below.size:
        wit = f"φ({s[below[0]]:.6g}) = {v[below[0]]:.6g} > 0 on (0, 1)"
    elif above.size:
        wit = f"φ({s[above[0]]:.6g}) = {v[above[0]]:.6g} < 0 on (1, ∞)"
    cond["iii"] = Condition(wit is None, wit)

    wit = None
    for p in phi.positive_pieces:
        ok, why = _piece_integrable(p)
        if not ok:
            wit = why
            break
    cond["iv"] = Condition(wit is None, wit)
    return AdmissibilityReport(cond)


@dataclass(frozen=True)
class BoundaryMass:
    p: float
    q: float
    passed: bool


def check_boundary_mass(phi, grid_density: int = 64) -> BoundaryMass:
    """Necessary screen p + q < 1 with p = inf_(0,1) −φ and q = inf_(1,∞) φ."""
    phi = _as_phi(phi)
    s = phi.samples(grid_density)
    v = phi(s)
    p = max(0.0, float(np.min(-v[s < 1]))) if np.any(s < 1) else 0.0
    q = max(0.0, float(np.min(v[s > 1]))) if np.any(s > 1) else 0.0
    return BoundaryMass(p, q, p + q < 1 - EPS)


# ---------------------------------------------------------------------------
# splits and classifiers


def wiener_hopf_split(phi) -> tuple[PhiFunction, PhiFunction]:
    """(max(φ, 0), min(φ, 0)) as PhiFunctions."""
    phi = _as_phi(phi)
    pos = phi.map_pieces(lambda p: p.transformed(clip_lo=0.0), lambda v: max(v, 0))
    neg = phi.map_pieces(lambda p: p.transformed(clip_hi=0.0), lambda v: min(v, 0))
    return pos, neg


def iar_witness(phi, grid_density: int = 64) -> list[tuple[float, int]]:
    """Stepwise increasing φ̃ with φ̃ ≤ φ ≤ φ̃ + 1 on (0, ∞).

    Returned as (start, value) pairs; φ̃ is the running maximum of ⌈φ⌉ − 1.
    Crossings of integer levels inside non-constant pieces are located by
    root finding between samples.
    """
    phi = _as_phi(phi)
    steps: list[tuple[float, int]] = []
    R = None
    for piece in phi.positive_pieces:
        if piece.is_constant:
            r = math.ceil(float(piece(_midpoint(piece.lo, piece.hi))) - EPS)
            if R is None or r > R:
                R = r
                steps.append((piece.lo, R - 1))
            continue
        s = piece.samples(max(grid_density, 64))
        v = piece(s)
        prev = piece.lo
        for sj, vj in zip(s, v):
            if R is None:
                R = math.ceil(vj - EPS)
                steps.append((piece.lo, R - 1))
            while vj > R + EPS:
                f = lambda x: float(piece(x)) - R
                a = prev
                if a <= piece.lo or f(a) > 0:
                    x = piece.lo if a <= piece.lo else a
                else:
                    x = optimize.brentq(f, a, sj, xtol=1e-14, rtol=4 * np.finfo(float).eps)
                R += 1
                steps.append((x, R - 1))
            prev = sj
    merged: list[tuple[float, int]] = []
    for x, val in steps:
        if merged and merged[-1][0] == x:
            merged[-1] = (x, val)
        elif not merged or merged[-1][1] != val:
            merged.append((x, val))
    return merged


def _step_value(steps, s):
    xs = [x for x, _ in steps]
    return steps[max(0, int(np.searchsorted(xs, s, side="right")) - 1)][1]


def pf_amcm_split(phi, grid_density: int = 64) -> tuple[PhiFunction, PhiFunction]:
    """Split φ into a stepwise (Pólya frequency) part and an AM–CM part.

    φ̃ from :func:`iar_witness` is clipped to min(φ̃, −1) on (0, 1) and
    max(φ̃, 0) on [1, ∞); the stepwise part is φ̃ + 1 on (0, 1), φ̃ on
    [1, ∞) and φ itself on (−∞, 0). The rest, φ minus that, lies in
    [−1, 0] on (0, 1) and in [0, 1] on (1, ∞).
    """
    phi = _as_phi(phi)
    rep = check_admissible(phi, grid_density)
    if not rep.passed:
        bad = {k: c.witness for k, c in rep.conditions.items() if not c.passed}
        raise NotAdmissible(f"conditions failed: {bad}")
    bm = check_boundary_mass(phi, grid_density)
    if not bm.passed:
        raise NotAdmissible(f"p + q = {bm.p + bm.q:.6g} is not below 1")

    steps = iar_witness(phi, grid_density)

    def pf_value(s):
        t = _step_value(steps, s)
        return min(t + 1, 0) if s < 1 else max(t, 0)

    cuts = sorted({x for x, _ in steps if x > 0} | {p.lo for p in phi.positive_pieces if p.lo > 0} | {1.0})
    bounds = [0.0] + cuts + [INF]
    pf_pieces, am_pieces = [], []
    for a, b in zip(bounds, bounds[1:]):
        mid = _midpoint(a, b)
        val = float(pf_value(mid))
        pf_pieces.append(ConstantPiece(a, b, val))
        am_pieces.append(phi.piece_at(mid).restricted(a, b).transformed(shift=-val))
    phi_pf = PhiFunction(phi.negative_steps, phi.value_near_zero, tuple(_merge_constants(pf_pieces)))
    phi_amcm = PhiFunction((), 0, tuple(am_pieces))
    return phi_pf, phi_amcm


def classify_infinitely_divisible(phi) -> bool:
    """True iff φ vanishes on (−∞, 0)."""
    phi = _as_phi(phi)
    return phi.value_near_zero == 0 and all(v == 0 for _, v in phi.negative_steps)


def classify_powers_bellshaped(phi, grid_density: int = 64) -> bool:
    """True iff φ is nondecreasing on (0, ∞), checked on the piece grid."""
    phi = _as_phi(phi)
    s = phi.samples(grid_density)
    v = phi(s)
    return bool(np.all(np.diff(v) >= -EPS))
