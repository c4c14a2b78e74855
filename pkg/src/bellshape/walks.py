"""Hitting distributions of planar lattice walks on a horizontal line.

Two lattices are covered: the square lattice (steps (±1,0), (0,±1)) and the
diagonal one (steps (±1,±1)). Started at height y, the walk is stopped at
the first visit to the x-axis. For the diagonal lattice the reported index
is k = ½(X_N + y).

Two algorithms compute the law of X_N:

* ``"time"`` steps the joint law of (X, Y) one move at a time; mass not
  absorbed within the horizon is the deficit. The tail P(N > n) decays
  like n^{-1/2}, so this is only practical for small accuracy demands.
* ``"excursion"`` conditions on the number V of vertical moves, which is the
  first-passage time of a simple walk. Given V = v, X_N is a sum of v i.i.d.
  horizontal displacements. The partial sums over v ≤ V, V/2, V/4 differ
  from the limit by a series in 1/V, which Richardson extrapolation removes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BranchViolation, BreakpointEvaluation, HorizonTooShort
from .genfunc import CircleEvaluator, register_closed_form
from .phi import (
    RW_HI,
    RW_LO,
    ConstantPiece,
    ExponentialRep,
    ExpressionPiece,
    PhiFunction,
    rrw_arctan,
    rw_arccot,
)
from .sequences import TwoSidedSequence

LATTICES = ("square", "diagonal")
RHO = 2 - math.sqrt(3)


@dataclass(frozen=True)
class WalkSpec:
    lattice: str = "square"
    start_height: int = 1
    horizon: int = 16000
    method: str = "excursion"
    levels: int = 3

    def __post_init__(self):
        if self.lattice not in LATTICES:
            raise ValueError(f"lattice must be one of {LATTICES}")
        if self.start_height < 1 or self.horizon < 1:
            raise ValueError("start_height and horizon must be positive")
        if self.method not in ("excursion", "time"):
            raise ValueError("method must be 'excursion' or 'time'")
        if self.method == "excursion" and self.horizon % (1 << self.levels):
            raise ValueError(f"horizon must be divisible by 2**levels = {1 << self.levels}")

    @property
    def index_map(self) -> str:
        return "raw_X" if self.lattice == "square" else "half_shifted"


def first_passage_pmf(y: int, V: int) -> np.ndarray:
    """P(first passage of a simple walk from y to 0 at time v), v = 0..V.

    Uses the ratio of consecutive nonzero terms of (y/v)·C(v, (v+y)/2)·2^{−v}.
    """
    p = np.zeros(V + 1)
    if y > V:
        return p
    val = 0.5**y
    v = y
    while v <= V:
        p[v] = val
        m = (v + y) // 2
        val *= v * (v + 1) / (4.0 * (m + 1) * (v - m + 1))
        v += 2
    return p


def _horizontal_step(lattice: str) -> np.ndarray:
    """Law of the x-displacement accompanying one vertical move."""
    if lattice == "diagonal":
        return np.array([0.5, 0.0, 0.5])
    # geometric number of ±1 moves before the next vertical one
    K = int(math.ceil(math.log(1e-19) / math.log(RHO)))
    k = np.arange(-K, K + 1)
    return RHO ** np.abs(k) / math.sqrt(3)


def _excursion_law(spec: WalkSpec):
    V, L = spec.horizon, spec.levels
    step = _horizontal_step(spec.lattice)
    h = step.size // 2
    W = int(40 + 8 * math.sqrt(V)) + h
    pv = first_passage_pmf(spec.start_height, V)
    cur = np.zeros(2 * W + 1)
    cur[W] = 1.0
    acc = np.zeros(2 * W + 1)
    marks = {V >> j for j in range(L + 1)}
    snaps = {}
    for v in range(1, V + 1):
        cur = np.convolve(cur, step)[h:h + 2 * W + 1]
        if pv[v]:
            acc += pv[v] * cur
        if v in marks:
            snaps[v] = acc.copy()
    table = [snaps[V >> j] for j in range(L, -1, -1)]  # coarse to fine
    prev = table[-1]
    for lev in range(1, L + 1):
        prev = table[-1]
        table = [(2**lev * table[i + 1] - table[i]) / (2**lev - 1) for i in range(len(table) - 1)]
    return table[0], np.abs(table[0] - prev), W


def _time_law(spec: WalkSpec):
    T, y0 = spec.horizon, spec.start_height
    W = T
    H = y0 + T
    P = np.zeros((H + 1, 2 * W + 1))  # rows: height, cols: x + W
    P[y0, W] = 1.0
    out = np.zeros(2 * W + 1)
    diag = spec.lattice == "diagonal"
    for n in range(T):
        Q = np.zeros_like(P)
        if diag:
            for dy in (1, -1):
                src = P[1:H] if dy == 1 else P[1:H + 1]
                dst = slice(2, H + 1) if dy == 1 else slice(0, H)
                Q[dst, 1:] += 0.25 * src[:, :-1]
                Q[dst, :-1] += 0.25 * src[:, 1:]
        else:
            Q[2:H + 1] += 0.25 * P[1:H]
            Q[0:H] += 0.25 * P[1:H + 1]
            Q[1:, 1:] += 0.25 * P[1:, :-1]
            Q[1:, :-1] += 0.25 * P[1:, 1:]
        out += Q[0]
        Q[0] = 0.0
        P = Q
    rest = float(P.sum())
    return out, rest, W


def hitting_pmf(spec: WalkSpec, tol: float | None = None) -> TwoSidedSequence:
    """Law of X_N (square) or ½(X_N + y) (diagonal) as a truncated sequence.

    The deficit bounds the mass outside the returned window plus, for the
    excursion method, the size of the last Richardson correction.

    Raises
    ------
    HorizonTooShort
        If ``tol`` is given and the deficit exceeds it.
    """
    y = spec.start_height
    if spec.method == "excursion":
        law, corr, W = _excursion_law(spec)
        # keep the part where the extrapolation is trustworthy
        K = int(math.sqrt(spec.horizon))
        x = np.arange(-K, K + 1)
        vals, err = law[W - K:W + K + 1], corr[W - K:W + K + 1]
        deficit = max(0.0, 1.0 - float(vals.sum())) + float(err.sum())
    else:
        law, rest, W = _time_law(spec)
        x = np.arange(-W, W + 1)
        vals = law
        deficit = rest
    if spec.lattice == "diagonal":
        keep = (x + y) % 2 == 0
        x, vals = x[keep], vals[keep]
        x = (x + y) // 2
    seq = TwoSidedSequence(int(x[0]), vals, "truncated", deficit, True, True)
    if tol is not None and deficit > tol:
        raise HorizonTooShort(
            f"deficit {deficit:.3g} exceeds {tol:.3g} at horizon {spec.horizon}"
        )
    return seq


# ---------------------------------------------------------------------------
# closed forms


def _check_branch(z):
    z = np.asarray(z, dtype=complex)
    if np.any(z.imag < 0) or np.any(z == 0):
        raise BranchViolation("closed forms are defined for Im z ≥ 0, z ≠ 0")
    on_axis = (z.imag == 0) & (np.abs(np.abs(z) - 1) > 1e-12)
    if np.any(on_axis & (z.real > 0)):
        raise BranchViolation("positive real axis off the circle is a branch cut")
    return z


def rw_gf_closed(y: int, z):
    """((1 + w + √w√(w+2))^{-1})^y with w = 1 − (z + 1/z)/2.

    Equal to 2 − (z+1/z)/2 − √(1 − (z+1/z)/2)·√(3 − (z+1/z)/2), written so
    that nothing cancels.
    """
    z0 = np.asarray(z)
    z = _check_branch(z)
    w = 1 - (z + 1 / z) / 2
    F = 1 / (1 + w + np.sqrt(w) * np.sqrt(w + 2))
    out = F ** int(y)
    return complex(out) if z0.ndim == 0 else out


def rrw_gf_closed(y: int, z):
    """((2 + i(z^{1/2} − z^{−1/2}))/(z + 1))^y.

    With q = (−z)^{1/2} this simplifies to (q − 1)/(q(1 + q)), which stays
    finite at z = −1.
    """
    z0 = np.asarray(z)
    z = _check_branch(z)
    q = np.sqrt(-z)
    F = (q - 1) / (q * (1 + q))
    out = F ** int(y)
    return complex(out) if z0.ndim == 0 else out


register_closed_form("rw", lambda z, y=1: rw_gf_closed(y, z))
register_closed_form("rrw", lambda z, y=1: rrw_gf_closed(y, z))

RW_BREAKS = (0.0, RW_LO, 1.0, RW_HI)
RRW_BREAKS = (-1.0, 0.0)


def _breakpoint_guard(s, breaks):
    s = np.asarray(s, dtype=float)
    if np.any(np.isin(s, breaks)):
        raise BreakpointEvaluation(f"φ is not evaluated at breakpoints {breaks}")
    return s


def rw_phi_closed(s):
    """Boundary argument for the square lattice (five branches)."""
    s0 = _breakpoint_guard(s, RW_BREAKS)
    s = np.atleast_1d(s0)
    out = np.zeros(s.shape)
    pos = s > 0
    out[pos] = rw_arccot(s[pos])
    return float(out[0]) if s0.ndim == 0 else out


def rrw_phi_closed(s):
    """Boundary argument for the diagonal lattice (three branches)."""
    s0 = _breakpoint_guard(s, RRW_BREAKS)
    s = np.atleast_1d(s0)
    out = np.where((s > -1) & (s < 0), -1.0, 0.0)
    pos = s > 0
    out[pos] = rrw_arctan(s[pos])
    return float(out[0]) if s0.ndim == 0 else out


def rw_phi_function() -> PhiFunction:
    return PhiFunction(
        negative_steps=(),
        value_near_zero=0,
        positive_pieces=(
            ConstantPiece(0.0, RW_LO, -1.0),
            ExpressionPiece(RW_LO, RW_HI, "rw_arccot"),
            ConstantPiece(RW_HI, math.inf, 1.0),
        ),
    )


def rrw_phi_function() -> PhiFunction:
    return PhiFunction(
        negative_steps=((-1.0, 0),),
        value_near_zero=-1,
        positive_pieces=(ExpressionPiece(0.0, math.inf, "rrw_arctan"),),
    )


def walk_rep(lattice: str, y: int = 1) -> ExponentialRep:
    """Representation with b± = 0, φ scaled by y and c = y·log|F₁(i)|."""
    if lattice == "square":
        phi, F_i = rw_phi_function(), rw_gf_closed(1, 1j)
    elif lattice == "diagonal":
        phi, F_i = rrw_phi_function(), rrw_gf_closed(1, 1j)
    else:
        raise ValueError(f"lattice must be one of {LATTICES}")
    return ExponentialRep(0.0, 0.0, math.log(abs(F_i)), phi).scaled(y)


def walk_evaluator(lattice: str, y: int = 1) -> CircleEvaluator:
    name = "rw" if lattice == "square" else "rrw"
    return CircleEvaluator.closed_form(name, excluded_point=False, y=y)


def closed_index_shift(lattice: str, y: int) -> int:
    """Offset between pmf indices and the closed-form coefficients.

    The diagonal closed form is the generating function of ½(X_N − y), so
    its coefficient at k − y is the pmf of ½(X_N + y) at k.
    """
    return y if lattice == "diagonal" else 0
