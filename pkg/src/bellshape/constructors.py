"""Builders for Pólya frequency, AM–CM and named bell-shaped families."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import stats

from .errors import MassMismatch, ParameterOutOfRange, WindowTooNarrow
from .sequences import TwoSidedSequence, delta, mirror, restrict

# guards against tol = 0; tails of positive factors stay relatively accurate
# far below machine epsilon, so the floor can be low
_REL_FLOOR = 1e-30


@dataclass(frozen=True)
class PolyaFrequencyParams:
    """Parameters of z^m exp(b⁺z + b⁻/z + c) Π(1+γ⁺z)(1+γ⁻/z) / Π(1−δ⁺z)(1−δ⁻/z)."""

    m: int = 0
    b_plus: float = 0.0
    b_minus: float = 0.0
    c: float = 0.0
    gamma_plus: tuple = ()
    gamma_minus: tuple = ()
    delta_plus: tuple = ()
    delta_minus: tuple = ()

    def __post_init__(self):
        for name in ("gamma_plus", "gamma_minus", "delta_plus", "delta_minus"):
            object.__setattr__(self, name, tuple(float(x) for x in getattr(self, name)))
        if int(self.m) != self.m:
            raise ParameterOutOfRange("m must be an integer")
        object.__setattr__(self, "m", int(self.m))
        if not (self.b_plus >= 0 and self.b_minus >= 0):
            raise ParameterOutOfRange("b± must be nonnegative")
        if not math.isfinite(self.c):
            raise ParameterOutOfRange("c must be finite")
        for g in self.gamma_plus + self.gamma_minus:
            if not 0 <= g <= 1:
                raise ParameterOutOfRange(f"γ = {g} outside [0, 1]")
        for d in self.delta_plus + self.delta_minus:
            if not 0 <= d < 1:
                raise ParameterOutOfRange(f"δ = {d} outside [0, 1)")

    def total_mass(self) -> float:
        """F(1), the sum of all coefficients."""
        num = np.prod([1 + g for g in self.gamma_plus + self.gamma_minus])
        den = np.prod([1 - d for d in self.delta_plus + self.delta_minus])
        return float(math.exp(self.b_plus + self.b_minus + self.c) * num / den)

    def gf(self, z):
        z = np.asarray(z, dtype=complex)
        out = z**self.m * np.exp(self.b_plus * z + self.b_minus / z + self.c)
        for g in self.gamma_plus:
            out = out * (1 + g * z)
        for g in self.gamma_minus:
            out = out * (1 + g / z)
        for d in self.delta_plus:
            out = out / (1 - d * z)
        for d in self.delta_minus:
            out = out / (1 - d / z)
        return out


@dataclass(frozen=True)
class DiscreteMeasure:
    """Finite atomic measure on [0, 1): atoms as (location, weight) pairs."""

    atoms: tuple = ()

    def __post_init__(self):
        atoms = tuple((float(s), float(w)) for s, w in self.atoms)
        locs = [s for s, _ in atoms]
        if any(not 0 <= s < 1 for s in locs):
            raise ParameterOutOfRange("atom locations must lie in [0, 1)")
        if any(not w > 0 for _, w in atoms):
            raise ParameterOutOfRange("atom weights must be positive")
        if len(set(locs)) != len(locs):
            raise ParameterOutOfRange("atom locations must be distinct")
        object.__setattr__(self, "atoms", tuple(sorted(atoms)))

    @classmethod
    def point(cls, s: float, w: float = 1.0) -> "DiscreteMeasure":
        return cls(((s, w),))

    @property
    def locations(self) -> np.ndarray:
        return np.array([s for s, _ in self.atoms])

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for _, w in self.atoms])

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum()) if self.atoms else 0.0

    def moments(self, k) -> np.ndarray:
        """∫ sᵏ μ(ds) for k ≥ 0, with 0⁰ = 1."""
        k = np.asarray(k)
        if not self.atoms:
            return np.zeros(k.shape)
        s, w = self.locations, self.weights
        return np.tensordot(w, np.power.outer(s, k), axes=1)


# ---------------------------------------------------------------------------
# elementary factors and assembly


def _geometric_terms(d: float, rel: float):
    # δᵏ up to the first K with δ^{K+1} ≤ rel; returns terms and dropped mass
    K = max(0, math.ceil(math.log(rel) / math.log(d)) - 1)
    return d ** np.arange(K + 1), d ** (K + 1) / (1 - d)


def _exp_terms(b: float, rel: float):
    # bᵏ/k! until the remaining tail is below rel·e^b
    K = max(1, math.ceil(b))
    while stats.poisson.sf(K, b) > rel:
        K += max(1, K // 4)
    terms = np.empty(K + 1)
    terms[0] = 1.0
    for k in range(1, K + 1):
        terms[k] = terms[k - 1] * b / k
    return terms, math.exp(b) * stats.poisson.sf(K, b)


def _finish(
    offset: int,
    values: np.ndarray,
    deficit: float,
    open_left: bool,
    open_right: bool,
    window,
    tol: float,
) -> TwoSidedSequence:
    if not (open_left or open_right):
        deficit = 0.0
    mode = "truncated" if (open_left or open_right) else "exact_zero"
    seq = TwoSidedSequence(offset, values, mode, deficit, open_left, open_right)
    if window is not None:
        seq = restrict(seq, int(window[0]), int(window[1]))
    if seq.deficit > tol:
        raise WindowTooNarrow(f"tail deficit {seq.deficit:.3g} exceeds tol {tol:.3g}")
    return seq


def pf_sequence(
    params: PolyaFrequencyParams, window=None, tol: float = 1e-12
) -> TwoSidedSequence:
    """Coefficients of the Pólya frequency generating function.

    Elementary factors are expanded and convolved, finite (Bernoulli)
    factors first and geometric ones last. Infinite factors are cut so that
    the total discarded mass stays below ``tol``. With factor masses M_i and
    dropped tails d_i the stored deficit is e^c Σ d_i Π_{j≠i} M_j, an upper
    bound for the mass lost in the product.

    Parameters
    ----------
    params : PolyaFrequencyParams
    window : (int, int), optional
        Inclusive index range to keep; dropped mass joins the deficit.
    tol : float
        Maximum allowed deficit.
    """
    p = params
    total = p.total_mass()
    n_inf = len(p.delta_plus) + len(p.delta_minus) + (p.b_plus > 0) + (p.b_minus > 0)
    # share of the deficit allotted to each infinite factor, relative to F(1)
    rel = max(tol / (2 * max(n_inf, 1) * max(total, 1e-300)), _REL_FLOOR)

    # (offset, coefficients, mass, dropped mass)
    factors = []
    for g in p.gamma_plus:
        if g > 0:
            factors.append((0, np.array([1.0, g]), 1 + g, 0.0))
    for g in p.gamma_minus:
        if g > 0:
            factors.append((-1, np.array([g, 1.0]), 1 + g, 0.0))
    if p.b_plus > 0:
        t, lost = _exp_terms(p.b_plus, rel)
        factors.append((0, t, math.exp(p.b_plus), lost))
    if p.b_minus > 0:
        t, lost = _exp_terms(p.b_minus, rel)
        factors.append((1 - t.size, t[::-1], math.exp(p.b_minus), lost))
    for d in p.delta_plus:
        if d > 0:
            t, lost = _geometric_terms(d, rel)
            factors.append((0, t, 1 / (1 - d), lost))
    for d in p.delta_minus:
        if d > 0:
            t, lost = _geometric_terms(d, rel)
            factors.append((1 - t.size, t[::-1], 1 / (1 - d), lost))

    offset, values = p.m, np.array([math.exp(p.c)])
    for off, coef, _, _ in factors:
        values = np.convolve(values, coef)
        offset += off
    deficit = math.exp(p.c) * sum(
        f[3] * math.prod(g[2] for g in factors if g is not f) for f in factors
    )
    open_left = p.b_minus > 0 or any(d > 0 for d in p.delta_minus)
    open_right = p.b_plus > 0 or any(d > 0 for d in p.delta_plus)
    return _finish(offset, values, deficit, open_left, open_right, window, tol)


def _amcm_side(mu: DiscreteMeasure, tol: float):
    """Moments ∫ sᵏ dμ for k = 1..K with tail ≤ tol, and the dropped tail."""
    s, w = mu.locations, mu.weights
    pos = s > 0
    if not np.any(pos):
        return np.zeros(0), 0.0
    s, w = s[pos], w[pos]
    share = tol / (2 * s.size)
    # w s^{K+1}/(1−s) ≤ share for every atom
    K = max(
        1, max(math.ceil(math.log(share * (1 - si) / wi) / math.log(si)) - 1 for si, wi in zip(s, w))
    )
    k = np.arange(1, K + 1)
    return w @ np.power.outer(s, k), float(np.sum(w * s ** (K + 1) / (1 - s)))


def amcm_sequence(
    mu_plus: DiscreteMeasure, mu_minus: DiscreteMeasure, window=None, tol: float = 1e-12
) -> TwoSidedSequence:
    """AM–CM sequence with Hausdorff measures μ₊ (k ≥ 0) and μ₋ (k ≤ 0).

    a(k) = ∫ sᵏ μ₊(ds) for k ≥ 0 and a(k) = ∫ s^{−k} μ₋(ds) for k ≤ 0.
    """
    m_plus, m_minus = mu_plus.total_mass, mu_minus.total_mass
    if abs(m_plus - m_minus) > tol + 8 * np.finfo(float).eps * max(m_plus, m_minus):
        raise MassMismatch(f"total masses differ: {m_plus} vs {m_minus}")
    right, lost_r = _amcm_side(mu_plus, tol)
    left, lost_l = _amcm_side(mu_minus, tol)
    values = np.concatenate((left[::-1], [m_plus], right))
    return _finish(
        -left.size, values, lost_l + lost_r, left.size > 0, right.size > 0, window, tol
    )


def convolve(a: TwoSidedSequence, b: TwoSidedSequence) -> TwoSidedSequence:
    """Convolution; window is the Minkowski sum of the operand windows."""
    values = np.convolve(a.values, b.values)
    if not (a.truncated or b.truncated):
        return TwoSidedSequence(a.offset + b.offset, values)
    na, nb = np.abs(a.values).sum(), np.abs(b.values).sum()
    deficit = na * b.deficit + nb * a.deficit + a.deficit * b.deficit
    open_left = (a.truncated and a.open_left) or (b.truncated and b.open_left)
    open_right = (a.truncated and a.open_right) or (b.truncated and b.open_right)
    return TwoSidedSequence(
        a.offset + b.offset, values, "truncated", deficit, open_left, open_right
    )


def convolve_all(seqs: Iterable[TwoSidedSequence]) -> TwoSidedSequence:
    out = delta()
    for s in seqs:
        out = convolve(out, s)
    return out


# ---------------------------------------------------------------------------
# named families


def _check_prob(p, name="p"):
    if not 0 < p < 1:
        raise ParameterOutOfRange(f"{name} = {p} outside (0, 1)")


def _check_positive(x, name):
    if not x > 0:
        raise ParameterOutOfRange(f"{name} = {x} must be positive")


def binomial_pmf(n: int, p: float) -> TwoSidedSequence:
    if int(n) != n or n < 1:
        raise ParameterOutOfRange("n must be a positive integer")
    _check_prob(p)
    k = np.arange(int(n) + 1)
    return TwoSidedSequence(0, stats.binom.pmf(k, int(n), p))


def _discrete_family(dist, window, tol) -> TwoSidedSequence:
    if window is None:
        hi = max(1, int(math.ceil(dist.mean())))
        while dist.sf(hi) > tol:
            hi += max(1, hi // 4)
        lo = 0
    else:
        lo, hi = int(window[0]), int(window[1])
    lo_eff = max(lo, 0)
    if hi < lo_eff:
        raise WindowTooNarrow("window misses the support")
    k = np.arange(lo_eff, hi + 1)
    deficit = float(dist.sf(hi) + (dist.cdf(lo_eff - 1) if lo_eff > 0 else 0.0))
    if deficit > tol:
        raise WindowTooNarrow(f"tail deficit {deficit:.3g} exceeds tol {tol:.3g}")
    values = np.concatenate((np.zeros(lo_eff - lo), dist.pmf(k)))
    return TwoSidedSequence(lo, values, "truncated", deficit, lo_eff > 0, True)


def poisson_pmf(lam: float, window=None, tol: float = 1e-12) -> TwoSidedSequence:
    _check_positive(lam, "λ")
    return _discrete_family(stats.poisson(lam), window, tol)


def negative_binomial_pmf(
    lam: float, p: float, window=None, tol: float = 1e-12
) -> TwoSidedSequence:
    """C(λ+k−1, k) p^λ (1−p)ᵏ for k ≥ 0."""
    _check_positive(lam, "λ")
    _check_prob(p)
    return _discrete_family(stats.nbinom(lam, p), window, tol)


def geometric_seq(q: float, window=None, tol: float = 1e-12) -> TwoSidedSequence:
    """qᵏ for k ≥ 0 (not normalised)."""
    _check_prob(q, "q")
    if window is None:
        lo = 0
        hi = max(0, math.ceil(math.log(tol * (1 - q)) / math.log(q)) - 1)
    else:
        lo, hi = int(window[0]), int(window[1])
    lo_eff = max(lo, 0)
    k = np.arange(lo_eff, hi + 1)
    deficit = q ** (hi + 1) / (1 - q) + (1 - q**lo_eff) / (1 - q)
    if deficit > tol:
        raise WindowTooNarrow(f"tail deficit {deficit:.3g} exceeds tol {tol:.3g}")
    values = np.concatenate((np.zeros(lo_eff - lo), q**k))
    return TwoSidedSequence(lo, values, "truncated", deficit, lo_eff > 0, True)


def stable_log_coefficients(lam: float, nu: float, K: int) -> np.ndarray:
    """Series coefficients g_0..g_K of −λ(1−z)^ν."""
    g = np.empty(K + 1)
    binom = 1.0  # C(ν, k)(−1)^k
    g[0] = -lam
    for k in range(1, K + 1):
        binom *= -(nu - k + 1) / k
        g[k] = -lam * binom
    return g


def discrete_stable(
    lam: float, nu: float, n_max: int = 4096, tol: float = 1e-12
) -> TwoSidedSequence:
    """Coefficients of exp(−λ(1−z)^ν) by power-series exponentiation.

    a(0) = e^{−λ} and k·a(k) = Σ_{j=1}^{k} j g_j a(k−j); all g_j (j ≥ 1)
    are positive so the recurrence has no cancellation. Stops at index
    ``n_max`` or as soon as the missing mass 1 − Σa drops below ``tol``.
    """
    _check_positive(lam, "λ")
    if not 0 < nu <= 1:
        raise ParameterOutOfRange(f"ν = {nu} outside (0, 1]")
    if n_max < 0:
        raise ParameterOutOfRange("n_max must be nonnegative")
    g = stable_log_coefficients(lam, nu, n_max)
    jg = np.arange(n_max + 1) * g
    a = np.zeros(n_max + 1)
    a[0] = math.exp(-lam)
    total = a[0]
    K = n_max
    for k in range(1, n_max + 1):
        a[k] = jg[1 : k + 1] @ a[k - 1 :: -1] / k
        total += a[k]
        if 1.0 - total <= tol:
            K = k
            break
    deficit = max(1.0 - float(a[: K + 1].sum()), 0.0)
    return TwoSidedSequence(0, a[: K + 1], "truncated", deficit, False, True)


def two_sided_discrete_stable(
    lam_plus: float,
    lam_minus: float,
    nu: float,
    window=None,
    n_max: int = 4096,
    tol: float = 1e-12,
) -> TwoSidedSequence:
    """Convolution of discrete_stable(λ₊, ν) with the mirror of discrete_stable(λ₋, ν)."""
    if lam_plus < 0 or lam_minus < 0:
        raise ParameterOutOfRange("λ± must be nonnegative")
    plus = discrete_stable(lam_plus, nu, n_max, tol) if lam_plus > 0 else delta()
    minus = mirror(discrete_stable(lam_minus, nu, n_max, tol)) if lam_minus > 0 else delta()
    out = convolve(plus, minus)
    if window is not None:
        out = restrict(out, int(window[0]), int(window[1]))
    return out


FAMILIES = (
    "pf",
    "amcm",
    "binomial",
    "poisson",
    "negative_binomial",
    "geometric",
    "discrete_stable",
    "convolution",
)


def _measure(spec) -> DiscreteMeasure:
    if isinstance(spec, dict):
        spec = spec.get("atoms", [])
    return DiscreteMeasure(tuple((float(s), float(w)) for s, w in spec))


def build(spec: dict) -> TwoSidedSequence:
    """Build a sequence from a construction spec with a ``family`` key."""
    fam = spec.get("family")
    window = spec.get("window")
    tol = float(spec.get("tol", 1e-12))
    if fam == "pf":
        keys = ("m", "b_plus", "b_minus", "c", "gamma_plus", "gamma_minus",
                "delta_plus", "delta_minus")
        params = PolyaFrequencyParams(**{k: spec[k] for k in keys if k in spec})
        return pf_sequence(params, window, tol)
    if fam == "amcm":
        return amcm_sequence(
            _measure(spec.get("mu_plus", [])), _measure(spec.get("mu_minus", [])), window, tol
        )
    if fam == "binomial":
        out = binomial_pmf(spec["n"], spec["p"])
        return restrict(out, *window) if window else out
    if fam == "poisson":
        return poisson_pmf(spec["lam"], window, tol)
    if fam == "negative_binomial":
        return negative_binomial_pmf(spec["lam"], spec["p"], window, tol)
    if fam == "geometric":
        return geometric_seq(spec["q"], window, tol)
    if fam == "discrete_stable":
        n_max = int(spec.get("n_max", 4096))
        lam_minus = float(spec.get("lam_minus", 0.0))
        if lam_minus:
            return two_sided_discrete_stable(spec["lam"], lam_minus, spec["nu"], window, n_max, tol)
        out = discrete_stable(spec["lam"], spec["nu"], n_max, tol)
        return restrict(out, *window) if window else out
    if fam == "convolution":
        factors: Sequence[dict] = spec.get("factors", [])
        if not factors:
            raise ValueError("convolution needs at least one factor")
        out = convolve_all(build(f) for f in factors)
        return restrict(out, *window) if window else out
    raise ValueError(f"unknown family {fam!r}")
