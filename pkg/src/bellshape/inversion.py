"""Post-type inversion on the unit circle.

With G(x) = ∫₀^∞ e^{isx} F(e^{is}) ds,

    F(e^{it}) = lim (−1)ⁿ (xₙ)↑(n+1) / (i·n!) · ΔⁿG(xₙ),   xₙ = (n/2)(i·cot(t/2) − 1).

ΔⁿG is always taken from the integral with weight (e^{is} − 1)ⁿ, never by
differencing G. Because the weight and F are 2π-periodic, the integral over
(0, ∞) is one period times 1/(1 − e^{2πix}).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .errors import CancellationWarning, NonDecayingTail, QuadratureFailure
from .genfunc import _as_evaluator

TWO_PI = 2 * math.pi
N_CAP = 24


def raising_factorial(x, n: int):
    """x(x+1)…(x+n−1); the empty product is 1."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    out = 1 + 0j if isinstance(x, complex) else 1
    for k in range(n):
        out *= x + k
    return out


@dataclass(frozen=True)
class InversionProbe:
    t: float
    n: int
    x_n: complex
    c: float
    truncation_T: float | None = None
    quad_tol: float = 1e-10

    @classmethod
    def at(cls, t: float, n: int, T: float | None = None, quad_tol: float = 1e-10):
        if not 0 < t < math.pi:
            raise ValueError("t must lie in (0, π)")
        if n < 0:
            raise ValueError("n must be nonnegative")
        c = 0.5 / math.tan(t / 2)
        return cls(t, n, complex(-n / 2, n * c), c, T, quad_tol)

    @property
    def x_alt(self) -> complex:
        """n·e^{it}/(1 − e^{it}), equal to x_n."""
        z = complex(math.cos(self.t), math.sin(self.t))
        return self.n * z / (1 - z)


def _quad(f, a, b, epsabs, points=None):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(
            f, a, b, epsabs=epsabs, epsrel=1e-13, limit=500, points=points, complex_func=True
        )
    # complex_func reports the real and imaginary error estimates as one complex
    return val, abs(err)


def transform_delta_G(F, x: complex, n: int, T: float | None = None, tol: float = 1e-10,
                      full_output: bool = False):
    """ΔⁿG(x) = ∫₀^∞ e^{isx}(e^{is} − 1)ⁿ F(e^{is}) ds.

    Parameters
    ----------
    F : CircleEvaluator, sequence or callable on the circle
    x : complex
        Im x > 0.
    n : int
    T : float, optional
        Integrate over (0, T) only and add the tail bound
        sup|integrand|·e^{−T·Im x}/Im x to the error estimate. By default the
        exact periodic sum is used.
    tol : float
        Absolute tolerance.
    full_output : bool
        Also return the error estimate.
    """
    x = complex(x)
    if x.imag <= 0:
        raise NonDecayingTail("Im x must be positive")
    if n < 0:
        raise ValueError("n must be nonnegative")
    F = _as_evaluator(F)
    pref = (2j) ** n

    def h(s):
        # periodic part (e^{is} − 1)ⁿF(e^{is}) = (2i)ⁿ e^{ins/2} sinⁿ(s/2) F(e^{is})
        return pref * np.exp(0.5j * n * s) * math.sin(s / 2) ** n * complex(F.on_circle(s))

    def g(s):
        return np.exp(1j * s * x) * h(s)

    pts = []
    if n:
        # the weight peaks where −Im x + (n/2)cot(s/2) = 0
        pk = 2 * math.atan2(n, 2 * x.imag)
        if 0 < pk < TWO_PI:
            pts.append(pk)
    q = np.exp(2j * math.pi * x)  # ratio between consecutive periods
    if T is None:
        I0, err = _quad(g, 0.0, TWO_PI, tol * abs(1 - q) / 2, pts or None)
        val, err = I0 / (1 - q), err / abs(1 - q)
    else:
        m, rest = divmod(T, TWO_PI)
        m = int(m)
        I0, e0 = _quad(g, 0.0, TWO_PI, tol / 4, pts or None)
        part = sum(q**j for j in range(m))
        Ir, er = _quad(g, 0.0, rest, tol / 4, [p for p in pts if p < rest] or None) if rest else (0j, 0.0)
        val = I0 * part + q**m * Ir
        err = e0 * abs(part) + er
        sup = max(abs(h(s)) for s in np.linspace(1e-9, TWO_PI - 1e-9, 257))
        err += sup * math.exp(-T * x.imag) / x.imag
    if not math.isfinite(err) or err > 100 * tol:
        raise QuadratureFailure(f"ΔⁿG error estimate {err:.3g} above tolerance {tol:.3g}")
    return (val, err) if full_output else val


def post_invert(F, t: float, n: int, T: float | None = None, tol: float = 1e-10,
                n_cap: int = N_CAP) -> complex:
    """Approximate F(e^{it}) by the n-th inversion term.

    ``tol`` is the accuracy asked of the returned value; the quadrature
    tolerance is tightened by the scaling factor accordingly.
    """
    probe = InversionProbe.at(t, n, T, tol)
    if n > n_cap:
        warnings.warn(
            f"n = {n} beyond the cap {n_cap}: the raising factorial amplifies rounding",
            CancellationWarning,
            stacklevel=2,
        )
    factor = (-1) ** n * raising_factorial(probe.x_n, n + 1) / (1j * math.factorial(n))
    dG, err = transform_delta_G(F, probe.x_n, n, T, tol / abs(factor), full_output=True)
    if abs(factor) * err > tol:
        warnings.warn(
            f"scaled quadrature error {abs(factor) * err:.3g} exceeds {tol:.3g}",
            CancellationWarning,
            stacklevel=2,
        )
    return complex(factor * dG)


def mn_identity_check(t: float, n: int, quad_tol: float = 1e-12) -> float:
    """Relative error between (2i)ⁿMₙ by quadrature and (−1)ⁿ i n!/(xₙ)↑(n+1)."""
    if n < 1:
        raise ValueError("Mₙ diverges for n = 0")
    probe = InversionProbe.at(t, n)
    c = probe.c
    f = lambda s: (math.exp(-c * s) * math.sin(s / 2)) ** n
    # consecutive periods differ by the factor (−1)ⁿe^{−2πcn}
    r = (-1) ** n * math.exp(-TWO_PI * c * n)
    I0, err = _quad(f, 0.0, TWO_PI, quad_tol, [t])
    I0 = I0.real
    if not math.isfinite(err):
        raise QuadratureFailure("Mₙ quadrature failed")
    M = I0 / (1 - r)
    lhs = (2j) ** n * M
    rhs = (-1) ** n * 1j * math.factorial(n) / raising_factorial(probe.x_n, n + 1)
    return abs(lhs - rhs) / abs(rhs)


def kernel_maximum(t: float) -> float:
    """argmax over s > 0 of |e^{−cs} sin(s/2)|, c = ½cot(t/2).

    Later periods are damped by e^{−2πc}, so the maximum lies in (0, 2π)
    where the log-derivative ½cot(s/2) − c decreases from +∞ to −∞.
    """
    if not 0 < t < math.pi:
        raise ValueError("t must lie in (0, π)")
    c = 0.5 / math.tan(t / 2)
    d = lambda s: 0.5 / math.tan(s / 2) - c
    return optimize.brentq(d, 1e-300, TWO_PI - 1e-12, xtol=1e-15, rtol=4 * np.finfo(float).eps)
