"""Fits and profiles: OTOC extent, power laws, exponential decay, scaling collapse."""
from dataclasses import asdict, dataclass, field
import json

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import least_squares, minimize_scalar
from scipy.special import erf

from .circuits import PAULI
from .errors import DomainError, NoConvergence


@dataclass
class FitResult:
    """Named parameters, RMS misfit and a convergence flag."""

    params: dict
    residual: float
    converged: bool = True
    extra: dict = field(default_factory=dict)

    def to_json(self, op):
        return json.dumps({"op": op, "params": self.params, "residual": self.residual,
                           "converged": self.converged}, sort_keys=True)


def _conj_site(O, sigma, j, L):
    """sigma_j O sigma_j for a dense 2^L operator."""
    D = O.shape[0]
    left, right = 2 ** j, 2 ** (L - j - 1)
    T = O.reshape(left, 2, right, left, 2, right)
    return np.einsum("ab,xbyzcw,cd->xayzdw", sigma, T, sigma).reshape(D, D)


def otoc_profile(op, L):
    """``mean_g Tr[O^dag s^g_j O s^g_j] / D`` for every site j."""
    op = np.asarray(op)
    D = op.shape[0]
    out = np.empty(L)
    for j in range(L):
        vals = [np.vdot(op, _conj_site(op, PAULI[g], j, L)).real / D for g in "xyz"]
        out[j] = np.mean(vals)
    return out


def erf_model(j, a, ell, D):
    return a + (1 - a) * (erf((j - ell) / D) + 1) / 2


def fit_error_function(profile, sites=None, p0=None, max_nfev=500, xtol=1e-10):
    """Fit ``a + (1-a)(erf((j-l)/D)+1)/2`` by Levenberg-Marquardt.

    ``l`` (the half-height point) is the operator extent.  Raises
    :class:`NoConvergence` when the iteration cap is hit with an RMS misfit
    above 1e-8.
    """
    y = np.asarray(profile, dtype=float)
    if len(y) < 4:
        raise DomainError("profile needs at least four points")
    j = np.arange(len(y), dtype=float) if sites is None else np.asarray(sites, float)
    if p0 is None:
        a0 = float(y.min())
        half = (a0 + 1) / 2
        above = np.nonzero(y >= half)[0]
        ell0 = float(j[above[0]]) if len(above) else float(j[len(j) // 2])
        p0 = (a0, ell0, 1.0)

    def resid(p):
        return erf_model(j, *p) - y

    def jac(p):
        a, ell, D = p
        u = (j - ell) / D
        g = np.exp(-u ** 2) / np.sqrt(np.pi)
        da = 1 - (erf(u) + 1) / 2
        dl = -(1 - a) * g / D
        dD = -(1 - a) * g * u / D
        return np.column_stack([da, dl, dD])

    res = least_squares(resid, p0, jac=jac, method="lm", max_nfev=max_nfev, xtol=xtol)
    rms = float(np.sqrt(np.mean(res.fun ** 2)))
    # a sharp step drives D towards 0 without the step size converging; an
    # essentially exact fit is still accepted
    if res.status <= 0 and rms > 1e-8:
        raise NoConvergence(f"error-function fit stopped without converging (rms {rms:.3e})")
    a, ell, D = res.x
    return FitResult({"a": float(a), "ell": float(ell), "D": float(abs(D))}, rms)


def fit_power_law(xs, ys):
    """``y = prefactor * x**exponent`` by linear regression of the logs."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise DomainError("power-law fit needs positive data")
    if len(x) < 2:
        raise NoConvergence("power-law fit needs at least two points")
    slope, icpt = np.polyfit(np.log(x), np.log(y), 1)
    rms = float(np.sqrt(np.mean((np.log(y) - (slope * np.log(x) + icpt)) ** 2)))
    return FitResult({"exponent": float(slope), "prefactor": float(np.exp(icpt))}, rms)


def fit_exponential_decay(a, window=None):
    """Rate nu of ``|a_n| ~ e^{-nu n}`` over n in ``window = (lo, hi)``.

    All-zero data (exact dual-unitary case) gives ``nu = inf``; isolated
    zeros raise :class:`DomainError`.
    """
    mag = np.abs(np.asarray(a))
    n = np.arange(len(mag))
    if window is not None:
        lo, hi = window
        n, mag = n[lo:hi], mag[lo:hi]
    if len(mag) and np.all(mag == 0):
        return FitResult({"nu": np.inf}, 0.0)
    if np.any(mag == 0):
        raise DomainError("zeros in the decay window")
    if len(mag) < 2:
        raise NoConvergence("decay fit needs at least two points")
    slope, icpt = np.polyfit(n, np.log(mag), 1)
    rms = float(np.sqrt(np.mean((np.log(mag) - (slope * n + icpt)) ** 2)))
    return FitResult({"nu": float(-slope), "log_amplitude": float(icpt)}, rms)


# --------------------------------------------------------------------------
# scaling collapse
# --------------------------------------------------------------------------

@dataclass
class CollapseResult:
    """Pairwise exponents at geometric-mean steps plus the extrapolation."""

    dt_mid: np.ndarray
    g: np.ndarray
    g_extrapolated: float
    dt_target: float


def collapse_cost(curve1, curve2, ratio, g, num=400):
    """Mean squared mismatch of ``a1(n)`` and ``a2(n ratio^g)`` on their overlap."""
    n1, y1 = curve1
    n2, y2 = curve2
    s = ratio ** g
    lo = max(n1[0], n2[0] / s)
    hi = min(n1[-1], n2[-1] / s)
    if not hi > lo:
        return np.inf
    grid = np.linspace(lo, hi, num)
    f1 = PchipInterpolator(n1, y1)(grid)
    f2 = PchipInterpolator(n2, y2)(grid * s)
    return float(np.trapezoid(np.abs(f1 - f2) ** 2, grid) / (hi - lo))


def collapse_exponent(curve1, curve2, dt1, dt2, bounds=(-1.0, 4.0), coarse=101):
    """Best g for one pair of curves: coarse scan, then golden-section refinement."""
    ratio = dt1 / dt2
    gs = np.linspace(*bounds, coarse)
    costs = np.array([collapse_cost(curve1, curve2, ratio, g) for g in gs])
    if not np.isfinite(costs).any():
        raise NoConvergence("curves do not overlap after rescaling")
    k = int(np.nanargmin(costs))
    if costs[k] == 0:
        return float(gs[k])
    if 0 < k < coarse - 1:
        res = minimize_scalar(lambda g: collapse_cost(curve1, curve2, ratio, g),
                              bracket=(gs[k - 1], gs[k], gs[k + 1]), method="golden",
                              options={"xtol": 1e-10})
        return float(res.x)
    return float(gs[k])


def scaling_collapse(curves, dt_target=None, bounds=(-1.0, 4.0)):
    """Collapse exponent g between consecutive steps and its extrapolation.

    ``curves`` maps dt to ``(n, a_n)`` with increasing n.  Each consecutive
    pair gives g at the geometric mean of the two steps; a straight line in
    log dt through these values is evaluated at ``dt_target`` (default: the
    smallest dt).
    """
    dts = sorted(curves)
    if len(dts) < 2:
        raise NoConvergence("need curves for at least two time steps")
    prepared = {dt: (np.asarray(curves[dt][0], float), np.real(np.asarray(curves[dt][1])))
                for dt in dts}
    mids, gs = [], []
    for d1, d2 in zip(dts[:-1], dts[1:]):
        gs.append(collapse_exponent(prepared[d1], prepared[d2], d1, d2, bounds))
        mids.append(np.sqrt(d1 * d2))
    mids, gs = np.array(mids), np.array(gs)
    target = dts[0] if dt_target is None else dt_target
    if len(gs) == 1:
        g_ext = float(gs[0])
    else:
        slope, icpt = np.polyfit(np.log(mids), gs, 1)
        g_ext = float(slope * np.log(target) + icpt)
    return CollapseResult(mids, gs, g_ext, float(target))


def fit_report(op, fit):
    """JSON-ready dict of a FitResult."""
    d = asdict(fit)
    d.pop("extra", None)
    d["op"] = op
    return d
