"""Scaling fits, critical-point location and temperature estimation.

All scaling fits are weighted least squares in log-fidelity space with
delta-method weights; when any supplied stderr is missing or zero the fit
falls back to uniform weights (the noiseless round-trip case).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .dynamics import ShotSet
from .errors import (DegenerateDataError, InvalidArgumentError,
                     NoTransitionError, UnboundedEstimateError)
from .schedule import HamiltonianParams
from .topology import Topology
from .units import MK_PER_GHZ, mk_from_beta

# Exact critical coupling K_c = beta*J of the square-lattice Ising model.
SQUARE_LATTICE_KC = float(np.log(1.0 + np.sqrt(2.0)) / 2.0)


@dataclass(frozen=True)
class ScalingPoint:
    n_qubits: int
    fidelity: float
    stderr: float = 0.0


@dataclass(frozen=True)
class FitResult:
    params: dict
    stderrs: dict
    model: str
    residual_norm: float

    def to_json(self) -> str:
        return json.dumps({
            "model": self.model,
            "params": self.params,
            "stderrs": self.stderrs,
            "residual_norm": self.residual_norm,
        }, sort_keys=True, indent=2) + "\n"


def predict_global_fidelity(f: float, n: int) -> float:
    """Global fidelity f**n of n independent qubits, computed in log
    space to avoid underflow."""
    if not 0.0 <= f <= 1.0:
        raise InvalidArgumentError(f"f must be in [0, 1], got {f}")
    if n < 0:
        raise InvalidArgumentError(f"n must be >= 0, got {n}")
    if f == 0.0:
        return 1.0 if n == 0 else 0.0
    return float(np.exp(n * np.log(f)))


def _log_fidelity_data(points):
    if len(points) < 1:
        raise InvalidArgumentError("need at least one data point")
    n = np.array([p.n_qubits for p in points], dtype=float)
    f = np.array([p.fidelity for p in points], dtype=float)
    sig = np.array([p.stderr for p in points], dtype=float)
    if np.any(f <= 0.0) or np.any(f > 1.0):
        raise DegenerateDataError("fidelities must lie in (0, 1]")
    y = np.log(f)
    if np.all(sig > 0):
        w = (f / sig) ** 2  # delta method: sigma_lnF = sigma_F / F
    else:
        w = np.ones_like(y)
    return n, f, y, w


def _wls_through_origin(x, y, w):
    """Weighted least squares y ~ theta*x; returns (theta, stderr, resid)."""
    sxx = float(np.sum(w * x * x))
    if sxx == 0.0:
        raise DegenerateDataError("all abscissae are zero")
    theta = float(np.sum(w * x * y)) / sxx
    resid = float(np.sqrt(np.sum(w * (y - theta * x) ** 2)))
    return theta, float(1.0 / np.sqrt(sxx)), resid


def fit_alpha(points) -> FitResult:
    """Per-qubit error rate in F = (1-alpha)**N from global fidelities."""
    if len(points) < 1:
        raise InvalidArgumentError("need at least one point")
    n, _, y, w = _log_fidelity_data(points)
    theta, theta_err, resid = _wls_through_origin(n, y, w)  # theta = ln(1-alpha)
    alpha = 1.0 - np.exp(theta)
    return FitResult(
        params={"alpha": float(alpha)},
        stderrs={"alpha": float(np.exp(theta) * theta_err)},
        model="PowerLaw_fN", residual_norm=resid)


def fit_effective_temperature(points, delta_e: float) -> FitResult:
    """Fit x = beta*DeltaE in F = (1 + exp(-x))**(-N); report x, beta
    (1/GHz) and the effective temperature in mK."""
    if delta_e <= 0:
        raise InvalidArgumentError(f"delta_e must be > 0, got {delta_e}")
    if len(points) < 1:
        raise InvalidArgumentError("need at least one point")
    n, _, y, w = _log_fidelity_data(points)
    theta, theta_err, resid = _wls_through_origin(-n, y, w)  # theta = ln(1+e^-x)
    if theta <= 0.0:
        raise DegenerateDataError(
            "fidelities admit no finite effective temperature (all F = 1?)")
    x = -float(np.log(np.expm1(theta)))
    x_err = float(theta_err * np.exp(theta) / np.expm1(theta))
    beta = x / delta_e
    beta_err = x_err / delta_e
    if beta <= 0:
        raise DegenerateDataError("fitted beta is nonpositive")
    t_mk = mk_from_beta(beta)
    return FitResult(
        params={"x": x, "beta_per_ghz": beta, "temperature_mk": t_mk},
        stderrs={"x": x_err, "beta_per_ghz": beta_err,
                 "temperature_mk": t_mk * beta_err / beta},
        model="EffectiveTemp", residual_norm=resid)


def fit_inverse_n_model(points) -> FitResult:
    """Single-qubit scaling f(N) = 1 - alpha_hat/N."""
    if len(points) < 2:
        raise InvalidArgumentError("need at least two points")
    n = np.array([p.n_qubits for p in points], dtype=float)
    f = np.array([p.fidelity for p in points], dtype=float)
    sig = np.array([p.stderr for p in points], dtype=float)
    if len(set(n.tolist())) < 2:
        raise DegenerateDataError("all points share the same N")
    w = 1.0 / sig**2 if np.all(sig > 0) else np.ones_like(f)
    theta, theta_err, resid = _wls_through_origin(1.0 / n, 1.0 - f, w)
    return FitResult(
        params={"alpha_hat": theta}, stderrs={"alpha_hat": theta_err},
        model="InverseN", residual_norm=resid)


def fit_n0_model(points, alpha: float) -> FitResult:
    """Cooperative scaling F = (1-alpha)**(N/N0) for N0, alpha given."""
    if not 0.0 < alpha < 1.0:
        raise InvalidArgumentError(f"alpha must be in (0, 1), got {alpha}")
    n, _, y, w = _log_fidelity_data(points)
    x = n * np.log(1.0 - alpha)
    gamma, gamma_err, resid = _wls_through_origin(x, y, w)  # gamma = 1/N0
    if gamma <= 0.0:
        raise DegenerateDataError("no finite N0 (all fidelities = 1?)")
    n0 = 1.0 / gamma
    return FitResult(
        params={"n0": n0}, stderrs={"n0": gamma_err / gamma**2},
        model="N0Scaling", residual_norm=resid)


@dataclass(frozen=True)
class CriticalPointResult:
    j_c: float
    uncertainty: float
    j_values: tuple = field(default=())
    mean_abs_m: tuple = field(default=())
    susceptibility: tuple = field(default=())
    binder: tuple = field(default=())


def locate_critical_coupling(curve, n_spins: int) -> CriticalPointResult:
    """Critical coupling from the peak of chi(J) = N*(<m^2> - <|m|>^2).

    `curve` is a list of (J, samples of per-shot magnetization).  The peak
    is refined by quadratic interpolation; the quoted uncertainty is half
    the grid spacing plus the interpolation shift.  The Binder cumulant
    U = 1 - <m^4>/(3<m^2>^2) is reported alongside as a diagnostic.
    """
    if len(curve) < 5:
        raise InvalidArgumentError("need at least 5 coupling values")
    curve = sorted(curve, key=lambda p: p[0])
    j = np.array([p[0] for p in curve], dtype=float)
    chi, binder, mabs = [], [], []
    for _, samples in curve:
        m = np.asarray(samples, dtype=float)
        m2 = float(np.mean(m**2))
        chi.append(n_spins * (m2 - float(np.mean(np.abs(m)))**2))
        binder.append(1.0 - float(np.mean(m**4)) / (3.0 * m2**2) if m2 > 0 else 0.0)
        mabs.append(float(np.mean(np.abs(m))))
    chi = np.array(chi)
    peak = int(np.argmax(chi))
    if peak == 0 or peak == len(j) - 1 or chi[peak] <= max(chi[0], chi[-1]):
        raise NoTransitionError("no interior susceptibility peak in the scan")
    # quadratic vertex through the peak and its neighbours
    x0, x1, x2 = j[peak - 1:peak + 2]
    y0, y1, y2 = chi[peak - 1:peak + 2]
    denom = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0)
    if denom == 0.0:
        j_c = float(x1)
    else:
        j_c = float(x1 - 0.5 * ((x1 - x0) ** 2 * (y1 - y2)
                                - (x1 - x2) ** 2 * (y1 - y0)) / denom)
    spacing = float(np.mean(np.diff(j)))
    uncertainty = 0.5 * spacing + abs(j_c - float(x1))
    return CriticalPointResult(
        j_c=j_c, uncertainty=uncertainty, j_values=tuple(j),
        mean_abs_m=tuple(mabs), susceptibility=tuple(chi.tolist()),
        binder=tuple(binder))


def coupling_to_temperature(j_c: float, b_at_operating_s: float) -> float:
    """Temperature (mK) implied by a dimensionless critical coupling via
    the square-lattice relation beta*(B/2)*j_c = ln(1+sqrt(2))/2."""
    if j_c <= 0 or b_at_operating_s <= 0:
        raise InvalidArgumentError("j_c and the energy scale must be positive")
    return MK_PER_GHZ * (b_at_operating_s / 2.0) * j_c / SQUARE_LATTICE_KC


def pseudo_likelihood_beta(samples: ShotSet, topo: Topology,
                           params: HamiltonianParams) -> FitResult:
    """Inverse temperature from spin samples by maximizing the per-site
    conditional log-likelihood sum ln sigmoid(2*beta*s_i*H_i), where H_i
    is the local field at unit inverse temperature.

    `params` holds the Hamiltonian coefficients the samples were drawn
    under, at unit beta; only classical samples (bx = 0) are meaningful.
    """
    if samples.n_shots < 100:
        raise InvalidArgumentError("need at least 100 samples")
    spins = samples.spins.astype(np.float64)
    indptr, indices, weights = topo._csr
    h_local = np.zeros_like(spins)
    for i in range(topo.n):
        nb = indices[indptr[i]:indptr[i + 1]]
        wb = weights[indptr[i]:indptr[i + 1]]
        h_local[:, i] = spins[:, nb] @ wb
    # field favouring s_i = +1 under E = bz*sum s - jz*sum w s s
    x = 2.0 * spins * (params.jz * h_local - params.bz)
    x = x.ravel()
    if np.all(x == 0.0):
        raise DegenerateDataError("zero local fields everywhere; beta unidentifiable")
    if np.all(x >= 0.0):
        # every reading agrees with its local field, so the likelihood is
        # monotone in beta and the maximizer runs off to infinity
        raise UnboundedEstimateError(
            "pseudo-likelihood increases without bound (samples too ordered)")

    def pll(beta):
        return -float(np.logaddexp(0.0, -beta * x).sum())

    lo, hi = 0.0, 100.0
    while pll(hi) > pll(hi * (1 - 1e-6)):  # maximum sits at the bracket edge
        hi *= 4.0
        if hi > 1e6:
            raise UnboundedEstimateError(
                "pseudo-likelihood increases without bound (samples too ordered)")
    inv_phi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - inv_phi * (b - a), a + inv_phi * (b - a)
    fc, fd = pll(c), pll(d)
    while b - a > 1e-6:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = pll(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = pll(d)
    beta_hat = 0.5 * (a + b)
    eps = max(1e-4, 1e-4 * beta_hat)
    curv = (pll(beta_hat + eps) - 2 * pll(beta_hat) + pll(beta_hat - eps)) / eps**2
    stderr = float(1.0 / np.sqrt(-curv)) if curv < 0 else float("inf")
    t_mk = mk_from_beta(beta_hat) if beta_hat > 0 else float("inf")
    t_err = (t_mk * stderr / beta_hat) if beta_hat > 0 else float("inf")
    return FitResult(
        params={"beta_per_ghz": float(beta_hat), "temperature_mk": float(t_mk)},
        stderrs={"beta_per_ghz": stderr, "temperature_mk": float(t_err)},
        model="PseudoLikelihood", residual_norm=0.0)
