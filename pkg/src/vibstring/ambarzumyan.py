"""Single-eigenvalue uniqueness conditions and coefficient reconstruction.

String checks compare S(p, a, b) with a reference S(p_ref, a, b) through
``ratio = p_ref / p``; when a condition holds the density is recovered as
``p = (lam_ref / lam) p_ref``.  Sturm-Liouville checks compare L(q) with
L(q_ref) through ``diff = q - q_ref`` and recover ``q = q_ref + mu - mu_ref``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .analysis import SignClass, classify_lambda0
from .eigen import eigenfunction, eigenvalue, inner_product
from .errors import CurveExcludedError, PreconditionError
from .problem import CoefficientFn, SpectralProblem, ratio

CONDITION_TOL = 1e-7
ZERO_EIGENVALUE_TOL = 1e-9


@dataclass(frozen=True)
class AmbVerdict:
    theorem: str
    target: float
    condition: float
    residual: float
    tolerance: float
    satisfied: bool
    scale_factor: float | None = None
    shift: float | None = None
    reconstructed: CoefficientFn | None = None
    reconstruction_residual: float | None = None
    negative_regime: bool = False
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "theorem": self.theorem,
            "target": self.target,
            "condition": self.condition,
            "residual": self.residual,
            "satisfied": self.satisfied,
            "scale_factor": self.scale_factor,
            "reconstruction_residual": self.reconstruction_residual,
        }
        if self.shift is not None:
            out["shift"] = self.shift
        if self.negative_regime:
            out["negative_regime"] = True
        out.update(self.details)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _max_abs(f: CoefficientFn) -> float:
    lo, hi = f.extremum()
    return max(abs(lo), abs(hi))


def _tolerance(tol: float, *values: float) -> float:
    return tol * max(1.0, *(abs(v) for v in values))


def _off_curve(alpha: float, beta: float, allow_curve: bool):
    if not allow_curve and classify_lambda0(alpha, beta) is SignClass.ZERO:
        raise CurveExcludedError(
            f"(alpha, beta) = ({alpha!r}, {beta!r}) lies on the zero curve "
            "cos a cos b - sin(a - b) = 0: lam0 = 0 for every density there, so a "
            "first-eigenvalue condition cannot identify p")


def _string_verdict(theorem, p, p_ref, lam, lam_ref, condition, residual, tol,
                    negative, details) -> AmbVerdict:
    satisfied = bool(residual <= tol)
    factor = recon = recon_res = None
    if lam != 0.0:
        factor = lam_ref / lam
    if satisfied and factor is not None:
        recon = p_ref.scale(factor)
        recon_res = _max_abs(recon - p)
    return AmbVerdict(theorem, lam, condition, residual, tol, satisfied, factor, None,
                      recon, recon_res, negative, details)


def _extremal_factor(r, lam_ref: float, which: str) -> float:
    # "max" is the side giving the upper bound of lam; it flips when lam_ref < 0
    if which not in ("max", "min"):
        raise ValueError("which must be 'max' or 'min'")
    return r.max if (which == "max") == (lam_ref >= 0.0) else r.min


def check_extremal(p: CoefficientFn, p_ref: CoefficientFn, alpha: float, beta: float,
                   which: str = "max", *, tol: float = CONDITION_TOL,
                   allow_curve: bool = False) -> AmbVerdict:
    """``lam0 = lam0_ref * max(p_ref / p)`` (or min)."""
    _off_curve(alpha, beta, allow_curve)
    lam = eigenvalue(SpectralProblem.string(p, alpha, beta), 0)
    lam_ref = eigenvalue(SpectralProblem.string(p_ref, alpha, beta), 0)
    r = ratio(p_ref, p)
    cond = lam_ref * _extremal_factor(r, lam_ref, which)
    details = {"which": which, "lambda_ref": lam_ref, "ratio_min": r.min, "ratio_max": r.max}
    return _string_verdict("2.1", p, p_ref, lam, lam_ref, cond, abs(lam - cond),
                           _tolerance(tol, lam, lam_ref), lam_ref < 0.0, details)


def _mean_ratio(p, p_ref, pair) -> float:
    """``(ratio phi, phi) / (phi, phi)`` with the unweighted inner product."""
    x = pair.x
    return inner_product(pair, pair, p_ref(x) / p(x)) / inner_product(pair, pair)


def check_weighted_mean(p: CoefficientFn, p_ref: CoefficientFn, alpha: float, beta: float,
                        *, tol: float = CONDITION_TOL, allow_curve: bool = False,
                        grid_points: int = 4097) -> AmbVerdict:
    """``lam0 = lam0_ref (ratio phi_ref, phi_ref) / (phi_ref, phi_ref)``."""
    _off_curve(alpha, beta, allow_curve)
    p.require_positive()
    lam = eigenvalue(SpectralProblem.string(p, alpha, beta), 0)
    ref = eigenfunction(SpectralProblem.string(p_ref, alpha, beta), 0, grid_points)
    mean = _mean_ratio(p, p_ref, ref)
    cond = ref.value * mean
    details = {"lambda_ref": ref.value, "mean_ratio": mean}
    return _string_verdict("2.2", p, p_ref, lam, ref.value, cond, abs(lam - cond),
                           _tolerance(tol, lam, ref.value), ref.value < 0.0, details)


def check_nth(p: CoefficientFn, p_ref: CoefficientFn, alpha: float, beta: float, n: int,
              which: str = "max", *, tol: float = CONDITION_TOL,
              grid_points: int = 4097) -> AmbVerdict:
    """Both the mean-ratio and the extremal condition at index ``n > 0``."""
    if n <= 0:
        raise PreconditionError("the n-th eigenvalue check needs n > 0")
    p.require_positive()
    lam = eigenvalue(SpectralProblem.string(p, alpha, beta), n)
    if abs(lam) <= ZERO_EIGENVALUE_TOL:
        raise PreconditionError(f"lam_{n} = {lam!r} vanishes; the condition needs lam_n != 0")
    ref = eigenfunction(SpectralProblem.string(p_ref, alpha, beta), n, grid_points)
    mean = _mean_ratio(p, p_ref, ref)
    cond_mean = ref.value * mean
    r = ratio(p_ref, p)
    cond_ext = ref.value * _extremal_factor(r, ref.value, which)
    res_mean, res_ext = abs(lam - cond_mean), abs(lam - cond_ext)
    details = {"n": n, "which": which, "lambda_ref": ref.value,
               "condition_extremal": cond_ext, "residual_mean": res_mean,
               "residual_extremal": res_ext}
    return _string_verdict("2.3", p, p_ref, lam, ref.value, cond_mean, max(res_mean, res_ext),
                           _tolerance(tol, lam, ref.value), ref.value < 0.0, details)


def _sl_verdict(theorem, q, q_ref, mu, mu_ref, cond, tol, details) -> AmbVerdict:
    gap = mu - mu_ref
    residual = abs(gap - cond)
    satisfied = bool(residual <= tol)
    recon = recon_res = None
    if satisfied:
        recon = q_ref + gap
        recon_res = _max_abs(recon - q)
    return AmbVerdict(theorem, gap, cond, residual, tol, satisfied, None, gap, recon,
                      recon_res, False, details)


def sl_check_yurko(q: CoefficientFn, q_ref: CoefficientFn, gamma: float, delta: float, *,
                   tol: float = CONDITION_TOL, grid_points: int = 4097) -> AmbVerdict:
    """``mu0 - mu0_ref = (diff phi_ref, phi_ref) / (phi_ref, phi_ref)``, diff = q - q_ref."""
    mu = eigenvalue(SpectralProblem.sturm_liouville(q, gamma, delta), 0)
    ref = eigenfunction(SpectralProblem.sturm_liouville(q_ref, gamma, delta), 0, grid_points)
    diff = q - q_ref
    cond = inner_product(ref, ref, diff) / inner_product(ref, ref)
    return _sl_verdict("1.2", q, q_ref, mu, ref.value, cond,
                       _tolerance(tol, mu, ref.value), {"mu_ref": ref.value})


def sl_check_extremal(q: CoefficientFn, q_ref: CoefficientFn, gamma: float, delta: float,
                      which: str = "inf", *, tol: float = CONDITION_TOL) -> AmbVerdict:
    """``mu0 - mu0_ref = inf (q - q_ref)`` (or sup)."""
    if which not in ("inf", "sup"):
        raise ValueError("which must be 'inf' or 'sup'")
    mu = eigenvalue(SpectralProblem.sturm_liouville(q, gamma, delta), 0)
    mu_ref = eigenvalue(SpectralProblem.sturm_liouville(q_ref, gamma, delta), 0)
    lo, hi = (q - q_ref).extremum()
    cond = lo if which == "inf" else hi
    return _sl_verdict("1.3", q, q_ref, mu, mu_ref, cond, _tolerance(tol, mu, mu_ref),
                       {"mu_ref": mu_ref, "which": which})


def degenerate_on_curve(p: CoefficientFn, p_ref: CoefficientFn, alpha: float,
                        beta: float) -> dict:
    """Both ground eigenvalues and every first-eigenvalue condition at a curve point."""
    lam = eigenvalue(SpectralProblem.string(p, alpha, beta), 0)
    lam_ref = eigenvalue(SpectralProblem.string(p_ref, alpha, beta), 0)
    r = ratio(p_ref, p)
    ref = eigenfunction(SpectralProblem.string(p_ref, alpha, beta), 0)
    return {
        "lambda": lam,
        "lambda_ref": lam_ref,
        "extremal_max": lam_ref * r.max,
        "extremal_min": lam_ref * r.min,
        "mean": lam_ref * _mean_ratio(p, p_ref, ref),
    }

