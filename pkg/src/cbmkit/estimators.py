"""Rate estimation from counts (asymptotic method) and from censored cycles
(maximum likelihood).

The asymptotic method inverts two monotone maps: mean inspections per
cycle determines the damage rate, then the per-cycle failure fraction
determines the failure rate.  Confidence intervals come from the
asymptotic covariance of the count rates pushed through the inverse maps
(plug-in, evaluated at the point estimates).

The likelihood baseline works from observables only: the damage time is
interval-censored between the last clean inspection and the end of the
cycle, failure instants are exact.  A fully observed variant (closed-form,
uses the latent times) is provided for verification.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Callable, Optional, Sequence

import numpy as np

from .config import ModelConfig
from .formulas import (
    detection_window_integral,
    estimator_covariance,
    failure_probability,
    mean_inspections,
)
from .laws import DETERMINISTIC, DamageLaw, InspectionLaw, SaneLaw
from .simulator import CountSnapshot, CycleRecord


class OutOfRangeError(ValueError):
    """Target value outside the attainable range of the inverted map."""


class DegenerateDataError(ValueError):
    """Counts carry no information about the requested parameter."""


class NonConvergenceError(RuntimeError):
    """Iterative optimization failed to converge."""


# ---------------------------------------------------------------------------
# Bracketed root finding
# ---------------------------------------------------------------------------


def invert_monotone(
    func: Callable[[float], float],
    target: float,
    lo: float = 1e-8,
    hi: float = 1e2,
    rtol: float = 1e-12,
    atol: float = 0.0,
    max_expand: int = 8,
    trace: Optional[dict] = None,
) -> float:
    """Solve func(x) = target for monotone func on a positive domain.

    Scans a geometric grid over [lo, hi] for a sign change, expanding the
    interval geometrically if none is found, then polishes the bracket by
    a secant/bisection hybrid until |func(x) - target| <= rtol*|target| +
    atol.  Raises OutOfRangeError when no bracket exists.  When ``trace``
    is given it receives the bracket used and the iteration count.
    """

    def g(x: float) -> float:
        return func(x) - target

    for _ in range(max_expand):
        xs = np.geomspace(lo, hi, 64)
        vals = [g(x) for x in xs]
        bracket = None
        for i in range(len(xs) - 1):
            if vals[i] == 0.0:
                return float(xs[i])
            if vals[i] * vals[i + 1] <= 0.0:
                bracket = (float(xs[i]), float(xs[i + 1]), vals[i], vals[i + 1])
                break
        if bracket is not None:
            break
        lo, hi = lo / 100.0, hi * 100.0
    else:
        raise OutOfRangeError(
            f"target {target!r} outside the attainable range "
            f"[{min(vals[0], vals[-1]) + target!r}, {max(vals[0], vals[-1]) + target!r}]"
        )

    a, b, fa, fb = bracket
    if trace is not None:
        trace["bracket"] = (a, b)
    tol = rtol * abs(target) + atol
    x, fx = (a, fa) if abs(fa) <= abs(fb) else (b, fb)
    for iteration in range(200):
        if trace is not None:
            trace["iterations"] = iteration
        if abs(fx) <= tol:
            return x
        # secant proposal, clipped to the bracket; fall back to bisection
        if fb != fa:
            cand = b - fb * (b - a) / (fb - fa)
        else:
            cand = 0.5 * (a + b)
        if not a < cand < b:
            cand = 0.5 * (a + b)
        fc = g(cand)
        if fa * fc <= 0.0:
            b, fb = cand, fc
        else:
            a, fa = cand, fc
        x, fx = (a, fa) if abs(fa) <= abs(fb) else (b, fb)
        if b - a <= abs(x) * 4e-16:
            # bracket exhausted at float resolution; best point stands
            return x
    if abs(fx) <= tol:
        return x
    raise NonConvergenceError("root refinement stalled before reaching tolerance")


def invert_mean_inspections(
    target: float, shape: int, insp: InspectionLaw, trace: Optional[dict] = None
) -> float:
    """Damage rate whose mean inspections-per-cycle equals ``target``.

    The map decreases from +inf (rate -> 0) to 1 (rate -> inf), so targets
    at or below 1 are rejected.
    """
    if not target > 1.0:
        raise OutOfRangeError(
            f"mean inspections per cycle must exceed 1, got {target!r}"
        )
    return invert_monotone(
        lambda mu: mean_inspections(SaneLaw(shape, mu), insp), target, trace=trace
    )


def invert_failure_probability(
    target: float, sane: SaneLaw, insp: InspectionLaw, trace: Optional[dict] = None
) -> float:
    """Failure rate whose per-cycle failure probability equals ``target``."""
    if not 0.0 < target < 1.0:
        raise DegenerateDataError(
            "failure rate not identifiable: per-cycle failure fraction "
            f"{target!r} is outside (0, 1)"
        )
    return invert_monotone(
        lambda lam: failure_probability(sane, DamageLaw(lam), insp),
        target,
        atol=1e-12,
        rtol=0.0,
        trace=trace,
    )


def failure_rate_from_cycle_identity(
    fail_fraction: float, mu_hat: float, t: float, n_r: float, shape: int
) -> float:
    """Failure rate from the mean-cycle identity, the reference tables'
    convention.

    Solves mean cycle = shape/mu + fraction/rate with the observed mean
    cycle t/n_r plugged in.  Consistent like the probability inversion
    (the two coincide on exact inputs) but uses the observed cycle length
    instead of the failure-probability map.
    """
    if not 0.0 < fail_fraction < 1.0:
        raise DegenerateDataError(
            "failure rate not identifiable: per-cycle failure fraction "
            f"{fail_fraction!r} is outside (0, 1)"
        )
    denom = t / n_r - shape / mu_hat
    if denom <= 0.0:
        raise OutOfRangeError(
            "observed mean cycle is shorter than the implied mean damage time"
        )
    return fail_fraction / denom


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

REPORT_HEADER = (
    "method,mu_hat,mu_lo,mu_hi,lambda_hat,lambda_lo,lambda_hi,"
    "confidence,t,n_r,n_i,n_f,seed"
)


@dataclass(frozen=True)
class EstimateReport:
    method: str
    mu_hat: float
    lambda_hat: float
    ci_mu: tuple[float, float]
    ci_lambda: tuple[float, float]
    confidence: float
    sigma2: Optional[np.ndarray] = None
    diagnostics: dict = field(default_factory=dict)

    def csv_row(
        self,
        t: float = float("nan"),
        n_r: float = float("nan"),
        n_i: float = float("nan"),
        n_f: float = float("nan"),
        seed: Optional[int] = None,
    ) -> str:
        cells = [
            self.method,
            format(self.mu_hat, ".17g"),
            format(self.ci_mu[0], ".17g"),
            format(self.ci_mu[1], ".17g"),
            format(self.lambda_hat, ".17g"),
            format(self.ci_lambda[0], ".17g"),
            format(self.ci_lambda[1], ".17g"),
            format(self.confidence, ".17g"),
            format(t, ".17g"),
            format(n_r, ".17g"),
            format(n_i, ".17g"),
            format(n_f, ".17g"),
            "" if seed is None else str(seed),
        ]
        return ",".join(cells)

    def flat_text(self) -> str:
        lines = [
            f"method = {self.method}",
            f"mu_hat = {self.mu_hat:.17g}",
            f"mu_ci = [{self.ci_mu[0]:.17g}, {self.ci_mu[1]:.17g}]",
            f"lambda_hat = {self.lambda_hat:.17g}",
            f"lambda_ci = [{self.ci_lambda[0]:.17g}, {self.ci_lambda[1]:.17g}]",
            f"confidence = {self.confidence}",
        ]
        for key in sorted(self.diagnostics):
            lines.append(f"{key} = {self.diagnostics[key]}")
        return "\n".join(lines) + "\n"


def _z_quantile(confidence: float) -> float:
    if not 0.0 <= confidence < 1.0:
        raise ValueError("confidence must lie in [0, 1)")
    if confidence == 0.0:
        return 0.0
    return NormalDist().inv_cdf(0.5 * (1.0 + confidence))


# ---------------------------------------------------------------------------
# Asymptotic method
# ---------------------------------------------------------------------------


def asymptotic_estimate(
    snapshot: CountSnapshot,
    config: ModelConfig,
    confidence: Optional[float] = None,
    interval: str = "delta",
) -> EstimateReport:
    """Point estimates and confidence intervals from bare counts.

    The snapshot's counts may be real-valued (useful for exact round-trip
    checks); only their ratios and the elapsed time enter.  ``interval``
    selects the conventions of the bundled reference tables versus the
    internally consistent construction:

    * ``delta`` (default): failure rate by inverting the failure
      probability in the per-cycle failure fraction, covariance by the
      exact linearization.  Round-trips exactly and achieves nominal
      interval coverage.
    * ``tabulated``: failure rate from the mean-cycle identity
      fraction / (observed mean cycle - shape/mu), covariance per the
      reference tables' conventions (see
      :func:`cbmkit.formulas.estimator_covariance`).  Both estimators are
      consistent and coincide on exact inputs; the tabulated one matches
      the published rows.
    """
    confidence = config.confidence if confidence is None else confidence
    n_r, n_i, n_f, t = snapshot.repairs, snapshot.inspections, snapshot.failures, snapshot.time
    if n_r < 1:
        raise DegenerateDataError("no completed cycles: nothing to estimate")
    if n_i <= n_r:
        raise OutOfRangeError("mean inspections per cycle must exceed 1")
    if n_f < 1:
        raise DegenerateDataError("lambda not identifiable: no failures observed")
    if n_r < 100:
        warnings.warn(
            f"only {n_r} cycles observed; asymptotic intervals are dubious",
            stacklevel=2,
        )

    shape = config.sane.shape
    insp = config.inspection
    mu_trace: dict = {}
    lam_trace: dict = {}
    mu_hat = invert_mean_inspections(n_i / n_r, shape, insp, trace=mu_trace)
    if interval == "tabulated":
        lam_hat = failure_rate_from_cycle_identity(
            n_f / n_r, mu_hat, t, n_r, shape
        )
    else:
        lam_hat = invert_failure_probability(
            n_f / n_r, SaneLaw(shape, mu_hat), insp, trace=lam_trace
        )

    bundle = estimator_covariance(
        SaneLaw(shape, mu_hat), DamageLaw(lam_hat), insp, convention=interval
    )
    z = _z_quantile(confidence)
    hw_mu = z * math.sqrt(bundle.param_cov[0, 0] / t)
    hw_lam = z * math.sqrt(bundle.param_cov[1, 1] / t)
    return EstimateReport(
        method="AM",
        mu_hat=mu_hat,
        lambda_hat=lam_hat,
        ci_mu=(mu_hat - hw_mu, mu_hat + hw_mu),
        ci_lambda=(lam_hat - hw_lam, lam_hat + hw_lam),
        confidence=confidence,
        sigma2=bundle.param_cov,
        diagnostics={
            "interval": interval,
            "t": t,
            "n_r": n_r,
            "n_i": n_i,
            "n_f": n_f,
            "mu_bracket": mu_trace.get("bracket"),
            "mu_iterations": mu_trace.get("iterations"),
            "lambda_bracket": lam_trace.get("bracket"),
            "lambda_iterations": lam_trace.get("iterations"),
        },
    )


# ---------------------------------------------------------------------------
# Censored maximum likelihood
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ObservedCycle:
    """What an observer actually sees of one cycle.

    ``inspections`` are the planned visits that happened (for a detection
    cycle the last one is the detection itself); ``end_age`` is the cycle
    length, which on failure cycles is the exact failure instant.
    """

    inspections: tuple[float, ...]
    failed: bool
    end_age: float


@dataclass(frozen=True)
class ObservedData:
    cycles: tuple[ObservedCycle, ...]

    @classmethod
    def from_records(cls, records: Sequence[CycleRecord]) -> "ObservedData":
        out = []
        for rec in records:
            if rec.failed:
                planned = rec.inspections[:-1]
            else:
                planned = rec.inspections
            out.append(ObservedCycle(tuple(planned), rec.failed, rec.length))
        return cls(tuple(out))

    @classmethod
    def from_event_log_records(
        cls, records: Sequence[CycleRecord], insp: InspectionLaw
    ) -> "ObservedData":
        """Rebuild observables from a parsed event log.

        Event logs do not serialize the per-cycle planned schedule, so this
        only works when the gap law is deterministic (ages are the
        multiples of the spacing).
        """
        if insp.kind != DETERMINISTIC:
            raise DegenerateDataError(
                "event logs do not carry the planned schedule; the censored "
                "likelihood from a log requires deterministic gaps"
            )
        c = insp.spacing
        out = []
        for rec in records:
            planned = rec.inspection_count - 1 if rec.failed else rec.inspection_count
            ages = tuple(c * (i + 1) for i in range(planned))
            out.append(ObservedCycle(ages, rec.failed, rec.length))
        return cls(tuple(out))


def censored_log_likelihood(
    data: ObservedData, sane: SaneLaw, damage: DamageLaw
) -> float:
    """Log-likelihood of the observables under the two candidate laws.

    A detection at age b after a clean inspection at age a contributes
    log int_a^b exp(-lam (b-u)) dF_s(u); an exact failure at age z after a
    clean inspection at age a contributes log lam int_a^z exp(-lam (z-u))
    dF_s(u).  The sum is over cycles, order-free.
    """
    det_a, det_b, fail_a, fail_z = _censoring_bounds(data)
    total = 0.0
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        if det_a.size:
            vals = detection_window_integral(det_a, det_b, sane, damage)
            logs = np.log(vals)
            if not np.isfinite(logs).all():
                return -math.inf
            total += float(logs.sum())
        if fail_a.size:
            vals = damage.rate * detection_window_integral(fail_a, fail_z, sane, damage)
            logs = np.log(vals)
            if not np.isfinite(logs).all():
                return -math.inf
            total += float(logs.sum())
    return total


def _censoring_bounds(data: ObservedData):
    det_a, det_b, fail_a, fail_z = [], [], [], []
    for cyc in data.cycles:
        if cyc.failed:
            fail_a.append(cyc.inspections[-1] if cyc.inspections else 0.0)
            fail_z.append(cyc.end_age)
        else:
            det_a.append(cyc.inspections[-2] if len(cyc.inspections) >= 2 else 0.0)
            det_b.append(cyc.inspections[-1])
    return (
        np.asarray(det_a),
        np.asarray(det_b),
        np.asarray(fail_a),
        np.asarray(fail_z),
    )


def nelder_mead(
    func: Callable[[np.ndarray], float],
    start: np.ndarray,
    step: float = 0.05,
    diameter_tol: float = 1e-10,
    max_iter: int = 10_000,
) -> tuple[np.ndarray, float, int]:
    """Minimize func by the reflect/expand/contract/shrink simplex walk.

    Converges when the simplex diameter drops below ``diameter_tol``;
    raises NonConvergenceError past ``max_iter`` iterations.
    """
    dim = len(start)
    simplex = [np.array(start, dtype=float)]
    for i in range(dim):
        vertex = np.array(start, dtype=float)
        vertex[i] += step
        simplex.append(vertex)
    values = [func(v) for v in simplex]

    for iteration in range(max_iter):
        order = np.argsort(values)
        simplex = [simplex[i] for i in order]
        values = [values[i] for i in order]
        diameter = max(
            float(np.max(np.abs(v - simplex[0]))) for v in simplex[1:]
        )
        if diameter < diameter_tol:
            return simplex[0], values[0], iteration
        centroid = np.mean(simplex[:-1], axis=0)
        worst = simplex[-1]
        reflected = centroid + (centroid - worst)
        f_ref = func(reflected)
        if f_ref < values[0]:
            expanded = centroid + 2.0 * (centroid - worst)
            f_exp = func(expanded)
            if f_exp < f_ref:
                simplex[-1], values[-1] = expanded, f_exp
            else:
                simplex[-1], values[-1] = reflected, f_ref
        elif f_ref < values[-2]:
            simplex[-1], values[-1] = reflected, f_ref
        else:
            contracted = centroid + 0.5 * (worst - centroid)
            f_con = func(contracted)
            if f_con < values[-1]:
                simplex[-1], values[-1] = contracted, f_con
            else:
                simplex = [simplex[0]] + [
                    simplex[0] + 0.5 * (v - simplex[0]) for v in simplex[1:]
                ]
                values = [values[0]] + [func(v) for v in simplex[1:]]
    raise NonConvergenceError(f"simplex did not converge in {max_iter} iterations")


def mle_estimate(
    data: ObservedData,
    config: ModelConfig,
    confidence: Optional[float] = None,
) -> EstimateReport:
    """Censored maximum likelihood over (log mu, log lam).

    Starts from the asymptotic estimate, walks the simplex to the optimum,
    and builds intervals from the inverse observed information (central
    differences, relative step 1e-4).
    """
    confidence = config.confidence if confidence is None else confidence
    n_fail = sum(1 for c in data.cycles if c.failed)
    n_det = len(data.cycles) - n_fail
    if n_fail == 0 or n_det == 0:
        raise DegenerateDataError(
            "censored likelihood needs at least one detection and one failure"
        )
    shape = config.sane.shape
    insp = config.inspection

    n_r = len(data.cycles)
    n_i = sum(len(c.inspections) for c in data.cycles) + n_fail
    t_total = sum(c.end_age for c in data.cycles)
    try:
        start_mu = invert_mean_inspections(n_i / n_r, shape, insp)
        start_lam = invert_failure_probability(
            n_fail / n_r, SaneLaw(shape, start_mu), insp
        )
    except (OutOfRangeError, DegenerateDataError):
        # crude moment start when the count ratios are uninformative
        start_mu = shape * n_r / t_total
        start_lam = n_fail / t_total

    def negloglik(logs: np.ndarray) -> float:
        sane = SaneLaw(shape, math.exp(logs[0]))
        damage = DamageLaw(math.exp(logs[1]))
        return -censored_log_likelihood(data, sane, damage)

    start_logs = np.array([math.log(start_mu), math.log(start_lam)])
    best, f_best, iterations = nelder_mead(negloglik, start_logs)
    mu_hat, lam_hat = math.exp(best[0]), math.exp(best[1])

    cov = _observed_information_cov(data, shape, mu_hat, lam_hat)
    z = _z_quantile(confidence)
    hw_mu = z * math.sqrt(cov[0, 0])
    hw_lam = z * math.sqrt(cov[1, 1])
    return EstimateReport(
        method="MLE",
        mu_hat=mu_hat,
        lambda_hat=lam_hat,
        ci_mu=(mu_hat - hw_mu, mu_hat + hw_mu),
        ci_lambda=(lam_hat - hw_lam, lam_hat + hw_lam),
        confidence=confidence,
        sigma2=cov * t_total,
        diagnostics={
            "iterations": iterations,
            "log_likelihood": -f_best,
            "n_cycles": n_r,
            "start_mu": start_mu,
            "start_lambda": start_lam,
        },
    )


def _observed_information_cov(
    data: ObservedData, shape: int, mu: float, lam: float
) -> np.ndarray:
    """Inverse Hessian of the negative log likelihood at the optimum."""

    def ll(m: float, l: float) -> float:
        return censored_log_likelihood(data, SaneLaw(shape, m), DamageLaw(l))

    hm, hl = 1e-4 * mu, 1e-4 * lam
    f0 = ll(mu, lam)
    d_mm = (ll(mu + hm, lam) - 2.0 * f0 + ll(mu - hm, lam)) / hm**2
    d_ll = (ll(mu, lam + hl) - 2.0 * f0 + ll(mu, lam - hl)) / hl**2
    d_ml = (
        ll(mu + hm, lam + hl)
        - ll(mu + hm, lam - hl)
        - ll(mu - hm, lam + hl)
        + ll(mu - hm, lam - hl)
    ) / (4.0 * hm * hl)
    info = -np.array([[d_mm, d_ml], [d_ml, d_ll]])
    det = info[0, 0] * info[1, 1] - info[0, 1] ** 2
    if det <= 0.0 or info[0, 0] <= 0.0:
        raise NonConvergenceError("observed information is not positive definite")
    return np.array([[info[1, 1], -info[0, 1]], [-info[0, 1], info[0, 0]]]) / det


def full_information_estimate(
    records: Sequence[CycleRecord],
    config: ModelConfig,
    confidence: Optional[float] = None,
) -> EstimateReport:
    """Oracle baseline using the latent times themselves (closed form).

    With every damage time and failure delay observed, the maximizers are
    shape * cycles / total damage time and cycles / total failure delay;
    intervals use the exact Fisher information of those laws.  This is a
    verification aid, not an estimator available to a real observer.
    """
    confidence = config.confidence if confidence is None else confidence
    n = len(records)
    if n == 0:
        raise DegenerateDataError("no cycles")
    sum_damage = sum(r.time_to_damage for r in records)
    sum_fail = sum(r.damage_to_failure for r in records)
    shape = config.sane.shape
    mu_hat = shape * n / sum_damage
    lam_hat = n / sum_fail
    z = _z_quantile(confidence)
    hw_mu = z * mu_hat / math.sqrt(shape * n)
    hw_lam = z * lam_hat / math.sqrt(n)
    return EstimateReport(
        method="MLE",
        mu_hat=mu_hat,
        lambda_hat=lam_hat,
        ci_mu=(mu_hat - hw_mu, mu_hat + hw_mu),
        ci_lambda=(lam_hat - hw_lam, lam_hat + hw_lam),
        confidence=confidence,
        diagnostics={"oracle": "full-information", "n_cycles": n},
    )
