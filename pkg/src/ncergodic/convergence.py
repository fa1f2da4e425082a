"""Individual and mean ergodic convergence diagnostics.

Residual trajectories against the exact Cesaro limit, almost-uniform
witnesses built by trace-budgeted peeling on the deviation operators,
mean (norm) convergence checks, and Besicovitch-weighted experiments
with exact rotated limits for the trig-polynomial generator family.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import Operator, Projection, compressed_norm, one_sided_norm
from .dynamics import (Channel, ergodic_averages, fixed_point,
                       rotated_fixed_point, weighted_averages)
from .errors import UnsupportedNormError
from .ncnorms import lorentz_norm, lp_norm, measure_distance, projection_lorentz_norm
from .util import dyadic_schedule

# Peeling stops once the compressed deviation is this small.
PEEL_FLOOR = 1e-12

# Condition (iii) of the mean ergodic theorem is reported on this grid
# of projection traces.
CONDITION_III_TRACES = (1.0, 10.0, 100.0, 1000.0)


@dataclass(frozen=True)
class NormSpec:
    """A residual gauge: uniform, L_p, Lorentz (p,q), or the measure
    metric."""

    kind: str
    p: float | None = None
    q: float | None = None

    @classmethod
    def uniform(cls):
        return cls("uniform")

    @classmethod
    def lp(cls, p):
        return cls("lp", p=float(p))

    @classmethod
    def lorentz(cls, p, q):
        return cls("lorentz", p=float(p), q=float(q))

    @classmethod
    def measure(cls):
        return cls("measure")

    @property
    def label(self) -> str:
        if self.kind == "uniform":
            return "inf"
        if self.kind == "lp":
            return f"L{self.p:g}"
        if self.kind == "lorentz":
            return f"L({self.p:g},{self.q:g})"
        return "measure"

    def value(self, x: Operator) -> float:
        if self.kind == "uniform":
            return x.uniform_norm()
        if self.kind == "lp":
            return lp_norm(x, self.p)
        if self.kind == "lorentz":
            return lorentz_norm(x, self.p, self.q)
        raise UnsupportedNormError("the measure metric has no norm value")

    def distance(self, a: Operator, b: Operator) -> float:
        if self.kind == "measure":
            return measure_distance(a, b)
        return self.value(a - b)

    def to_json(self):
        data = {"kind": self.kind}
        if self.p is not None:
            data["p"] = self.p
        if self.q is not None:
            data["q"] = self.q
        return data

    @classmethod
    def from_json(cls, data) -> "NormSpec":
        return cls(data["kind"], data.get("p"), data.get("q"))


@dataclass
class TrajectoryReport:
    """Residuals ||x_hat - M_n(x)|| along the dyadic schedule."""

    limit: Operator
    schedule: list
    residuals: dict   # norm label -> list of floats
    horizon: int

    def final(self, label) -> float:
        return self.residuals[label][-1]


def trajectory(channel: Channel, x: Operator, horizon: int,
               norms) -> TrajectoryReport:
    """Track convergence of the plain averages to the exact fixed point.

    The limit is computed spectrally, then every requested gauge is
    evaluated at n in {1, 2, 4, ..., horizon}.
    """
    norms = list(norms)
    x_hat = fixed_point(channel, x)
    schedule = dyadic_schedule(horizon)
    wanted = set(schedule)
    residuals = {spec.label: [] for spec in norms}
    for n, avg in ergodic_averages(channel, x, n_max=horizon):
        if n in wanted:
            for spec in norms:
                residuals[spec.label].append(spec.distance(x_hat, avg))
    return TrajectoryReport(x_hat, schedule, residuals, horizon)


# ---------------------------------------------------------------------
# Almost-uniform witnesses.
# ---------------------------------------------------------------------

@dataclass
class ConvergenceWitness:
    """Projection of small trace defect with the tail-sup profile of the
    compressed deviations (non-increasing in n by construction)."""

    projection: Projection
    schedule: list
    profile: list
    mode: str
    eps: float
    trace_defect: float

    @property
    def final_value(self) -> float:
        return self.profile[-1]


def _compressed_value(op, e, mode):
    return (one_sided_norm(op, e) if mode == "one_sided"
            else compressed_norm(op, e))


def _peel_on_deviations(algebra, deviations, budget, mode):
    """Spend up to `budget` of trace removing the directions on which
    the tail deviations stay largest."""
    bases = [np.eye(d, dtype=complex) for d in algebra.dims]
    weights = algebra.weights
    defect = 0.0
    while True:
        e = Projection.from_basis(algebra, bases)
        worst_value, worst = -np.inf, None
        for dev in deviations:
            for i in range(algebra.num_blocks):
                basis = bases[i]
                if basis.shape[1] == 0:
                    continue
                if mode == "one_sided":
                    block = dev.block(i) @ basis
                    gram = block.conj().T @ block
                    lam, vecs = np.linalg.eigh((gram + gram.conj().T) / 2.0)
                    value = float(np.sqrt(max(lam[-1], 0.0)))
                else:
                    comp = basis.conj().T @ dev.block(i) @ basis
                    _, s, vh = np.linalg.svd(comp)
                    value, vecs = float(s[0]), vh.conj().T[:, ::-1]
                if value > worst_value:
                    worst_value = value
                    worst = (i, vecs[:, -1])
        if worst is None or worst_value <= PEEL_FLOOR:
            return e, defect
        i, direction = worst
        if defect + weights[i] > budget:
            return e, defect
        basis = bases[i]
        r = basis.shape[1]
        comp_proj = np.eye(r, dtype=complex) - np.outer(direction,
                                                        direction.conj())
        _, vecs = np.linalg.eigh(comp_proj)
        bases[i] = basis @ vecs[:, 1:]
        defect += weights[i]


def _deviation_witness(channel, x, eps, horizon, mode, beta=None,
                       reference=None):
    if eps <= 0:
        raise ValueError("eps must be positive")
    schedule = dyadic_schedule(horizon)
    wanted = set(schedule)
    if reference is None:
        reference = fixed_point(channel, x)
    iterator = (ergodic_averages(channel, x, n_max=horizon) if beta is None
                else weighted_averages(channel, x, beta, horizon))
    deviations = {}
    for n, avg in iterator:
        if n in wanted:
            deviations[n] = reference - avg

    tail_start = horizon // 2
    tail = [deviations[n] for n in schedule if n >= tail_start]
    e, defect = _peel_on_deviations(channel.algebra, tail, eps, mode)

    profile = []
    for n in schedule:
        tail_points = [m for m in schedule if m >= max(n, tail_start)]
        profile.append(max(_compressed_value(deviations[m], e, mode)
                           for m in tail_points))
    return ConvergenceWitness(e, schedule, profile, mode, eps, defect)


def au_witness(channel: Channel, x: Operator, eps: float,
               horizon: int) -> ConvergenceWitness:
    """One-sided almost-uniform witness: tau(e_perp) <= eps and the
    profile n -> sup of ||(x_hat - M_m(x)) e|| over scheduled m beyond
    max(n, horizon/2)."""
    return _deviation_witness(channel, x, eps, horizon, "one_sided")


def bau_witness(channel: Channel, x: Operator, eps: float,
                horizon: int) -> ConvergenceWitness:
    """Two-sided variant of au_witness (compressions e (.) e)."""
    return _deviation_witness(channel, x, eps, horizon, "two_sided")


# ---------------------------------------------------------------------
# Mean (norm) convergence.
# ---------------------------------------------------------------------

@dataclass
class ConditionIIIReport:
    """Growth of ||e||_E / tau(e) for projections of increasing trace.

    For the Lorentz norms the ratio is (p/q)^(1/q) tau^(1/p - 1) in
    closed form, which vanishes as tau -> infinity exactly when p > 1.
    """

    traces: tuple
    ratios: tuple
    vanishes_at_infinity: bool


@dataclass
class MeanErgodicReport:
    limit: Operator
    schedule: list
    residuals: list
    final_residual: float
    decay_ratio: float
    converged: bool
    condition_iii: ConditionIIIReport | None


def _condition_iii(norm: NormSpec) -> ConditionIIIReport | None:
    if norm.kind == "lorentz":
        ratios = tuple(projection_lorentz_norm(t, norm.p, norm.q) / t
                       for t in CONDITION_III_TRACES)
        return ConditionIIIReport(CONDITION_III_TRACES, ratios,
                                  norm.p > 1)
    if norm.kind == "lp":
        ratios = tuple(t ** (1.0 / norm.p) / t for t in CONDITION_III_TRACES)
        return ConditionIIIReport(CONDITION_III_TRACES, ratios,
                                  norm.p > 1)
    return None


def mean_ergodic_check(channel: Channel, x: Operator, norm: NormSpec,
                       horizon: int) -> MeanErgodicReport:
    """Norm convergence of the averages in the requested gauge.

    Works for any channel with semisimple peripheral spectrum, in
    particular non-positive Dunford-Schwartz combinations.  Convergence
    is declared when the final residual drops below 0.3 times the
    quarter-horizon residual or below an absolute floor, whichever is
    larger.
    """
    if norm.kind == "measure":
        raise UnsupportedNormError("mean convergence needs a norm, not the "
                                   "measure metric")
    x_hat = fixed_point(channel, x)
    schedule = dyadic_schedule(horizon)
    wanted = set(schedule)
    residuals = []
    for n, avg in ergodic_averages(channel, x, n_max=horizon):
        if n in wanted:
            residuals.append(norm.distance(x_hat, avg))
    quarter_index = max(len(residuals) - 3, 0)
    reference = residuals[quarter_index]
    final = residuals[-1]
    floor = 1e-12 * max(norm.value(x), 1.0)
    decay_ratio = final / reference if reference > floor else 0.0
    converged = final <= max(floor, 0.3 * reference)
    return MeanErgodicReport(x_hat, schedule, residuals, final,
                             decay_ratio, converged, _condition_iii(norm))


# ---------------------------------------------------------------------
# Besicovitch-weighted experiments.
# ---------------------------------------------------------------------

@dataclass
class BesicovitchReport:
    limit: Operator
    limit_exact: bool
    schedule: list
    residuals: dict      # norm label -> list
    cauchy: dict         # norm label -> list of consecutive distances
    witness: ConvergenceWitness
    certificate_ok: bool


def besicovitch_experiment(channel: Channel, x: Operator, beta,
                           horizon: int, norms,
                           witness_eps=0.05) -> BesicovitchReport:
    """Weighted averages along the dyadic schedule with Cauchy checks.

    For the generator family every sequence has an exact rotated-limit
    formula: the trig polynomial part contributes
    sum_j z_j P_{lambda_j}(x) where P_lambda is the phase-twisted Cesaro
    limit, and a 1/(k+1) decay tail averages to zero.  The witness is a
    two-sided deviation witness against that limit.
    """
    norms = list(norms)
    certificate = beta.besicovitch_certificate()
    poly = beta.approximating_polynomial()
    limit = channel.algebra.zero()
    for z, lam in zip(poly.coefficients, poly.frequencies):
        if z != 0:
            limit = limit + rotated_fixed_point(channel, x, lam) * z

    schedule = dyadic_schedule(horizon)
    wanted = set(schedule)
    residuals = {spec.label: [] for spec in norms}
    cauchy = {spec.label: [] for spec in norms}
    cauchy["measure"] = []
    previous = None
    measure = NormSpec.measure()
    for n, avg in weighted_averages(channel, x, beta, horizon):
        if n not in wanted:
            continue
        for spec in norms:
            residuals[spec.label].append(spec.distance(limit, avg))
        if previous is not None:
            for spec in norms:
                cauchy[spec.label].append(spec.distance(previous, avg))
            cauchy["measure"].append(measure.distance(previous, avg))
        previous = avg

    witness = _deviation_witness(channel, x, witness_eps, horizon,
                                 "two_sided", beta=beta, reference=limit)
    return BesicovitchReport(limit, True, schedule, residuals, cauchy,
                             witness, certificate.certified)
