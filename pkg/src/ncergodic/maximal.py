"""Witness projections for maximal ergodic inequalities.

A witness certifies a maximal inequality at a finite horizon: a
projection e with small trace defect tau(e_perp) together with a uniform
bound on the compressed averages, e.g. sup_{n<=N} ||e M_n(x) e||.  Every
construction here is re-measured by an independent checker that
recomputes the averages from the raw channel and shares no intermediate
state with the search.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import (Operator, Projection, compressed_norm,
                      hermitian_decompose, one_sided_norm, require_hermitian)
from .dynamics import Channel, ergodic_averages, weighted_averages
from .errors import NotPositiveError
from .ncnorms import lp_norm
from .spectral import (eigh, positive_power, projection_meet_all,
                       truncate_hermitian)
from .util import resolve_tol

# Residual floor for Kadison's inequality S(x)^2 <= S(x^2).
KADISON_THRESHOLD = 1e-10

# Off-diagonal tolerance when testing that all averages commute.
COMMUTING_TOL = 1e-8

DEFAULT_STRATEGIES = ("identity", "hopf-abelian", "level-set", "peel")


@dataclass
class WitnessReport:
    """A candidate projection with measured and budgeted constants.

    checker_passed means the independent re-measurement satisfied both
    trace_defect <= trace_budget + tol and
    sup_compression <= sup_budget + tol.
    """

    projection: Projection
    trace_defect: float
    trace_budget: float
    sup_compression: float
    sup_budget: float
    horizon: int
    method: str
    mode: str
    checker_passed: bool
    found: bool = True
    eps: float = 0.0
    p: float = 1.0
    weight_bound: float = 1.0

    @property
    def trace_ratio(self) -> float:
        return self.trace_defect / self.trace_budget if self.trace_budget else 0.0

    @property
    def sup_ratio(self) -> float:
        return self.sup_compression / self.sup_budget if self.sup_budget else 0.0

    def to_json(self):
        return {
            "trace_defect": self.trace_defect,
            "trace_budget": self.trace_budget,
            "sup_compression": self.sup_compression,
            "sup_budget": self.sup_budget,
            "trace_ratio": self.trace_ratio,
            "sup_ratio": self.sup_ratio,
            "horizon": self.horizon,
            "method": self.method,
            "mode": self.mode,
            "checker_passed": self.checker_passed,
            "found": self.found,
            "eps": self.eps,
            "p": self.p,
            "weight_bound": self.weight_bound,
            "projection": self.projection.operator.to_json(),
        }


@dataclass
class WitnessSearchFailure:
    """Search gave up; carries the best infeasible candidate.

    Not a refutation: the inequalities guarantee a witness exists at the
    paper budgets, the search is just incomplete.
    """

    reason: str
    best_candidate: WitnessReport | None = None
    found: bool = field(default=False, init=False)


def is_found(result) -> bool:
    return isinstance(result, WitnessReport) and result.found


# ---------------------------------------------------------------------
# Independent checker.
# ---------------------------------------------------------------------

@dataclass
class CheckOutcome:
    trace_defect: float
    sup_value: float
    passed_trace: bool
    passed_sup: bool

    @property
    def passed(self) -> bool:
        return self.passed_trace and self.passed_sup


def measure_compressions(channel: Channel, x: Operator, e: Projection,
                         horizon: int, mode="two_sided", beta=None) -> float:
    """sup over n <= horizon of the compressed average norm, recomputed
    from scratch with one channel application per step."""
    if beta is None:
        iterator = ergodic_averages(channel, x, n_max=horizon)
    else:
        iterator = weighted_averages(channel, x, beta, horizon)
    best = 0.0
    for _, avg in iterator:
        if mode == "two_sided":
            best = max(best, compressed_norm(avg, e))
        elif mode == "one_sided":
            best = max(best, one_sided_norm(avg, e))
        else:
            raise ValueError(f"unknown mode {mode!r}")
    return best


def check_witness(channel: Channel, x: Operator, e: Projection,
                  horizon: int, trace_budget: float, sup_budget: float,
                  mode="two_sided", beta=None, tol=None) -> CheckOutcome:
    """Re-verify a witness against its budgets with fresh arithmetic."""
    tol = resolve_tol(tol)
    defect = e.defect()
    sup_value = measure_compressions(channel, x, e, horizon, mode, beta)
    return CheckOutcome(
        trace_defect=defect,
        sup_value=sup_value,
        passed_trace=bool(defect <= trace_budget + tol),
        passed_sup=bool(sup_value <= sup_budget + tol),
    )


def _finalize(channel, x, e, horizon, trace_budget, sup_budget, method,
              mode, beta, eps, p, c) -> WitnessReport:
    outcome = check_witness(channel, x, e, horizon, trace_budget,
                            sup_budget, mode, beta)
    return WitnessReport(
        projection=e,
        trace_defect=outcome.trace_defect,
        trace_budget=trace_budget,
        sup_compression=outcome.sup_value,
        sup_budget=sup_budget,
        horizon=horizon,
        method=method,
        mode=mode,
        checker_passed=outcome.passed,
        eps=eps,
        p=p,
        weight_bound=c,
    )


# ---------------------------------------------------------------------
# Kadison's operator Schwarz inequality.
# ---------------------------------------------------------------------

@dataclass
class KadisonReport:
    residual_min_eig: float
    passed: bool
    unit_image_norm: float


def kadison_check(channel: Channel, x: Operator,
                  threshold=KADISON_THRESHOLD, tol=None) -> KadisonReport:
    """Residual of S(x^2) - S(x)^2 for a positive subunital map.

    Returns the smallest eigenvalue of the residual; the map passes when
    it is above -threshold.
    """
    tol = resolve_tol(tol)
    unit_norm = channel.apply(channel.algebra.identity()).uniform_norm()
    if unit_norm > 1.0 + tol:
        raise ValueError(f"map is not subunital (||S(1)|| = {unit_norm:.6g})")
    if not channel.verified_positive:
        raise ValueError("map has no positivity certificate")
    require_hermitian(x, tol, "kadison_check input")
    sx = channel.apply(x)
    residual = channel.apply(x @ x) - sx @ sx
    min_eig = min(float(np.linalg.eigvalsh((b + b.conj().T) / 2.0)[0])
                  for b in residual.blocks)
    return KadisonReport(min_eig, bool(min_eig >= -threshold), unit_norm)


# ---------------------------------------------------------------------
# Weak (1,1) witnesses.
# ---------------------------------------------------------------------

def _plain_trajectory(channel, x, horizon):
    return [avg for _, avg in ergodic_averages(channel, x, n_max=horizon)]


def hopf_witness_commutative(channel: Channel, x: Operator, eps: float,
                             horizon: int, tol=None) -> WitnessReport:
    """Constructive witness on a diagonal algebra.

    e is the indicator of the atoms where max_{n<=N} M_n(x) stays <= eps;
    the classical maximal ergodic inequality guarantees the killed trace
    is at most ||x||_1 / eps at every finite horizon.
    """
    tol = resolve_tol(tol)
    if not channel.algebra.is_diagonal:
        raise ValueError("hopf witness requires a diagonal algebra")
    if eps <= 0:
        raise ValueError("eps must be positive")
    if not x.is_positive(tol):
        raise NotPositiveError("hopf witness requires x >= 0")

    running_max = np.full(channel.algebra.num_blocks, -np.inf)
    for _, avg in ergodic_averages(channel, x, n_max=horizon):
        diag = np.array([b[0, 0].real for b in avg.blocks])
        running_max = np.maximum(running_max, diag)
    mask = (running_max <= eps).astype(float)
    e = Projection.from_indicator(channel.algebra, mask)
    trace_budget = lp_norm(x, 1) / eps
    return _finalize(channel, x, e, horizon, trace_budget, eps,
                     "hopf", "two_sided", None, eps, 1.0, 1.0)


def _strategy_identity(channel, x, trajectory, level, budget):
    e = Projection.identity(channel.algebra)
    sup_value = max(compressed_norm(a, e) for a in trajectory)
    if sup_value <= level:
        return e
    return None


def _strategy_hopf_abelian(channel, x, trajectory, level, budget):
    """Hopf indicator in the joint eigenbasis, when all averages commute.

    Diagonal algebras short-circuit to the classical construction; in a
    general algebra the averages are rotated to the eigenbasis of their
    sum and must all be diagonal there within tolerance.
    """
    algebra = channel.algebra
    if algebra.is_diagonal:
        running = np.array([max(a.block(i)[0, 0].real for a in trajectory)
                            for i in range(algebra.num_blocks)])
        return Projection.from_indicator(algebra, (running <= level).astype(float))

    total = trajectory[0]
    for a in trajectory[1:]:
        total = total + a
    bases = []
    for i, d in enumerate(algebra.dims):
        b = total.block(i)
        _, vecs = np.linalg.eigh((b + b.conj().T) / 2.0)
        bases.append(vecs)
    kept = []
    for i, d in enumerate(algebra.dims):
        running = np.full(d, -np.inf)
        q = bases[i]
        for a in trajectory:
            rotated = q.conj().T @ a.block(i) @ q
            off = rotated - np.diag(np.diag(rotated))
            scale_ref = max(1.0, float(np.abs(rotated).max()))
            if np.abs(off).max() > COMMUTING_TOL * scale_ref:
                return None  # not simultaneously diagonal
            running = np.maximum(running, np.diag(rotated).real)
        kept.append(q[:, running <= level])
    return Projection.from_basis(algebra, kept)


def _strategy_level_set(channel, x, trajectory, level, budget):
    """Spectral cut of the mean of the averages.

    Thresholds run over the clustered spectrum of B = mean_n M_n(x); the
    compressed sup grows with the threshold while the killed trace
    shrinks, so a binary search finds the largest threshold (smallest
    defect) within the trace budget whose measured sup stays below the
    level.
    """
    mean = trajectory[0]
    for a in trajectory[1:]:
        mean = mean + a
    mean = mean * (1.0 / len(trajectory))
    dec = eigh(mean)

    candidates = []  # ascending threshold; defect descending
    for k in range(len(dec.eigenvalues)):
        proj = dec.projection_where(lambda lam, t=dec.eigenvalues[k]: lam <= t)
        candidates.append((float(dec.eigenvalues[k]), proj))
    feasible = [c for c in candidates if c[1].defect() <= budget]
    if not feasible:
        return None

    def sup_of(proj):
        return max(compressed_norm(a, proj) for a in trajectory)

    lo, hi = 0, len(feasible) - 1
    best = None
    if sup_of(feasible[0][1]) > level:
        return None
    while lo <= hi:
        mid = (lo + hi) // 2
        if sup_of(feasible[mid][1]) <= level:
            best = feasible[mid][1]
            lo = mid + 1
        else:
            hi = mid - 1
    return best


def _strategy_peel(channel, x, trajectory, level, budget):
    """Greedy peeling: repeatedly remove the top spectral direction of
    the worst compressed average until the sup drops below the level or
    the trace budget is exhausted.  Terminates because each step removes
    at least the smallest block weight of trace."""
    algebra = channel.algebra
    bases = [np.eye(d, dtype=complex) for d in algebra.dims]
    weights = algebra.weights
    defect = 0.0

    def current_projection():
        return Projection.from_basis(algebra, bases)

    while True:
        worst_value, worst = -np.inf, None
        for a in trajectory:
            for i in range(algebra.num_blocks):
                basis = bases[i]
                if basis.shape[1] == 0:
                    continue
                comp = basis.conj().T @ a.block(i) @ basis
                lam, vecs = np.linalg.eigh((comp + comp.conj().T) / 2.0)
                if lam[-1] > worst_value:
                    worst_value = float(lam[-1])
                    worst = (i, vecs[:, -1])
        if worst_value <= level:
            return current_projection()
        i, direction = worst
        if defect + weights[i] > budget:
            return current_projection()  # best infeasible candidate
        # orthonormal complement of the offending direction inside block i
        basis = bases[i]
        r = basis.shape[1]
        proj = np.eye(r, dtype=complex) - np.outer(direction,
                                                   direction.conj())
        _, vecs = np.linalg.eigh(proj)
        bases[i] = basis @ vecs[:, 1:]
        defect += weights[i]


_STRATEGY_TABLE = {
    "identity": _strategy_identity,
    "hopf-abelian": _strategy_hopf_abelian,
    "level-set": _strategy_level_set,
    "peel": _strategy_peel,
}


def yeadon_witness_search(channel: Channel, x: Operator, eps: float,
                          horizon: int, strategies=DEFAULT_STRATEGIES,
                          tol=None):
    """Search for a weak (1,1) witness: tau(e_perp) <= ||x||_1/eps and
    sup_{n<=N} ||e M_n(x) e|| <= eps.

    Strategies run in order; the first whose candidate passes the
    independent checker wins.  A WitnessSearchFailure is returned when
    all strategies fall short; it is not a refutation since the search
    is incomplete.
    """
    tol = resolve_tol(tol)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if not x.is_positive(tol):
        raise NotPositiveError("yeadon witness requires x >= 0")
    trace_budget = lp_norm(x, 1) / eps
    trajectory = _plain_trajectory(channel, x, horizon)

    best_candidate = None
    for name in strategies:
        strategy = _STRATEGY_TABLE[name]
        e = strategy(channel, x, trajectory, eps, trace_budget)
        if e is None:
            continue
        report = _finalize(channel, x, e, horizon, trace_budget, eps,
                           name, "two_sided", None, eps, 1.0, 1.0)
        if report.checker_passed:
            return report
        if best_candidate is None or (report.sup_compression
                                      < best_candidate.sup_compression):
            best_candidate = report
    if best_candidate is not None:
        best_candidate.found = False
    return WitnessSearchFailure("no strategy met both budgets",
                                best_candidate)


def lp_witness(channel: Channel, x: Operator, p: float, eps: float,
               horizon: int, strategies=DEFAULT_STRATEGIES, tol=None):
    """Weak (p,p) witness for positive x.

    Runs the weak (1,1) search on x^p at level eps^p; the spectral
    bound x <= x_eps + eps^(1-p) x^p turns that witness into
    sup_n ||e M_n(x) e|| <= 2 eps with tau(e_perp) <= (||x||_p/eps)^p.
    """
    tol = resolve_tol(tol)
    if p < 1:
        raise ValueError("p must be >= 1")
    if not x.is_positive(tol):
        raise NotPositiveError("lp witness requires x >= 0")
    powered = x if p == 1 else positive_power(x, p, tol)
    base = yeadon_witness_search(channel, powered, eps ** p, horizon,
                                 strategies, tol)
    trace_budget = (lp_norm(x, p) / eps) ** p
    sup_budget = 2.0 * eps
    if not is_found(base):
        candidate = None
        if base.best_candidate is not None:
            candidate = _finalize(channel, x, base.best_candidate.projection,
                                  horizon, trace_budget, sup_budget,
                                  f"lp[{base.best_candidate.method}]",
                                  "two_sided", None, eps, p, 1.0)
            candidate.found = False
        return WitnessSearchFailure(
            f"weak (1,1) search failed at level eps^p: {base.reason}",
            candidate)
    report = _finalize(channel, x, base.projection, horizon, trace_budget,
                       sup_budget, f"lp[{base.method}]", "two_sided",
                       None, eps, p, 1.0)
    return report


def _positive_parts(x, tol):
    """Nonzero positive parts of x; positive x stays whole."""
    if x.is_positive(tol):
        return [x]
    scale_ref = max(x.uniform_norm(), 1.0)
    parts = [part for part in hermitian_decompose(x, tol)
             if part.uniform_norm() > 1e-14 * scale_ref]
    return parts


def weighted_witness(channel: Channel, x: Operator, p: float, beta,
                     eps: float, horizon: int,
                     strategies=DEFAULT_STRATEGIES, tol=None):
    """Witness for weighted averages M_{beta,n} via the four positive parts.

    Each part gets its own weak (p,p) witness; the meet of the four
    projections controls the weighted averages because the shifted
    coefficients Re(beta)+C, Im(beta)+C lie in [0, 2C].  Budgets are
    parts * (||x||_p/eps)^p on the trace and parts * 12 C eps on the
    sup (parts * 2 eps when beta is identically one, where the weighted
    average is the plain one).
    """
    tol = resolve_tol(tol)
    parts = _positive_parts(x, tol)
    witnesses = []
    for part in parts:
        res = lp_witness(channel, part, p, eps, horizon, strategies, tol)
        if not is_found(res):
            return WitnessSearchFailure(
                f"part witness failed: {res.reason}", res.best_candidate)
        witnesses.append(res)
    e = projection_meet_all([w.projection for w in witnesses])

    c = beta.bound
    trivial = beta.is_constant_one
    trace_budget = len(parts) * (lp_norm(x, p) / eps) ** p
    per_part = 2.0 * eps if trivial else 12.0 * c * eps
    sup_budget = len(parts) * per_part
    return _finalize(channel, x, e, horizon, trace_budget, sup_budget,
                     f"weighted[{'+'.join(w.method for w in witnesses)}]",
                     "two_sided", None if trivial else beta, eps, p, c)


def one_sided_witness(channel: Channel, x: Operator, p: float, beta,
                      eps: float, horizon: int,
                      strategies=DEFAULT_STRATEGIES, tol=None,
                      truncation_level=None):
    """One-sided witness sup_n ||M_{beta,n}(x) e|| for p >= 2.

    For each Hermitian component h of x the witness is the weak (p/2)
    construction for h^2 at level eps^2: Kadison's inequality applied to
    the subunital averages turns ||e M_n(h^2) e|| <= 2 eps^2 into
    ||M_n(h) e|| <= sqrt(2) eps.  Bounded operators make the
    spectral-truncation detour unnecessary, but truncation_level
    reproduces it (h is restricted to [-m, m]; any m >= ||h|| leaves h
    unchanged).

    Budgets per Hermitian part: (2 (||x||_p/eps)^p, sqrt(2) eps) for
    plain averages, (3 (||x||_p/eps)^p, 2 sqrt(C)(2+sqrt(C)) eps) for
    genuinely weighted ones; two parts double both.
    """
    tol = resolve_tol(tol)
    if p < 2:
        raise ValueError("one-sided witnesses are only available for p >= 2")
    if x.is_hermitian(tol):
        parts = [x]
    else:
        scale_ref = max(x.uniform_norm(), 1.0)
        parts = [h for h in (x.hermitian_part(), x.skew_part())
                 if h.uniform_norm() > 1e-14 * scale_ref]

    witnesses = []
    for h in parts:
        if truncation_level is not None:
            h = truncate_hermitian(h, truncation_level, tol)
        res = lp_witness(channel, h @ h, p / 2.0, eps ** 2, horizon,
                         strategies, tol)
        if not is_found(res):
            return WitnessSearchFailure(
                f"squared-part witness failed: {res.reason}",
                res.best_candidate)
        witnesses.append(res)
    e = projection_meet_all([w.projection for w in witnesses])

    c = beta.bound
    trivial = beta.is_constant_one
    r = lp_norm(x, p) / eps
    if trivial:
        trace_budget = 2.0 * len(parts) * r ** p
        sup_budget = len(parts) * np.sqrt(2.0) * eps
    else:
        trace_budget = 3.0 * len(parts) * r ** p
        sup_budget = len(parts) * 2.0 * np.sqrt(c) * (2.0 + np.sqrt(c)) * eps
    return _finalize(channel, x, e, horizon, trace_budget, sup_budget,
                     f"one-sided[{'+'.join(w.method for w in witnesses)}]",
                     "one_sided", None if trivial else beta, eps, p, c)
