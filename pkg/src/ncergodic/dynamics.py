"""Dunford-Schwartz maps on block algebras: construction, verification,
ergodic averages and exact Cesaro limits.

A channel is stored as a dense superoperator on the vectorized algebra;
constructors attach Kraus data where the map is completely positive by
build.  A channel is DS+ when it is positive, subunital and
trace-nonincreasing on positives; for positive maps subunitality already
gives the uniform-norm contraction, and trace-nonincreasing is
equivalent to subunitality of the trace adjoint.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .algebra import AlgebraSpec, Operator
from .errors import ChannelConstructionError, SemisimplicityError
from .rng import random_operator, random_unitary_operator, stream
from .util import EIG_CLUSTER_TOL, resolve_tol

# Seed for the deterministic positive test set used when a channel has
# no structural positivity evidence.
_POSITIVITY_SAMPLE_SEED = 0x9C0FFEE
_POSITIVITY_SAMPLES = 8


class Channel:
    """Linear map on the algebra, stored as a dense superoperator.

    Vectorization is row-major per block, blocks concatenated.  The
    flags record what the constructor certified; `verify_ds` recomputes
    a verification report from scratch at any time.
    """

    __slots__ = ("algebra", "superop", "kraus", "kind",
                 "positivity_evidence", "verified_positive",
                 "verified_subunital", "verified_trace_nonincreasing",
                 "norm_contraction_certified", "_adjoint_superop")

    def __init__(self, algebra: AlgebraSpec, superop, kraus=None,
                 kind="custom", positivity_evidence="none",
                 norm_contraction_certified=False, verify=True, tol=None):
        n = algebra.vec_dim
        superop = np.array(superop, dtype=complex)
        if superop.shape != (n, n):
            raise ChannelConstructionError(
                f"superoperator must be {n}x{n}, got {superop.shape}")
        superop.flags.writeable = False
        self.algebra = algebra
        self.superop = superop
        self.kraus = tuple(kraus) if kraus else None
        self.kind = kind
        self.positivity_evidence = (
            "kraus" if self.kraus else positivity_evidence)
        self.norm_contraction_certified = norm_contraction_certified
        self._adjoint_superop = None
        self.verified_positive = False
        self.verified_subunital = False
        self.verified_trace_nonincreasing = False
        if verify:
            report = verify_ds(self, tol=tol)
            self.verified_positive = report.positive
            self.verified_subunital = report.subunital
            self.verified_trace_nonincreasing = report.trace_nonincreasing

    # -- application ------------------------------------------------------

    def apply(self, x: Operator) -> Operator:
        if x.algebra != self.algebra:
            raise ChannelConstructionError("operator from a different algebra")
        return Operator.from_vec(self.algebra, self.superop @ x.vec())

    def __call__(self, x: Operator) -> Operator:
        return self.apply(x)

    def adjoint_superop(self) -> np.ndarray:
        """Superoperator of the adjoint for <x,y> = tau(x* y)."""
        if self._adjoint_superop is None:
            w = _weight_vector(self.algebra)
            adj = (self.superop.conj().T * w[None, :]) / w[:, None]
            adj.flags.writeable = False
            self._adjoint_superop = adj
        return self._adjoint_superop

    def adjoint_apply(self, x: Operator) -> Operator:
        return Operator.from_vec(self.algebra, self.adjoint_superop() @ x.vec())

    @property
    def is_ds_plus(self) -> bool:
        return (self.verified_positive and self.verified_subunital
                and self.verified_trace_nonincreasing)

    @property
    def is_ds(self) -> bool:
        """DS+ or a norm-contraction certified linear combination."""
        return self.is_ds_plus or (self.norm_contraction_certified
                                   and self.verified_subunital)

    def spectral_gap(self, cluster_tol=EIG_CLUSTER_TOL) -> float:
        """1 minus the largest eigenvalue modulus outside the cluster at 1."""
        eigs = np.linalg.eigvals(self.superop)
        outside = eigs[np.abs(eigs - 1.0) > cluster_tol]
        if outside.size == 0:
            return 1.0
        return float(1.0 - np.max(np.abs(outside)))

    def __repr__(self):
        return f"Channel(kind={self.kind!r}, dims={self.algebra.dims})"


def _weight_vector(algebra: AlgebraSpec) -> np.ndarray:
    parts = [np.full(d * d, w) for d, w in algebra.blocks]
    return np.concatenate(parts)


def _positive_test_set(algebra: AlgebraSpec):
    ops = [algebra.identity()]
    total_dim = sum(algebra.dims)
    for slot in range(total_dim):
        mask = np.zeros(total_dim)
        mask[slot] = 1.0
        ops.append(algebra.diagonal(mask))
    rng = stream(_POSITIVITY_SAMPLE_SEED, algebra.content_hash())
    for _ in range(_POSITIVITY_SAMPLES):
        ops.append(random_operator(algebra, rng, kind="positive"))
    return ops


@dataclass
class DSVerification:
    """Outcome of the three Dunford-Schwartz checks."""

    positive: bool
    positivity_evidence: str
    subunital: bool
    subunital_value: float
    trace_nonincreasing: bool
    adjoint_unit_value: float
    tol: float

    @property
    def is_ds_plus(self) -> bool:
        return self.positive and self.subunital and self.trace_nonincreasing


def verify_ds(channel: Channel, tol=None) -> DSVerification:
    """Verify the DS+ conditions of a channel, reporting all failures.

    (a) positivity: certified by Kraus data or structural evidence
        recorded by the constructor, otherwise by mapping a documented
        positive test set (identity, diagonal units, seeded random PSD
        elements) into positives within tolerance;
    (b) subunitality ||T(1)|| <= 1 + tol, which for positive maps is the
        uniform-norm contraction;
    (c) largest eigenvalue of the trace-adjoint applied to the identity
        <= 1 + tol, equivalent to trace-nonincreasing on positives.
    """
    tol = resolve_tol(tol)
    if channel.positivity_evidence in ("kraus", "entrywise", "convex",
                                       "structural"):
        positive = True
    else:
        positive = True
        for x in _positive_test_set(channel.algebra):
            y = channel.apply(x)
            scale_ref = max(1.0, x.uniform_norm())
            if not y.is_hermitian(tol * scale_ref):
                positive = False
                break
            min_eig = min(float(np.linalg.eigvalsh(
                (b + b.conj().T) / 2.0)[0]) for b in y.blocks)
            if min_eig < -tol * scale_ref:
                positive = False
                break

    unit = channel.algebra.identity()
    unit_image = channel.apply(unit)
    subunital_value = unit_image.uniform_norm()
    adjoint_image = channel.adjoint_apply(unit)
    herm = (adjoint_image + adjoint_image.adjoint()) * 0.5
    adjoint_unit_value = max(float(np.linalg.eigvalsh(b)[-1].real)
                             for b in herm.blocks)

    return DSVerification(
        positive=positive,
        positivity_evidence=channel.positivity_evidence if positive else "failed",
        subunital=bool(subunital_value <= 1.0 + tol),
        subunital_value=float(subunital_value),
        trace_nonincreasing=bool(adjoint_unit_value <= 1.0 + tol),
        adjoint_unit_value=float(adjoint_unit_value),
        tol=tol,
    )


# ---------------------------------------------------------------------
# Constructors.  Each returns a channel whose DS+ flags were verified.
# ---------------------------------------------------------------------

def _conjugation_superop(algebra: AlgebraSpec, left: Operator,
                         right: Operator) -> np.ndarray:
    """Superoperator of x -> left x right (blockwise maps)."""
    n = algebra.vec_dim
    out = np.zeros((n, n), dtype=complex)
    offs = algebra.block_offsets()
    for i, d in enumerate(algebra.dims):
        kron = np.kron(left.block(i), right.block(i).T)
        sl = slice(offs[i], offs[i] + d * d)
        out[sl, sl] = kron
    return out


def _kraus_superop(algebra: AlgebraSpec, ops) -> np.ndarray:
    n = algebra.vec_dim
    out = np.zeros((n, n), dtype=complex)
    for a in ops:
        out += _conjugation_superop(algebra, a, a.adjoint())
    return out


def kraus_channel(algebra: AlgebraSpec, ops, kind="kraus",
                  require_ds=True, tol=None) -> Channel:
    """T(x) = sum_k a_k x a_k*, completely positive by construction."""
    ch = Channel(algebra, _kraus_superop(algebra, ops), kraus=ops,
                 kind=kind, tol=tol)
    if require_ds and not ch.is_ds_plus:
        report = verify_ds(ch, tol)
        raise ChannelConstructionError(
            "Kraus family is not Dunford-Schwartz: "
            f"||T(1)||={report.subunital_value:.6g}, "
            f"||T'(1)||={report.adjoint_unit_value:.6g}")
    return ch


def identity_channel(algebra: AlgebraSpec) -> Channel:
    return Channel(algebra, np.eye(algebra.vec_dim, dtype=complex),
                   kraus=[algebra.identity()], kind="identity")


def unitary_conjugation(u: Operator, tol=None) -> Channel:
    """x -> u* x u for a block unitary u."""
    tol = resolve_tol(tol)
    algebra = u.algebra
    defect = max(float(np.linalg.norm(
        b.conj().T @ b - np.eye(b.shape[0]), 2)) for b in u.blocks)
    if defect > tol:
        raise ChannelConstructionError(f"not unitary (defect {defect:.2e})")
    return kraus_channel(algebra, [u.adjoint()], kind="unitary", tol=tol)


def pinching(algebra: AlgebraSpec, labels) -> Channel:
    """Conditional expectation x -> sum_j p_j x p_j.

    labels assigns a group id to every diagonal slot (per block,
    concatenated); each group's diagonal indicator is one Kraus
    projection.  Equal labels within a block keep that sub-block of x.
    """
    labels = np.asarray(labels).ravel()
    total = sum(algebra.dims)
    if labels.size != total:
        raise ChannelConstructionError(
            f"need one label per diagonal slot ({total})")
    ops = []
    for g in sorted(set(labels.tolist())):
        mask = (labels == g).astype(float)
        ops.append(algebra.diagonal(mask))
    return kraus_channel(algebra, ops, kind="pinching")


def schur_multiplier(algebra: AlgebraSpec, mats, tol=None) -> Channel:
    """Entrywise multiplier x_i -> m_i (*) x_i per block.

    Requires every m_i positive semidefinite with diagonal <= 1; the
    Kraus decomposition diag(sqrt(mu_k) v_k) comes from the
    eigendecomposition of m_i.
    """
    tol = resolve_tol(tol)
    mats = [np.asarray(m, dtype=complex) for m in mats]
    if len(mats) != algebra.num_blocks:
        raise ChannelConstructionError("one multiplier matrix per block")
    ops = []
    total = sum(algebra.dims)
    offsets = np.concatenate([[0], np.cumsum(algebra.dims)])
    for i, (d, m) in enumerate(zip(algebra.dims, mats)):
        if m.shape != (d, d):
            raise ChannelConstructionError("multiplier shape mismatch")
        if np.linalg.norm(m - m.conj().T, 2) > tol:
            raise ChannelConstructionError("multiplier must be Hermitian")
        lam, vecs = np.linalg.eigh((m + m.conj().T) / 2.0)
        if lam[0] < -tol:
            raise ChannelConstructionError(
                f"multiplier not PSD (min eig {lam[0]:.2e})")
        if np.max(m.diagonal().real) > 1.0 + tol:
            raise ChannelConstructionError("multiplier diagonal exceeds 1")
        for k in range(d):
            if lam[k] <= 0:
                continue
            col = np.zeros(total, dtype=complex)
            col[offsets[i]:offsets[i] + d] = np.sqrt(lam[k]) * vecs[:, k]
            ops.append(algebra.diagonal(col))
    return kraus_channel(algebra, ops, kind="schur", tol=tol)


def substochastic(algebra: AlgebraSpec, matrix, tol=None) -> Channel:
    """Markov-type map on a diagonal algebra: (T x)_i = sum_j P_ij x_j.

    Requires all blocks 1x1, P entrywise >= 0, row sums <= 1 and
    weighted column sums sum_i w_i P_ij <= w_j: together these are
    exactly subunitality and trace-nonincreasing, and entrywise
    positivity makes the map positive on the diagonal algebra.
    """
    tol = resolve_tol(tol)
    if not algebra.is_diagonal:
        raise ChannelConstructionError(
            "substochastic channels need a diagonal algebra (all blocks 1x1)")
    n = algebra.num_blocks
    p = np.asarray(matrix, dtype=float)
    if p.shape != (n, n):
        raise ChannelConstructionError(f"matrix must be {n}x{n}")
    if np.min(p) < -tol:
        raise ChannelConstructionError("matrix entries must be non-negative")
    row_sums = p.sum(axis=1)
    if np.max(row_sums) > 1.0 + tol:
        raise ChannelConstructionError(
            f"row sum {row_sums.max():.6g} exceeds 1")
    w = np.array(algebra.weights)
    col = (w[:, None] * p).sum(axis=0) / w
    if np.max(col) > 1.0 + tol:
        raise ChannelConstructionError(
            f"weighted column sum {col.max():.6g} exceeds 1")
    return Channel(algebra, p.astype(complex), kind="substochastic",
                   positivity_evidence="entrywise", tol=tol)


def convex_combine(channels, probabilities, tol=None) -> Channel:
    """Convex combination of channels (DS+ is closed under these)."""
    probabilities = np.asarray(probabilities, dtype=float)
    if len(channels) != probabilities.size or len(channels) == 0:
        raise ChannelConstructionError("need matching channels/probabilities")
    if np.any(probabilities < 0) or abs(probabilities.sum() - 1.0) > 1e-12:
        raise ChannelConstructionError("probabilities must be a distribution")
    algebra = channels[0].algebra
    superop = sum(p * ch.superop for p, ch in zip(probabilities, channels))
    kraus = None
    if all(ch.kraus for ch in channels):
        kraus = []
        for p, ch in zip(probabilities, channels):
            kraus.extend(a * np.sqrt(p) for a in ch.kraus)
    evidence = ("convex" if all(ch.verified_positive for ch in channels)
                else "none")
    return Channel(algebra, superop, kraus=kraus, kind="convex",
                   positivity_evidence=evidence, tol=tol)


def linear_combine(channels, coefficients, tol=None) -> Channel:
    """Complex combination sum c_i T_i of DS+ channels with sum|c_i| <= 1.

    The result contracts both the uniform norm and the trace norm by
    construction, so it is Dunford-Schwartz, but generally not positive;
    it is admitted for mean-ergodic experiments and flagged accordingly.
    """
    coefficients = np.asarray(coefficients, dtype=complex)
    if len(channels) != coefficients.size or len(channels) == 0:
        raise ChannelConstructionError("need matching channels/coefficients")
    if np.sum(np.abs(coefficients)) > 1.0 + 1e-12:
        raise ChannelConstructionError("sum of |coefficients| must be <= 1")
    if not all(ch.is_ds_plus for ch in channels):
        raise ChannelConstructionError(
            "linear combinations are only certified over DS+ channels")
    algebra = channels[0].algebra
    superop = sum(c * ch.superop for c, ch in zip(coefficients, channels))
    return Channel(algebra, superop, kind="linear-combination",
                   positivity_evidence="none",
                   norm_contraction_certified=True, tol=tol)


def scale_channel(channel: Channel, factor, tol=None) -> Channel:
    """factor * T.  Positive factors keep positivity; unimodular complex
    factors keep only the norm contraction (DS mode)."""
    factor = complex(factor)
    evidence = "none"
    if factor.imag == 0 and factor.real >= 0 and channel.verified_positive:
        evidence = "structural"
    certified = (channel.is_ds_plus or channel.norm_contraction_certified) \
        and abs(factor) <= 1.0 + 1e-12
    return Channel(channel.algebra, factor * channel.superop,
                   kind=f"scaled-{channel.kind}",
                   positivity_evidence=evidence,
                   norm_contraction_certified=certified, tol=tol)


def compose(outer: Channel, inner: Channel, tol=None) -> Channel:
    """outer after inner."""
    if outer.algebra != inner.algebra:
        raise ChannelConstructionError("channels on different algebras")
    kraus = None
    if outer.kraus and inner.kraus:
        kraus = [a @ b for a in outer.kraus for b in inner.kraus]
    evidence = ("structural"
                if outer.verified_positive and inner.verified_positive
                else "none")
    return Channel(outer.algebra, outer.superop @ inner.superop,
                   kraus=kraus, kind="compose",
                   positivity_evidence=evidence, tol=tol)


# ---------------------------------------------------------------------
# Random ensembles.
# ---------------------------------------------------------------------

def random_kraus_channel(algebra: AlgebraSpec, num_ops, rng,
                         margin=1e-3) -> Channel:
    """Seeded random Kraus channel strictly inside DS+.

    Kraus operators get independent standard complex Gaussian entries
    and are jointly rescaled so the larger of ||sum a a*|| and
    ||sum a* a|| equals 1 - margin, which keeps both DS checks strictly
    satisfied.
    """
    ops = [random_operator(algebra, rng) for _ in range(num_ops)]
    forward = sum((a @ a.adjoint() for a in ops[1:]),
                  ops[0] @ ops[0].adjoint())
    backward = sum((a.adjoint() @ a for a in ops[1:]),
                   ops[0].adjoint() @ ops[0])
    scale = max(forward.uniform_norm(), backward.uniform_norm())
    factor = np.sqrt((1.0 - margin) / scale)
    return kraus_channel(algebra, [a * factor for a in ops],
                         kind="random-kraus")


def random_unitary_mixture(algebra: AlgebraSpec, num_unitaries, rng,
                           min_gap=None, max_draws=64) -> Channel:
    """Uniform mixture of random unitary conjugations (unital,
    trace-preserving DS+).  With min_gap set, redraws until the
    superoperator spectral gap reaches it."""
    for _ in range(max_draws):
        parts = [unitary_conjugation(random_unitary_operator(algebra, rng))
                 for _ in range(num_unitaries)]
        ch = convex_combine(parts, np.full(num_unitaries,
                                           1.0 / num_unitaries))
        if min_gap is None or ch.spectral_gap() >= min_gap:
            return ch
    raise ChannelConstructionError(
        f"no mixture with spectral gap >= {min_gap} in {max_draws} draws")


def random_substochastic(algebra: AlgebraSpec, rng, slack=0.05) -> Channel:
    """Random substochastic channel on a diagonal algebra: a random
    doubly-stochastic-like matrix shrunk until both sum conditions hold
    with the given slack."""
    n = algebra.num_blocks
    p = rng.random((n, n))
    w = np.array(algebra.weights)
    p /= max(np.max(p.sum(axis=1)),
             np.max((w[:, None] * p).sum(axis=0) / w))
    return substochastic(algebra, (1.0 - slack) * p)


# ---------------------------------------------------------------------
# Averages.
# ---------------------------------------------------------------------

def ergodic_averages(channel: Channel, x: Operator, n_max=None):
    """Yield (n, M_n(x)) incrementally: one channel application per step."""
    current = x
    running = x
    n = 0
    while True:
        yield n, running * (1.0 / (n + 1))
        if n_max is not None and n >= n_max:
            return
        current = channel.apply(current)
        running = running + current
        n += 1


def ergodic_average(channel: Channel, x: Operator, n: int) -> Operator:
    """M_n(x) = (1/(n+1)) sum_{k<=n} T^k(x)."""
    if n < 0:
        raise ValueError("n must be >= 0")
    for m, avg in ergodic_averages(channel, x, n_max=n):
        if m == n:
            return avg


def weighted_averages(channel: Channel, x: Operator, beta, n_max):
    """Yield (n, M_{beta,n}(x)) for n = 0..n_max."""
    values = beta.values(n_max)
    if np.max(np.abs(values)) > beta.bound + 1e-12:
        raise ValueError("weight bound violated on the requested window")
    current = x
    running = x * values[0]
    for n in range(n_max + 1):
        yield n, running * (1.0 / (n + 1))
        if n == n_max:
            return
        current = channel.apply(current)
        running = running + current * values[n + 1]


def weighted_average(channel: Channel, x: Operator, beta, n: int) -> Operator:
    for m, avg in weighted_averages(channel, x, beta, n):
        if m == n:
            return avg


def shifted_average_parts(channel: Channel, x: Operator, beta, n: int):
    """The two non-negatively weighted averages whose combination
    reconstructs M_{beta,n}.

    Returns (real_part, imag_part, plain) with coefficients
    Re(beta_k) + C and Im(beta_k) + C, so that
    M_{beta,n} = real_part + i*imag_part - C(1+i) plain.
    """
    values = beta.values(n)
    c = beta.bound
    current = x
    run_r = x * (values[0].real + c)
    run_i = x * (values[0].imag + c)
    run_p = x
    for k in range(1, n + 1):
        current = channel.apply(current)
        run_r = run_r + current * (values[k].real + c)
        run_i = run_i + current * (values[k].imag + c)
        run_p = run_p + current
    scale = 1.0 / (n + 1)
    return run_r * scale, run_i * scale, run_p * scale


def cesaro_channel(channel: Channel, n: int, tol=None) -> Channel:
    """M_n as a channel: average of the first n+1 superoperator powers."""
    if n < 0:
        raise ValueError("n must be >= 0")
    acc = np.eye(channel.algebra.vec_dim, dtype=complex)
    power = np.eye(channel.algebra.vec_dim, dtype=complex)
    for _ in range(n):
        power = channel.superop @ power
        acc += power
    evidence = ("structural" if channel.verified_positive else "none")
    kraus = None
    return Channel(channel.algebra, acc / (n + 1), kraus=kraus,
                   kind=f"cesaro-{channel.kind}",
                   positivity_evidence=evidence, tol=tol)


def shifted_cesaro_channels(channel: Channel, beta, n: int, tol=None):
    """Channels for the Re/Im shifted weighted averages (coefficients
    Re(beta_k)+C and Im(beta_k)+C, both in [0, 2C])."""
    values = beta.values(n)
    c = beta.bound
    dim = channel.algebra.vec_dim
    acc_r = np.zeros((dim, dim), dtype=complex)
    acc_i = np.zeros((dim, dim), dtype=complex)
    power = np.eye(dim, dtype=complex)
    for k in range(n + 1):
        if k:
            power = channel.superop @ power
        acc_r += (values[k].real + c) * power
        acc_i += (values[k].imag + c) * power
    evidence = "structural" if channel.verified_positive else "none"
    make = lambda acc, tag: Channel(
        channel.algebra, acc / (n + 1), kind=f"{tag}-shifted-{channel.kind}",
        positivity_evidence=evidence, tol=tol)
    return make(acc_r, "re"), make(acc_i, "im")


# ---------------------------------------------------------------------
# Exact Cesaro limits.
# ---------------------------------------------------------------------

def _peripheral_projection(superop, cluster_tol):
    """Spectral projection of the superoperator at eigenvalue 1 via a
    sorted Schur form; raises if the cluster has a nilpotent part."""
    t, z, sdim = scipy.linalg.schur(
        superop, output="complex",
        sort=lambda lam: abs(lam - 1.0) <= cluster_tol)
    n = superop.shape[0]
    if sdim == 0:
        return np.zeros((n, n), dtype=complex)
    t11 = t[:sdim, :sdim]
    nilpotent = t11 - np.diag(np.diag(t11))
    if np.linalg.norm(nilpotent, 2) > cluster_tol:
        raise SemisimplicityError(
            "eigenvalue cluster at 1 is not semisimple; "
            "the input is not power-bounded (run verify_ds first)")
    if sdim == n:
        return np.eye(n, dtype=complex)
    t12 = t[:sdim, sdim:]
    t22 = t[sdim:, sdim:]
    # Invariant-subspace split: solve T11 X - X T22 = T12, then the
    # spectral projection is Z [[I, X], [0, 0]] Z*.
    x = scipy.linalg.solve_sylvester(t11, -t22, t12)
    block = np.zeros((n, n), dtype=complex)
    block[:sdim, :sdim] = np.eye(sdim)
    block[:sdim, sdim:] = x
    return z @ block @ z.conj().T


def fixed_point(channel: Channel, x: Operator,
                cluster_tol=EIG_CLUSTER_TOL) -> Operator:
    """Exact Cesaro limit of M_n(x): the eigenvalue-1 component of x.

    Requires a power-bounded channel (e.g. verified DS+), for which the
    peripheral spectrum is semisimple; returns 0 when 1 is not an
    eigenvalue.
    """
    proj = _peripheral_projection(channel.superop, cluster_tol)
    return Operator.from_vec(channel.algebra, proj @ x.vec())


def rotated_fixed_point(channel: Channel, x: Operator, phase,
                        cluster_tol=EIG_CLUSTER_TOL) -> Operator:
    """Eigenvalue-conj(phase) component of x: the Cesaro limit of the
    phase-twisted averages (1/(n+1)) sum phase^k T^k(x)."""
    phase = complex(phase)
    if abs(abs(phase) - 1.0) > 1e-12:
        raise ValueError("phase must be unimodular")
    proj = _peripheral_projection(phase * channel.superop, cluster_tol)
    return Operator.from_vec(channel.algebra, proj @ x.vec())


# ---------------------------------------------------------------------
# JSON channel specifications (CLI and config files).
# ---------------------------------------------------------------------

def channel_from_spec(algebra: AlgebraSpec, spec, run_seed=0) -> Channel:
    """Build a channel from its JSON description.

    Random kinds ("random-kraus", "unitary-mixture",
    "random-substochastic") derive their stream from (run_seed, the
    spec's "seed" field), so identical configs rebuild identical
    channels.
    """
    kind = spec["kind"]
    if kind == "identity":
        return identity_channel(algebra)
    if kind == "unitary":
        if "matrix" in spec:
            u = Operator.from_json(algebra, spec["matrix"])
        else:
            u = random_unitary_operator(
                algebra, stream(run_seed, "unitary", spec.get("seed", 0)))
        return unitary_conjugation(u)
    if kind == "pinching":
        return pinching(algebra, spec["labels"])
    if kind == "schur":
        mats = [np.array([complex(re, im) for re, im in block]).reshape(d, d)
                for d, block in zip(algebra.dims, spec["matrices"]["blocks"])]
        return schur_multiplier(algebra, mats)
    if kind == "substochastic":
        return substochastic(algebra, spec["matrix"])
    if kind == "kraus":
        ops = [Operator.from_json(algebra, item) for item in spec["operators"]]
        return kraus_channel(algebra, ops)
    if kind == "random-kraus":
        rng = stream(run_seed, "random-kraus", spec.get("seed", 0))
        return random_kraus_channel(algebra, spec.get("num_ops", 3), rng,
                                    margin=spec.get("margin", 1e-3))
    if kind == "unitary-mixture":
        rng = stream(run_seed, "unitary-mixture", spec.get("seed", 0))
        return random_unitary_mixture(algebra, spec.get("num", 3), rng,
                                      min_gap=spec.get("min_gap"))
    if kind == "random-substochastic":
        rng = stream(run_seed, "random-substochastic", spec.get("seed", 0))
        return random_substochastic(algebra, rng)
    if kind == "convex":
        children = [channel_from_spec(algebra, c, run_seed)
                    for c in spec["children"]]
        return convex_combine(children, spec["probabilities"])
    if kind == "compose":
        children = [channel_from_spec(algebra, c, run_seed)
                    for c in spec["children"]]
        if len(children) != 2:
            raise ChannelConstructionError("compose takes exactly two children")
        return compose(children[0], children[1])
    if kind == "scaled":
        child = channel_from_spec(algebra, spec["child"], run_seed)
        re, im = spec["factor"]
        return scale_channel(child, complex(re, im))
    raise ChannelConstructionError(f"unknown channel kind {kind!r}")
