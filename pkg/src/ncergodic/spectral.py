"""Hermitian eigendecomposition, functional calculus and the projection lattice."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import AlgebraSpec, Operator, Projection, require_hermitian
from .errors import NotPositiveError
from .util import EIG_CLUSTER_TOL, MEET_KERNEL_TOL, resolve_tol


@dataclass
class SpectralDecomposition:
    """Clustered eigenvalues with mutually orthogonal eigenprojections.

    eigenvalues are ascending cluster representatives (weighted means of
    the raw eigenvalues merged within the cluster tolerance); projections
    sum to the identity blockwise.
    """

    algebra: AlgebraSpec
    eigenvalues: np.ndarray
    projections: list

    def reconstruct(self) -> Operator:
        return self.apply(lambda lam: lam)

    def apply(self, fn) -> Operator:
        """Functional calculus sum fn(lambda_k) e_k."""
        out = self.algebra.zero()
        for lam, proj in zip(self.eigenvalues, self.projections):
            out = out + proj.operator * complex(fn(float(lam)))
        return out

    def projection_where(self, predicate) -> Projection:
        """Sum of eigenprojections whose eigenvalue satisfies the predicate."""
        bases = []
        for i, d in enumerate(self.algebra.dims):
            cols = [p.block_basis(i) for lam, p in
                    zip(self.eigenvalues, self.projections)
                    if predicate(float(lam)) and p.block_basis(i).shape[1]]
            if cols:
                bases.append(np.concatenate(cols, axis=1))
            else:
                bases.append(np.zeros((d, 0), dtype=complex))
        return Projection.from_basis(self.algebra, bases)


def eigh(x: Operator, tol=None, cluster_tol=EIG_CLUSTER_TOL) -> SpectralDecomposition:
    """Spectral decomposition of a Hermitian element.

    Eigenvalues are collected across all blocks and merged into clusters
    of width cluster_tol; each cluster owns one (block-diagonal)
    eigenprojection.  Merging keeps meets and interval projections
    stable at degenerate eigenvalues.
    """
    require_hermitian(x, tol, "eigh input")
    entries = []  # (eigenvalue, block index, eigenvector column)
    for i, b in enumerate(x.blocks):
        lam, vecs = np.linalg.eigh((b + b.conj().T) / 2.0)
        for k in range(lam.size):
            entries.append((float(lam[k]), i, vecs[:, k]))
    entries.sort(key=lambda t: t[0])

    clusters = []
    for item in entries:
        if clusters and item[0] - clusters[-1][-1][0] <= cluster_tol:
            clusters[-1].append(item)
        else:
            clusters.append([item])

    eigenvalues = []
    projections = []
    for cluster in clusters:
        eigenvalues.append(sum(t[0] for t in cluster) / len(cluster))
        bases = []
        for i, d in enumerate(x.algebra.dims):
            cols = [t[2].reshape(d, 1) for t in cluster if t[1] == i]
            if cols:
                bases.append(np.concatenate(cols, axis=1))
            else:
                bases.append(np.zeros((d, 0), dtype=complex))
        projections.append(Projection.from_basis(x.algebra, bases))
    return SpectralDecomposition(x.algebra, np.array(eigenvalues), projections)


def abs_value(x: Operator) -> Operator:
    """|x| = (x* x)^(1/2), computed per block from the SVD of x."""
    blocks = []
    for b in x.blocks:
        _, s, vh = np.linalg.svd(b)
        v = vh.conj().T
        blocks.append((v * s) @ v.conj().T)
    return Operator(x.algebra, blocks)


def positive_power(x: Operator, p: float, tol=None) -> Operator:
    """x^p for positive x via functional calculus (tiny negative
    eigenvalues from roundoff are clipped to zero)."""
    tol = resolve_tol(tol)
    if not x.is_positive(tol):
        raise NotPositiveError("positive_power needs a positive operator")
    blocks = []
    for b in x.blocks:
        lam, vecs = np.linalg.eigh((b + b.conj().T) / 2.0)
        lam = np.clip(lam, 0.0, None)
        blocks.append((vecs * lam ** p) @ vecs.conj().T)
    return Operator(x.algebra, blocks)


def spectral_projection(x: Operator, lower=None, upper=None,
                        closed_lower=True, closed_upper=True,
                        tol=None) -> Projection:
    """Projection onto the eigenvalues of Hermitian x inside an interval.

    None endpoints mean -inf / +inf.  Endpoint membership follows the
    closed_* flags; interval tests use the clustered eigenvalues.
    """
    dec = eigh(x, tol)

    def inside(lam):
        if lower is not None:
            if closed_lower and lam < lower:
                return False
            if not closed_lower and lam <= lower:
                return False
        if upper is not None:
            if closed_upper and lam > upper:
                return False
            if not closed_upper and lam >= upper:
                return False
        return True

    return dec.projection_where(inside)


@dataclass
class CutoffCertificate:
    """Operator-order check x <= x_eps + eps^(1-p) x^p."""

    residual_min_eig: float
    satisfied: bool
    eps: float
    p: float


def spectral_cutoff(x: Operator, eps: float, p: float, tol=None):
    """Truncate positive x at level eps and certify the order bound.

    Returns (x_eps, certificate) where x_eps keeps the spectral part of
    x with eigenvalues in [0, eps] (left-closed convention) and the
    certificate verifies x - x_eps - eps^(1-p) x^p <= tol in operator
    order, i.e. the smallest eigenvalue of the majorant minus x is
    >= -tol.
    """
    tol = resolve_tol(tol)
    if eps <= 0:
        raise ValueError("cutoff level must be positive")
    if p < 1:
        raise ValueError("exponent must satisfy p >= 1")
    if not x.is_positive(tol):
        raise NotPositiveError("spectral_cutoff needs a positive operator")

    dec = eigh(x, tol)
    x_eps = dec.apply(lambda lam: lam if lam <= eps else 0.0)
    majorant = x_eps + positive_power(x, p) * (eps ** (1.0 - p)) - x
    min_eig = min(float(np.linalg.eigvalsh((b + b.conj().T) / 2.0)[0])
                  for b in majorant.blocks)
    return x_eps, CutoffCertificate(min_eig, min_eig >= -tol, eps, p)


def truncate_hermitian(x: Operator, level: float, tol=None) -> Operator:
    """Spectral restriction of Hermitian x to eigenvalues in [-level, level]
    (eigenvalues outside are dropped, not clipped)."""
    dec = eigh(x, tol)
    return dec.apply(lambda lam: lam if abs(lam) <= level else 0.0)


def projection_complement(e: Projection) -> Projection:
    return e.complement()


def projection_meet(e: Projection, f: Projection,
                    kernel_tol=MEET_KERNEL_TOL) -> Projection:
    """Projection onto range(e) intersect range(f).

    Computed as the kernel of e_perp + f_perp: eigenvectors with
    eigenvalue below kernel_tol span the intersection.  This is the
    numerically robust equivalent of intersecting ranges directly.
    """
    if e.algebra != f.algebra:
        raise ValueError("projections live in different algebras")
    obstruction = e.complement().operator + f.complement().operator
    bases = []
    for i, d in enumerate(e.algebra.dims):
        b = obstruction.block(i)
        lam, vecs = np.linalg.eigh((b + b.conj().T) / 2.0)
        keep = lam <= kernel_tol
        bases.append(vecs[:, keep])
    return Projection.from_basis(e.algebra, bases)


def projection_meet_all(projections, kernel_tol=MEET_KERNEL_TOL) -> Projection:
    """Meet of a non-empty family, folded pairwise."""
    projections = list(projections)
    if not projections:
        raise ValueError("need at least one projection")
    out = projections[0]
    for f in projections[1:]:
        out = projection_meet(out, f, kernel_tol)
    return out
