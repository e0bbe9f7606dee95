"""Dense complex linear algebra primitives for small Hermitian problems."""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import linalg as sla

from ...errors import DimensionMismatchError, NonHermitianError, ParameterError

logger = logging.getLogger(__name__)

HERMITIAN_RTOL = 1e-12
BASIS_PIVOT_TOL = 1e-8


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce ``a`` to a finite, non-empty, square complex array."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise DimensionMismatchError(
            f"{name} must be a non-empty square matrix, got shape {m.shape}"
        )
    if not np.all(np.isfinite(m)):
        raise ParameterError(f"{name} has non-finite entries")
    return m


def max_norm(a) -> float:
    return float(np.max(np.abs(a)))


def frobenius_norm(a) -> float:
    return float(np.linalg.norm(a, "fro"))


def adjoint(a) -> np.ndarray:
    return np.asarray(a).conj().T


def trace(a) -> complex:
    m = as_matrix(a)
    return complex(np.trace(m))


def multiply(*matrices) -> np.ndarray:
    """Matrix product of one or more square operands, left to right."""
    if not matrices:
        raise DimensionMismatchError("multiply needs at least one operand")
    mats = [as_matrix(m, name=f"operand {i}") for i, m in enumerate(matrices)]
    dim = mats[0].shape[0]
    for i, m in enumerate(mats[1:], start=1):
        if m.shape[0] != dim:
            raise DimensionMismatchError(
                f"operand {i} has dimension {m.shape[0]}, expected {dim}"
            )
    if len(mats) == 1:
        return mats[0].copy()
    if len(mats) == 2:
        return mats[0] @ mats[1]
    return np.linalg.multi_dot(mats)


def commutator(a, b) -> np.ndarray:
    return multiply(a, b) - multiply(b, a)


def require_same_dim(*matrices) -> int:
    dims = {np.asarray(m).shape[0] for m in matrices}
    if len(dims) != 1:
        raise DimensionMismatchError(f"dimension mismatch: {sorted(dims)}")
    return dims.pop()


def hermitian_defect(a) -> float:
    m = np.asarray(a)
    return max_norm(m - m.conj().T)


def check_hermitian(a, name: str = "operator", rtol: float = HERMITIAN_RTOL) -> np.ndarray:
    """Return ``a`` as a complex array, raising if it is not Hermitian.

    The bound is ``rtol * (1 + max|A|)``.
    """
    m = as_matrix(a, name=name)
    defect = hermitian_defect(m)
    bound = rtol * (1.0 + max_norm(m))
    if defect > bound:
        raise NonHermitianError(defect, bound)
    return m


def default_group_tol(eigenvalues: np.ndarray) -> float:
    return 1e-9 * (float(eigenvalues[-1] - eigenvalues[0]) + 1.0)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Degeneracy-grouped eigendecomposition of a Hermitian operator.

    ``basis`` holds orthonormal eigenvectors as columns, grouped by level in
    ascending order; ``labels[i]`` is the level index of column ``i``.
    """

    eigenvalues: np.ndarray
    projectors: Tuple[np.ndarray, ...]
    multiplicities: Tuple[int, ...]
    basis: np.ndarray
    labels: np.ndarray

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def n_levels(self) -> int:
        return len(self.eigenvalues)

    @property
    def basis_energies(self) -> np.ndarray:
        """Energy of every basis vector (level energy repeated by multiplicity)."""
        return self.eigenvalues[self.labels]

    def reconstruct(self) -> np.ndarray:
        return sum(e * p for e, p in zip(self.eigenvalues, self.projectors))


def canonical_subspace_basis(vectors: np.ndarray) -> np.ndarray:
    """Orthonormal basis of span(vectors) fixed by lexicographic pivoting.

    Columns are Gram-Schmidt orthonormalized images ``P e_j`` of the standard
    basis vectors, taken in index order, so the result depends only on the
    subspace and not on the eigensolver's arbitrary rotation inside it.
    """
    k = vectors.shape[1]
    projector = vectors @ vectors.conj().T
    chosen = []
    for j in range(projector.shape[0]):
        v = projector[:, j].copy()
        for _ in range(2):
            for c in chosen:
                v -= c * np.vdot(c, v)
        norm = np.linalg.norm(v)
        if norm > BASIS_PIVOT_TOL:
            chosen.append(v / norm)
        if len(chosen) == k:
            return np.column_stack(chosen)
    logger.warning("Lexicographic pivoting found %s of %s vectors", len(chosen), k)
    return vectors


def eig_hermitian(a, group_tol: Optional[float] = None) -> SpectralDecomposition:
    """Eigendecompose a Hermitian operator, merging near-degenerate levels.

    Args:
        a: Hermitian matrix
        group_tol: Eigenvalues within this of a level's lowest member join that level
            (default ``1e-9 * (e_max - e_min + 1)``)

    Returns:
        SpectralDecomposition with strictly increasing level energies
    """
    m = check_hermitian(a)
    values, vectors = sla.eigh(0.5 * (m + m.conj().T))
    if group_tol is None:
        group_tol = default_group_tol(values)

    groups = [[0]]
    for i in range(1, len(values)):
        if values[i] - values[groups[-1][0]] > group_tol:
            groups.append([i])
        else:
            groups[-1].append(i)

    levels, projectors, multiplicities, columns, labels = [], [], [], [], []
    for n, group in enumerate(groups):
        vecs = vectors[:, group]
        if len(group) > 1:
            vecs = canonical_subspace_basis(vecs)
        levels.append(float(np.mean(values[group])))
        projectors.append(vecs @ vecs.conj().T)
        multiplicities.append(len(group))
        columns.append(vecs)
        labels.extend([n] * len(group))

    return SpectralDecomposition(
        eigenvalues=np.array(levels),
        projectors=tuple(projectors),
        multiplicities=tuple(multiplicities),
        basis=np.hstack(columns),
        labels=np.array(labels, dtype=int),
    )


def expm_hermitian_shifted(
    a, scale: complex, spectrum: Optional[SpectralDecomposition] = None
) -> Tuple[np.ndarray, float]:
    """Return ``(M, shift)`` with ``exp(scale * A) = M * exp(shift)``.

    ``shift`` is the largest real part of ``scale * eigenvalue`` so that
    every entry of ``M`` is bounded by one.
    """
    if spectrum is None:
        m = check_hermitian(a)
        values, vectors = sla.eigh(0.5 * (m + m.conj().T))
    else:
        values, vectors = spectrum.basis_energies, spectrum.basis
    exponents = complex(scale) * values
    shift = float(np.max(exponents.real))
    factors = np.exp(exponents - shift)
    return (vectors * factors) @ vectors.conj().T, shift


def expm_hermitian(
    a, scale: complex, spectrum: Optional[SpectralDecomposition] = None
) -> np.ndarray:
    """Matrix exponential ``exp(scale * A)`` through the spectral theorem."""
    scaled, shift = expm_hermitian_shifted(a, scale, spectrum=spectrum)
    if shift == 0.0:
        return scaled
    return scaled * np.exp(shift)


def unitarity_defect(u) -> float:
    m = np.asarray(u)
    return max_norm(m.conj().T @ m - np.eye(m.shape[0]))
