"""Finite-dimensional operator algebra for POVMs and states.

Operators are plain complex ``numpy`` arrays. A :class:`MatrixPovm` bundles a
list of same-sized elements with an optional index marking the null (out of
range) outcome.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class Tolerances:
    herm: float = 1e-9
    sum: float = 1e-9
    psd: float = 1e-9
    supp: float = 1e-10
    prob: float = 1e-12


DEFAULT_TOL = Tolerances()


def dag(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def hermitize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + dag(a))


def psd_sqrt(a: np.ndarray, tol: float = DEFAULT_TOL.psd) -> np.ndarray:
    """Square root of a (stack of) positive semidefinite matrices.

    Eigenvalues down to ``-tol`` are clipped to zero; anything more negative
    raises ``ValueError``.
    """
    w, v = np.linalg.eigh(hermitize(a))
    if np.any(w < -tol):
        raise ValueError(f"matrix not positive semidefinite (min eigenvalue {w.min():.3e})")
    w = np.sqrt(np.clip(w, 0.0, None))
    return (v * w[..., None, :]) @ dag(v)


def op_norm(a: np.ndarray) -> float:
    """Largest singular value."""
    return float(np.linalg.norm(a, ord=2))


def trace_norm(a: np.ndarray) -> float:
    return float(np.sum(np.linalg.svd(a, compute_uv=False)))


@dataclass(frozen=True)
class MatrixPovm:
    elements: tuple
    null_index: int | None = None

    def __post_init__(self):
        elems = tuple(np.asarray(e, dtype=complex) for e in self.elements)
        if not elems:
            raise ValueError("POVM needs at least one element")
        shapes = {e.shape for e in elems}
        if len(shapes) != 1:
            raise ValueError(f"POVM elements have mismatched shapes: {sorted(shapes)}")
        (shape,) = shapes
        if len(shape) != 2 or shape[0] != shape[1]:
            raise ValueError(f"POVM elements must be square, got {shape}")
        if self.null_index is not None and not -len(elems) <= self.null_index < len(elems):
            raise ValueError(f"null_index {self.null_index} out of range")
        object.__setattr__(self, "elements", elems)
        if self.null_index is not None and self.null_index < 0:
            object.__setattr__(self, "null_index", self.null_index + len(elems))

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    def __len__(self) -> int:
        return len(self.elements)

    @property
    def informative(self) -> tuple:
        """Elements other than the null element."""
        return tuple(e for i, e in enumerate(self.elements) if i != self.null_index)

    @property
    def null(self) -> np.ndarray | None:
        return None if self.null_index is None else self.elements[self.null_index]

    def probabilities(self, rho: np.ndarray) -> np.ndarray:
        return np.array([np.real(np.trace(rho @ e)) for e in self.elements])


@dataclass(frozen=True)
class Violation:
    invariant: str
    magnitude: float
    tolerance: float


@dataclass(frozen=True)
class PovmReport:
    passed: bool
    violations: tuple
    worst_hermiticity: float
    min_eigenvalue: float
    worst_completeness: float
    notes: tuple = field(default_factory=tuple)

    def describe(self) -> str:
        if self.passed:
            return "POVM valid"
        return "; ".join(
            f"{v.invariant} violated: deviation {v.magnitude:.3e} > tolerance {v.tolerance:.1e}"
            for v in self.violations
        )


def validate_povm(p: MatrixPovm, tol: Tolerances = DEFAULT_TOL) -> PovmReport:
    """Check hermiticity, positivity and completeness of every element."""
    elems = np.stack(p.elements)
    if not np.all(np.isfinite(elems)):
        v = Violation("finite", float("inf"), 0.0)
        return PovmReport(False, (v,), float("nan"), float("nan"), float("nan"))
    herm = float(np.max(np.abs(elems - dag(elems))))
    min_eig = float(np.min(np.linalg.eigvalsh(hermitize(elems))))
    compl = float(np.max(np.abs(elems.sum(axis=0) - np.eye(p.dim))))
    violations = []
    if herm > tol.herm:
        violations.append(Violation("hermiticity", herm, tol.herm))
    if min_eig < -tol.psd:
        violations.append(Violation("positivity", -min_eig, tol.psd))
    if compl > tol.sum:
        violations.append(Violation("completeness", compl, tol.sum))
    return PovmReport(not violations, tuple(violations), herm, min_eig, compl)


def check_density(rho: np.ndarray, tol: Tolerances = DEFAULT_TOL, trace_tol: float = 1e-9) -> np.ndarray:
    """Return ``rho`` as a complex array after checking it is a normalized state."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density operator must be square, got {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise ValueError("density operator has non-finite entries")
    if np.max(np.abs(rho - dag(rho))) > tol.herm:
        raise ValueError("density operator is not Hermitian")
    if np.linalg.eigvalsh(hermitize(rho)).min() < -tol.psd:
        raise ValueError("density operator is not positive semidefinite")
    if abs(np.trace(rho).real - 1.0) > trace_tol:
        raise ValueError(f"density operator has trace {np.trace(rho).real:.12g}")
    return rho


def fidelity(rho: np.ndarray, sigma: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> float:
    """Fidelity ``Tr sqrt(sqrt(sigma) rho sqrt(sigma))`` of two PSD operators.

    Evaluated as the trace norm of ``sqrt(rho) sqrt(sigma)``. Neither argument
    needs unit trace.
    """
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    if rho.shape != sigma.shape:
        raise ValueError(f"shape mismatch {rho.shape} vs {sigma.shape}")
    return trace_norm(psd_sqrt(rho, tol.psd) @ psd_sqrt(sigma, tol.psd))


def _same_dim(x: MatrixPovm, z: MatrixPovm) -> None:
    if x.dim != z.dim:
        raise ValueError(f"POVMs act on different dimensions ({x.dim} vs {z.dim})")


def _pairwise_overlap(xs: Sequence[np.ndarray], zs: Sequence[np.ndarray]) -> float:
    if not xs or not zs:
        return 0.0
    sx = psd_sqrt(np.stack(xs))
    sz = psd_sqrt(np.stack(zs))
    prods = sx[:, None] @ sz[None, :]
    s = np.linalg.svd(prods, compute_uv=False)
    return float(np.max(s[..., 0]) ** 2)


def max_overlap_c(x: MatrixPovm, z: MatrixPovm) -> float:
    """Largest squared singular value of ``sqrt(X_x) sqrt(Z_z)`` over all pairs."""
    _same_dim(x, z)
    return _pairwise_overlap(x.elements, z.elements)


def overlap_cprime(x: MatrixPovm, z: MatrixPovm) -> float:
    """The sandwiched overlap ``min{max_x ||sum_z Z X Z||, max_z ||sum_x X Z X||}``."""
    _same_dim(x, z)
    zs = np.stack(z.elements)
    xs = np.stack(x.elements)
    by_x = max(op_norm(np.sum(zs @ xe @ zs, axis=0)) for xe in xs)
    by_z = max(op_norm(np.sum(xs @ ze @ xs, axis=0)) for ze in zs)
    return min(by_x, by_z)


def restricted_overlap(x: MatrixPovm, z: MatrixPovm) -> float:
    """Maximum overlap with both null elements left out of the maximization."""
    _same_dim(x, z)
    return _pairwise_overlap(x.informative, z.informative)


@dataclass(frozen=True)
class EffectivePovm:
    """A POVM compressed onto the support of ``M = I - N``.

    ``basis`` holds the kept eigenvectors of ``M`` as columns, so an operator
    on the full space maps to the reduced space as ``basis^dag op basis``.
    """

    povm: MatrixPovm
    basis: np.ndarray
    kept_eigenvalues: np.ndarray
    dropped_eigenvalues: np.ndarray

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def support_cut_exercised(self) -> bool:
        # dropped eigenvalues that are not plain round-off
        return bool(np.any(np.abs(self.dropped_eigenvalues) > 1e3 * np.finfo(float).eps))

    def compress(self, op: np.ndarray) -> np.ndarray:
        return dag(self.basis) @ op @ self.basis

    def lift(self, op: np.ndarray) -> np.ndarray:
        return self.basis @ op @ dag(self.basis)


def support_filter(p: MatrixPovm) -> np.ndarray:
    """``M``, the sum of the non-null elements."""
    if p.null_index is None:
        raise ValueError("POVM has no designated null element")
    return hermitize(np.sum(np.stack(p.informative), axis=0))


def effective_povm(p: MatrixPovm, tol: Tolerances = DEFAULT_TOL) -> EffectivePovm:
    """Drop the null element and renormalize the rest on the support of ``M``.

    Each kept element becomes ``M_s^{-1/2} (P_n)_s M_s^{-1/2}`` where ``_s``
    denotes restriction to the eigenvectors of ``M`` with eigenvalue above
    ``tol.supp``.
    """
    m = support_filter(p)
    w, v = np.linalg.eigh(m)
    keep = w > tol.supp
    if not np.any(keep):
        raise ValueError("M = I - N vanishes: the null element covers the whole space")
    basis = v[:, keep]
    inv_sqrt = 1.0 / np.sqrt(w[keep])
    reduced = []
    for e in p.informative:
        r = inv_sqrt[:, None] * (dag(basis) @ e @ basis) * inv_sqrt[None, :]
        reduced.append(hermitize(r))
    return EffectivePovm(MatrixPovm(tuple(reduced)), basis, w[keep], w[~keep])


def filtered_state(rho: np.ndarray, p: MatrixPovm, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """State after a filter that blocks the null outcome: ``sqrt(M) rho sqrt(M) / Tr(rho M)``."""
    rho = check_density(rho, tol)
    m = support_filter(p)
    if m.shape != rho.shape:
        raise ValueError(f"state shape {rho.shape} does not match POVM dimension {p.dim}")
    pass_prob = float(np.real(np.trace(rho @ m)))
    if pass_prob <= tol.prob:
        raise ValueError(f"state is fully blocked by the filter (Tr(rho M) = {pass_prob:.3e})")
    sm = psd_sqrt(m, tol.psd)
    return hermitize(sm @ rho @ sm) / pass_prob


# Random test objects -------------------------------------------------------


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(g)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ dag(g)
    return rho / np.trace(rho).real


def random_povm(
    dim: int,
    n_outcomes: int,
    rng: np.random.Generator,
    rank: int | None = None,
    total: np.ndarray | None = None,
) -> tuple:
    """Random POVM elements from normalized Wishart matrices.

    With ``total`` given the elements sum to that operator instead of the
    identity (it must be PSD).
    """
    rank = dim if rank is None else rank
    g = rng.standard_normal((n_outcomes, dim, rank)) + 1j * rng.standard_normal((n_outcomes, dim, rank))
    w = g @ dag(g)
    s = hermitize(w.sum(axis=0))
    ev, vec = np.linalg.eigh(s)
    s_inv_sqrt = (vec / np.sqrt(ev)) @ dag(vec)
    elems = s_inv_sqrt @ w @ s_inv_sqrt
    if total is not None:
        t = psd_sqrt(total)
        elems = t @ elems @ t
    return tuple(hermitize(e) for e in elems)


def projective_povm(basis: np.ndarray) -> tuple:
    """Rank-one projectors onto the columns of ``basis``."""
    return tuple(np.outer(basis[:, k], np.conj(basis[:, k])) for k in range(basis.shape[1]))


def fourier_basis(dim: int) -> np.ndarray:
    k = np.arange(dim)
    return np.exp(2j * np.pi * np.outer(k, k) / dim) / np.sqrt(dim)
