"""Null filtering versus effective measurement: numerical check.

Blocking the null outcome with the filter ``sqrt(M)`` and then measuring the
effective POVM on the support of ``M`` must reproduce the statistics of the
original POVM conditioned on a non-null outcome.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..operators import (
    DEFAULT_TOL,
    MatrixPovm,
    effective_povm,
    filtered_state,
    haar_unitary,
    random_density,
    random_povm,
    validate_povm,
)
from .config import DEFAULT_SEED

TOL = 1e-10


def _shared_null(rng, d: int) -> tuple:
    """Eigenvectors and eigenvalues of a random null element.

    Some draws are exactly 0, some have directions of full weight (so the
    effective POVM lives on a proper subspace).
    """
    u = haar_unitary(d, rng)
    lam = rng.uniform(0.0, 0.9, d)
    kind = rng.integers(4)
    if kind == 0:
        lam[:] = 0.0
    elif kind == 1:
        lam[: int(rng.integers(1, d))] = 1.0
    elif kind == 2:
        lam = np.zeros(d)
        lam[0] = rng.uniform(0.1, 0.9)
    return u, lam


def _povm_with_null(rng, u: np.ndarray, lam: np.ndarray) -> MatrixPovm:
    d = lam.size
    n = int(rng.integers(1, d + 2))
    # exact square root of I - N, so blocked directions stay exactly blocked
    root = (u * np.sqrt(1.0 - lam)) @ u.conj().T
    elems = [root @ e @ root for e in random_povm(d, n, rng)]
    null = (u * lam) @ u.conj().T
    return MatrixPovm(tuple(elems) + (null,), null_index=n)


def check_instance(rho: np.ndarray, povms: tuple) -> tuple:
    """Largest probability mismatch and whether every effective POVM is valid."""
    worst, valid = 0.0, True
    for p in povms:
        eff = effective_povm(p)
        valid &= validate_povm(eff.povm).passed
        rho_f = eff.compress(filtered_state(rho, p))
        kept = sum(float(np.real(np.trace(rho @ e))) for e in p.informative)
        for e_orig, e_eff in zip(p.informative, eff.povm.elements):
            lhs = float(np.real(np.trace(rho_f @ e_eff)))
            rhs = float(np.real(np.trace(rho @ e_orig))) / kept
            worst = max(worst, abs(lhs - rhs))
    return worst, valid


@dataclass(frozen=True)
class EquivalenceReport:
    seed: int
    n_trials: int
    dims: tuple
    max_deviation: float
    failures: int
    invalid_povms: int
    skipped_blocked: int
    support_cuts: int

    @property
    def passed(self) -> bool:
        return self.failures == 0 and self.invalid_povms == 0

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "n_trials": self.n_trials,
            "dims": list(self.dims),
            "tolerance": TOL,
            "max_deviation": self.max_deviation,
            "failures": self.failures,
            "invalid_effective_povms": self.invalid_povms,
            "skipped_blocked_states": self.skipped_blocked,
            "reduced_dimension_trials": self.support_cuts,
            "passed": self.passed,
        }


def appendix1_equivalence_check(n_trials: int = 1000, dims=(2, 3, 4, 5, 6), seed: int = DEFAULT_SEED) -> EquivalenceReport:
    """Random states and POVM pairs sharing one null element, cycling through ``dims``."""
    if any(not 1 <= d <= 6 for d in dims):
        raise ValueError("dimensions must lie in 1..6")
    rng = np.random.default_rng(seed)
    worst, failures, invalid, blocked, cuts = 0.0, 0, 0, 0, 0
    for k in range(n_trials):
        d = int(dims[k % len(dims)])
        u, lam = _shared_null(rng, d)
        pair = (_povm_with_null(rng, u, lam), _povm_with_null(rng, u, lam))
        rho = random_density(d, rng, rank=int(rng.integers(1, d + 1)))
        m = np.eye(d) - pair[0].null
        if float(np.real(np.trace(rho @ m))) <= DEFAULT_TOL.prob:
            blocked += 1
            continue
        cuts += effective_povm(pair[0]).dim < d
        dev, ok = check_instance(rho, pair)
        worst = max(worst, dev)
        failures += dev > TOL
        invalid += not ok
    return EquivalenceReport(seed, n_trials, tuple(dims), worst, int(failures), int(invalid), blocked, int(cuts))
