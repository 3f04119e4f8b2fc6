"""Randomized search for counterexamples to the null-aware uncertainty bound.

For a pure state on A x B x E and a pair of POVMs on A with designated null
elements, the bound says Eve's guessing probability for Z satisfies

    p_guess(Z|E) <= (sqrt(pZ) + sqrt(pX) + sqrt(1 - pX) sqrt(c<) F)^2

where ``F = max_sigma sum_x F(rho_B^x, sigma)`` over the informative X
outcomes. The search finds *lower* bounds on ``p_guess`` and *lower* bounds
on ``F``, so a flagged instance is only a candidate until ``F`` is confirmed
by a semidefinite program. Passing runs do not certify the bound.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..operators import fidelity, haar_unitary, random_density, random_povm
from .config import DEFAULT_SEED

TOL = 1e-9
SEARCH_NOTE = (
    "Eve's guessing probability is lower-bounded by a fixed-point search over "
    "measurements (two-outcome Z uses the exact Helstrom value); the test can "
    "falsify the bound but never certify it"
)


def _dag(a):
    return np.conj(np.swapaxes(a, -1, -2))


def _herm(a):
    return 0.5 * (a + _dag(a))


def _psd_sqrt(a):
    w, v = np.linalg.eigh(_herm(a))
    return (v * np.sqrt(np.clip(w, 0, None))[..., None, :]) @ _dag(v)


def _pinv_sqrt(a, tol=1e-12):
    w, v = np.linalg.eigh(_herm(a))
    good = w > tol
    inv = np.where(good, 1 / np.sqrt(np.where(good, w, 1)), 0.0)
    return (v * inv[..., None, :]) @ _dag(v), (v * (~good)[..., None, :]) @ _dag(v)


# Batched quantities ------------------------------------------------------------


def overlap_restricted_batch(x_inf: np.ndarray, z_inf: np.ndarray) -> np.ndarray:
    """``max_{x,z} ||sqrt(X_x) sqrt(Z_z)||_op^2`` for stacks (n, k, d, d)."""
    sx, sz = _psd_sqrt(x_inf), _psd_sqrt(z_inf)
    prod = sx[:, :, None] @ sz[:, None, :]
    s = np.linalg.svd(prod, compute_uv=False)[..., 0]
    return (s**2).reshape(s.shape[0], -1).max(axis=1)


def conditional_b_states(psi: np.ndarray, x_inf: np.ndarray) -> np.ndarray:
    """``Tr_AE[(X_x (x) I) psi]`` for every informative X element."""
    return np.einsum("nxca,nabe,ncfe->nxbf", x_inf, psi, psi.conj())


def eve_states(psi: np.ndarray, z_all: np.ndarray) -> np.ndarray:
    """``Tr_AB[(Z_z (x) I) psi]`` for every Z element, null included."""
    return np.einsum("nzca,nabe,ncbf->nzef", z_all, psi, psi.conj())


def fidelity_sum_lower(rhos: np.ndarray, iters: int = 300) -> np.ndarray:
    """Lower bound on ``max_sigma sum_x ||sqrt(rho_x) sqrt(sigma)||_1``.

    Alternates between the optimal unitaries of the trace norms and the
    optimal ``sqrt(sigma)``; each step cannot decrease the objective.
    """
    n, _, d, _ = rhos.shape
    sr = _psd_sqrt(rhos)
    tau = np.broadcast_to(np.eye(d) / math.sqrt(d), (n, d, d)).astype(complex)
    best = np.zeros(n)
    for it in range(iters):
        w, s, vh = np.linalg.svd(sr @ tau[:, None])
        val = s.sum(axis=(1, 2))
        if it % 10 == 0 and it and np.max(val - best) < 1e-13:
            best = np.maximum(best, val)
            break
        best = np.maximum(best, val)
        m = (_dag(vh) @ _dag(w) @ sr).sum(axis=1)
        ev, vec = np.linalg.eigh(_herm(m))
        ev = np.clip(ev, 0, None)
        norm = np.linalg.norm(ev, axis=-1)
        norm = np.where(norm > 0, norm, 1.0)
        tau = (vec * (ev / norm[:, None])[..., None, :]) @ _dag(vec)
    s = np.linalg.svd(sr @ tau[:, None], compute_uv=False)
    return np.maximum(best, s.sum(axis=(1, 2)))


def fidelity_sum_sdp(rhos: np.ndarray) -> float:
    """``max_sigma sum_x F(rho_x, sigma)`` by semidefinite programming."""
    import cvxpy as cp

    k, d, _ = rhos.shape
    sigma = cp.Variable((d, d), hermitian=True)
    xs = [cp.Variable((d, d), complex=True) for _ in range(k)]
    cons = [sigma >> 0, cp.real(cp.trace(sigma)) == 1]
    for r, x in zip(rhos, xs):
        cons.append(cp.bmat([[_herm(r), x], [x.H, sigma]]) >> 0)
    prob = cp.Problem(cp.Maximize(sum(cp.real(cp.trace(x)) for x in xs)), cons)
    prob.solve(solver=cp.CLARABEL)
    if prob.status not in ("optimal", "optimal_inaccurate"):
        raise RuntimeError(f"fidelity SDP ended with status {prob.status}")
    return float(prob.value)


def guess_prob(sig: np.ndarray, iters: int = 200) -> tuple:
    """Lower and upper bounds on ``max_Pi sum_z Tr(Pi_z sigma_z)``.

    Two ensembles use the Helstrom formula. Otherwise the search starts from
    the pretty-good measurement and iterates the fixed-point map
    ``Pi_z <- L^-1/2 sigma_z Pi_z sigma_z L^-1/2``; the upper bound is the
    value of a feasible dual point built from the last iterate.
    """
    n, nz, d, _ = sig.shape
    if nz == 2:
        ev = np.linalg.eigvalsh(_herm(sig[:, 0] - sig[:, 1]))
        p = 0.5 * (np.real(np.einsum("nzii->n", sig)) + np.abs(ev).sum(axis=1))
        return p, p
    r, ker = _pinv_sqrt(sig.sum(axis=1))
    pi = r[:, None] @ sig @ r[:, None]
    pi[:, 0] += ker
    best = np.real(np.einsum("nzij,nzji->n", pi, sig))
    for _ in range(iters):
        lam = (sig @ pi @ sig).sum(axis=1)
        r, ker = _pinv_sqrt(lam)
        pi = r[:, None] @ sig @ pi @ sig @ r[:, None]
        pi[:, 0] += ker
        best = np.maximum(best, np.real(np.einsum("nzij,nzji->n", pi, sig)))
    g = _herm((sig @ pi).sum(axis=1))
    gap = np.linalg.eigvalsh(sig - g[:, None])[..., -1].max(axis=1)
    upper = np.real(np.einsum("nii->n", g)) + d * np.maximum(gap, 0.0)
    return best, np.maximum(upper, best)


# Instance generation -------------------------------------------------------------


def _haar_state(rng, dims) -> np.ndarray:
    g = rng.standard_normal(dims) + 1j * rng.standard_normal(dims)
    return g / np.linalg.norm(g)


def _structured_state(rng, dims) -> np.ndarray:
    da, db, de = dims
    m = min(da, db)
    phi = np.zeros(dims, dtype=complex)
    for k in range(m):
        phi[k, k, 0] = 1 / math.sqrt(m)
    kappa = rng.uniform(0.0, 0.3)
    psi = math.sqrt(1 - kappa) * phi + math.sqrt(kappa) * _haar_state(rng, dims)
    return psi / np.linalg.norm(psi)


def _null_carved(rng, basis: np.ndarray, eps_max: float) -> np.ndarray:
    """Projective measurement in ``basis`` with a rank-one null element carved out."""
    d = basis.shape[0]
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    v /= np.linalg.norm(v)
    null = rng.uniform(0.0, eps_max) * np.outer(v, v.conj())
    root = _psd_sqrt(np.eye(d) - null)
    elems = [root @ np.outer(basis[:, k], basis[:, k].conj()) @ root for k in range(d)]
    return np.stack(elems + [null])


def _random_null_povm(rng, d: int, n_inf: int) -> np.ndarray:
    u = haar_unitary(d, rng)
    null = (u * rng.uniform(0.0, 0.6, d)) @ u.conj().T
    rank = 1 if n_inf >= d else None
    elems = random_povm(d, n_inf, rng, rank=rank, total=np.eye(d) - null)
    return np.stack(list(elems) + [null])


@dataclass(frozen=True)
class InstanceBatch:
    psi: np.ndarray
    z: np.ndarray  # (n, nz+1, d, d), null last
    x: np.ndarray  # (n, nx+1, d, d), null last


@dataclass
class BatchResult:
    p_z: np.ndarray
    p_x: np.ndarray
    c_less: np.ndarray
    f_sum: np.ndarray
    bracket: np.ndarray
    p_guess: np.ndarray
    p_guess_upper: np.ndarray

    @property
    def threshold(self) -> np.ndarray:
        """``2^-RHS``: the largest guessing probability the bound allows."""
        return np.minimum(self.bracket, 1.0) ** 2

    @property
    def excess(self) -> np.ndarray:
        return self.p_guess - self.threshold


def evaluate_batch(batch: InstanceBatch, hmax_iters: int = 300, eve_iters: int = 200) -> BatchResult:
    psi, z, x = batch.psi, batch.z, batch.x
    rho_a = np.einsum("nabe,ncbe->nac", psi, psi.conj())
    p_z = np.clip(np.real(np.einsum("nij,nji->n", rho_a, z[:, -1])), 0, 1)
    p_x = np.clip(np.real(np.einsum("nij,nji->n", rho_a, x[:, -1])), 0, 1)
    c = overlap_restricted_batch(x[:, :-1], z[:, :-1])
    kept = 1.0 - p_x
    rhos = conditional_b_states(psi, x[:, :-1]) / np.where(kept > 1e-300, kept, 1.0)[:, None, None, None]
    f_sum = fidelity_sum_lower(rhos, hmax_iters)
    bracket = np.sqrt(p_z) + np.sqrt(p_x) + np.sqrt(kept) * np.sqrt(c) * f_sum
    low, up = guess_prob(eve_states(psi, z), eve_iters)
    return BatchResult(p_z, p_x, c, f_sum, bracket, low, up)


def _make_batch(rng, dims, family: str, n: int, n_z: int, n_x: int) -> InstanceBatch:
    da = dims[0]
    psis, zs, xs = [], [], []
    for _ in range(n):
        if family == "structured":
            psis.append(_structured_state(rng, dims))
            zs.append(_null_carved(rng, np.eye(da), 0.5))
            xs.append(_null_carved(rng, np.fft.fft(np.eye(da)) / math.sqrt(da), 0.5))
        else:
            psis.append(_haar_state(rng, dims))
            zs.append(_random_null_povm(rng, da, n_z))
            xs.append(_random_null_povm(rng, da, n_x))
    return InstanceBatch(np.stack(psis), np.stack(zs), np.stack(xs))


@dataclass(frozen=True)
class FalsifierReport:
    seed: int
    n_instances: int
    n_candidates: int
    n_violations: int
    max_excess: float
    max_p_guess: float
    threshold_at_max_excess: float
    per_group: list = field(default_factory=list)
    violations: list = field(default_factory=list)
    lemma: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.n_violations == 0 and self.lemma.get("failures", 0) == 0

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "search": SEARCH_NOTE,
            "tolerance": TOL,
            "n_instances": self.n_instances,
            "n_candidates": self.n_candidates,
            "n_violations": self.n_violations,
            "max_excess": self.max_excess,
            "max_p_guess": self.max_p_guess,
            "threshold_at_max_excess": self.threshold_at_max_excess,
            "groups": self.per_group,
            "violations": self.violations,
            "lemma_check": self.lemma,
            "passed": self.passed,
        }


def _confirm(batch: InstanceBatch, res: BatchResult, k: int) -> dict | None:
    """Recompute ``F`` exactly for a candidate; return the violation or None."""
    kept = 1.0 - res.p_x[k]
    if kept <= 0:
        return None
    rhos = conditional_b_states(batch.psi[k : k + 1], batch.x[k : k + 1, :-1])[0] / kept
    f_exact = max(fidelity_sum_sdp(rhos), float(res.f_sum[k]))
    bracket = math.sqrt(res.p_z[k]) + math.sqrt(res.p_x[k]) + math.sqrt(kept * res.c_less[k]) * f_exact
    threshold = min(bracket, 1.0) ** 2
    # allow for solver accuracy on top of the stated tolerance
    if res.p_guess[k] > threshold + TOL + 1e-7:
        return {
            "p_guess": float(res.p_guess[k]),
            "threshold": threshold,
            "p_z_null": float(res.p_z[k]),
            "p_x_null": float(res.p_x[k]),
            "c_less": float(res.c_less[k]),
            "fidelity_sum": f_exact,
        }
    return None


def lemma_check(n_trials: int, rng: np.random.Generator, dims=(3, 3)) -> dict:
    """``F(rho, I x sigma) <= F(rho, G x sigma) + F(rho, (I-G) x sigma)`` for projectors ``G``."""
    da, db = dims
    worst = -math.inf
    failures = 0
    for _ in range(n_trials):
        rho = random_density(da * db, rng, rank=int(rng.integers(1, da * db + 1)))
        sigma = random_density(db, rng)
        u = haar_unitary(da, rng)[:, : int(rng.integers(1, da))]
        g = u @ u.conj().T
        lhs = fidelity(rho, np.kron(np.eye(da), sigma))
        rhs = fidelity(rho, np.kron(g, sigma)) + fidelity(rho, np.kron(np.eye(da) - g, sigma))
        worst = max(worst, lhs - rhs)
        failures += lhs > rhs + 1e-10
    return {"n_trials": n_trials, "dims": list(dims), "max_lhs_minus_rhs": worst, "failures": int(failures)}


def bound_falsifier(
    n_states: int,
    dims=((2, 2, 2),),
    n_measurements: int = 1,
    seed: int = DEFAULT_SEED,
    families=("haar", "structured"),
    hmax_iters: int = 300,
    eve_iters: int = 200,
    lemma_trials: int = 200,
) -> FalsifierReport:
    """Random states times random measurement pairs, split evenly over families.

    Haar instances cycle the number of informative outcomes of Z and X through
    ``1..d_A`` so the two-outcome Helstrom branch is exercised.
    """
    rng = np.random.default_rng(seed)
    if isinstance(dims[0], int):
        dims = (tuple(dims),)
    groups, violations = [], []
    n_total = n_cand = 0
    max_excess, max_pg, thr_at = -math.inf, 0.0, 1.0
    for d in dims:
        d = tuple(int(v) for v in d)
        if len(d) != 3 or any(not 1 <= v <= 4 for v in d):
            raise ValueError(f"dims must be three integers in 1..4, got {d}")
        da = d[0]
        for family in families:
            n_fam = n_states // len(families)
            counts = [(da, da)] if family == "structured" else [(a, b) for a in range(1, da + 1) for b in range(1, da + 1)]
            for j, (nz, nx) in enumerate(counts):
                n_here = n_fam // len(counts) + (1 if j < n_fam % len(counts) else 0)
                if n_here == 0:
                    continue
                # one state shared by n_measurements pairs
                batch = _make_batch(rng, d, family, n_here * n_measurements, nz, nx)
                if n_measurements > 1:
                    psi = np.repeat(batch.psi[::n_measurements], n_measurements, axis=0)
                    batch = InstanceBatch(psi, batch.z, batch.x)
                res = evaluate_batch(batch, hmax_iters, eve_iters)
                exc = res.excess
                cand = np.nonzero(exc > TOL)[0]
                n_cand += cand.size
                for k in cand:
                    v = _confirm(batch, res, int(k))
                    if v is not None:
                        v.update(dims=list(d), family=family)
                        violations.append(v)
                k = int(np.argmax(exc))
                if exc[k] > max_excess:
                    max_excess, max_pg, thr_at = float(exc[k]), float(res.p_guess[k]), float(res.threshold[k])
                n_total += exc.size
                groups.append(
                    {
                        "dims": list(d),
                        "family": family,
                        "z_outcomes": nz + 1,
                        "x_outcomes": nx + 1,
                        "n_instances": int(exc.size),
                        "max_excess": float(exc.max()),
                        "max_search_gap": float(np.max(res.p_guess_upper - res.p_guess)),
                    }
                )
    lemma = lemma_check(lemma_trials, rng) if lemma_trials else {}
    return FalsifierReport(seed, n_total, n_cand, len(violations), max_excess, max_pg, thr_at, groups, violations, lemma)
