import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from eurlab.operators import (
    MatrixPovm,
    effective_povm,
    fidelity,
    filtered_state,
    fourier_basis,
    haar_unitary,
    max_overlap_c,
    overlap_cprime,
    projective_povm,
    random_density,
    random_povm,
    restricted_overlap,
    trace_norm,
    validate_povm,
)

seeds = st.integers(0, 2**32 - 1)
dims = st.integers(2, 6)


def comp(d):
    return projective_povm(np.eye(d))


def test_validate_examples():
    assert validate_povm(MatrixPovm(comp(2))).passed
    assert validate_povm(MatrixPovm((np.eye(2) / 2, np.eye(2) / 2))).passed
    rep = validate_povm(MatrixPovm((np.eye(2), np.eye(2))))
    assert not rep.passed
    assert rep.violations[0].invariant == "completeness"
    assert rep.worst_completeness == pytest.approx(1.0)


def test_validate_flags_negative_and_nonhermitian():
    bad = np.array([[1.0, 0.5], [0.0, 0.0]])
    rep = validate_povm(MatrixPovm((bad, np.eye(2) - bad)))
    assert {v.invariant for v in rep.violations} >= {"hermiticity"}
    neg = np.diag([1.5, 0.5])
    rep = validate_povm(MatrixPovm((neg, np.eye(2) - neg)))
    assert "positivity" in {v.invariant for v in rep.violations}


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        MatrixPovm((np.eye(2), np.eye(3)))


def test_fidelity_examples():
    rng = np.random.default_rng(0)
    rho = random_density(3, rng)
    assert fidelity(rho, rho) == pytest.approx(1.0, abs=1e-12)
    p0 = np.diag([1.0, 0.0])
    p1 = np.diag([0.0, 1.0])
    assert fidelity(p0, p1) == pytest.approx(0.0, abs=1e-12)
    plus = np.full((2, 2), 0.5)
    assert fidelity(p0, plus) == pytest.approx(1 / np.sqrt(2), abs=1e-12)


def test_fidelity_rejects_negative():
    with pytest.raises(ValueError):
        fidelity(np.diag([1.0, -0.1]), np.eye(2) / 2)


@given(seeds, dims)
def test_fidelity_symmetric(seed, d):
    rng = np.random.default_rng(seed)
    a, b = random_density(d, rng), 0.5 * random_density(d, rng, rank=1)
    assert abs(fidelity(a, b) - fidelity(b, a)) <= 10 * np.finfo(float).eps * d * 10


def _brute_overlap(xs, zs):
    # independent route: eigendecomposition square roots and operator 2-norm
    def root(e):
        w, v = np.linalg.eigh(e)
        return v @ np.diag(np.sqrt(np.clip(w, 0, None))) @ v.conj().T

    best = 0.0
    for x in xs:
        for z in zs:
            m = root(x) @ root(z)
            best = max(best, np.linalg.norm(m, 2) ** 2)
    return best


def test_overlap_examples():
    assert max_overlap_c(MatrixPovm(comp(2)), MatrixPovm(comp(2))) == pytest.approx(1.0)
    had = projective_povm(fourier_basis(2))
    assert max_overlap_c(MatrixPovm(comp(2)), MatrixPovm(had)) == pytest.approx(0.5)
    assert overlap_cprime(MatrixPovm(comp(2)), MatrixPovm(had)) == pytest.approx(0.5)
    assert overlap_cprime(MatrixPovm(comp(3)), MatrixPovm(comp(3))) == pytest.approx(1.0)


@given(seeds)
def test_overlap_against_brute_force(seed):
    rng = np.random.default_rng(seed)
    x, z = random_povm(4, 3, rng), random_povm(4, 5, rng)
    assert max_overlap_c(MatrixPovm(x), MatrixPovm(z)) == pytest.approx(_brute_overlap(x, z), abs=1e-12)


@given(seeds, dims)
def test_overlap_ordering_and_unitary_invariance(seed, d):
    rng = np.random.default_rng(seed)
    x, z = MatrixPovm(random_povm(d, 3, rng)), MatrixPovm(random_povm(d, 2, rng))
    c = max_overlap_c(x, z)
    assert -1e-12 <= overlap_cprime(x, z) <= c + 1e-9
    assert c <= 1 + 1e-12
    u = haar_unitary(d, rng)
    xu = MatrixPovm(tuple(u @ e @ u.conj().T for e in x.elements))
    zu = MatrixPovm(tuple(u @ e @ u.conj().T for e in z.elements))
    assert max_overlap_c(xu, zu) == pytest.approx(c, abs=1e-10)


@given(seeds)
def test_rank_one_projective_cprime_equals_c(seed):
    rng = np.random.default_rng(seed)
    x = MatrixPovm(projective_povm(haar_unitary(3, rng)))
    z = MatrixPovm(projective_povm(haar_unitary(3, rng)))
    assert overlap_cprime(x, z) == pytest.approx(max_overlap_c(x, z), abs=1e-10)


def test_restricted_overlap_examples():
    p0, p1 = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
    x = MatrixPovm((p0, p1), null_index=1)
    z = MatrixPovm((p1, p0), null_index=1)
    assert restricted_overlap(x, z) == pytest.approx(0.0)
    # qubit MUB embedded in a qutrit, null on the extra level
    e = np.zeros((3, 3))
    e[2, 2] = 1
    comp3 = [np.pad(p, ((0, 1), (0, 1))) for p in (p0, p1)]
    had3 = [np.pad(p, ((0, 1), (0, 1))) for p in projective_povm(fourier_basis(2))]
    x = MatrixPovm(tuple(comp3) + (e,), null_index=2)
    z = MatrixPovm(tuple(had3) + (e,), null_index=2)
    assert restricted_overlap(x, z) == pytest.approx(0.5)
    assert max_overlap_c(x, z) == pytest.approx(1.0)


@given(seeds)
def test_restricted_matches_truncated(seed):
    rng = np.random.default_rng(seed)
    x = random_povm(3, 4, rng)
    z = random_povm(3, 3, rng)
    px, pz = MatrixPovm(x, null_index=0), MatrixPovm(z, null_index=2)
    assert restricted_overlap(px, pz) == pytest.approx(_brute_overlap(x[1:], z[:2]), abs=1e-12)


def test_effective_povm_identity_filter():
    rng = np.random.default_rng(1)
    elems = random_povm(3, 3, rng)
    p = MatrixPovm(tuple(elems) + (np.zeros((3, 3)),), null_index=3)
    eff = effective_povm(p)
    assert eff.dim == 3
    for e_in, e_out in zip(elems, eff.povm.elements):
        assert np.allclose(eff.lift(e_out), e_in, atol=1e-12)


def test_effective_povm_projector_compression():
    proj = np.diag([1.0, 1.0, 0.0])
    elems = (np.diag([1.0, 0, 0]), np.diag([0, 1.0, 0]), np.eye(3) - proj)
    eff = effective_povm(MatrixPovm(elems, null_index=2))
    assert eff.dim == 2
    assert validate_povm(eff.povm).passed
    assert np.allclose(sorted(np.diag(eff.povm.elements[0] + 2 * eff.povm.elements[1]).real), [1, 2])


@given(seeds, dims)
def test_effective_povm_is_povm(seed, d):
    rng = np.random.default_rng(seed)
    null = 0.5 * random_density(d, rng)
    elems = random_povm(d, 3, rng, total=np.eye(d) - null)
    eff = effective_povm(MatrixPovm(tuple(elems) + (null,), null_index=3))
    assert validate_povm(eff.povm).passed


def test_effective_povm_rejects_full_null():
    with pytest.raises(ValueError):
        effective_povm(MatrixPovm((np.zeros((2, 2)), np.eye(2)), null_index=1))


def test_filtered_state_examples():
    rng = np.random.default_rng(3)
    rho = random_density(3, rng)
    p = MatrixPovm((np.eye(3), np.zeros((3, 3))), null_index=1)
    assert np.allclose(filtered_state(rho, p), rho)
    proj = np.diag([1.0, 1.0, 0.0])
    p = MatrixPovm((proj, np.eye(3) - proj), null_index=1)
    expect = proj @ rho @ proj / np.trace(rho @ proj).real
    assert np.allclose(filtered_state(rho, p), expect, atol=1e-12)
    blocked = np.diag([0.0, 0.0, 1.0])
    with pytest.raises(ValueError):
        filtered_state(blocked, p)


def test_trace_norm():
    assert trace_norm(np.diag([1.0, -2.0])) == pytest.approx(3.0)
