import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from karner import tensor_core as tc
from karner.errors import BadPartition, SingularShift

from oracles import naive_K


def coordinate_family(*diags):
    return tc.ProjectorFamily(len(diags[0]), tuple(np.diag(d).astype(float) for d in diags))


def scalar_model(lam=1.0, h0=2.0, h1=5.0):
    one = tc.ProjectorFamily(1, (np.eye(1),))
    return tc.KarnerModel(1, 1, (lam,), one, one, (np.array([[h0]]), np.array([[h1]])))


@pytest.fixture
def model7():
    return tc.random_model(4, 3, 3, 2, seed=7)


def test_projector_family_rejects_broken_algebra():
    with pytest.raises(ValueError):
        tc.ProjectorFamily(2, (np.diag([1.0, 0.0]), np.diag([1.0, 1.0])))
    with pytest.raises(ValueError):
        tc.ProjectorFamily(2, (np.diag([1.0, 0.0]),))


def test_model_shape_invariants():
    fam = coordinate_family([1, 0], [0, 1])
    with pytest.raises(ValueError):
        tc.KarnerModel(2, 1, (1.0,), fam, fam, (np.eye(1),) * 3)
    with pytest.raises(ValueError):
        tc.KarnerModel(2, 1, (1.0, 2.0), fam, fam, (np.eye(1),) * 2)


def test_assemble_D_examples(model7):
    single = tc.KarnerModel(2, 1, (3.0,), coordinate_family([1, 1]), coordinate_family([1, 1]),
                            (np.eye(1), np.eye(1)))
    assert_allclose(tc.assemble_D(single), 3 * np.eye(2))

    fam = coordinate_family([1, 0], [0, 1])
    m = tc.KarnerModel(2, 1, (1.0, -2.0), fam, fam, (np.eye(1),) * 3)
    assert_allclose(tc.assemble_D(m), np.diag([1.0, -2.0]))

    d = tc.assemble_D(model7)
    for lam, q in zip(model7.lambdas, model7.q_family.members):
        assert_allclose(d @ q, lam * q, atol=1e-13)


def test_assemble_K0_examples(model7):
    assert_allclose(tc.assemble_K0(scalar_model()), [[3.0]])

    fam = coordinate_family([1, 0], [0, 1])
    m = tc.KarnerModel(2, 2, (0.0, 1.0), fam, fam, (np.diag([5.0, 7.0]),) * 3)
    assert_allclose(tc.assemble_K0(m), np.diag([5.0, 7.0, 6.0, 8.0]))
    assert_allclose(tc.assemble_K0(m, z_shift=1j), np.diag([5.0, 7.0, 6.0, 8.0]) - 1j * np.eye(4))

    # spectrum of the Kronecker sum is {lambda_i + mu_j}
    mu = np.linalg.eigvals(model7.h_ops[0])
    expected = np.sort_complex(np.add.outer(np.repeat(model7.lambdas, _block_sizes(model7)), mu).ravel())
    got = np.sort_complex(np.linalg.eigvals(tc.assemble_K0(model7)))
    assert_allclose(got, expected, atol=1e-10)


def _block_sizes(model):
    return [int(round(np.trace(q).real)) for q in model.q_family.members]


def test_assemble_K_examples(model7):
    same = model7.with_h_ops((model7.h_ops[0],) * (model7.N + 1))
    assert_allclose(tc.assemble_K(same), tc.assemble_K0(same), atol=1e-14)

    one = tc.ProjectorFamily(4, (np.eye(4),))
    m = tc.KarnerModel(4, 3, model7.lambdas, model7.q_family, one, model7.h_ops[:2])
    expected = np.kron(tc.assemble_D(m), np.eye(3)) + np.kron(np.eye(4), m.h_ops[1])
    assert_allclose(tc.assemble_K(m), expected)

    assert_allclose(tc.assemble_K(model7), naive_K(model7), atol=1e-14)


def test_assemble_Lambda_examples(model7):
    same = model7.with_h_ops((model7.h_ops[0],) * (model7.N + 1))
    assert np.abs(tc.assemble_Lambda(same, 0.3 + 2j)).max() == 0.0

    assert_allclose(tc.assemble_Lambda(scalar_model(), 1j), [[1 / (6 - 1j) - 1 / (3 - 1j)]])

    z = 0.3 + 2j
    expected = np.zeros((model7.dim, model7.dim), dtype=complex)
    eye = np.eye(model7.dim_H)
    for p, h in zip(model7.p_family.members, model7.h_ops[1:]):
        for lam, q in zip(model7.lambdas, model7.q_family.members):
            a = np.column_stack([np.linalg.solve(h + (lam - z) * eye, e) for e in eye.T])
            b = np.column_stack([np.linalg.solve(model7.h_ops[0] + (lam - z) * eye, e) for e in eye.T])
            expected += np.kron(p @ q, a - b)
    assert_allclose(tc.assemble_Lambda(model7, z), expected, atol=1e-13)


def test_singular_shift_names_offender():
    m = scalar_model(lam=1.0, h0=2.0, h1=5.0)
    with pytest.raises(SingularShift) as info:
        tc.assemble_Lambda(m, 6.0)
    assert (info.value.j, info.value.k) == (1, 1)


def test_karner_resolvent_examples(model7):
    assert_allclose(tc.karner_resolvent(scalar_model(), 1j), [[1 / (6 - 1j)]], rtol=1e-15)
    assert_allclose(tc.direct_resolvent(scalar_model(), 1j), [[1 / (6 - 1j)]], rtol=1e-15)

    z = 0.3 + 2j
    direct = tc.direct_resolvent(model7, z)
    karner = tc.karner_resolvent(model7, z)
    assert np.linalg.norm(karner - direct, 2) / np.linalg.norm(direct, 2) <= 1e-10
    k = tc.assemble_K(model7)
    assert np.linalg.norm((k - z * np.eye(model7.dim)) @ direct - np.eye(model7.dim)) <= 1e-11 * model7.dim


def test_commuting_case_reduces(model7):
    one = tc.ProjectorFamily(4, (np.eye(4),))
    m = tc.KarnerModel(4, 3, model7.lambdas, model7.q_family, one, model7.h_ops[:2])
    z = 2j
    lam = tc.assemble_Lambda(m, z)
    r0 = np.linalg.inv(tc.assemble_K0(m, z))
    assert_allclose(tc.karner_resolvent(m, z), r0 + lam, atol=1e-13)
    assert_allclose(r0 + lam, tc.direct_resolvent(m, z), atol=1e-13)
    rep = tc.verify_karner(m, z, tol=1e-10)
    assert rep.passed and rep.rel_residual < 1e-13


def test_diagonal_direct_resolvent():
    fam = coordinate_family([1, 0], [0, 1])
    m = tc.KarnerModel(2, 2, (0.0, 1.0), fam, fam, (np.diag([5.0, 7.0]),) * 3)
    assert_allclose(tc.direct_resolvent(m, 1j), np.diag(1 / (np.array([5, 7, 6, 8]) - 1j)))


def test_verify_flags_spectrum_hit():
    fam = coordinate_family([1, 0], [0, 1])
    m = tc.KarnerModel(2, 1, (0.0, 1.0), fam, fam, (np.array([[2.0]]),) * 3)
    rep = tc.verify_karner(m, 3.0, tol=1e-9)   # 3 = lambda_2 + h_0 lies in the spectra of K0 and K
    assert tc.Z_IN_SPECTRUM in rep.flags
    assert not rep.passed
    assert np.isnan(rep.rel_residual)


def test_verify_intermediate_examples(model7):
    same = model7.with_h_ops((model7.h_ops[0],) * (model7.N + 1))
    assert tc.verify_intermediate(same, 1j) <= 1e-14   # both sides vanish up to rounding in sum(P_j)
    assert tc.verify_intermediate(scalar_model(), 1j) <= 1e-15
    assert tc.verify_intermediate(model7, 0.3 + 2j) <= 1e-11


def test_random_model_examples():
    m = tc.random_model(4, 3, 2, 2, seed=7, hermitian=True)
    for fam in (m.q_family, m.p_family):
        assert fam.algebra_defect() <= 1e-12 * 4
        for q in fam.members:
            assert_allclose(q, q.conj().T, atol=1e-14)
    assert all(lam.imag == 0 for lam in m.lambdas)

    rank_one = tc.random_model(5, 2, 5, 5, seed=3)
    for q in rank_one.q_family.members:
        assert np.linalg.matrix_rank(q, tol=1e-10) == 1

    a = tc.random_model(6, 4, 3, 4, seed=11)
    b = tc.random_model(6, 4, 3, 4, seed=11)
    assert a.lambdas == b.lambdas
    for x, y in zip(a.q_family.members + a.p_family.members + a.h_ops,
                    b.q_family.members + b.p_family.members + b.h_ops):
        assert np.array_equal(x, y)


def test_random_families_do_not_commute():
    m = tc.random_model(6, 2, 3, 3, seed=5)
    p, q = m.p_family.members[0], m.q_family.members[0]
    assert np.linalg.norm(p @ q - q @ p) > 1e-3


@pytest.mark.parametrize("m_parts,n_parts", [(5, 1), (1, 5), (0, 1)])
def test_bad_partition(m_parts, n_parts):
    with pytest.raises(BadPartition):
        tc.random_model(4, 2, m_parts, n_parts, seed=0)


models = st.builds(
    lambda dt, dh, m, n, seed, herm: tc.random_model(dt, dh, min(m, dt), min(n, dt), seed, herm),
    st.integers(2, 6), st.integers(1, 5), st.integers(1, 4), st.integers(1, 4),
    st.integers(0, 2**31 - 1), st.booleans(),
)
off_axis = st.builds(complex, st.floats(-4, 4), st.sampled_from([-5.0, -3.0, 3.0, 5.0]))


@settings(max_examples=40, deadline=None)
@given(models)
def test_projector_algebra_property(m):
    assert m.q_family.algebra_defect() <= 1e-12 * m.dim_T
    assert m.p_family.algebra_defect() <= 1e-12 * m.dim_T


@settings(max_examples=40, deadline=None)
@given(models, off_axis)
def test_completeness_reduction_property(m, z):
    same = m.with_h_ops((m.h_ops[0],) * (m.N + 1))
    assert np.abs(tc.assemble_Lambda(same, z)).max() == 0.0
    assert_allclose(tc.assemble_K(same), tc.assemble_K0(same), atol=1e-13)


@settings(max_examples=40, deadline=None)
@given(models, off_axis)
def test_oracle_equivalence_property(m, z):
    rep = tc.verify_karner(m, z, tol=1e-9)
    assert rep.passed, rep
    assert tc.verify_intermediate(m, z) <= 1e-11


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 6), st.integers(1, 4), st.integers(1, 4), st.integers(0, 2**31 - 1), off_axis)
def test_commuting_collapse_property(dt, dh, m_parts, seed, z):
    base = tc.random_model(dt, dh, min(m_parts, dt), 1, seed)
    lam = tc.assemble_Lambda(base, z)
    scale = max(1.0, np.linalg.norm(lam, 2))
    assert np.linalg.norm(tc.commutator_with_D(base, lam), 2) <= 1e-12 * scale
    r0 = np.linalg.inv(tc.assemble_K0(base, z))
    assert np.linalg.norm(tc.karner_resolvent(base, z) - (r0 + lam), 2) <= 1e-12 * max(1.0, np.linalg.norm(r0 + lam, 2))


@settings(max_examples=20, deadline=None)
@given(models)
def test_decay_at_infinity(m):
    radii = [10.0, 1e2, 1e3, 1e4]
    k_norm = np.linalg.norm(tc.assemble_K(m), 2)
    k0_norm = np.linalg.norm(tc.assemble_K0(m), 2)
    res = np.array([np.linalg.norm(tc.direct_resolvent(m, 1j * r), 2) for r in radii])
    res0 = np.array([np.linalg.norm(np.linalg.inv(tc.assemble_K0(m, 1j * r)), 2) for r in radii])
    lam = np.array([np.linalg.norm(tc.assemble_Lambda(m, 1j * r), 2) for r in radii])
    for seq in (res, res0, lam):
        assert np.all(np.diff(seq) < 0)
    # resolvents: C fitted at the two largest radii, corrected by the Neumann factor
    for seq, op_norm in ((res, k_norm), (res0, k0_norm)):
        c = max(r * v for r, v in zip(radii[-2:], seq[-2:]))
        for r, v in zip(radii, seq):
            if r > 2 * op_norm:
                assert v <= c / r / (1 - op_norm / r) * (1 + 1e-12)
    # Lambda decays at least like 1/R (in fact like 1/R^2)
    assert np.all(np.array(radii[1:]) * lam[1:] <= radii[0] * lam[0])


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 6), st.integers(1, 5), st.integers(1, 4), st.integers(1, 4),
       st.integers(0, 2**31 - 1), off_axis)
def test_adjoint_symmetry_hermitian(dt, dh, m_parts, n_parts, seed, z):
    m = tc.random_model(dt, dh, min(m_parts, dt), min(n_parts, dt), seed, hermitian=True)
    assert_allclose(tc.direct_resolvent(m, np.conj(z)), tc.direct_resolvent(m, z).conj().T, atol=1e-12)
