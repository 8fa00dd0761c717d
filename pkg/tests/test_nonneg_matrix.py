import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from conftest import SYM, nonneg_matrices, spectral_radius_oracle
from fixpoint.errors import BadRightHandSide, InvalidInput, InvalidTolerance, NotNormal, Undecided
from fixpoint.nonneg_matrix import (
    NonnegativeMatrix,
    characterize,
    decide_normality,
    is_admissible,
    is_asymptotic,
    is_normal_matkowski,
    leading_minors,
    matkowski_eliminate,
    neumann_inverse,
    normality_certificate,
    nu_bracket,
    nu_estimate,
    pivots_from_minors,
    spectral_radius,
    witness_lambda,
)

I2 = np.eye(2)
Z2 = np.zeros((2, 2))


# ---------------------------------------------------------------- the matrix type

class TestNonnegativeMatrix:
    def test_rejects_negative_entries(self):
        with pytest.raises(InvalidInput):
            NonnegativeMatrix([[0.1, -0.1], [0.0, 0.0]])

    def test_rejects_non_finite(self):
        with pytest.raises(InvalidInput):
            NonnegativeMatrix([[np.inf]])
        with pytest.raises(InvalidInput):
            NonnegativeMatrix([[np.nan]])

    def test_rejects_non_square_and_empty(self):
        with pytest.raises(InvalidInput):
            NonnegativeMatrix([[0.1, 0.2]])
        with pytest.raises(InvalidInput):
            NonnegativeMatrix(np.zeros((0, 0)))

    def test_entries_are_read_only(self):
        M = NonnegativeMatrix(SYM)
        with pytest.raises(ValueError):
            M.entries[0, 0] = 3.0

    def test_input_is_copied(self):
        a = SYM.copy()
        M = NonnegativeMatrix(a)
        a[0, 0] = 9.0
        assert M.entries[0, 0] == 0.5

    def test_constructors_and_perturb(self):
        assert np.array_equal(NonnegativeMatrix.identity(3).entries, np.eye(3))
        assert np.array_equal(NonnegativeMatrix.zeros(2).entries, Z2)
        P = NonnegativeMatrix(SYM).perturb(0.01)
        assert np.allclose(P.entries, SYM + 0.01)

    def test_json_round_trip(self):
        M = NonnegativeMatrix(SYM)
        d = M.to_dict()
        assert d == {"n": 2, "rows": [[0.5, 0.25], [0.25, 0.5]]}
        assert NonnegativeMatrix.from_dict(d) == M
        assert hash(NonnegativeMatrix.from_dict(d)) == hash(M)


# ---------------------------------------------------------------- elimination

class TestElimination:
    def test_zero_matrix_pivots(self):
        t = matkowski_eliminate(Z2)
        assert t.pivots == (1.0, 1.0)
        for stage in t.stages:
            off = stage - np.diag(np.diag(stage))
            assert not off.any()

    def test_identity_stops_at_first_stage(self):
        t = matkowski_eliminate(I2)
        assert t.pivots == (0.0,)
        assert len(t.stages) == 1
        assert not t.complete

    def test_symmetric_example(self):
        t = matkowski_eliminate(SYM)
        assert t.pivots[0] == 0.5
        assert t.pivots[1] == pytest.approx(0.5 * 0.5 - 0.25 * 0.25, abs=1e-15)
        # oracle: the last pivot of a 2x2 equals det(I - A)
        assert t.pivots[1] == pytest.approx(np.linalg.det(np.eye(2) - SYM), abs=1e-15)

    def test_first_stage_is_transform(self, tripled02):
        t = matkowski_eliminate(tripled02)
        a = tripled02.entries
        expect = a.copy()
        np.fill_diagonal(expect, 1.0 - np.diag(a))
        assert np.array_equal(t.stages[0], expect)
        assert np.array_equal(t.sigma[0], np.ones(3))

    def test_recursion_by_hand_3x3(self):
        a = np.array([[0.1, 0.2, 0.3], [0.0, 0.2, 0.1], [0.4, 0.1, 0.3]])
        t = matkowski_eliminate(a)
        s0 = t.stages[0]
        p = s0[0, 0]
        # diagonal update subtracts, off-diagonal update adds magnitudes
        assert t.stages[1][0, 0] == pytest.approx(p * s0[1, 1] - s0[1, 0] * s0[0, 1])
        assert t.stages[1][0, 1] == pytest.approx(p * s0[1, 2] + s0[1, 0] * s0[0, 2])
        assert t.stages[1][1, 0] == pytest.approx(p * s0[2, 1] + s0[2, 0] * s0[0, 1])
        assert t.sigma[1][0] == pytest.approx(p * 1.0 + s0[1, 0] * 1.0)

    def test_bad_rhs_shape(self):
        with pytest.raises(InvalidInput):
            matkowski_eliminate(SYM, y=[1.0, 1.0, 1.0])

    def test_unscaled_pivots_follow_minor_products(self):
        rng = np.random.default_rng(5)
        for n in (2, 3, 4, 5):
            a = rng.random((n, n)) * 0.3 / n
            piv = matkowski_eliminate(a).pivots
            pred = pivots_from_minors(leading_minors(a))
            assert np.allclose(piv, pred, rtol=1e-10, atol=0)

    def test_pivot_differs_from_minor_beyond_two(self):
        a = np.full((3, 3), 0.1)
        piv = matkowski_eliminate(a).pivots
        minors = leading_minors(a)
        assert piv[:2] == pytest.approx(minors[:2])
        assert piv[2] != pytest.approx(minors[2])

    @settings(max_examples=150, deadline=None)
    @given(nonneg_matrices())
    def test_off_diagonal_stays_nonnegative(self, a):
        for scale in (False, True):
            for stage in matkowski_eliminate(a, scale=scale).stages:
                off = stage - np.diag(np.diag(stage))
                assert np.all(off >= 0)

    @settings(max_examples=150, deadline=None)
    @given(nonneg_matrices())
    def test_scaling_preserves_pivot_signs(self, a):
        raw = matkowski_eliminate(a).pivots
        sc = matkowski_eliminate(a, scale=True).pivots
        assert len(raw) == len(sc) or any(p <= 0 for p in raw) or any(p <= 0 for p in sc)
        for p, q in zip(raw, sc):
            if abs(p) > 1e-200:
                assert np.sign(p) == np.sign(q)


class TestPredicates:
    def test_matkowski_examples(self, tripled02):
        assert is_normal_matkowski(Z2)
        assert not is_normal_matkowski(I2)
        assert is_normal_matkowski(tripled02)

    def test_leading_minors_examples(self, coupled08):
        assert leading_minors(SYM) == pytest.approx((0.5, 0.1875), abs=1e-15)
        assert leading_minors(np.zeros((5, 5))) == pytest.approx((1.0,) * 5)
        assert leading_minors(coupled08) == pytest.approx((0.6, 0.2), abs=1e-15)

    def test_leading_minors_against_numpy(self):
        rng = np.random.default_rng(2)
        for n in range(1, 8):
            a = rng.random((n, n))
            m = np.eye(n) - a
            expect = [np.linalg.det(m[:i, :i]) for i in range(1, n + 1)]
            got = leading_minors(a)
            assert all(isinstance(v, float) for v in got)
            assert np.allclose(got, expect, rtol=1e-9, atol=1e-12)

    def test_admissible_examples(self):
        assert is_admissible(Z2)
        assert not is_admissible([[1.2]])
        assert leading_minors([[1.2]])[0] == pytest.approx(-0.2)
        assert is_admissible(SYM)

    @settings(max_examples=200, deadline=None)
    @given(nonneg_matrices(max_value=0.6))
    def test_pivot_and_minor_signs_agree(self, a):
        minors = leading_minors(a)
        assume(min(abs(m) for m in minors) > 1e-9)
        assert is_normal_matkowski(a) == is_admissible(a)


# ---------------------------------------------------------------- certificates

class TestCertificate:
    def test_scalar(self):
        v = normality_certificate([[0.5]], [1.0])
        assert v.certificate == (2.0,)
        assert 0.5 * 2.0 < 2.0

    def test_symmetric(self):
        z = np.array(normality_certificate(SYM).certificate)
        oracle = np.linalg.solve(np.eye(2) - SYM, np.ones(2))
        assert np.allclose(z, (4.0, 4.0), rtol=0, atol=1e-14)
        assert np.allclose(z, oracle, rtol=1e-14)

    def test_identity_not_normal(self):
        with pytest.raises(NotNormal):
            normality_certificate(I2)

    @pytest.mark.parametrize("y", [[1.0, 0.0], [1.0, -1.0], [1.0, np.nan], [1.0]])
    def test_bad_rhs(self, y):
        with pytest.raises(BadRightHandSide):
            normality_certificate(SYM, y)

    def test_verdict_needs_exactly_one_witness(self):
        from fixpoint.nonneg_matrix import NormalityVerdict
        with pytest.raises(ValueError):
            NormalityVerdict(True)

    def test_refutation_of_identity(self):
        v = decide_normality(I2)
        assert not v.normal
        assert v.refutation.lam >= 1.0 - 1e-10
        vec = np.array(v.refutation.vector)
        assert np.all(vec >= 0) and vec.any()

    @settings(max_examples=200, deadline=None)
    @given(nonneg_matrices(), st.floats(0.1, 10.0))
    def test_certificate_soundness(self, a, ymag):
        rho = spectral_radius_oracle(a)
        assume(rho > 0)
        a = a * (0.9 / rho)
        y = np.full(a.shape[0], ymag)
        try:
            z = np.array(normality_certificate(a, y).certificate)
        except Undecided:
            return
        assert np.all(z > 0)
        assert np.all(a @ z < z)
        resid = np.abs((np.eye(len(z)) - a) @ z - y).max()
        assert resid <= 1e-9 * np.abs(y).max() * max(1.0, np.abs(z).max() / ymag)

    def test_undecided_near_zero_pivot(self):
        a = np.array([[1.0 - 1e-14]])
        with pytest.raises(Undecided):
            decide_normality(a)


# ---------------------------------------------------------------- nu and rho

class TestNu:
    def test_examples(self, coupled08):
        assert nu_estimate(Z2, 1e-10) == 0.0
        assert nu_estimate(SYM, 1e-10) == pytest.approx(0.75, abs=1e-10)
        lam = np.roots([1.0, -1.0, 0.1875]).max()
        assert nu_estimate(SYM, 1e-10) == pytest.approx(lam, abs=1e-10)
        assert nu_estimate(coupled08, 1e-10) == pytest.approx(0.8, abs=1e-10)

    def test_bad_tolerance(self):
        with pytest.raises(InvalidTolerance):
            nu_estimate(SYM, 0.0)

    def test_bracket_width(self):
        lo, hi = nu_bracket(SYM, 1e-8)
        assert hi - lo <= 1e-8
        assert lo <= 0.75 <= hi

    def test_witness_lambda(self):
        assert witness_lambda(SYM, 0.8) is not None
        assert witness_lambda(SYM, 0.7) is None
        assert witness_lambda(Z2, 0.0) == (1.0, 1.0)
        assert witness_lambda(SYM, 0.0) is None

    @settings(max_examples=100, deadline=None)
    @given(nonneg_matrices(max_n=5), st.floats(0.0, 1.0))
    def test_monotone_in_matrix(self, a, bump):
        tol = 1e-8
        b = a + bump * (a > 0)
        assert nu_estimate(a, tol) <= nu_estimate(b, tol) + 2 * tol


class TestSpectral:
    def test_examples(self, tripled02):
        est = spectral_radius(Z2, 1e-10)
        assert est.rho == 0.0
        est = spectral_radius(SYM, 1e-10)
        assert abs(est.rho - 0.75) <= 1e-10
        assert est.lower <= 0.75 <= est.upper
        est = spectral_radius(tripled02, 1e-10)
        assert abs(est.rho - 0.6) <= 1e-10

    def test_bad_tolerance(self):
        with pytest.raises(InvalidTolerance):
            spectral_radius(SYM, -1.0)

    def test_epsilon_schedule(self):
        est = spectral_radius(SYM, 1e-10)
        k = np.log(1e-2 / est.epsilon_used) / np.log(4.0)
        assert k == pytest.approx(round(k))
        assert 0 <= round(k) <= 20

    @settings(max_examples=200, deadline=None)
    @given(nonneg_matrices())
    def test_bracket_contains_oracle(self, a):
        est = spectral_radius(a, 1e-8)
        rho = spectral_radius_oracle(a)
        scale = max(1.0, rho)
        assert est.lower - 1e-9 * scale <= rho <= est.upper + 1e-9 * scale
        assert est.lower <= est.rho <= est.upper

    @settings(max_examples=150, deadline=None)
    @given(nonneg_matrices(max_n=5))
    def test_nu_matches_rho(self, a):
        t = 1e-7
        est = spectral_radius(a, t)
        assume(est.converged)
        assert abs(nu_estimate(a, t) - est.rho) <= 2 * t * max(1.0, est.rho)


class TestAsymptotic:
    def test_examples(self):
        assert is_asymptotic(Z2)
        assert is_asymptotic([[0.0, 2.0], [0.0, 0.0]])
        assert not is_asymptotic(I2)

    def test_undecided_when_budget_too_small(self):
        from fixpoint.nonneg_matrix import asymptotic_test
        with pytest.raises(Undecided):
            asymptotic_test([[0.5, 0.6], [0.3, 0.5]], max_p=1)


class TestNeumann:
    def test_examples(self):
        assert neumann_inverse([[0.5]]).entries[0, 0] == pytest.approx(2.0, abs=1e-11)
        S = neumann_inverse(SYM).entries
        adj = np.array([[0.5, 0.25], [0.25, 0.5]]) / 0.1875
        assert np.allclose(S, adj, rtol=0, atol=1e-10)
        assert np.array_equal(neumann_inverse(Z2).entries, np.eye(2))

    def test_not_normal(self):
        with pytest.raises(NotNormal):
            neumann_inverse(I2)

    @settings(max_examples=100, deadline=None)
    @given(nonneg_matrices(max_n=5), st.sampled_from([0.3, 0.7, 0.95]))
    def test_soundness(self, a, target):
        rho = spectral_radius_oracle(a)
        assume(rho > 0)
        a = a * (target / rho)
        tol = 1e-10
        S = neumann_inverse(a, tol).entries
        n = a.shape[0]
        assert np.all(S >= 0)
        err = np.abs((np.eye(n) - a) @ S - np.eye(n)).sum(axis=0).max()
        assert err <= tol * max(1.0, np.abs(S).sum(axis=0).max())


# ---------------------------------------------------------------- four-way equivalence

class TestCharacterize:
    def test_examples(self, tripled02):
        c = characterize(tripled02)
        assert c.agree and c.matkowski
        c = characterize(I2)
        assert c.agree and not c.matkowski

    @settings(max_examples=200, deadline=None)
    @given(nonneg_matrices(), st.sampled_from([0.5, 0.9, 1.1, 2.0]))
    def test_four_way_equivalence(self, a, factor):
        rho = spectral_radius_oracle(a)
        assume(rho > 0)
        a = a * (factor / rho)
        est = spectral_radius(a, 1e-8)
        assume(est.upper < 1 - 1e-6 or est.lower > 1 + 1e-6)
        assert is_normal_matkowski(a) == is_admissible(a) == (est.upper < 1) == is_asymptotic(a)
