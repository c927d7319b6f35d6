import itertools
import math

import numpy as np
import pytest
import scipy.linalg

from wishart_pfaffian.errors import DomainError, StructuralError, ValidationError
from wishart_pfaffian.logvalue import SignedLogValue
from wishart_pfaffian.pfaffian import SkewMatrix, congruence_scale, equilibration_scales, pfaffian


def random_skew(rng, n, low=-1.0, high=1.0):
    a = np.triu(rng.uniform(low, high, (n, n)), 1)
    return a - a.T


def pfaffian_by_expansion(a):
    """Expansion along the first row (exponential cost, small n only)."""
    n = a.shape[0]
    if n == 0:
        return 1.0
    total = 0.0
    for j in range(1, n):
        keep = [k for k in range(n) if k not in (0, j)]
        total += (-1) ** (j + 1) * a[0, j] * pfaffian_by_expansion(a[np.ix_(keep, keep)])
    return total


def log_abs_det(a):
    lu, piv = scipy.linalg.lu_factor(a)
    d = np.diag(lu)
    return float(np.sum(np.log(np.abs(d))))


class TestPfaffianExamples:
    def test_two_by_two(self):
        pf = pfaffian(SkewMatrix([[0.0, 3.0], [-3.0, 0.0]]))
        assert pf.sign == 1
        assert pf.to_float() == pytest.approx(3.0, rel=1e-15)

    def test_four_by_four_closed_form(self):
        up = {(0, 1): 1, (0, 2): 2, (0, 3): 3, (1, 2): 4, (1, 3): 5, (2, 3): 6}
        a = np.zeros((4, 4))
        for (i, j), v in up.items():
            a[i, j], a[j, i] = v, -v
        assert pfaffian(SkewMatrix(a)).to_float() == pytest.approx(8.0, rel=1e-12, abs=1e-12)

    def test_empty_is_one(self):
        assert pfaffian(SkewMatrix(np.zeros((0, 0)))) == SignedLogValue.one()

    def test_random_eight(self, rng):
        a = random_skew(rng, 8)
        pf = pfaffian(SkewMatrix(a))
        assert 2.0 * pf.log_mag == pytest.approx(log_abs_det(a), rel=1e-10)
        assert pf.to_float() ** 2 == pytest.approx(np.linalg.det(a), rel=1e-10)

    def test_sign_against_expansion(self, rng):
        for n in (2, 4, 6, 8):
            for _ in range(5):
                a = random_skew(rng, n)
                expected = pfaffian_by_expansion(a)
                assert pfaffian(SkewMatrix(a)).to_float() == pytest.approx(expected, rel=1e-10)


class TestPfaffianProperties:
    def test_square_is_determinant(self, rng):
        for n in range(2, 13, 2):
            for _ in range(10):
                a = random_skew(rng, n)
                pf = pfaffian(SkewMatrix(a))
                det = np.linalg.det(a)
                assert pf.to_float() ** 2 == pytest.approx(det, rel=1e-9)

    def test_swap_flips_sign(self, rng):
        for n in (4, 6, 10):
            a = random_skew(rng, n)
            i, j = rng.choice(n, 2, replace=False)
            perm = np.arange(n)
            perm[[i, j]] = perm[[j, i]]
            b = a[np.ix_(perm, perm)]
            pa, pb = pfaffian(SkewMatrix(a)), pfaffian(SkewMatrix(b))
            assert pb.sign == -pa.sign
            assert pb.log_mag == pytest.approx(pa.log_mag, rel=1e-12)

    @pytest.mark.parametrize("x,y", [(2.0, 3.0), (-1.5, 4.0), (1e-200, 1e150)])
    def test_block_diagonal(self, x, y):
        a = np.zeros((4, 4))
        a[0, 1], a[1, 0] = x, -x
        a[2, 3], a[3, 2] = y, -y
        assert pfaffian(SkewMatrix(a)).to_float() == pytest.approx(x * y, rel=1e-14)

    def test_scalar_factor_law(self, rng):
        a = random_skew(rng, 6)
        base = pfaffian(SkewMatrix(a))
        scaled = pfaffian(SkewMatrix(a, log_scale=math.log(2.0)))
        assert scaled.log_mag == pytest.approx(base.log_mag + 3.0 * math.log(2.0), rel=1e-14)
        assert scaled.sign == base.sign

    def test_huge_log_scale(self, rng):
        a = random_skew(rng, 4)
        base = pfaffian(SkewMatrix(a))
        big = pfaffian(SkewMatrix(a, log_scale=900.0))
        assert big.sign == base.sign
        assert big.log_mag == pytest.approx(base.log_mag + 1800.0, rel=1e-14)

    def test_singular_gives_zero(self):
        a = np.zeros((4, 4))
        a[0, 1], a[1, 0] = 1.0, -1.0
        assert pfaffian(SkewMatrix(a)).is_zero

    def test_badly_scaled_rows(self, rng):
        a = random_skew(rng, 6)
        d = 10.0 ** np.array([-150, -40, 0, 30, 90, 140], dtype=float)
        b = d[:, None] * a * d[None, :]
        pf = pfaffian(SkewMatrix(b))
        ref = pfaffian(SkewMatrix(a))
        assert pf.sign == ref.sign
        assert pf.log_mag == pytest.approx(ref.log_mag + float(np.sum(np.log(d))), abs=1e-10)


class TestCongruence:
    def test_identity(self, rng):
        m = SkewMatrix(random_skew(rng, 4))
        out = congruence_scale(m, np.ones(4))
        np.testing.assert_array_equal(out.entries, m.entries)
        assert out.log_scale == m.log_scale

    def test_two_by_two(self):
        out = congruence_scale(SkewMatrix([[0.0, 4.0], [-4.0, 0.0]]), [0.5, 0.5])
        np.testing.assert_allclose(out.entries, [[0.0, 1.0], [-1.0, 0.0]])
        assert out.log_scale == pytest.approx(-math.log(0.25), rel=1e-15)
        assert pfaffian(out).to_float() == pytest.approx(4.0, rel=1e-14)

    def test_equilibration_invariant(self, rng):
        m = SkewMatrix(random_skew(rng, 6) * np.logspace(-5, 5, 6)[:, None] * np.logspace(-5, 5, 6))
        out = congruence_scale(m, equilibration_scales(m))
        a, b = pfaffian(m), pfaffian(out)
        assert a.sign == b.sign
        assert abs(a.log_mag - b.log_mag) < 1e-12 * max(1.0, abs(a.log_mag))

    @pytest.mark.parametrize("d", [[1.0, 0.0], [1.0, -2.0], [1.0, math.nan]])
    def test_nonpositive(self, d):
        with pytest.raises(DomainError):
            congruence_scale(SkewMatrix([[0.0, 1.0], [-1.0, 0.0]]), d)

    def test_length_mismatch(self):
        with pytest.raises(StructuralError):
            congruence_scale(SkewMatrix([[0.0, 1.0], [-1.0, 0.0]]), [1.0, 1.0, 1.0])


class TestValidation:
    def test_odd_order(self, rng):
        with pytest.raises(StructuralError):
            pfaffian(SkewMatrix(random_skew(rng, 3)))

    def test_not_skew(self):
        with pytest.raises(ValidationError):
            SkewMatrix([[0.0, 1.0], [1.0, 0.0]])

    def test_nonzero_diagonal(self):
        with pytest.raises(ValidationError):
            SkewMatrix([[1.0, 1.0], [-1.0, 0.0]])

    def test_not_square(self):
        with pytest.raises(StructuralError):
            SkewMatrix(np.zeros((2, 3)))

    def test_entries_read_only(self, rng):
        m = SkewMatrix(random_skew(rng, 4))
        with pytest.raises(ValueError):
            m.entries[0, 1] = 5.0

    def test_all_permutation_signs_order_four(self, rng):
        a = random_skew(rng, 4)
        base = pfaffian(SkewMatrix(a)).to_float()
        for perm in itertools.permutations(range(4)):
            parity = np.linalg.det(np.eye(4)[list(perm)])
            b = a[np.ix_(perm, perm)]
            assert pfaffian(SkewMatrix(b)).to_float() == pytest.approx(parity * base, rel=1e-12)
