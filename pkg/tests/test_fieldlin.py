import itertools
import random

import pytest

from nilprob.errors import DimensionMismatchError
from nilprob.fieldlin import (
    BilinearForm,
    FpVector,
    antisymm_part,
    form_eval,
    format_form,
    gf2_rank,
    gf2_span,
    hyperbolic_form,
    is_nondegenerate,
    load_form,
    matrix_rank,
    nullspace,
    parse_form,
    rank,
    slice_kernel,
    symm_part,
)


def all_vectors(p, d):
    return [FpVector(p, c) for c in itertools.product(range(p), repeat=d)]


def eval_oracle(f, x, y):
    # independent double loop
    total = 0
    for i in range(f.dim):
        for j in range(f.dim):
            total += x.coords[i] * f.coeffs[i][j] * y.coords[j]
    return total % f.p


class TestFormEval:
    def test_hyperbolic_pairing(self):
        f = hyperbolic_form(2, 1)
        e1 = FpVector.basis(2, 2, 0)
        e1p = FpVector.basis(2, 2, 1)
        assert form_eval(f, e1, e1p) == 1
        assert form_eval(f, e1p, e1) == 0

    def test_zero_vector(self):
        f = hyperbolic_form(3, 2)
        z = FpVector.zero(3, 4)
        for v in (FpVector.basis(3, 4, i) for i in range(4)):
            assert form_eval(f, z, v) == 0
            assert form_eval(f, v, z) == 0

    def test_random_form_against_double_loop(self):
        rng = random.Random(11)
        f = BilinearForm.from_rows(3, [[rng.randrange(3) for _ in range(3)] for _ in range(3)])
        for _ in range(50):
            x = FpVector(3, tuple(rng.randrange(3) for _ in range(3)))
            y = FpVector(3, tuple(rng.randrange(3) for _ in range(3)))
            assert form_eval(f, x, y) == eval_oracle(f, x, y)

    def test_dimension_mismatch(self):
        f = hyperbolic_form(2, 1)
        with pytest.raises(DimensionMismatchError):
            form_eval(f, FpVector.zero(2, 3), FpVector.zero(2, 2))

    def test_bilinearity_exhaustive_small(self):
        # additivity and scaling in the first slot, all p <= 3, dim <= 3
        for p, d in [(2, 2), (2, 3), (3, 2), (3, 3)]:
            rng = random.Random(p * 10 + d)
            f = BilinearForm.from_rows(p, [[rng.randrange(p) for _ in range(d)] for _ in range(d)])
            vecs = all_vectors(p, d)
            for x in vecs:
                for xp in vecs:
                    for y in vecs:
                        lhs = form_eval(f, x + xp, y)
                        assert lhs == (form_eval(f, x, y) + form_eval(f, xp, y)) % p
            for c in range(p):
                for x in vecs:
                    for y in vecs:
                        assert form_eval(f, x.scale(c), y) == c * form_eval(f, x, y) % p


class TestSymmAntisymm:
    def test_hyperbolic_f2_both_equal_swap_matrix(self):
        f = hyperbolic_form(2, 2)
        fs, fa = symm_part(f), antisymm_part(f)
        expect = (
            (0, 0, 1, 0),
            (0, 0, 0, 1),
            (1, 0, 0, 0),
            (0, 1, 0, 0),
        )
        assert fs.coeffs == expect
        assert fa.coeffs == expect
        assert fs == fa

    def test_symmetric_form_has_zero_antisymm(self):
        f = BilinearForm.from_rows(5, [[1, 2], [2, 3]])
        fa = antisymm_part(f)
        assert all(c == 0 for row in fa.coeffs for c in row)

    def test_random_f5_pointwise_identity_on_basis(self):
        rng = random.Random(5)
        f = BilinearForm.from_rows(5, [[rng.randrange(5) for _ in range(3)] for _ in range(3)])
        fs, fa = symm_part(f), antisymm_part(f)
        for i in range(3):
            for j in range(3):
                x, y = FpVector.basis(5, 3, i), FpVector.basis(5, 3, j)
                assert (form_eval(fs, x, y) - form_eval(f, x, y) - form_eval(f, y, x)) % 5 == 0
                assert (form_eval(fa, x, y) - form_eval(f, x, y) + form_eval(f, y, x)) % 5 == 0


class TestRankKernel:
    def test_hyperbolic_symm_antisymm_nondegenerate(self):
        # the raw pairing has rank n; the swap matrix [[0,I],[I,0]] of its
        # symmetric and antisymmetric parts has full rank 2n
        for p, n in [(2, 1), (2, 2), (3, 2), (5, 1)]:
            f = hyperbolic_form(p, n)
            assert rank(f) == n
            assert rank(symm_part(f)) == 2 * n
            assert is_nondegenerate(symm_part(f))
            assert is_nondegenerate(antisymm_part(f))

    def test_zero_form(self):
        f = BilinearForm.from_rows(2, [[0] * 3] * 3)
        assert rank(f) == 0
        basis = slice_kernel(f, FpVector.basis(2, 3, 0))
        assert len(basis) == 3

    def test_rank_one_slice_kernel_by_enumeration(self):
        f = BilinearForm.from_rows(2, [[1, 0, 0], [0, 0, 0], [0, 0, 0]])
        e1 = FpVector.basis(2, 3, 0)
        basis = slice_kernel(f, e1)
        assert len(basis) == 2
        expected = {v.coords for v in all_vectors(2, 3) if form_eval(f, e1, v) == 0}
        spanned = {
            (b1.scale(c1) + b2.scale(c2)).coords
            for b1 in [basis[0]] for b2 in [basis[1]]
            for c1 in range(2) for c2 in range(2)
        }
        assert len(expected) == 4
        assert spanned == expected

    def test_rank_matches_right_kernel_enumeration_f2(self):
        rng = random.Random(17)
        for d in (2, 3, 4):
            for _ in range(10):
                f = BilinearForm.from_rows(2, [[rng.randrange(2) for _ in range(d)] for _ in range(d)])
                kernel = [y for y in all_vectors(2, d)
                          if all(form_eval(f, x, y) == 0 for x in all_vectors(2, d))]
                kdim = len(kernel).bit_length() - 1
                assert rank(f) == d - kdim

    def test_antisymm_of_hyperbolic_32_nondegenerate(self):
        assert is_nondegenerate(antisymm_part(hyperbolic_form(3, 2)))

    def test_symm_equals_antisymm_char2(self):
        for n in (1, 2, 3):
            f = hyperbolic_form(2, n)
            assert symm_part(f) == antisymm_part(f)


class TestHyperbolicForm:
    def test_2_1_coefficients(self):
        assert hyperbolic_form(2, 1).coeffs == ((0, 1), (0, 0))

    def test_e_basis_self_pairings_vanish(self):
        for n in (1, 2, 3):
            f = hyperbolic_form(2, n)
            for i in range(n):
                for j in range(n):
                    ei, ej = FpVector.basis(2, 2 * n, i), FpVector.basis(2, 2 * n, j)
                    eip = FpVector.basis(2, 2 * n, n + i)
                    ejp = FpVector.basis(2, 2 * n, n + j)
                    assert form_eval(f, ei, ej) == 0
                    assert form_eval(f, eip, ej) == 0
                    assert form_eval(f, eip, ejp) == 0

    def test_bad_n(self):
        with pytest.raises(ValueError):
            hyperbolic_form(2, 0)

    def test_bad_prime(self):
        with pytest.raises(ValueError):
            hyperbolic_form(4, 1)


class TestPackedBits:
    def test_pack_unpack_roundtrip(self):
        rng = random.Random(2)
        for _ in range(50):
            v = FpVector(2, tuple(rng.randrange(2) for _ in range(9)))
            assert FpVector.unpack_bits(v.pack_bits(), 9) == v

    def test_gf2_rank_matches_generic(self):
        rng = random.Random(3)
        for _ in range(40):
            d = rng.randrange(1, 7)
            rows = [[rng.randrange(2) for _ in range(d)] for _ in range(rng.randrange(1, 7))]
            packed = [FpVector(2, tuple(r)).pack_bits() for r in rows]
            assert gf2_rank(packed, d) == matrix_rank(rows, 2)

    def test_gf2_span_size(self):
        basis = [0b001, 0b010]
        assert gf2_span(basis) == [0, 1, 2, 3]

    def test_pack_requires_p2(self):
        with pytest.raises(ValueError):
            FpVector(3, (1, 2)).pack_bits()


class TestNullspace:
    def test_nullspace_oracle_f3(self):
        rng = random.Random(9)
        for _ in range(20):
            d = rng.randrange(1, 5)
            rows = [[rng.randrange(3) for _ in range(d)] for _ in range(rng.randrange(1, 4))]
            basis = nullspace(rows, 3, d)
            # every basis vector is killed, and dimensions add up
            for v in basis:
                for row in rows:
                    assert sum(r * c for r, c in zip(row, v.coords)) % 3 == 0
            assert len(basis) == d - matrix_rank(rows, 3)


class TestFormIO:
    def test_roundtrip(self):
        f = hyperbolic_form(3, 2)
        assert parse_form(format_form(f)) == f

    def test_keyword(self):
        assert load_form("hyperbolic:2:2") == hyperbolic_form(2, 2)

    def test_file(self, tmp_path):
        f = hyperbolic_form(5, 1)
        path = tmp_path / "form.txt"
        path.write_text(format_form(f))
        assert load_form(path) == f

    def test_parse_errors(self):
        with pytest.raises(ValueError):
            parse_form("2")
        with pytest.raises(ValueError):
            parse_form("2 2\n0 1\n0")
        with pytest.raises(ValueError):
            parse_form("2 2\n0 1\n0 7")
        with pytest.raises(ValueError):
            parse_form("9 1\n0")
