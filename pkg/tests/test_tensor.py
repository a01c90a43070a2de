import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tnsim.tensor import (
    Tensor,
    TensorError,
    contract_pair,
    contraction_cost,
    svd_factorize,
)


def loop_contract(a: Tensor, b: Tensor, pairs):
    """Independent nested-loop contraction oracle."""
    axes_a = {ia for ia, _ in pairs}
    axes_b = {ib for _, ib in pairs}
    free_a = [i for i in range(a.rank) if i not in axes_a]
    free_b = [i for i in range(b.rank) if i not in axes_b]
    out_shape = [a.dims[i] for i in free_a] + [b.dims[i] for i in free_b]
    out = np.zeros(out_shape, dtype=complex)
    for idx in np.ndindex(*out_shape):
        ia_free = idx[: len(free_a)]
        ib_free = idx[len(free_a):]
        total = 0.0 + 0.0j
        for shared in itertools.product(*(range(a.dims[ia]) for ia, _ in pairs)):
            ia = [0] * a.rank
            ib = [0] * b.rank
            for pos, v in zip(free_a, ia_free):
                ia[pos] = v
            for pos, v in zip(free_b, ib_free):
                ib[pos] = v
            for (pa, pb), v in zip(pairs, shared):
                ia[pa] = v
                ib[pb] = v
            total += a.data[tuple(ia)] * b.data[tuple(ib)]
        out[idx] = total
    return out


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


class TestContractPair:
    def test_identity_contraction(self):
        a = Tensor(np.eye(2), ("r", "c"))
        b = Tensor(np.array([3.0, 4.0]), ("v",))
        out = contract_pair(a, b, [(1, 0)])
        np.testing.assert_allclose(out.data, [3, 4])
        assert out.labels == ("r",)

    def test_dot_product(self):
        a = Tensor(np.array([1.0, 2.0]), ("x",))
        b = Tensor(np.array([3.0, 4.0]), ("y",))
        out = contract_pair(a, b, [(0, 0)])
        assert out.rank == 0
        assert out.scalar() == pytest.approx(11)

    def test_against_loop_oracle(self, rng):
        a = Tensor(crandn(rng, 2, 4, 2), ("a", "b", "c"))
        b = Tensor(crandn(rng, 2, 2, 3), ("d", "e", "f"))
        out = contract_pair(a, b, [(0, 1)])
        assert out.dims == (4, 2, 2, 3)
        np.testing.assert_allclose(out.data, loop_contract(a, b, [(0, 1)]), atol=1e-12)

    def test_loop_oracle_random_shapes(self, rng, rnd):
        for _ in range(15):
            ra = rnd.randint(1, 3)
            rb = rnd.randint(1, 3)
            da = [rnd.randint(1, 4) for _ in range(ra)]
            db = [rnd.randint(1, 4) for _ in range(rb)]
            npairs = rnd.randint(0, min(ra, rb))
            pairs = list(zip(rnd.sample(range(ra), npairs), rnd.sample(range(rb), npairs)))
            for pa, pb in pairs:
                db[pb] = da[pa]
            a = Tensor(crandn(rng, *da), tuple(f"a{i}" for i in range(ra)))
            b = Tensor(crandn(rng, *db), tuple(f"b{i}" for i in range(rb)))
            out = contract_pair(a, b, pairs)
            np.testing.assert_allclose(out.data, loop_contract(a, b, pairs), atol=1e-12)

    @given(st.integers(-5, 5), st.integers(-5, 5))
    @settings(max_examples=25, deadline=None)
    def test_bilinear_in_first_argument(self, re, im):
        rng = np.random.default_rng(7)
        alpha = complex(re, im)
        a = Tensor(crandn(rng, 3, 2), ("a", "b"))
        b = Tensor(crandn(rng, 2, 3), ("c", "d"))
        lhs = contract_pair(Tensor(alpha * a.data, a.labels), b, [(1, 0)])
        rhs = contract_pair(a, b, [(1, 0)])
        np.testing.assert_allclose(lhs.data, alpha * rhs.data, atol=1e-12)

    def test_extent_mismatch(self):
        a = Tensor(np.zeros((2, 3)), ("a", "b"))
        b = Tensor(np.zeros(4), ("c",))
        with pytest.raises(TensorError, match="mismatch"):
            contract_pair(a, b, [(1, 0)])

    def test_axis_out_of_range(self):
        a = Tensor(np.zeros(2), ("a",))
        b = Tensor(np.zeros(2), ("b",))
        with pytest.raises(TensorError, match="out of range"):
            contract_pair(a, b, [(3, 0)])

    def test_repeated_axis_rejected(self):
        a = Tensor(np.zeros((2, 2)), ("a", "b"))
        b = Tensor(np.zeros((2, 2)), ("c", "d"))
        with pytest.raises(TensorError, match="repeated"):
            contract_pair(a, b, [(0, 0), (0, 1)])


class TestSvdFactorize:
    def test_identity_singular_values(self):
        t = Tensor(np.eye(2), ("a", "b"))
        u, s, v, kept = svd_factorize(t, [0], tolerance=0.0)
        np.testing.assert_allclose(s, [1, 1])
        assert kept == 2

    def test_rank_one_outer_product(self):
        t = Tensor(np.outer([1, 0], [0, 1]), ("a", "b"))
        _, _, _, kept = svd_factorize(t, [0], tolerance=1e-12)
        assert kept == 1

    def test_fsim_gate_grouped_rank(self):
        from tnsim.circuit import fsim_matrix

        m = fsim_matrix(np.pi / 6, np.pi / 3)
        grouped = Tensor(
            m.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3), ("kp", "k", "lp", "l")
        )
        _, _, _, kept = svd_factorize(grouped, [0, 1])
        assert kept == 4

    def test_reconstruction(self, rng):
        for shape, rows in [((2, 3, 4), [0]), ((4, 2, 2, 3), [0, 2]), ((5, 5), [1])]:
            t = Tensor(crandn(rng, *shape))
            u, s, v, kept = svd_factorize(t, rows)
            rebuilt = np.tensordot(u.data * s, v.data, axes=([u.rank - 1], [0]))
            norm = np.linalg.norm(t.data)
            perm = list(rows) + [i for i in range(t.rank) if i not in rows]
            np.testing.assert_allclose(
                rebuilt, t.data.transpose(perm), atol=1e-12 * norm
            )

    def test_orthonormal_factors(self, rng):
        t = Tensor(crandn(rng, 3, 4, 2))
        u, s, v, kept = svd_factorize(t, [0, 2])
        um = u.data.reshape(-1, kept)
        np.testing.assert_allclose(um.conj().T @ um, np.eye(kept), atol=1e-12)
        vm = v.data.reshape(kept, -1)
        np.testing.assert_allclose(vm @ vm.conj().T, np.eye(kept), atol=1e-12)

    def test_kept_rank_floor_is_one(self):
        t = Tensor(np.zeros((2, 2)))
        _, _, _, kept = svd_factorize(t, [0])
        assert kept == 1

    @pytest.mark.parametrize("rows", [[], [0, 1]])
    def test_row_axes_must_be_proper_subset(self, rows):
        t = Tensor(np.eye(2))
        with pytest.raises(TensorError):
            svd_factorize(t, rows)

    def test_non_finite_rejected(self):
        t = Tensor(np.array([[np.inf, 0], [0, 1]]))
        with pytest.raises(TensorError, match="finite"):
            svd_factorize(t, [0])


class TestContractionCost:
    def test_two_matrices(self):
        assert contraction_cost((2, 2), (2, 2), [(1, 0)]) == 8

    def test_formula_application(self):
        assert contraction_cost((4, 4, 2), (2, 4), [(2, 0)]) == 128

    def test_outer_product(self):
        assert contraction_cost((2, 2), (3,), []) == 12

    def test_symmetry(self, rnd):
        for _ in range(20):
            da = tuple(rnd.randint(1, 5) for _ in range(rnd.randint(1, 3)))
            db = tuple(rnd.randint(1, 5) for _ in range(rnd.randint(1, 3)))
            n = rnd.randint(0, min(len(da), len(db)))
            pa = rnd.sample(range(len(da)), n)
            pb = rnd.sample(range(len(db)), n)
            db = tuple(
                da[pa[pb.index(i)]] if i in pb else d for i, d in enumerate(db)
            )
            pairs = list(zip(pa, pb))
            flipped = [(ib, ia) for ia, ib in pairs]
            assert contraction_cost(da, db, pairs) == contraction_cost(db, da, flipped)

    def test_extent_mismatch(self):
        with pytest.raises(TensorError):
            contraction_cost((2,), (3,), [(0, 0)])


class TestTensorInvariants:
    def test_duplicate_labels_rejected(self):
        with pytest.raises(TensorError, match="duplicate"):
            Tensor(np.zeros((2, 2)), ("a", "a"))

    def test_label_count_must_match(self):
        with pytest.raises(TensorError):
            Tensor(np.zeros((2, 2)), ("a",))

    def test_row_major_layout(self):
        t = Tensor(np.arange(6).reshape(2, 3))
        assert t.data.flags["C_CONTIGUOUS"]
        assert t.data[1, 0] == 3
