import numpy as np
import pytest

from oracles import mutual_informations_direct
from relay_integrity import (Alphabet, ConditionalPmf, InputError, MacChannel,
                             binary_erasure_mac, inner_bound_region, input_posterior,
                             joint_from, mutual_informations, uniform_noise_mac)
from relay_integrity.region import sweep_grid


@pytest.fixture
def erasure():
    return binary_erasure_mac()


class TestJointFrom:
    def test_point_mass_inputs(self, erasure):
        joint = joint_from(erasure, [0.0, 1.0], [1.0, 0.0])
        assert joint.table[1, 0, 1] == pytest.approx(1.0)
        assert joint.table.sum() == pytest.approx(1.0)

    def test_uniform_output_marginal(self, erasure):
        joint = joint_from(erasure, [0.5, 0.5], [0.5, 0.5])
        pu = joint.marginal(2)
        assert np.allclose(pu, [0.25, 0.5, 0.25], atol=1e-15)

    def test_marginals_reproduced_exactly(self, erasure):
        rng = np.random.default_rng(0)
        for _ in range(20):
            p1 = rng.dirichlet((1, 1))
            p2 = rng.dirichlet((1, 1))
            joint = joint_from(erasure, p1, p2)
            assert np.max(np.abs(joint.marginal(0) - p1)) < 1e-12
            assert np.max(np.abs(joint.marginal(1) - p2)) < 1e-12

    def test_invalid_pmf(self, erasure):
        with pytest.raises(InputError):
            joint_from(erasure, [0.7, 0.7], [0.5, 0.5])


class TestMutualInformations:
    def test_uniform_erasure_values(self, erasure):
        mi = mutual_informations(joint_from(erasure, [0.5, 0.5], [0.5, 0.5]))
        assert mi.i_x1_u_given_x2 == pytest.approx(1.0, abs=1e-12)
        assert mi.i_x2_u_given_x1 == pytest.approx(1.0, abs=1e-12)
        assert mi.i_x1x2_u == pytest.approx(1.5, abs=1e-12)
        assert mi.i_x1_u == pytest.approx(0.5, abs=1e-12)
        assert mi.i_x2_u == pytest.approx(0.5, abs=1e-12)

    def test_independent_output_all_zero(self):
        ch = uniform_noise_mac()
        mi = mutual_informations(joint_from(ch, [0.5, 0.5], [0.3, 0.7]))
        for v in mi.as_dict().values():
            assert v == pytest.approx(0.0, abs=1e-12)

    def test_against_direct_definition(self, erasure):
        rng = np.random.default_rng(10)
        for _ in range(20):
            joint = joint_from(erasure, rng.dirichlet((2, 2)), rng.dirichlet((2, 2)))
            mine = mutual_informations(joint).as_dict()
            ref = mutual_informations_direct(joint.table)
            for key in ref:
                assert mine[key] == pytest.approx(ref[key], abs=1e-10), key

    def test_chain_identities(self, erasure):
        rng = np.random.default_rng(11)
        for _ in range(30):
            mi = mutual_informations(
                joint_from(erasure, rng.dirichlet((1, 1)), rng.dirichlet((1, 1))))
            assert mi.i_x1_u_given_x2 + mi.i_x2_u == pytest.approx(mi.i_x1x2_u, abs=1e-10)
            assert mi.i_x2_u_given_x1 + mi.i_x1_u == pytest.approx(mi.i_x1x2_u, abs=1e-10)


class TestInputPosterior:
    def test_uniform_erasure(self, erasure):
        post = input_posterior(joint_from(erasure, [0.5, 0.5], [0.5, 0.5]), side=1)
        assert np.allclose(post, [[1.0, 0.5, 0.0], [0.0, 0.5, 1.0]], atol=1e-15)

    def test_columns_stochastic(self, erasure):
        rng = np.random.default_rng(1)
        for _ in range(10):
            post = input_posterior(
                joint_from(erasure, rng.dirichlet((2, 2)), rng.dirichlet((2, 2))), side=2)
            assert np.allclose(post.sum(axis=0), 1.0, atol=1e-12)


class TestInnerBoundRegion:
    def test_erasure_square(self, erasure):
        region = inner_bound_region(erasure, grid_steps=33)
        expected = {(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)}
        got = {tuple(np.round(v, 9)) for v in region.vertices}
        assert got == expected

    def test_unconstrained_identical_for_erasure(self, erasure):
        constrained = inner_bound_region(erasure, grid_steps=17)
        unconstrained = inner_bound_region(erasure, grid_steps=17, constrained=False)
        assert np.allclose(np.sort(constrained.vertices, axis=0),
                           np.sort(unconstrained.vertices, axis=0), atol=1e-12)

    def test_monotone_refinement(self, erasure):
        coarse = inner_bound_region(erasure, grid_steps=9)
        fine = inner_bound_region(erasure, grid_steps=33)
        assert fine.contains(coarse)

    def test_region_bounded_by_log_alphabets(self, erasure):
        region = inner_bound_region(erasure, grid_steps=9)
        assert np.all(region.vertices >= -1e-12)
        assert np.all(region.vertices[:, 0] <= 1.0 + 1e-12)
        assert np.all(region.vertices[:, 1] <= 1.0 + 1e-12)

    def test_strict_gap_on_passing_points(self, erasure):
        # Non-manipulability forces I(X;U) strictly below I(X;U|other).
        for rec in sweep_grid(erasure, 9):
            if not rec["passing"]:
                continue
            assert rec["mi"].i_x1_u < rec["mi"].i_x1_u_given_x2 - 1e-9
            assert rec["mi"].i_x2_u < rec["mi"].i_x2_u_given_x1 - 1e-9

    def test_one_symbol_side(self):
        # A single-symbol X2 makes side 2's observation channel a single
        # always-manipulable column: the filtered region collapses to the
        # origin (flagged), while the unconstrained region is the segment.
        x1 = Alphabet(("0", "1"))
        x2 = Alphabet(("c",))
        u = Alphabet(("0", "1"))
        table = np.zeros((2, 2, 1))
        table[0, 0, 0] = 1.0
        table[1, 1, 0] = 1.0
        ch = MacChannel(x1, x2, u, ConditionalPmf(u, (x1, x2), table))
        constrained = inner_bound_region(ch, grid_steps=9)
        assert constrained.metadata["empty"]
        assert constrained.vertices.shape[0] == 1
        unconstrained = inner_bound_region(ch, grid_steps=9, constrained=False)
        assert unconstrained.vertices.shape == (2, 2)
        assert unconstrained.vertices[:, 1] == pytest.approx(0.0)
        assert max(unconstrained.vertices[:, 0]) == pytest.approx(1.0)

    def test_grid_steps_validated(self, erasure):
        with pytest.raises(InputError):
            inner_bound_region(erasure, grid_steps=1)

    def test_deterministic_vertex_order(self, erasure):
        a = inner_bound_region(erasure, grid_steps=9)
        b = inner_bound_region(erasure, grid_steps=9)
        assert np.array_equal(a.vertices, b.vertices)
