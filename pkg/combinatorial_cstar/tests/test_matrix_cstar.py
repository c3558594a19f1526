from unittest.mock import patch

import numpy as np
import pytest

from combinatorial_cstar.exceptions import (
    NotBisectionError,
    PreconditionError,
    ResourceCapError,
    ToleranceError,
)
from combinatorial_cstar.matrix_cstar import (
    FINITE_REGIME,
    OperatorMatrix,
    analysis_checks,
    conditional_expectation,
    detection_verdict,
    detects_ideals,
    enumerate_ideals,
    full_algebra,
    j_map,
    minimal_ideal_blocks,
    rep_indicator,
    star_closure,
    t_op,
    vee_join,
    verify_relations,
)

ID_W, MAP_E, MAP_E_STAR, ID_E, ID_V = 1, 2, 3, 4, 5


def _unit(n, i, j):
    m = np.zeros((n, n), dtype=np.int64)
    m[i, j] = 1
    return OperatorMatrix(m)


def _diagonal(G):
    return [t_op(s, G) for s in G.hull.idempotent_elements]


class TestIndicators:
    def test_units_give_the_identity(self, groupoid_a):
        T = rep_indicator(groupoid_a, groupoid_a.units)
        assert T.exact
        assert np.array_equal(T.entries, np.eye(4, dtype=np.int64))

    def test_single_arrow(self, groupoid_a):
        T = rep_indicator(groupoid_a, {1})
        expected = np.zeros((4, 4), dtype=np.int64)
        expected[1, 0] = 1
        expected[3, 2] = 1
        assert np.array_equal(T.entries, expected)

    def test_empty_set_gives_zero(self, groupoid_a):
        assert rep_indicator(groupoid_a, set()).is_zero()
        assert t_op(0, groupoid_a).is_zero()

    def test_not_a_bisection(self, groupoid_a):
        with pytest.raises(NotBisectionError):
            rep_indicator(groupoid_a, {0, 1})

    def test_group_element_swaps(self, groupoid_b):
        assert np.array_equal(t_op(2, groupoid_b).entries, [[0, 1], [1, 0]])

    def test_t_is_a_representation(self, groupoid_a):
        G = groupoid_a
        T_e, T_e_star = t_op(MAP_E, G), t_op(MAP_E_STAR, G)
        assert T_e.adjoint().equals(T_e_star)
        assert (T_e_star @ T_e).equals(t_op(ID_W, G))
        assert (T_e @ T_e_star).equals(t_op(ID_V, G))
        assert t_op(ID_E, G).equals(t_op(ID_V, G))


class TestVeeJoin:
    def test_orthogonal_projections(self, groupoid_a):
        G = groupoid_a
        joined = vee_join([t_op(ID_E, G), t_op(ID_W, G)])
        assert joined.equals(rep_indicator(G, G.units))

    def test_projection_with_itself(self, groupoid_a):
        p = t_op(ID_V, groupoid_a)
        assert vee_join([p, p]).equals(p)

    def test_partial_isometries(self):
        joined = vee_join([_unit(3, 1, 0), _unit(3, 2, 1)])
        expected = _unit(3, 1, 0) + _unit(3, 2, 1)
        assert joined.equals(expected)

    def test_empty(self):
        with patch("combinatorial_cstar.matrix_cstar.logger") as logger:
            with pytest.raises(PreconditionError):
                vee_join([])
        logger.error.assert_called_once()

    def test_incompatible(self, groupoid_b):
        with pytest.raises(PreconditionError):
            vee_join([t_op(1, groupoid_b), t_op(2, groupoid_b)])

    def test_non_commuting_projections(self):
        p = OperatorMatrix(np.array([[1.0, 0.0], [0.0, 0.0]]))
        q = OperatorMatrix(np.array([[0.5, 0.5], [0.5, 0.5]]))
        with pytest.raises(PreconditionError):
            vee_join([p, q])


class TestExpectation:
    def test_j_and_e_red_of_identity(self, groupoid_a):
        identity = rep_indicator(groupoid_a, groupoid_a.units)
        assert list(j_map(identity, groupoid_a)) == [1, 0, 0, 1]
        assert list(conditional_expectation(identity, groupoid_a)) == [1, 1]

    def test_j_of_edge(self, groupoid_a):
        assert list(j_map(t_op(MAP_E, groupoid_a), groupoid_a)) == [0, 1, 0, 0]
        assert list(conditional_expectation(t_op(MAP_E, groupoid_a), groupoid_a)) == [0, 0]

    def test_analysis_checks(self, groupoid_a):
        A = full_algebra(groupoid_a)
        checks = analysis_checks(A, groupoid_a)
        assert checks == {
            "e_red_contractive": True,
            "e_red_faithful": True,
            "j_injective": True,
            "oracle": "floating",
        }


class TestClosures:
    def test_identity_spans_a_line(self, groupoid_a):
        A = star_closure([rep_indicator(groupoid_a, groupoid_a.units)])
        assert A.dimension == 1

    @pytest.mark.parametrize(
        "groupoid,expected",
        [("groupoid_a", 4), ("groupoid_b", 2), ("groupoid_c", 16)],
    )
    def test_full_algebra_has_dimension_of_groupoid(self, request, groupoid, expected):
        G = request.getfixturevalue(groupoid)
        assert full_algebra(G).dimension == expected == len(G)

    def test_empty_generators(self):
        assert star_closure([], size=3).dimension == 0

    def test_cap(self, groupoid_a):
        ops = [t_op(s, groupoid_a) for s in range(len(groupoid_a.hull))]
        with pytest.raises(ResourceCapError):
            star_closure(ops, cap=2)


class TestMinimalIdeals:
    def test_full_matrix_algebra(self, groupoid_a):
        blocks = minimal_ideal_blocks(full_algebra(groupoid_a))
        assert [b.dimension for b in blocks] == [4]

    def test_commutative_algebra(self, groupoid_b):
        blocks = minimal_ideal_blocks(full_algebra(groupoid_b))
        assert [b.dimension for b in blocks] == [1, 1]

    def test_direct_sum(self):
        gens = [_unit(3, 0, 0), _unit(3, 0, 1), _unit(3, 2, 2)]
        A = star_closure(gens)
        assert A.dimension == 5
        blocks = minimal_ideal_blocks(A)
        assert sorted(b.dimension for b in blocks) == [1, 4]

    def test_degenerate_center(self, groupoid_a):
        A = full_algebra(groupoid_a)
        with patch("combinatorial_cstar.matrix_cstar._split", return_value=None):
            with pytest.raises(ToleranceError):
                minimal_ideal_blocks(A)


class TestDetection:
    def test_diagonal_misses_an_ideal_of_the_group(self, groupoid_b):
        full = [t_op(s, groupoid_b) for s in range(len(groupoid_b.hull))]
        verdict = detection_verdict(full, _diagonal(groupoid_b))
        assert not verdict.detects
        assert verdict.block_dimensions == [1, 1]
        assert verdict.intersection_dimensions == [0, 0]
        assert verdict.certificate == {
            "block": 0,
            "block_dimension": 1,
            "intersection_dimension": 0,
        }
        assert verdict.stable
        assert verdict.regime == FINITE_REGIME

    def test_diagonal_detects_on_the_graph(self, groupoid_a):
        full = [t_op(s, groupoid_a) for s in range(len(groupoid_a.hull))]
        verdict = detection_verdict(full, _diagonal(groupoid_a))
        assert verdict.detects
        assert verdict.certificate is None
        assert verdict.to_dict()["oracle"] == "floating"

    def test_whole_algebra_detects(self, groupoid_b):
        A = full_algebra(groupoid_b)
        assert detects_ideals(A, A).detects

    def test_subalgebra_must_be_contained(self, groupoid_b):
        A = star_closure(_diagonal(groupoid_b))
        B = full_algebra(groupoid_b)
        with pytest.raises(PreconditionError):
            detects_ideals(A, B)

    def test_enumerate_ideals(self, groupoid_b):
        A = full_algebra(groupoid_b)
        D = star_closure(_diagonal(groupoid_b))
        ideals = enumerate_ideals(A, D)
        assert [i["dimension"] for i in ideals] == [0, 1, 1, 2]
        assert [i["intersection_dimension"] for i in ideals] == [0, 0, 0, 1]
        assert [i["intersection_dimension"] for i in enumerate_ideals(A, A)] == [0, 1, 1, 2]


class TestRelations:
    def test_graph_relations(self, spec_a, groupoid_a):
        report = verify_relations(groupoid_a, spec_a.edges)
        assert report.passed
        assert report.oracle == "exact"
        counts = report.counts()
        assert counts["CK1"] == 1
        assert counts["CK2"] == 1
        assert counts["S1"] == 3
        assert counts["multiplicative"] == 36

    @pytest.mark.parametrize("groupoid", ["groupoid_b", "groupoid_c"])
    def test_relations_hold(self, request, groupoid):
        report = verify_relations(request.getfixturevalue(groupoid))
        assert report.passed
        assert report.failures() == []
        assert "CK1" not in report.counts()

    def test_to_dict(self, groupoid_b):
        result = verify_relations(groupoid_b).to_dict()
        assert result["passed"]
        assert result["failures"] == []

    def test_every_family_checked_by_default(self, groupoid_c):
        report = verify_relations(groupoid_c)
        assert report.complete
        assert report.truncated == {}
        assert report.to_dict()["complete"]

    def test_truncation_is_reported(self, groupoid_c):
        # the ideal of A holds A, a, b and ac = bd'; past a limit of 3 only
        # families of size <= 2 are tried, leaving out 15 - 4 - 6 of them
        report = verify_relations(groupoid_c, limit=3)
        assert report.passed
        assert not report.complete
        assert report.truncated["S4"] == 5
        assert report.truncated["cover-to-join"] > 0
        result = report.to_dict()
        assert not result["complete"]
        assert result["truncated"]["S4"] == 5
