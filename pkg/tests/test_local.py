import pytest

from arbor.autom import FinitaryAut, classify, identity_aut, sigma
from arbor.ballaut import BallAut, identity_ball_aut
from arbor.bass_serre import BSParams, coset_fix_modulus
from arbor.errors import PreconditionError
from arbor.local import (
    Answer,
    PurelyEllipticSoFar,
    axis_subtree_factor,
    bs_separating_element,
    build_profile,
    closure_chain_probe,
    commutator_realization,
    in_k_closure,
    independence_check_bs,
    independence_check_universal,
    independence_check_words,
    minimal_subtree_approx,
    p_k_independence_check,
    path_decomposition,
    pattern_local_action,
    restrict,
    rigidity_probe,
    universal_profile,
)
from arbor.perm import alternating_group, cycle_perm, symmetric_group, trivial_group
from arbor.tree import PathSpec, Vertex, ball, base_vertex, distance
from arbor.universal import UniversalGroupSpec, ball_stabilizer_group

from oracles import bs_stitched_order, bs_word_pool

B3 = base_vertex(3)
S1, S2, S3_INV = sigma(3, 1), sigma(3, 2), sigma(3, 3)
U_S3 = UniversalGroupSpec(3, symmetric_group(3))
U_A3 = UniversalGroupSpec(3, alternating_group(3))
EDGE = PathSpec((B3, Vertex(3, (1,))))
BS23 = BSParams(2, 3)


def v3(*labels):
    return Vertex(3, labels)


class TestRestrict:
    def test_identity(self):
        assert restrict(identity_aut(3), B3, 2) == identity_ball_aut(B3, 2)

    def test_sigma_on_unit_ball(self):
        p = restrict(S1, B3, 1)
        assert p(B3) == v3(1)
        assert p(v3(1)) == B3
        assert p(v3(2)) == v3(1, 2)
        assert p(v3(3)) == v3(1, 3)

    def test_rotation_pattern(self):
        g = FinitaryAut.make(3, B3, {B3: cycle_perm(3, 1, 2)})
        p = restrict(g, B3, 1)
        assert p(B3) == B3
        assert p(v3(1)) == v3(2)
        assert p(v3(2)) == v3(1)
        assert p(v3(3)) == v3(3)

    def test_agrees_with_apply(self):
        g = S1.compose(S2)
        p = restrict(g, v3(2), 2)
        for v in ball(v3(2), 2):
            assert p(v) == g.apply(v)


class TestProfiles:
    def test_identity_profile(self):
        profile = build_profile([identity_aut(3)], 1, 3, B3, 1)
        for x in ball(B3, 1):
            assert profile.pattern_count(x) == 1
            assert profile.matches(x, identity_ball_aut(x, 1)) is True

    def test_sigma_patterns_label_respecting(self):
        profile = build_profile([S1, S2, S3_INV], 1, 4, B3, 1)
        for x in ball(B3, 1):
            for pairs, cert in profile.patterns[x].items():
                assert cert.is_label_respecting
                pattern = BallAut(x, 1, pairs)
                assert pattern_local_action(pattern, x).is_identity

    def test_word_profile_cannot_refute(self):
        profile = build_profile([S1], 1, 2, B3, 1)
        h = FinitaryAut.make(3, B3, {B3: cycle_perm(3, 1, 2)})
        assert profile.matches(B3, restrict(h, B3, 1)) is None

    def test_inverses_explored(self):
        profile = build_profile([S1.compose(S2)], 1, 3, B3, 1)
        certs = [c for table in profile.patterns.values() for c in table.values()]
        for cert in certs:
            assert cert.inverse() in certs or cert.inverse() == cert


class TestInKClosure:
    def test_identity_always_yes(self):
        profile = universal_profile(U_A3, 1)
        assert in_k_closure(identity_aut(3), profile, B3, 2).answer == Answer.YES_ON_REGION

    def test_exact_refutation(self):
        profile = universal_profile(U_A3, 1)
        h = FinitaryAut.make(3, B3, {B3: cycle_perm(3, 1, 2)})
        result = in_k_closure(h, profile, B3, 1)
        assert result.answer == Answer.NO
        assert result.refuted_at == B3

    def test_exact_acceptance(self):
        profile = universal_profile(U_A3, 1)
        h = FinitaryAut.make(3, v3(1), {B3: cycle_perm(3, 1, 2, 3)})
        assert in_k_closure(h, profile, B3, 2).answer == Answer.YES_ON_REGION

    def test_word_profile_unknown(self):
        profile = build_profile([S1], 1, 2, B3, 1)
        h = FinitaryAut.make(3, B3, {B3: cycle_perm(3, 1, 2)})
        result = in_k_closure(h, profile, B3, 1)
        assert result.answer == Answer.UNKNOWN

    def test_nesting(self):
        # yes at k+1 implies yes at k, for the same generating data
        gens = [S1, S2]
        p1 = build_profile(gens, 1, 4, B3, 1)
        p2 = build_profile(gens, 2, 4, B3, 1)
        candidates = [identity_aut(3), S1, S1.compose(S2), S2.compose(S1)]
        for h in candidates:
            a2 = in_k_closure(h, p2, B3, 1).answer
            a1 = in_k_closure(h, p1, B3, 1).answer
            if a2 == Answer.YES_ON_REGION:
                assert a1 == Answer.YES_ON_REGION


class TestIndependenceUniversal:
    def test_s3_edge_small_depth(self):
        report = independence_check_universal(U_S3, EDGE, 1, 2)
        assert report.holds
        assert report.enumeration_checked  # 64 elements, brute-checked
        assert report.fix_order == 64
        assert report.factor_orders == (8, 8)

    def test_s3_edge_depth3(self):
        report = independence_check_universal(U_S3, EDGE, 1, 3)
        assert report.holds
        assert report.fix_order == 2 ** 14
        assert report.factor_orders == (128, 128)

    def test_a3_trivially_rigid(self):
        report = independence_check_universal(U_A3, EDGE, 1, 3)
        assert report.holds
        assert report.fix_order == 1
        assert report.factor_orders == (1, 1)

    def test_k2_interior_forced(self):
        report = independence_check_universal(U_S3, EDGE, 2, 3)
        assert report.holds
        assert report.enumeration_checked

    def test_three_vertex_path(self):
        path = PathSpec((v3(1), B3, v3(2)))
        report = independence_check_universal(U_S3, path, 1, 2)
        assert report.holds
        assert len(report.factor_orders) == 3

    def test_dispatcher(self):
        assert p_k_independence_check(U_S3, EDGE, 1, 2).holds
        assert not p_k_independence_check(BS23, None, 1, 3).holds

    def test_path_decomposition_reports_factors(self):
        decomp = path_decomposition(U_S3, EDGE, 1, 2)
        assert decomp.factor_orders == (8, 8)
        for x in EDGE.vertices:
            assert decomp.factor_generators[x]


class TestIndependenceBS:
    def test_fails_at_base_edge(self):
        report = independence_check_bs(2, 3, 1, 3)
        assert not report.holds
        assert report.failure_witness is not None
        assert report.fix_order != report.factor_product

    def test_collar_modulus_is_witness_exponent(self):
        # |Fix| counts restrictions of ⟨a^3⟩
        report = independence_check_bs(2, 3, 1, 2)
        assert report.fix_order >= 2

    @pytest.mark.parametrize("k,depth", [(1, 3), (2, 4), (3, 5)])
    def test_fails_for_all_k(self, k, depth):
        assert not independence_check_bs(2, 3, k, depth).holds

    def test_trivial_group_vacuous(self):
        report = independence_check_words([identity_aut(3)], EDGE, 1, 2)
        assert report.holds
        assert report.fix_order == 1


class TestCommutator:
    N = S1.compose(S2)

    def test_identity_factor(self):
        cls = classify(self.N)
        c0 = cls.axis_window.vertices[0]
        phi = identity_ball_aut(c0, 6 + 2 * cls.translation_length)
        psi = commutator_realization(self.N, phi, 1, 6)
        assert psi.is_identity

    def test_single_swap_factor_k1(self):
        phi = axis_subtree_factor(self.N, v3(3), cycle_perm(3, 1, 2), 1, 6)
        psi = commutator_realization(self.N, phi, 1, 6)
        assert not psi.is_identity

    def test_deeper_factor_k2(self):
        phi = axis_subtree_factor(self.N, v3(3, 1), cycle_perm(3, 2, 3), 2, 6)
        psi = commutator_realization(self.N, phi, 2, 6)
        assert not psi.is_identity

    def test_psi_fixes_collar(self):
        phi = axis_subtree_factor(self.N, v3(3), cycle_perm(3, 1, 2), 1, 5)
        psi = commutator_realization(self.N, phi, 1, 5)
        cls = classify(self.N)
        for v in psi.mapping:
            if any(distance(v, w) == 0 for w in cls.axis_window.vertices):
                assert psi(v) == v

    def test_rejects_hyperbolic_factor_off_subtree(self):
        cls = classify(self.N)
        c0 = cls.axis_window.vertices[0]
        bad = restrict(S3_INV, c0, 6 + 2 * cls.translation_length)
        with pytest.raises(PreconditionError):
            commutator_realization(self.N, bad, 1, 6)

    def test_rejects_elliptic_n(self):
        phi = identity_ball_aut(B3, 8)
        with pytest.raises(PreconditionError):
            commutator_realization(S1.compose(S1), phi, 1, 6)

    def test_radius_guard(self):
        cls = classify(self.N)
        c0 = cls.axis_window.vertices[0]
        small = identity_ball_aut(c0, 3)
        with pytest.raises(PreconditionError):
            commutator_realization(self.N, small, 1, 6)


class TestRigidity:
    def test_exact_a6(self):
        report = rigidity_probe(UniversalGroupSpec(6, alternating_group(6)))
        assert report.a == 6
        assert report.status == "exact"
        assert report.block_certificates

    def test_free_action_a0(self):
        report = rigidity_probe(U_A3)
        assert report.a == 0
        assert "discrete" in report.remark

    def test_trivial_local_group_fails(self):
        with pytest.raises(PreconditionError):
            rigidity_probe(UniversalGroupSpec(3, trivial_group(3)))

    def test_s3_stabilizer_not_simple(self):
        with pytest.raises(PreconditionError):
            rigidity_probe(U_S3)

    def test_word_source_identity_fails(self):
        with pytest.raises(PreconditionError):
            rigidity_probe([identity_aut(3)])


class TestClosureChain:
    def test_universal_constant(self):
        report = closure_chain_probe(U_S3, 3, 3)
        orders = report.orders()
        assert orders[0] == orders[1] == orders[2]
        # the k-oracle stabilizer at full depth is the locally-F count
        assert orders[0] == ball_stabilizer_group(U_S3, 3).group.order == 3072

    def test_universal_a3(self):
        report = closure_chain_probe(U_A3, 2, 3)
        assert report.orders() == [3, 3]

    def test_cyclic_gens_collapse(self):
        report = closure_chain_probe([S1.compose(S2)], 2, 2, word_budget=6)
        assert report.orders() == [1, 1]
        assert report.exact is False

    def test_bs_orders_small_depth(self):
        report = closure_chain_probe(BS23, 2, 2)
        assert report.orders() == [648, 36]
        assert report.rows[1].strict_decrease

    def test_bs_against_stitched_oracle(self):
        pool = bs_word_pool(BS23, 2, 40)
        assert bs_stitched_order(BS23, 1, 2, pool) == 648
        assert bs_stitched_order(BS23, 2, 2, pool) == 36

    def test_bs_strict_decrease_depth3(self):
        report = closure_chain_probe(BS23, 2, 3)
        orders = report.orders()
        assert orders[0] > orders[1]
        assert report.rows[1].certificate is not None

    def test_monotone_always(self):
        for source in (U_S3, U_A3, BS23):
            report = closure_chain_probe(source, 3, 3)
            orders = report.orders()
            assert all(a >= b for a, b in zip(orders, orders[1:]))


class TestBSSeparator:
    def test_k1_separator_exists(self):
        sep = bs_separating_element(BS23, 1, 3)
        assert sep is not None
        # the found element acts by an a-power on one half-tree only
        assert sep.exponent % coset_fix_modulus_of_direction(sep) == 0

    def test_description_mentions_failure(self):
        sep = bs_separating_element(BS23, 1, 3)
        assert "admits no realizing group element" in sep.describe()


def coset_fix_modulus_of_direction(sep):
    from arbor.bass_serre import BSVertex, parse_bs_word

    word = parse_bs_word(BS23, sep.direction.removesuffix("⟨a⟩"))
    return coset_fix_modulus(BSVertex.of(word))


class TestBallAutSerialization:
    def test_round_trip(self):
        for g, center, radius in ((S1, B3, 2), (S1.compose(S2), v3(1), 1)):
            p = restrict(g, center, radius)
            assert BallAut.from_text(p.to_text(), 3) == p

    def test_lexicographic_lines(self):
        p = restrict(S1, B3, 1)
        lines = p.to_text().splitlines()
        assert lines[0] == "center="
        assert lines[1] == "radius=1"
        sources = [line.split(" → ")[0] for line in lines[2:]]
        assert sources == sorted(sources)

    def test_validate_accepts_restrictions(self):
        restrict(S1.compose(S2), B3, 2).validate()


class TestMinimalSubtree:
    def test_single_axis(self):
        hull = minimal_subtree_approx([S1.compose(S2)], 3, radius=3)
        assert v3(1) in hull and B3 in hull and v3(2) in hull
        assert v3(3) not in hull
        # periodic continuation within the ball
        assert v3(1, 2) in hull and v3(2, 1) in hull

    def test_free_product_fills_ball(self):
        hull = minimal_subtree_approx([S1, S2, S3_INV], 4, radius=2)
        assert set(ball(B3, 1)) <= hull

    def test_identity_raises(self):
        with pytest.raises(PurelyEllipticSoFar):
            minimal_subtree_approx([identity_aut(3)], 3)
