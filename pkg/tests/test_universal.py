import itertools

import pytest

from arbor.autom import FinitaryAut, identity_aut, sigma
from arbor.errors import CapExceeded, PreconditionError
from arbor.perm import (
    PermGroup,
    alternating_group,
    cycle_perm,
    symmetric_group,
    trivial_group,
)
from arbor.tree import Vertex, ball, base_vertex, sphere
from arbor.universal import (
    UniversalGroupSpec,
    ball_stabilizer_group,
    default_labelling,
    freeproduct_normal_form,
    in_universal,
    local_action,
    local_action_from_evaluation,
    nondiscreteness_witness,
    relabel_conjugator,
    sample_stabilizer,
    tower,
    tower_isomorphism_check,
    transitivity_witness,
    word_of_inversions,
)

B3 = base_vertex(3)
S1, S2, S3_INV = sigma(3, 1), sigma(3, 2), sigma(3, 3)
U_S3 = UniversalGroupSpec(3, symmetric_group(3))
U_A3 = UniversalGroupSpec(3, alternating_group(3))
U_TRIV = UniversalGroupSpec(3, trivial_group(3))


def v3(*labels):
    return Vertex(3, labels)


class TestLocalAction:
    def test_identity(self):
        for x in ball(B3, 2):
            assert local_action(identity_aut(3), x).is_identity

    def test_sigma_label_respecting(self):
        assert local_action(S1, B3).is_identity

    def test_lookup(self):
        g = FinitaryAut.make(3, B3, {v3(1): cycle_perm(3, 2, 3)})
        assert local_action(g, v3(1)) == cycle_perm(3, 2, 3)

    def test_cross_check_with_evaluation(self):
        elements = [identity_aut(3), S1, S1.compose(S2),
                    FinitaryAut.make(3, B3, {B3: cycle_perm(3, 1, 2)}),
                    FinitaryAut.make(3, v3(2), {v3(1): cycle_perm(3, 2, 3)})]
        for g in elements:
            for x in ball(B3, 2):
                assert local_action(g, x) == local_action_from_evaluation(g, x)


class TestMembership:
    def test_examples(self):
        assert in_universal(S1, U_A3) is True
        assert in_universal(FinitaryAut.make(3, B3, {B3: cycle_perm(3, 1, 2)}), U_A3) is False
        assert in_universal(FinitaryAut.make(3, B3, {B3: cycle_perm(3, 1, 2, 3)}), U_A3) is True

    def test_u_sym_is_everything(self):
        for g in (S1, S2.compose(S1), FinitaryAut.make(3, v3(1), {B3: cycle_perm(3, 1, 2)})):
            assert in_universal(g, U_S3)

    def test_closed_under_group_ops(self):
        # U(A_3) is rigid: A_3 acts freely, so no entry can sit below
        # another (nothing in A_3 fixes an inherited image); elements carry
        # at most an entry at b
        g = FinitaryAut.make(3, v3(1), {B3: cycle_perm(3, 1, 2, 3)})
        h = FinitaryAut.make(3, v3(2, 3), {B3: cycle_perm(3, 1, 3, 2)})
        assert in_universal(g, U_A3) and in_universal(h, U_A3)
        assert in_universal(g.compose(h), U_A3)
        assert in_universal(g.inverse(), U_A3)

    def test_free_local_group_admits_no_nested_entries(self):
        with pytest.raises(PreconditionError):
            FinitaryAut(3, B3, ((v3(2), cycle_perm(3, 1, 3, 2)),))


class TestTransitivityWitness:
    def test_examples(self):
        assert transitivity_witness(U_A3, B3) == identity_aut(3)
        assert transitivity_witness(U_A3, v3(1)) == S1

    def test_word_of_inversions_agrees(self):
        target = v3(1, 2)
        g = transitivity_witness(U_TRIV, target)
        assert g.apply(B3) == target
        word = word_of_inversions(3, target.address)
        for v in ball(B3, 4):
            assert g.apply(v) == word.apply(v)

    def test_always_member(self):
        assert in_universal(transitivity_witness(U_TRIV, v3(2, 1, 3)), U_TRIV)


class TestFreeProduct:
    def test_normal_form_examples(self):
        assert freeproduct_normal_form(identity_aut(3)) == ()
        g = word_of_inversions(3, (2, 1))
        assert g.base_image == v3(2, 1)
        assert freeproduct_normal_form(g) == (2, 1)
        h = word_of_inversions(3, (1, 2, 1))
        assert freeproduct_normal_form(h) == (1, 2, 1)

    def test_rejects_cocycle(self):
        with pytest.raises(PreconditionError):
            freeproduct_normal_form(FinitaryAut.make(3, B3, {B3: cycle_perm(3, 1, 2)}))

    def test_no_short_word_is_identity(self):
        # the length <= 12 exhaustive sweep lives in the acceptance suite
        for length in range(1, 7):
            for word in itertools.product((1, 2, 3), repeat=length):
                if any(a == b for a, b in zip(word, word[1:])):
                    continue
                g = word_of_inversions(3, word)
                assert g.base_image == Vertex(3, word)
                assert not g.is_identity


class TestNondiscretenessWitness:
    def test_s3_witness(self):
        for n in (1, 2):
            g = nondiscreteness_witness(U_S3, n)
            assert g is not None and in_universal(g, U_S3)
            for v in ball(B3, n):
                assert g.apply(v) == v
            assert any(g.apply(v) != v for v in sphere(B3, n + 1))

    def test_free_actions_have_none(self):
        assert nondiscreteness_witness(U_A3, 1) is None
        assert nondiscreteness_witness(U_A3, 3) is None
        assert nondiscreteness_witness(U_TRIV, 2) is None

    def test_dichotomy_matches_freeness(self):
        groups = [symmetric_group(3), alternating_group(3), trivial_group(3),
                  PermGroup.from_generators([cycle_perm(3, 1, 2)])]
        for F in groups:
            spec = UniversalGroupSpec(3, F)
            witness = nondiscreteness_witness(spec, 1)
            assert (witness is not None) == (not F.is_free_action())


class TestTower:
    def test_level_one_is_f(self):
        lvl = tower(U_S3, 1)
        assert lvl.order == 6
        assert lvl.domain == ((1,), (2,), (3,))

    def test_s3_level_two_order(self):
        lvl = tower(U_S3, 2)
        assert lvl.order == 48
        assert lvl.order == lvl.closed_form_order(U_S3)

    def test_a3_levels(self):
        for n in (1, 2, 3):
            lvl = tower(U_A3, n)
            assert lvl.order == 3

    def test_requires_transitive(self):
        with pytest.raises(PreconditionError):
            tower(UniversalGroupSpec(3, PermGroup.from_generators([cycle_perm(3, 1, 2)])), 2)

    def test_cap(self):
        with pytest.raises(CapExceeded):
            tower(U_S3, 3, cap=100)

    def test_projection_compatibility(self):
        lvl = tower(U_S3, 2)
        lower = lvl.previous
        projected = {lvl.project_images(p) for p in lvl.group.elements}
        assert projected == set(lower.group.elements)

    def test_anchors_send_label_to_top(self):
        lvl = tower(U_S3, 2)
        for i, a in lvl.anchors:
            assert a(i) == 3


class TestBallStabilizerOracle:
    def test_n1_realizes_f(self):
        oracle = ball_stabilizer_group(U_S3, 1)
        assert oracle.group.order == 6

    def test_s3_n2_derived(self):
        assert ball_stabilizer_group(U_S3, 2).group.order == 48

    def test_free_action_rigid(self):
        assert ball_stabilizer_group(U_A3, 3).group.order == 3

    def test_edge_transitivity_iff_transitive(self):
        # ball stabilizer acts transitively on S(b,1) iff F is transitive
        for F in (symmetric_group(3), alternating_group(3),
                  PermGroup.from_generators([cycle_perm(3, 1, 2)]), trivial_group(3)):
            oracle = ball_stabilizer_group(UniversalGroupSpec(3, F), 1)
            assert oracle.group.is_transitive() == F.is_transitive()


class TestTowerIsomorphism:
    @pytest.mark.parametrize("spec,n", [
        (U_S3, 1), (U_S3, 2), (U_A3, 2), (U_A3, 3),
        (UniversalGroupSpec(4, symmetric_group(4)), 1),
    ])
    def test_matches(self, spec, n):
        assert tower_isomorphism_check(spec, n) is True

    def test_closed_form_matches_oracle_on_grid(self):
        d4 = PermGroup.from_generators([cycle_perm(4, 1, 2, 3, 4), cycle_perm(4, 1, 3)])
        assert d4.order == 8
        grid = [
            (UniversalGroupSpec(3, symmetric_group(3)), (1, 2, 3)),
            (UniversalGroupSpec(3, alternating_group(3)), (1, 2, 3, 4)),
            (UniversalGroupSpec(4, symmetric_group(4)), (1, 2)),
            (UniversalGroupSpec(4, d4), (1, 2)),
        ]
        for spec, levels in grid:
            for n in levels:
                level = tower(spec, n)
                assert level.order == level.closed_form_order(spec)
                assert level.order == ball_stabilizer_group(spec, n).group.order

    def test_d4_level2_value(self):
        # |F(2)| = |D_4|·|stab(4)|^4 = 8·2^4
        d4 = PermGroup.from_generators([cycle_perm(4, 1, 2, 3, 4), cycle_perm(4, 1, 3)])
        assert tower(UniversalGroupSpec(4, d4), 2).order == 128

    def test_anchor_choice_is_lex_least(self):
        lvl = tower(U_S3, 1)
        anchors = dict(lvl.anchors)
        for i, anchor in anchors.items():
            candidates = sorted(p for p in symmetric_group(3).elements if p(i) == 3)
            assert anchor == candidates[0]


class TestSampling:
    def test_n0_identity(self):
        s = sample_stabilizer(U_S3, 0, seed=7)
        assert s.mapping == {B3: B3}

    def test_deterministic(self):
        a = sample_stabilizer(U_S3, 2, seed=42)
        b = sample_stabilizer(U_S3, 2, seed=42)
        c = sample_stabilizer(U_S3, 2, seed=43)
        assert a == b
        assert a != c

    def test_free_action_values(self):
        seen = {sample_stabilizer(U_A3, 2, seed=s).pairs for s in range(40)}
        assert len(seen) == 3

    def test_samples_lie_in_oracle(self):
        oracle = ball_stabilizer_group(U_S3, 2)
        pos = {v: i for i, v in enumerate(oracle.sphere_vertices, start=1)}
        for seed in range(25):
            s = sample_stabilizer(U_S3, 2, seed=seed)
            images = [0] * len(oracle.sphere_vertices)
            for v in oracle.sphere_vertices:
                images[pos[v] - 1] = pos[s(v)]
            from arbor.perm import Perm
            assert Perm(len(images), tuple(images)) in oracle.group.elements

    def test_uniformity_chi_square(self):
        from scipy.stats import chi2

        oracle = ball_stabilizer_group(U_S3, 2)
        pos = {v: i for i, v in enumerate(oracle.sphere_vertices, start=1)}
        cells = {g: 0 for g in oracle.group.elements}
        draws = 20_000
        for seed in range(draws):
            s = sample_stabilizer(U_S3, 2, seed=seed)
            images = [0] * len(oracle.sphere_vertices)
            for v in oracle.sphere_vertices:
                images[pos[v] - 1] = pos[s(v)]
            from arbor.perm import Perm
            cells[Perm(len(images), tuple(images))] += 1
        expected = draws / 48
        stat = sum((c - expected) ** 2 / expected for c in cells.values())
        # threshold p > 0.001 on 47 degrees of freedom
        assert stat < chi2.ppf(0.999, 47)


class TestRelabelConjugator:
    def test_identity_labelling(self):
        tau = relabel_conjugator(default_labelling(3, 2), 3, 2)
        assert tau.is_identity

    def test_swap_labels_12(self):
        swap = {1: 2, 2: 1, 3: 3}
        labelling = {v: swap[v.address[-1]] for v in ball(B3, 2) if not v.is_base}
        tau = relabel_conjugator(labelling, 3, 2)
        # order 2 and l' = l∘τ
        assert tau.compose(tau).is_identity
        for v in ball(B3, 2):
            if not v.is_base:
                image = tau(v)
                assert image.address[-1] == labelling[v]

    def test_rejects_illegal(self):
        labelling = default_labelling(3, 2)
        bad = dict(labelling)
        bad[v3(1)] = 2
        bad[v3(2)] = 2
        with pytest.raises(PreconditionError):
            relabel_conjugator(bad, 3, 2)

    def test_uniqueness_exhaustive(self):
        # build a legal labelling as l' = l∘g for one of the 48 ball
        # automorphisms; exactly one τ satisfies the defining property
        g = _enumerate_ball_autos_fixing_b()[7]
        labelling = {v: g[v].address[-1] for v in ball(B3, 2) if not v.is_base}
        tau = relabel_conjugator(labelling, 3, 2)
        count = 0
        for mapping in _enumerate_ball_autos_fixing_b():
            if all(mapping[v].address[-1] == labelling[v]
                   for v in ball(B3, 2) if not v.is_base):
                count += 1
                assert mapping == tau.mapping
        assert count == 1
        assert tau.mapping == g


def _enumerate_ball_autos_fixing_b():
    """All 48 automorphisms of B(b,2) in T_3 fixing b, as full-ball maps."""
    from arbor.perm import full_symmetric_elements

    out = []
    perms = sorted(full_symmetric_elements(3))
    level1 = sphere(B3, 1)
    for c_b in perms:
        stacks = []
        for x in level1:
            inward = x.address[-1]
            allowed = [p for p in perms if p(inward) == c_b(inward)]
            stacks.append(allowed)
        for combo in itertools.product(*stacks):
            mapping = {B3: B3}
            chosen = {B3: c_b}
            for x, p in zip(level1, combo):
                chosen[x] = p
            for v in ball(B3, 2):
                out_addr = []
                prefix = B3
                for a in v.address:
                    out_addr.append(chosen[prefix](a))
                    prefix = prefix.child(a)
                mapping[v] = Vertex(3, tuple(out_addr))
            out.append(mapping)
    return out
