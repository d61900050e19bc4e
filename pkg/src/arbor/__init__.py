"""arbor: exact computation in groups of labelled-tree automorphisms.

Vertices are label words from a fixed base vertex; automorphisms are
finitely supported local-action cocycles (change points of an eventually
constant cocycle); everything downstream — classification, universal-group
membership, stabilizer towers, truncated independence and closure checks,
the Baumslag-Solitar counterexample — is exact integer combinatorics
behind explicit caps.
"""

from .autom import (
    Classification,
    FinitaryAut,
    Kind,
    classify,
    common_fixed_vertex,
    displacement,
    fixed_set_in_ball,
    hyperbolic_in_half_tree,
    identity_aut,
    label_respecting,
    sigma,
    tits_product_check,
)
from .ballaut import BallAut
from .bass_serre import (
    BSParams,
    BSVertex,
    BSWord,
    bs_act,
    bs_neighbors,
    britton_reduce,
    pk_failure_witness,
)
from .errors import ArborError, CapExceeded, DegreeMismatch, ParseError, PreconditionError
from .local import (
    LocalProfile,
    build_profile,
    closure_chain_probe,
    commutator_realization,
    in_k_closure,
    minimal_subtree_approx,
    p_k_independence_check,
    restrict,
    rigidity_probe,
    universal_profile,
)
from .perm import Perm, PermGroup
from .tree import DirectedEdge, HalfTreeSpec, PathSpec, Vertex, base_vertex
from .universal import (
    UniversalGroupSpec,
    ball_stabilizer_group,
    in_universal,
    local_action,
    nondiscreteness_witness,
    relabel_conjugator,
    sample_stabilizer,
    tower,
    tower_isomorphism_check,
    transitivity_witness,
)

__version__ = "0.1.0"

__all__ = [
    "ArborError", "BSParams", "BSVertex", "BSWord", "BallAut",
    "CapExceeded", "Classification", "DegreeMismatch", "DirectedEdge",
    "FinitaryAut", "HalfTreeSpec", "Kind", "LocalProfile", "ParseError",
    "PathSpec", "Perm", "PermGroup", "PreconditionError",
    "UniversalGroupSpec", "Vertex", "ball_stabilizer_group", "base_vertex",
    "britton_reduce", "bs_act", "bs_neighbors", "build_profile",
    "classify", "closure_chain_probe", "common_fixed_vertex",
    "commutator_realization", "displacement", "fixed_set_in_ball",
    "hyperbolic_in_half_tree", "identity_aut", "in_k_closure",
    "in_universal", "label_respecting", "local_action",
    "minimal_subtree_approx", "nondiscreteness_witness",
    "p_k_independence_check", "pk_failure_witness", "relabel_conjugator",
    "restrict", "rigidity_probe", "sample_stabilizer", "sigma", "tower",
    "tower_isomorphism_check", "transitivity_witness", "tits_product_check",
    "universal_profile",
]
