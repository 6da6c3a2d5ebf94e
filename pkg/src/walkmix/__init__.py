"""Average mixing matrices of Szegedy quantum walks on finite Markov chains."""

__version__ = "0.1.0"

from .chain import (
    ChainClassification,
    Discriminant,
    MarkovChain,
    classify,
    discriminant,
    load_chain,
    verify_similarity,
)
from .constructions import (
    Automorphism,
    check_automorphism,
    find_automorphisms,
    prime_family_chain,
    tensor_product,
    two_state_chain,
)
from .mixing import (
    MixingMatrix,
    PropertyReport,
    continuous_mixing_closed,
    continuous_mixing_numerical,
    is_uniform_mixing,
    mixing_closed,
    mixing_empirical,
    mixing_from_walk_idempotents,
    uniform_mixing_criterion,
    verify_properties,
)
from .spectral import SpectralDecomposition, decompose, flat_eigenvector_test, reconstruct
from .walk import (
    SzegedyWalk,
    WalkIdempotents,
    arc_distribution,
    build_walk,
    evolve,
    vertex_marginal,
    walk_idempotents,
    walk_idempotents_direct,
)
