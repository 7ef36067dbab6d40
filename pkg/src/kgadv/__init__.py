"""kgadv: adversarial training of knowledge-graph embeddings.

A generator network proposes tail-entity vectors for (head, relation)
queries; a discriminator scores triples. Both share the entity and
relation embedding tables and are trained in a two-player minimax game.
Evaluation covers filtered link-prediction ranking and per-relation
threshold classification.
"""

__version__ = "0.1.0"

from ._kernels import IMPL as kernel_impl

__all__ = ["kernel_impl", "__version__"]
