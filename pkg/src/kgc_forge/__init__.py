"""kgc-forge: knowledge graph completion toolkit.

Triples rendered as token sequences, scored by pluggable models (native text
classifier, TransE, DistMult, or an external scorer over a wire protocol),
evaluated with filtered ranking for triple classification, link prediction,
and relation prediction.
"""

from .kg import (
    Cardinality,
    Interner,
    KgcError,
    KnowledgeGraph,
    RelationCardinality,
    Side,
    Triple,
    intern_triples,
    relation_cardinality,
)
from .ingest import DatasetBundle, literalize, load_dataset, parse_triples_file, split_triples
from .sampling import LabeledTriple, SaturationError, corrupt, negative_batch
from .textgen import InputSequence, Token, element_sentence, pair_sequence, triple_sequence
from .training import TrainConfig, TrainedModel, TrainingDivergedError, train
from .evaluation import (
    EvalReport,
    RankResult,
    aggregate,
    classification_accuracy,
    rank_link,
    rank_relation,
)

__version__ = "0.1.0"
