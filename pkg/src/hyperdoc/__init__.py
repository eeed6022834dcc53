"""Finite doctrines: law checkers, constructions, models and a document format."""
from .constructions import (add_axiom, add_constant, directed_colimit, double_negation_fragment,
                            henkin_saturate, henkin_step)
from .doctrine import (Doctrine, DoctrineMorphism, check_morphism, check_rich, check_structure,
                       consistency_status)
from .fixtures import gen_chain_fixture, gen_subset_doctrine
from .io import load, parse_doctrine, serialize_doctrine
from .model import henkin_model_pipeline, quotient_by_filter

__version__ = "0.1.0"
