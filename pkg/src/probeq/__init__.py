"""Exact and randomized equivalence checking for weighted automata, cost
automata with counters, and weighted visibly pushdown automata."""

from .circuits import (ArithmeticCircuit, CircuitBuilder, Gate, LayeredCircuit, acit_test,
                       canonical_scale, canonical_word, circuit_eval_exact, circuit_eval_mod,
                       eliminate_sub, normalize_circuit, squaring_chain)
from .cost import (CostAutomaton, cost_equivalence, deterministic_zeroness, distribution,
                   epsilon_star, substitute, validate)
from .cost import randomized_zeroness as cost_randomized_zeroness
from .documents import Document, parse_document, print_document
from .errors import *  # noqa: F401,F403
from .isolating import extract_counterexample, iso_polynomial, randomized_equivalence, randomized_zeroness
from .numerics import LaurentPoly, QMatrix, Rational, RowSpace, UniPoly, mat_inverse, rat
from .reductions import (MatrixSumCircuit, acit_to_vpa_equivalence, circuit_to_vpa, stabilization_index,
                         sum_circuit, trim, vpa_equivalence)
from .verdict import Verdict
from .vpa import (VisiblyAlphabet, WeightedVPA, WellMatchedWord, parse_well_matched, product,
                  sample_well_matched, vpa_weight, well_matched_level)
from .weighted import (WeightedAutomaton, brute_force_zeroness, difference, equivalence, tzeng_zeroness,
                       weight)

__version__ = "0.1.0"
