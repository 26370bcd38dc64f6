"""Audit tooling for greedy stopping-set decomposition of LDPC matrices.

The pipeline under audit: peel a parity-check matrix (``strip``), grow
stopping sets greedily (``ess_finder``), split the matrix into components
(``decompose``), schedule XOR encoder circuits per component and compose
them (``circuit``).  The accounting invariant it is supposed to maintain,
sum of per-component message bits = kernel dimension, fails on a
structured family (``counterexample``) and on random regular ensembles
(``experiments``); this package reproduces both refutations exactly.
"""

from .circuit import (
    CONST0,
    INPUT,
    WIRE,
    XOR,
    Circuit,
    ComposeError,
    EncodeSchedule,
    SolveStep,
    UnencodableComponentError,
    VerifyResult,
    build_circuit,
    circuit_to_json_dict,
    compose,
    component_circuit,
    decomposition_circuit,
    evaluate,
    schedule_pseudo_tree,
    verify_encoder,
)
from .counterexample import (
    an_formula,
    build_An,
    build_Bn,
    build_Dn,
    build_Mn,
    build_Sn,
    family_dimensions,
    leading_index,
    verify_lemma_valid_choices,
    verify_theorem,
)
from .decompose import (
    Component,
    DecompositionReport,
    DepthLimitError,
    decompose,
    find_dependency,
    message_bit_count,
)
from .experiments import (
    EnsembleParams,
    EnsembleResult,
    SampleStuckError,
    TrialOutcome,
    run_ensemble,
    sample_regular,
    write_outcomes_csv,
)
from .gf2 import (
    BitMatrix,
    KernelBasis,
    SubSelection,
    assemble_blocks,
    col_weights,
    kernel_basis,
    kronecker,
    rank,
    row_sum,
    row_weights,
    submatrix,
    suffix_weight,
    transpose,
)
from .matrix_io import (
    canonical_json,
    read_alist,
    read_dense,
    read_matrix,
    write_alist,
    write_dense,
)
from .peel import (
    ChoicePolicy,
    ColumnWeightError,
    EssClassification,
    InOrderPolicy,
    LightestFirstIndexPolicy,
    PeelTrace,
    ScriptedPolicy,
    SeededRandomPolicy,
    SelectionConditionError,
    check_column_weights,
    classify,
    default_labels,
    ess_finder,
    fold_level,
    is_pseudo_tree,
    make_policy,
    strip,
)

__version__ = "0.1.0"
