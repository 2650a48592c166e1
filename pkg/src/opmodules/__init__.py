"""Operator modules over finite-dimensional operator algebras.

Numerical companions for exact structures on categories of operator
modules: kernel-cokernel pairs and their splittings, Haagerup tensor
norms, relative injectivity and projectivity, and the global-dimension-zero
test for semisimple algebras.
"""

from .algebra import (
    OperatorAlgebra,
    SemisimpleBlocks,
    build_from_basis,
    build_semisimple,
    is_semisimple,
    matrix_units,
    radical,
    upper_triangular,
)
from .errors import (
    AlgebraError,
    DefinitionError,
    DimensionError,
    InputError,
    ModuleAxiomError,
    NotAdmissibleError,
    OpModulesError,
    SearchFailedError,
    UnsupportedError,
)
from .exact import (
    KernelCokernelPair,
    SplitCertificate,
    admissible_factorization,
    axiom_suite,
    classify_pair,
    is_kernel_cokernel_pair,
    split_linear,
    split_module,
)
from .haagerup import (
    action_contractivity_check,
    canonical_projection,
    elementary_tensor,
    haagerup_bounds,
    haagerup_norm_bounds,
    tensor_module,
)
from .homology import (
    global_dim_zero_certificate,
    is_rel_injective,
    is_rel_projective,
    non_projective_witness,
    rel_injective_dimension,
    rel_injective_resolution,
    semisimple_retraction,
)
from .modules import (
    ModMorphism,
    OpModule,
    canonical_embedding,
    classify,
    cokernel,
    concrete_module,
    direct_sum_module,
    hom_module,
    kernel,
    make_module,
    make_morphism,
    pullback,
    pushout,
    quotient_module,
    regular_module,
    submodule,
)
from .numerics import DEFAULT_TOLERANCE, TolerancePolicy, min_opnorm_over_coset, solve_affine
from .opspace import (
    LinearMap,
    cb_norm_estimate,
    concrete_space,
    direct_sum,
    quotient_space,
    ruan_check,
    subspace,
)

__version__ = "0.1.0"
