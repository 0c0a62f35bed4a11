"""Polynomial differential forms on simplicial meshes.

Two families of finite element spaces for k-forms, the discrete complexes
they assemble into, Hodge-Laplace source and eigenvalue solvers, harmonic
forms and cohomology, plus a composite stress/displacement pair for planar
elasticity.
"""

from .complexes import DiscreteComplex, complex_for
from .elasticity import ElasticityPair, stress_element
from .hodge import (
    EigenResult,
    MixedPair,
    SourceSolution,
    fit_rates,
    measure_infsup,
    solve_B_star,
    solve_eigen,
    solve_source,
    source_error_norms,
)
from .mesh import SimplicialMesh, generate, perturb, refine_uniform
from .polyforms import (
    PolyForm,
    SpaceSpec,
    all_sequences,
    basis_for,
    build_sequence,
    space_dimension,
)
from .reference import ReferenceElement, reference_element, whitney_form
from .spaces import FESpace, FormSampler, assemble_space

__version__ = "0.1.0"

__all__ = [
    "DiscreteComplex",
    "EigenResult",
    "ElasticityPair",
    "FESpace",
    "FormSampler",
    "MixedPair",
    "PolyForm",
    "ReferenceElement",
    "SimplicialMesh",
    "SourceSolution",
    "SpaceSpec",
    "all_sequences",
    "assemble_space",
    "basis_for",
    "build_sequence",
    "complex_for",
    "fit_rates",
    "generate",
    "measure_infsup",
    "perturb",
    "refine_uniform",
    "reference_element",
    "solve_B_star",
    "solve_eigen",
    "solve_source",
    "source_error_norms",
    "space_dimension",
    "stress_element",
    "whitney_form",
]
