"""Scattering matrices of Schrodinger operators on non-compact metric graphs."""

from .direct import (ConsistencyError, DegenerateError, ScatteringMatrix, interior_kernel,
                     ray_lagrange_plane, scattering_direct)
from .edge import (BoundaryData, asymptotic_form_eval, jost_boundary_data, standard_solutions_at,
                   transfer_matrix)
from .factorization import (BlockLayout, ConditionAError, EmbeddedEigenvalue, assemble_block_S,
                            assemble_T, compose, compose_graph, compose_lagrange, compose_many,
                            embedded_eigenvalue_scan, h_blocks, link_all)
from .graph import (DecompositionError, Edge, GraphError, Link, LinkSpec, MetricGraph,
                    PiecewisePotential, Ray, VertexConditions, kirchhoff_conditions,
                    star_decomposition, validate)
from .symplectic import (CanonicalBasisChange, HermitianForm, Subspace, SymplecticError, form_eval,
                         is_isotropic, is_lagrange, lagrange_from_unitary, orthogonal_complement,
                         project_lagrange, quotient_space, unitary_from_lagrange)

__version__ = "0.1.0"
