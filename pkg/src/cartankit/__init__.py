"""cartankit: Maurer-Cartan forms on discretized domains.

Validate ordinary and generalized Maurer-Cartan forms, develop them along
paths into a matrix Lie group, compute the pointed monodromy, reconstruct
primitive maps into a homogeneous space, and test uniqueness up to the
symmetries of the Klein geometry.
"""

from . import (algebroid, config, expressions, klein, liegroup, mesh,
               monodromy, paths, reconstruct, report, testmaps)
from .algebroid import (AlgebroidFiber, MapField, MCFormField, axiom_report,
                        bracket_sections, calibrate_bracket_sign,
                        log_derivative, log_derivative_ordinary,
                        morphism_residual, ordinary_form, pullback_fiber,
                        pullback_form)
from .klein import (GeometrySpec, SymmetryPair, act, apply_symmetry,
                    frenet_curve, frenet_xi, generator, geometry_catalog,
                    get_geometry, group_geometry, is_symmetry_pair,
                    isotropy_algebra, isotropy_contains,
                    weakly_connected_report)
from .liegroup import (GroupSpec, adjoint, bracket, exp, expm_stack, log,
                       make_group_spec, membership_residual)
from .mesh import (MeshDomain, circle_mesh, cycle_basis, grid_mesh,
                   interval_mesh)
from .monodromy import (MonodromyReport, develop_along, pointed_monodromy)
from .paths import (APath, DevelopmentResult, PathPolyline, a_path_from_path,
                    concatenate, develop, smooth_reparam)
from .reconstruct import (MorphismWitness, PrimitiveField, UniquenessVerdict,
                          check_morphism, reconstruct_group_primitive,
                          reconstruct_primitive, uniqueness_up_to_symmetry,
                          verify_principal_primitive)

__version__ = "0.1.0"
