"""Exact symbolic computation with quasi-local multivectors, their bracket and transformations."""
from .errors import *  # noqa: F401,F403
from .ring import (SuperPoly, TruncationPolicy, degree_decompose, from_json, parse, partial_theta,
                   partial_u, partial_zeta, substitute, to_json, to_text, total_derivative, truncate)
from .varcalc import (Functional, LocalityWitness, energy, energy_s, homotopy_reconstruct,
                      invert_total_derivative, local_normal_form, locality_witness, momentum,
                      variational_derivative, zero_test, zero_test_report)
from .bracket import (MultiVector, OperatorMatrix, bivector_from_operator, check_compatible,
                      check_jacobi, evaluate, nr_bracket_eval, operator_from_bivector, sn_bracket,
                      split_zeta)
from .transform import (MiuraMap, ReciprocalMap, miura_second_kind, miura_transform,
                        reciprocal_second_kind, reciprocal_transform)
from .geometry import (HydroStructure, central_invariants, charge_report, check_fera, check_locality,
                       curvature, extract_hydro, fera_transform, hydro_bivector, levi_civita_structure,
                       nonlocal_charge)
from .integrable import Hierarchy, hamiltonian_flow, lenard_step, verify_involution

__version__ = "0.1.0"
