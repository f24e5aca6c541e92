"""Numerics for the two-periodic Gumovski-Mira recurrences

    x_{n+2} = -x_n + x_{n+1} / (beta_n + x_{n+1}^2)        (G family)
    x_{n+2} = -x_n + alpha_n x_{n+1} / (1 + x_{n+1}^2)     (F family)

with ``beta_n`` (or ``alpha_n``) alternating between ``a`` and ``b``.
"""

__version__ = "0.1.0"

from .dynamics import (Direction, Family, MapSpec, OrbitSample, ParamPair, PlanePoint, Regime,
                       conjugacy_psi, iterate, recurrence_sequence, step_composed, step_elem_F,
                       step_elem_G, step_inverse)
from .errors import GumiraError
from .invariants import IntegralSpec, drift_profile, eval_integral, shift_identity_check
from .geometry import (Branch, IntervalSet, Topology, critical_values, fixed_points, level_projection,
                       level_topology, point_on_level)
from .rotation import estimate_winding, flow_rotation, limit_rho, spec_DG_origin
from .periods import admissible_periods, detect_period, find_level_with_rho, two_periodic_locus
from .classify import adherence_intervals, classify_behavior, homoclinic_decay, persistence_check
from .invsearch import build_constraints, search_invariant, solve_nullspace, verify_invariant
from .local import birkhoff_sigma, eigen_origin_F, local_report, resonance_check
