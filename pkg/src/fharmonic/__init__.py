"""F-harmonic maps into spheres and their F-energy along conformal flows."""
from .errors import (
    ConfigurationError, ContractViolation, FHarmonicError, NumericConsistencyError,
    NumericError, PreconditionError, ProfileError,
)
from .manifold import build_sphere_domain, build_torus_domain, integrate, orthonormal_frame
from .sphere_target import (
    ConformalDiffeo, ConformalFlow, compose_diffeo, conformal_factor, flow_apply,
    flow_ode_oracle, vbar,
)
from .smooth_map import (
    SmoothMap, clifford_map, compose_with_flow, compute_fields, constant_map, differential,
    equator_map, identity_map, latitude_map,
)
from .profiles import (
    admissibility_B, check_tensor_comparison, make_exp_type, make_power, make_sacks_uhlenbeck,
)
from .functionals import (
    f_energy, f_energy_composed, f_tension, first_variation, stress_field,
)
from .variation import (
    energy_sweep, fd_derivative_oracle, lemma2_rhs, lemma3_g, phi_chi_decomposition,
    verify_theorem,
)

__version__ = "0.1.0"
