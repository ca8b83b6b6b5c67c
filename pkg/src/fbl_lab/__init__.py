"""fbl-lab: norms in free p-convex Banach lattices over finite-dimensional spaces."""
from .errors import FblLabError, NumericalError, ValidationError
from .estimate import NormEstimate
from .spaces import NormedSpace, conjugate, dual_norm, norm, quasi_norm_pinfty
from .fvl import LatticeExpr, absval, add, delta, psum, scale, vmax, vmin
from .fblnorm import FunctionalTuple, fbl_p_lower, fbl_p_upper, fbl_p_upper_lp, sandwich_bounds, weak_p_norm
from .duals import AtomCombination, atom_norm_fbl_p, atom_norm_upper_p_bound, pair
from .pap import ControllingFamilySpec, apply_P, build_partition, verify_pap_bound

__version__ = "0.1.0"

__all__ = [
    "FblLabError", "NumericalError", "ValidationError", "NormEstimate",
    "NormedSpace", "conjugate", "dual_norm", "norm", "quasi_norm_pinfty",
    "LatticeExpr", "absval", "add", "delta", "psum", "scale", "vmax", "vmin",
    "FunctionalTuple", "fbl_p_lower", "fbl_p_upper", "fbl_p_upper_lp", "sandwich_bounds",
    "weak_p_norm", "AtomCombination", "atom_norm_fbl_p", "atom_norm_upper_p_bound", "pair",
    "ControllingFamilySpec", "apply_P", "build_partition", "verify_pap_bound",
]
