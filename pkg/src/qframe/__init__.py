"""Frame representations of finite-dimensional quantum mechanics."""

from .exceptions import *  # noqa: F401,F403
from .frames import (
    Frame,
    RepFunction,
    Superoperator,
    basis_frame,
    build_frame,
    canonical_dual,
    covariance_check,
    frame_bounds,
    frame_from_linear_map,
    frame_operator,
    is_dual_pair,
    is_positive_frame,
    leonhardt_frame,
    paper_dual,
    random_frame,
    reconstruct,
    renormalize,
    represent,
    unit_trace_dual,
    wootters_frame,
)
from .nogo import choi_of_pair, identity_choi, min_eig_pt, partial_transpose, positive_dual_witness
from .operator_space import (
    DensityOp,
    Povm,
    born_rule,
    generators,
    herm_basis,
    hs_inner,
    random_povm,
    random_state,
    validate_povm,
    validate_state,
)
from .quasiprob import (
    classicality_check,
    convert_effect_rep,
    deformed_prob,
    negativity,
    rep_effects,
    rep_state,
    total_prob,
)
from .star_algebra import frame_ip, identity_element, is_pure_state_rep, star_kernel, star_product, theta_kernel

__version__ = "0.1.0"
