"""fslab: a numerical laboratory for formed complex vector spaces.

Core objects: epsilon-symmetric formed spaces and their isometry groups
(`fslab.forms`), cross-ratio invariants of isotropic configurations
(`fslab.crossratios`), canonical reduction of 3/4/5-point configurations
(`fslab.reduction`), the Bloch-Wigner dilogarithm and its functional
equations (`fslab.dilog`), volume cocycles on affine flags (`fslab.flags`),
and norm bookkeeping plus Monte Carlo sup estimation (`fslab.norms`).

Every identity the library implements is re-verified numerically by the
`fslab verify` command and by the test suite.
"""

__version__ = "0.1.0"

from .forms import (  # noqa: F401
    ADMISSIBLE,
    TOL_GENERIC,
    TOL_GROUP,
    TOL_REDUCE,
    TOL_VALUE,
    FormedSpace,
    GroupElement,
    ProjPoint,
    chordal_distance,
    complement_hat,
    embed_iota,
    is_in_group,
    make_space,
    normalize_projective,
    omega,
    principal_sqrt,
    proj_hyperbolic,
    qform,
    random_group_element,
    random_isotropic,
    witt_complete,
)
from .crossratios import (  # noqa: F401
    ConfigTuple,
    GenericityCertificate,
    GenericityError,
    cross_ratios4,
    cross_ratios5,
    delta_disc,
    delta_sqrt,
    derived_c2,
    gamma_lin,
    genericity,
    perm4_identity_residuals,
    phi_eta,
    pi3,
    pi4,
    psi_eta,
    quint_identity_residuals,
    random_generic_tuple,
)
from .dilog import (  # noqa: F401
    BoundedFunction2,
    bloch_wigner,
    d3_infinity,
    dilog_symmetry_residuals,
    li2,
    spence_abel_residual,
    v_max,
    vol_p1,
    vol_p1_batch,
)
from .reduction import (  # noqa: F401
    ReductionResult,
    map_vector,
    min_rank,
    phi2,
    phi3,
    phi4,
    reduce_quadruple,
    reduce_quintuple,
    reduce_triple,
    so4_rank2_relation,
    x0_vector,
)
from .flags import (  # noqa: F401
    AffineFlag,
    BoundaryPoint,
    Sigma3Class,
    b4_so4,
    b4_so4_batch,
    b_n,
    b_n_j,
    cocycle_residual,
    contributing_j,
    general_position,
    random_flag,
    random_flag_tuple,
    rho_flag,
    standard_flags_so4,
    t_j,
    vol_sigma3,
)
from .norms import (  # noqa: F401
    FamilyTag,
    NormStatement,
    bn_coefficient,
    dynkin_index,
    estimate_sup,
    family_norm,
    gromov_norm_bn,
    operator_norm_res2,
    sup_problem,
)
from .report import CheckRecord, Report  # noqa: F401
from .suites import SUITES, run_suite  # noqa: F401
