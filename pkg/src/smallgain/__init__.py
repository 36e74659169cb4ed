"""Small-gain certification and ISS Lyapunov construction for networks."""

from .compose import MODES, CompositeLyapunov, SubsystemSpec, compose, derive_phi
from .errors import SmallGainError
from .gains import (
    Atan,
    BlockMaxSum,
    Compose,
    DiagOp,
    GainClass,
    GainExpr,
    GainNetwork,
    Linear,
    Max,
    MaxAgg,
    OuterSum,
    PlusId,
    Power,
    Saturating,
    Sum,
    SumAgg,
    Zero,
    TOL_STRICT,
    classify_gain,
    eval_gain,
    eval_operator,
    eval_operator_ext,
    invert_gain,
    strictly_less,
)
from .parser import format_gain, parse_gain
from .paths import (
    OmegaPath,
    PathReport,
    construct_path,
    export_path_csv,
    path_bounded,
    path_homogeneous,
    path_irreducible,
    path_max,
    path_mixed,
    path_reducible,
    path_three_sum,
    validate_path,
)
from .sgc import (
    GridSpec,
    SgcVerdict,
    check_cycle_condition,
    check_linear_spectral,
    check_strong_sgc,
    falsify_sgc,
    nonlinear_perron,
)
from .simulate import (
    CohenGrossberg,
    DecreaseSpec,
    InputSignal,
    IssRunSpec,
    LinearBlock,
    Trajectory,
    cg_demo,
    cg_gains,
    certify_cg,
    certify_linear,
    check_decrease,
    check_iss_bound,
    export_trajectory_csv,
    integrate,
    linear_demo,
    linear_gains,
    solve_lyapunov_eq,
)

__all__ = [
    "Atan",
    "BlockMaxSum",
    "CohenGrossberg",
    "Compose",
    "CompositeLyapunov",
    "DecreaseSpec",
    "DiagOp",
    "GainClass",
    "GainExpr",
    "GainNetwork",
    "GridSpec",
    "InputSignal",
    "IssRunSpec",
    "Linear",
    "LinearBlock",
    "MODES",
    "Max",
    "MaxAgg",
    "OmegaPath",
    "OuterSum",
    "PathReport",
    "PlusId",
    "Power",
    "Saturating",
    "SgcVerdict",
    "SmallGainError",
    "SubsystemSpec",
    "Sum",
    "SumAgg",
    "TOL_STRICT",
    "Trajectory",
    "Zero",
    "cg_demo",
    "cg_gains",
    "certify_cg",
    "certify_linear",
    "check_cycle_condition",
    "check_decrease",
    "check_iss_bound",
    "check_linear_spectral",
    "check_strong_sgc",
    "classify_gain",
    "compose",
    "construct_path",
    "derive_phi",
    "eval_gain",
    "eval_operator",
    "eval_operator_ext",
    "export_path_csv",
    "export_trajectory_csv",
    "falsify_sgc",
    "format_gain",
    "integrate",
    "invert_gain",
    "linear_demo",
    "linear_gains",
    "nonlinear_perron",
    "parse_gain",
    "path_bounded",
    "path_homogeneous",
    "path_irreducible",
    "path_max",
    "path_mixed",
    "path_reducible",
    "path_three_sum",
    "solve_lyapunov_eq",
    "validate_path",
]

__version__ = "0.1.0"
