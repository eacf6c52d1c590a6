"""chainlab: exact computations with chains of finite-index subgroups.

Group models with integer-tuple elements, canonical finite-index
subgroups with exact membership and coset enumeration, descending chains
with regularity probes, truncated transitive actions on coset towers,
and word-growth machinery, plus a CLI (``chainlab``) that persists JSON
reports.
"""

from .groups import (
    CoordinateOverflow,
    Elem,
    GroupModel,
    ModelMismatch,
    commutator,
    conjugate,
    free_abelian,
    heisenberg,
    inverse,
    multiply,
    power,
    split_ext,
)
from .subgroups import (
    CosetTable,
    EnumerationCapExceeded,
    FiniteIndexSubgroup,
    NormalizerReport,
    UnsupportedShape,
    check_subgroup,
    closure_oracle,
    contains,
    enumerate_cosets,
    generators,
    intersect,
    members_in_box,
    normalizer,
    row_divisibility_criterion,
)
from .chains import (
    GroupChain,
    IrregularityWitness,
    RegularityReport,
    explicit_chain,
    heis_diag,
    intersected,
    irregularity_witness,
    normal_chain_test,
    split_diag,
    truncated_kernel,
    virtual_regularity_probe,
    weak_regularity_probe,
)
from .actions import (
    LevelPermutation,
    TruncatedAction,
    act,
    build_action,
    check_transitive,
    holonomy_probe,
    level_maps_compatible,
    normalization_level,
)
from .growth import (
    CentralAxis,
    DegreeEstimate,
    GrowthSeries,
    LcsReport,
    ball,
    ball_series,
    degree_estimate,
    finite_index_growth_check,
    lcs_ranks,
    schreier_ball,
    schreier_series,
)
from .cases import (
    CaseReport,
    case_heisenberg,
    case_not_virtually_homogeneous,
    case_split_ext_example,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
