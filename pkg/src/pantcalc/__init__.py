"""Nearly regular pants calculus in hyperbolic 3-space.

Framed-segment geometry with a verified length/phase calculus, exact-rational
measures of pants with their boundary operators, a gluing and hybriding
engine, symbolic pants constructions, and panted-cobordism computations.
"""

from .cobordism import (
    AbelianGroup,
    BundleFixture,
    PantedComplex,
    cobordism_class,
    cobordism_group,
    h2_of_panted_complex,
    representative_surface,
    smith_normal_form,
)
from .constructions import (
    Assembly,
    Bigon,
    RotationPair,
    SegmentBank,
    Tripod,
    antirotate,
    rotate,
    split,
    swap,
)
from .gluing import (
    CuffSelection,
    PantedSurface,
    assemble,
    connectify_rel_boundary,
    double_cover_nonseparating,
    hybridize,
    match_unit_shearing,
    panted_connected,
    select_cuffs,
)
from .measures import (
    Curve,
    CuffDatum,
    Measure,
    PantsDatum,
    Scene,
    TorusPoint,
    VisualTorus,
    boundary,
    classify,
    delta_equivalent,
    footed_boundary,
    net_boundary,
    torus_shear,
)
from .segments import (
    Chain,
    DFramedSegment,
    FramedPoint,
    Phasor,
    TamenessReport,
    bending_angle,
    check_chain,
    complex_length,
    fermat_point,
    frame_transform,
    limit_inefficiency,
    predict_chain,
    predict_cycle,
    reduce_chain,
    reduce_cycle,
    segment_from_pose,
    tame_triangle_bounds,
)

__version__ = "0.1.0"
