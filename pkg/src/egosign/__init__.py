"""Egocentric traffic-sign interpretation and rule-based driving guidance."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BudgetExceeded,
    CannotLocalize,
    DegenerateLine,
    EgoSignError,
    EmptyInput,
    InconsistentLimits,
    InvalidDescription,
    InvalidScene,
    LengthMismatch,
    ParseError,
    SlotConflict,
    ValidationError,
)
from .geometry import (  # noqa: E402
    BoundaryLine,
    BoxAssignment,
    EgoLayout,
    Point,
    SceneGeometry,
    SignBox,
    assign_sign_boxes,
    fit_line_angle,
    localize,
    region_anchor_x,
    split_regions,
)
from .grammar import (  # noqa: E402
    GRAMMAR_VERSION,
    Clause,
    ClauseKind,
    StructuredDescription,
    canonicalize,
    parse_description,
    scope_of,
    serialize,
    validate,
)
from .matching import (  # noqa: E402
    ArrangementBudget,
    MatchScore,
    arrangement_count,
    best_match,
    enumerate_arrangements,
    equivalent,
)
from .planner import (  # noqa: E402
    EgoAssignment,
    Option,
    PlanSet,
    RouteGraph,
    VehicleAttributes,
    attach,
    make_plan,
    plan_lane,
    plan_other,
    plan_road,
    plan_speed,
)
from .textmetrics import bleu_n, rouge_l, tokenize  # noqa: E402
