"""Legendrian and horizontal curves: invariants, lifts, disk calculus and degrees."""

from .curves import (CONTACT, ENGEL, FRAMES, GEIGES, Curve, CurveFamily, SelfIntersection,
                     as_frame, brute_force_self_intersections, find_self_intersections,
                     front_geiges, geiges_project, horizontal_residual, legendrian_residual,
                     segment_area, table_curve, total_area)
from .degree import (DegreeResult, SphereMap, degree_3_to_s3, degree_regular_value, degree_s2,
                     kalman_capping_disk, kalman_degree, kalman_loop, kalman_obstruction_sphere,
                     winding_number)
from .diskcalc import (BoundaryPoint, DiskDiagram, StratumCurve, applicable_sites,
                       area_invariant, area_twist_disk, elementary_change, is_obstructed,
                       load_disk, min_zero_parity, obstructed_curves, parse_disk)
from .errors import (AreaObstruction, BadParameters, DegenerateTangency, DerivTooSmall,
                     EngelkitError, HorizontalViolation, InterpolationDegenerate,
                     MoveNotApplicable, NonGeneric, NotConverged, NotRegular, NotRegularValue,
                     PushoffCollision, ResolutionExhausted, WindowOverlap)
from .families import (figure_eight, polynomial_front, stereographic_torus_knot, torus_knot,
                       unknot_front, unknot_horizontal)
from .invariants import (FrontDiagram, front_diagram, horizontal_rotation_number,
                         loop_rotation_number, rotation_number, tb_linking_oracle,
                         thurston_bennequin)
from .lifts import (add_area_lobe, add_area_pair, area_at_tangency, area_twist,
                    double_stabilization, lift_horizontal, stabilize, tangency_reports,
                    tangency_suite)

__version__ = "0.1.0"
