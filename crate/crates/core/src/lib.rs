//! Circle-grid trajectory-cell motion planning for surface vessels.
//!
//! The crate is organized bottom-up: a maneuvering model ([`ship`]), the
//! rudder/heading relation ([`relation`]), standardized maneuvers
//! ([`cell`]), circle-grid geometry ([`circle_grid`]), the static and
//! dynamic planners, and the scenario harness.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cell;
pub mod circle_grid;
pub mod dynamic;
pub mod error;
pub mod harness;
mod linalg;
pub mod relation;
pub mod ship;
pub mod static_planner;

pub use cell::{
    build_cell_set, generate_cell, splice, validate_rules, CellOptions, CellSet, RuleReport,
    TrajectoryCell,
};
pub use circle_grid::{
    compass_bearing, expand_node, polar_to_world, ship_domain_radius, CompassAngle, GridNode,
    GridTree, Point,
};
pub use error::{Error, Result};
pub use relation::{fit_poly, pearson, CubicRelation, PolyFit, RelationSample};
pub use ship::{simulate_turn, step, trim_steady_speed, ShipParams, ShipState};
pub use static_planner::{
    is_bypassed, plan_static, select_heading_free, select_heading_static, tangent_angles,
    HeadingDecision, Obstacle, PlanOptions, PlanResult, Side,
};
pub use dynamic::{
    classify_encounter, heading_intersection, min_separation, plan_dynamic,
    virtual_obstacle_radius, Encounter, EncounterClass, VirtualObstacle,
};
pub use harness::{
    compare_planners, grid_baseline_plan, online_generate, run_scenario, ComparisonReport, Mode,
    Scenario,
};
