// `!(x > y)` comparisons are used on purpose to reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod geometry;
pub mod tour_model;
pub mod script_compiler;
pub mod world_sim;
pub mod behavior_engine;
pub mod gaze_analytics;
pub mod pipeline;
pub mod cli;
