//! Turns screen-recording perception outputs into mobile navigation episodes
//! and scores them against annotations.

pub mod action;
pub mod color;
pub mod elements;
pub mod geometry;
pub mod render;
pub mod text;
pub mod track;
pub mod transition;
pub mod corpus;
pub mod eval;
pub mod dataset;
pub mod config;
pub mod pipeline;
