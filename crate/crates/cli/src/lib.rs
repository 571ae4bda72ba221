//! Report layer and command runners for the `mongeampere` tool.

pub mod app;
pub mod corpus;
pub mod json;
pub mod report;
