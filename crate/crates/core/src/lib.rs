pub mod annotations;
pub mod cli;
pub mod dedup;
pub mod geometry;
pub mod hierarchy;
pub mod icons;
pub mod imaging;
pub mod inject;
pub mod lint;
pub mod metrics;
pub mod mockui;
pub mod pipeline;
