#![allow(dead_code)]

pub mod scoring_oracle;
