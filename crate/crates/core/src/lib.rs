pub mod corridor;
pub mod factorization;
pub mod graph;
pub mod halfint;
pub mod kernel;
pub mod logreal;
pub mod normlab;
pub mod providers;
