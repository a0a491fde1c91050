//! Exact Bayesian network structure learning.
//!
//! Local scores for candidate parent sets are computed from categorical data
//! ([`scores`]), turned into a 0/1 program with one column per (node, parent set)
//! pair ([`model`]), and solved by a self-contained branch-and-cut engine
//! ([`solver`]) built on a bounded revised simplex ([`lp`]). Acyclicity is
//! enforced lazily through cluster cuts found by a small integer sub-problem and
//! through cycle cuts from elementary-cycle enumeration ([`separation`]); a
//! sink-finding heuristic ([`heuristic`]) supplies incumbents.

pub mod generate;
pub mod heuristic;
pub mod lp;
pub mod model;
pub mod scores;
pub mod separation;
pub mod solver;
