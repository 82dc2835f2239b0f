//! Computational toolkit for rank-one symbolic systems.
//!
//! * [`word`]: cutting-and-stacking words `B_n`
//! * [`poly`]: trigonometric polynomials `P_j`, `P_W`, Riesz products
//! * [`nt`]: sieves, exponential sums over `mu`, rational approximation
//! * [`arcs`]: Farey arc families and restricted integrals
//! * [`cert`]: resultant certificate and the `rho` defect functional
//! * [`wordsys`]: hierarchical word systems and L1 growth
//! * [`iet`]: three-interval exchanges and their return words
//! * [`experiments`]: correlation and prime-sum statistics
//! * [`config`], [`emit`]: key-value configs, CSV/JSON/SVG output

pub mod arcs;
pub mod cert;
pub mod config;
pub mod emit;
pub mod experiments;
pub mod iet;
pub mod nt;
pub mod poly;
pub mod word;
pub mod wordsys;
