//! Labour-value profit rate of an aggregate economy from histories of
//! productivity growth, labour input and the rate of surplus value.
//!
//! The forward problem is solved three ways (Runge-Kutta on the linear
//! equation for capital per worker-hour, its integrating-factor quadrature,
//! and the closed form in growth-discounted history averages), which agree
//! to quadrature accuracy. The averaged form also yields the mature-economy
//! approximation and an upper bound on the profit rate. The inverse problem
//! recovers the rate of surplus value from an observed profit rate.
//!
//! ```
//! use profit_rate::averages::AveragingOptions;
//! use profit_rate::dynamics::{new_economy_pi, solve_averaged};
//! use profit_rate::scenarios::scenario_constant;
//!
//! // No capital at t = 0, constant 5%/yr growth and σ = 0.6.
//! let inputs = scenario_constant(0.05, 0.6, 0.0, 40.0, 0.5).unwrap();
//! let sol = solve_averaged(&inputs, &AveragingOptions::default()).unwrap();
//! let pi_end = *sol.pi.last().unwrap();
//! assert!((pi_end - new_economy_pi(0.05, 40.0).unwrap()).abs() < 1e-9);
//! ```

pub mod averages;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod exec;
pub mod roots;
pub mod scenarios;
pub mod series;

pub use averages::AveragingOptions;
pub use dynamics::{EconomyInputs, Initial, Labour, Method, SolutionPath, Solver};
pub use error::{Error, Result};
pub use exec::Exec;
pub use series::{RangePolicy, Series, SeriesKind, TimeGrid};
