//! Pointwise reliability certificates for classifiers under test-time attacks
//! and distribution shift.
//!
//! The crate fits the version space of a realizable sample for three concept
//! classes (thresholds, homogeneous halfspaces, offset boundaries), decides
//! whether all consistent hypotheses agree at a query point, and turns the
//! geometry of the disagreement region into reliability radii. Estimators
//! measure the mass of reliable regions and the source-to-target disagreement
//! coefficient by Monte Carlo.
//!
//! | module            | contents                                                |
//! |-------------------|---------------------------------------------------------|
//! | [`model`]         | points, labels, datasets, hypotheses, perturbations     |
//! | [`losses`]        | the CA, TL and ST losses and their suprema              |
//! | [`version_space`] | fitting, agreement membership, distance to disagreement |
//! | [`reliability`]   | certificates, safely-reliable test, contract verifier   |
//! | [`distributions`] | declarative samplers                                    |
//! | [`estimators`]    | Monte-Carlo masses and disagreement coefficients        |
//! | [`lp`]            | the small dense simplex solver                          |
//! | [`rng`]           | the fixed generator and seed derivation                 |
//!
//! ```
//! use robrel::model::{ConceptClass, Dataset, Hypothesis, Point};
//! use robrel::losses::LossKind;
//! use robrel::reliability::certify;
//! use robrel::version_space::fit_version_space;
//!
//! let hstar = Hypothesis::threshold(0.5).unwrap();
//! let pts = [0.2, 0.8].iter().map(|&x| Point::new(vec![x]).unwrap()).collect();
//! let s = Dataset::labeled_by(&hstar, pts).unwrap();
//! let vs = fit_version_space(&s, &ConceptClass::Threshold, 0.0).unwrap();
//! let cert = certify(&vs, &Point::new(vec![1.0]).unwrap(), LossKind::ST).unwrap();
//! assert!((cert.radius - 0.2).abs() < 1e-12);
//! ```

pub mod distributions;
pub mod error;
pub mod estimators;
pub mod losses;
pub mod lp;
pub mod model;
pub mod reliability;
pub mod rng;
pub mod version_space;

pub use error::{Error, Result};
