//! Equilibrium shapes of cylindrical rotating liquid drops.
//!
//! A cylinder over a planar curve is an equilibrium of the rotating-drop
//! energy exactly when its generating curve has curvature
//! `kappa = lambda0 - a/2 (x^2 + y^2)`. Mapping the curve through the
//! TreadmillSled transform turns this condition into a planar Hamiltonian
//! system: the transformed curve runs along a level set `G = C` of
//! `G(xi1, xi2) = 2 xi2 + lambda0 (xi1^2 + xi2^2) - a/4 (xi1^2 + xi2^2)^2`.
//! Everything in this crate hangs off that reduction:
//!
//! * [`params`] / [`quartic`] — the parameter triple `(a, lambda0, C)`, the
//!   first integral `G`, and the quartic `q(r)` whose positivity bands are
//!   the squared-radius ranges swept by the curve, with multiplicity-aware
//!   root extraction.
//! * [`moduli`] — circle equilibria, critical level constants, and the
//!   classification of parameter points into level-set cases.
//! * [`quadrature`] — the singular band integrals for the piece angle and
//!   arc length, plus their closed-form limits at critical levels.
//! * [`profile`] — tracing of fundamental pieces, rotational assembly of the
//!   full curve, and rational/irrational symmetry detection.
//! * [`embed`] — grid-exact self-intersection tests for assembled curves.
//! * [`stability`] — Hill spectra on the generating curve, rule-based
//!   instability verdicts, round-cylinder criteria, height bounds, and the
//!   curve energy.

pub mod embed;
pub mod error;
pub mod moduli;
pub mod ode;
pub mod params;
pub mod profile;
pub mod quadrature;
pub mod quartic;
pub mod stability;

pub use embed::is_embedded;
pub use error::{Error, Result};
pub use moduli::{
    case_i_boundary_level, case_i_circle_radius, circle_radii, classify, critical_levels, CaseTag,
    CircleRadius, ClassLabel, CriticalLevel, CriticalLevels, RegionTag,
};
pub use params::DropParams;
pub use profile::{
    assemble_curve, assemble_partial, fundamental_piece, integrate_profile, symmetry_type,
    trace_exceptional, treadmill_sled, CurveSample, ExceptionalTrace, FundamentalPiece,
    ProfileCurve, SymmetryKind, SymmetryType, TraceOptions,
};
pub use quadrature::{
    arc_length, delta_theta, delta_theta_band_pair_check, limit_delta_theta, rho, AngleResult,
    Band, BandPairCheck,
};
pub use quartic::{positive_roots, QuarticQ, Root, RootList, RootTol};
pub use stability::{
    cp_instability_test, curve_energy, fixed_necessary_conditions, height_bounds, hill_eigenvalues,
    round_cylinder_report, second_variation, sign_changes, stability_report, xi1_sign_changes,
    CurveEnergy, HeightBounds, HillProblem, HillSpectrum, Outcome, ProblemKind, RuleId,
    SecondVariation, StabilityReport, Verdict, ZMode,
};
