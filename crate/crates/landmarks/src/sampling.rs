//! Seeded random landmark sections for oracle sweeps.

use nalgebra::DMatrix;
use rand::Rng;

use crate::manifold::{Covector, Landmarks};

/// A configuration with a pair of covectors spanning a section.
pub struct Section {
    pub landmarks: Landmarks,
    pub alpha: Covector,
    pub beta: Covector,
}

/// Draw a configuration with pairwise separation at least `min_sep` inside
/// `[-box_half, box_half]^d`, and two non-proportional covectors.
pub fn random_section(
    rng: &mut impl Rng,
    n: usize,
    d: usize,
    min_sep: f64,
    box_half: f64,
) -> Section {
    let landmarks = loop {
        let pts = DMatrix::from_fn(n, d, |_, _| rng.random_range(-box_half..box_half));
        let lm = Landmarks::new(pts).expect("finite sample");
        if lm.min_separation() >= min_sep {
            break lm;
        }
    };
    let alpha = Covector(DMatrix::from_fn(n, d, |_, _| rng.random_range(-1.0..1.0)));
    let beta = loop {
        let b = DMatrix::from_fn(n, d, |_, _| rng.random_range(-1.0..1.0));
        // reject near-proportional pairs so the section is well defined
        let cross = alpha.0.dot(&alpha.0) * b.dot(&b) - alpha.0.dot(&b).powi(2);
        if cross > 1e-3 {
            break Covector(b);
        }
    };
    Section {
        landmarks,
        alpha,
        beta,
    }
}
