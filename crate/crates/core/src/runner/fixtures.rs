//! Built-in experiment catalog.

use serde::Serialize;

use super::config::{ExperimentConfig, TransportConfig};
use crate::hardy::{BidiscPoly, DegreePair};
use crate::inner::InnerSpec;
use crate::linalg::c;

pub const FIXTURE_ORDER: usize = 5;

const FULL_CHECKS: &[&str] = &[
    "unimodular",
    "codimension",
    "mandrekar",
    "jordan_identity",
    "parseval",
    "kernel_invariance",
    "kernel_doubly_commutes",
    "similarity",
    "recover",
    "adjoint_decay",
    "conjecture",
    "equiv_vector",
];

#[derive(Clone, Debug, Serialize)]
pub struct Fixture {
    pub name: &'static str,
    /// `beurling`, `non-beurling` or `riesz`.
    pub kind: &'static str,
    pub description: &'static str,
    pub config: ExperimentConfig,
}

impl Fixture {
    /// Matches the kind exactly or a prefix of the name.
    pub fn matches(&self, filter: &str) -> bool {
        self.kind == filter || self.name.starts_with(filter)
    }
}

fn order() -> DegreePair {
    DegreePair::new(FIXTURE_ORDER, FIXTURE_ORDER)
}

fn monomial(name: &'static str, a: usize, b: usize, description: &'static str) -> Fixture {
    let config =
        ExperimentConfig::new(name, order()).with_inner(InnerSpec::monomial(a, b)).with_checks(FULL_CHECKS);
    Fixture { name, kind: "beurling", description, config }
}

pub fn catalog() -> Vec<Fixture> {
    let mut out = vec![
        monomial("beurling-z", 1, 0, "M = zH², quotient spanned by powers of w"),
        monomial("beurling-w", 0, 1, "M = wH², quotient spanned by powers of z"),
        monomial("beurling-zw", 1, 1, "M = zwH², quotient spanned by pure powers of z and w"),
        monomial("beurling-z2w", 2, 1, "M = z²wH²"),
        monomial("beurling-zw2", 1, 2, "M = zw²H²"),
    ];
    out.push(Fixture {
        name: "beurling-one",
        kind: "beurling",
        description: "φ = 1: M is the whole space, quotient trivial at every order",
        config: ExperimentConfig::new("beurling-one", order())
            .with_inner(InnerSpec::constant())
            .with_checks(&["unimodular", "codimension"]),
    });
    out.push(Fixture {
        name: "blaschke-z-half",
        kind: "beurling",
        description: "single Blaschke factor in z with zero 1/2",
        config: ExperimentConfig::new("blaschke-z-half", DegreePair::new(8, 4))
            .with_inner(InnerSpec::blaschke_z(&[c(0.5, 0.0)]))
            .with_checks(&["unimodular", "codimension", "mandrekar"]),
    });
    out.push(Fixture {
        name: "blaschke-product",
        kind: "beurling",
        description: "Blaschke factor in z (zero 1/2) times one in w (zero -0.3+0.4i)",
        config: ExperimentConfig::new("blaschke-product", DegreePair::new(8, 8))
            .with_inner(InnerSpec::product(vec![
                InnerSpec::blaschke_z(&[c(0.5, 0.0)]),
                InnerSpec::blaschke_w(&[c(-0.3, 0.4)]),
            ]))
            .with_checks(&["unimodular", "codimension", "mandrekar"]),
    });
    out.push(Fixture {
        name: "non-beurling-zw-generated",
        kind: "non-beurling",
        description: "submodule generated by z and w; shifts do not doubly commute on it",
        config: ExperimentConfig::new("non-beurling-zw-generated", order())
            .with_generators(vec![BidiscPoly::monomial(1, 0), BidiscPoly::monomial(0, 1)])
            .with_checks(&["mandrekar", "parseval", "kernel_invariance"]),
    });
    let mut riesz = ExperimentConfig::new("riesz-model", order()).with_checks(&[
        "riesz",
        "parseval",
        "similarity",
        "recover",
        "adjoint_decay",
        "equiv_vector",
    ]);
    riesz.transport = Some(TransportConfig { trials: 5, ..TransportConfig::default() });
    out.push(Fixture {
        name: "riesz-model",
        kind: "riesz",
        description: "M = {0}: (S_z, S_w, 1), an orthonormal basis",
        config: riesz,
    });
    out
}

pub fn find(name: &str) -> Option<Fixture> {
    catalog().into_iter().find(|f| f.name == name)
}

pub fn filtered(filter: Option<&str>) -> Vec<Fixture> {
    catalog().into_iter().filter(|f| filter.is_none_or(|p| f.matches(p))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_listing() {
        assert!(catalog().len() >= 6);
        let b = filtered(Some("beurling"));
        assert!(!b.is_empty() && b.iter().all(|f| f.kind == "beurling"));
        assert!(filtered(Some("nonexistent")).is_empty());
        assert_eq!(filtered(None).len(), catalog().len());
        for f in catalog() {
            f.config.validate().unwrap();
        }
    }
}
