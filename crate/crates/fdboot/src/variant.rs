//! Parsing of the `--family` and `--variant` flags.

use std::fmt;
use std::str::FromStr;

use fdboot_core::bootstrap::Variant;
use fdboot_core::family::{parse_ar_order, ArFamily};
use fdboot_core::spectral::{TaperSpec, TimeSeries};
use fdboot_core::yule_walker::default_boundary_order;

use crate::error::Result;

/// `ar:p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FamilySpec {
    pub order: usize,
}

impl FamilySpec {
    pub fn family(&self) -> ArFamily {
        ArFamily::new(self.order)
    }
}

impl FromStr for FamilySpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        parse_ar_order(s).map(|order| FamilySpec { order }).map_err(|e| e.to_string())
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ar:{}", self.order)
    }
}

/// Likelihood variant as given on the command line; the boundary order may
/// be left to the AIC rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VariantSpec {
    Standard,
    Tapered(f64),
    Debiased,
    Boundary(Option<usize>),
}

impl VariantSpec {
    pub fn resolve(&self, series: &TimeSeries) -> Result<Variant> {
        Ok(match *self {
            VariantSpec::Standard => Variant::Standard,
            VariantSpec::Tapered(rho) => {
                let spec = TaperSpec::Tukey(rho);
                spec.validate()?;
                Variant::Tapered(spec)
            }
            VariantSpec::Debiased => Variant::Debiased,
            VariantSpec::Boundary(Some(p)) => Variant::Boundary(p),
            VariantSpec::Boundary(None) => Variant::Boundary(default_boundary_order(series)?),
        })
    }
}

impl FromStr for VariantSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim().to_ascii_lowercase();
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s.as_str(), None),
        };
        match (head, arg) {
            ("standard", None) => Ok(VariantSpec::Standard),
            ("debiased", None) => Ok(VariantSpec::Debiased),
            ("tapered", Some(a)) => {
                let rho: f64 = a.parse().map_err(|_| format!("bad taper proportion '{a}'"))?;
                if !(0.0..=1.0).contains(&rho) {
                    return Err(format!("taper proportion must lie in [0, 1], got {rho}"));
                }
                Ok(VariantSpec::Tapered(rho))
            }
            ("tapered", None) => Err(String::from("tapered needs a proportion, e.g. tapered:0.1")),
            ("boundary", None) => Ok(VariantSpec::Boundary(None)),
            ("boundary", Some(a)) => {
                a.parse().map(|p| VariantSpec::Boundary(Some(p))).map_err(|_| format!("bad AR order '{a}'"))
            }
            _ => Err(format!("unknown variant '{s}'")),
        }
    }
}

impl fmt::Display for VariantSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VariantSpec::Standard => write!(f, "standard"),
            VariantSpec::Tapered(rho) => write!(f, "tapered:{rho}"),
            VariantSpec::Debiased => write!(f, "debiased"),
            VariantSpec::Boundary(Some(p)) => write!(f, "boundary:{p}"),
            VariantSpec::Boundary(None) => write!(f, "boundary"),
        }
    }
}

/// Name recorded in reports for a resolved variant.
pub fn variant_label(v: &Variant) -> String {
    match v {
        Variant::Standard => String::from("standard"),
        Variant::Tapered(TaperSpec::Rectangular) => String::from("tapered:0"),
        Variant::Tapered(TaperSpec::Tukey(rho)) => format!("tapered:{rho}"),
        Variant::Debiased => String::from("debiased"),
        Variant::Boundary(p) => format!("boundary:{p}"),
    }
}
