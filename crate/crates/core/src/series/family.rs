use std::fmt;

use num_complex::Complex64;

use crate::dynamics::Region;
use crate::renorm::DomainSystem;
use crate::{Error, Result};

/// Finite orbits `x_0 .. x_k` with `x_0` in the source, `x_k` in the target and
/// every intermediate point in `via`. `nontrivial` excludes `k = 0`.
#[derive(Debug, Clone)]
pub struct OrbitFamily {
    pub target: Region,
    pub via: Region,
    pub source: Region,
    pub nontrivial: bool,
    /// Arrow-syntax descriptor, e.g. `A'<-[U\V']-+A'`.
    pub label: String,
}

impl OrbitFamily {
    pub fn new(target: Region, via: Region, source: Region, nontrivial: bool, label: impl Into<String>) -> Self {
        Self { target, via, source, nontrivial, label: label.into() }
    }

    /// Family with no constraints at all, labelled `C<-C`.
    pub fn unconstrained() -> Self {
        Self::new(Region::Plane, Region::Plane, Region::Plane, false, "C<-C")
    }

    /// Membership of an explicit orbit `x_0, .., x_k` (conservative on uncertain points).
    pub fn contains_orbit(&self, orbit: &[Complex64]) -> bool {
        let Some((&last, _)) = orbit.split_last() else { return false };
        let k = orbit.len() - 1;
        if k == 0 && self.nontrivial {
            return false;
        }
        let interior = if k >= 2 { &orbit[1..k] } else { &[][..] };
        self.source.admits(orbit[0]) && self.target.admits(last) && interior.iter().all(|x| self.via.admits(*x))
    }
}

impl fmt::Display for OrbitFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

fn region_expr(expr: &str, ds: Option<&DomainSystem>) -> Result<Region> {
    let mut parts = expr.split('\\');
    let first = parts.next().unwrap_or("");
    let mut region = named(first.trim(), ds)?;
    for p in parts {
        region = region.minus(named(p.trim(), ds)?);
    }
    Ok(region)
}

fn named(name: &str, ds: Option<&DomainSystem>) -> Result<Region> {
    match (name, ds) {
        ("C", _) => Ok(Region::Plane),
        ("0", _) => Ok(Region::Empty),
        (_, Some(ds)) => ds.named(name).ok_or_else(|| Error::Syntax(format!("unknown region name `{name}`"))),
        (_, None) => Err(Error::Syntax(format!("region `{name}` needs a domain system"))),
    }
}

/// Parses `D<-E`, `D<-+E`, `D<-[S]-E` or `D<-[S]-+E`.
///
/// Region expressions are names (`U`, `V`, `U'`, `V'`, `A`, `A'`, `C` for the
/// plane, `0` for the empty set) joined by `\` for set difference.
pub fn parse_family(s: &str, ds: Option<&DomainSystem>) -> Result<OrbitFamily> {
    let s = s.trim();
    let (target, rest) = s.split_once("<-").ok_or_else(|| Error::Syntax(format!("missing `<-` in `{s}`")))?;
    let (via, rest) = if let Some(inner) = rest.strip_prefix('[') {
        let (via, after) = inner.split_once("]-").ok_or_else(|| Error::Syntax(format!("unterminated `[..]-` in `{s}`")))?;
        (Some(via), after)
    } else {
        (None, rest)
    };
    let (nontrivial, source) = match rest.strip_prefix('+') {
        Some(src) => (true, src),
        None => (false, rest),
    };
    if target.trim().is_empty() || source.trim().is_empty() || via.is_some_and(|v| v.trim().is_empty()) {
        return Err(Error::Syntax(format!("empty region in `{s}`")));
    }
    let target_r = region_expr(target, ds)?;
    let source_r = region_expr(source, ds)?;
    let via_r = match via {
        Some(v) => region_expr(v, ds)?,
        None => Region::Plane,
    };
    let label = match via {
        Some(v) => format!("{}<-[{}]-{}{}", target.trim(), v.trim(), if nontrivial { "+" } else { "" }, source.trim()),
        None => format!("{}<-{}{}", target.trim(), if nontrivial { "+" } else { "" }, source.trim()),
    };
    Ok(OrbitFamily::new(target_r, via_r, source_r, nontrivial, label))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plane_families_parse_without_domains() {
        let f = parse_family("C<-C", None).unwrap();
        assert!(!f.nontrivial);
        assert_eq!(f.label, "C<-C");
        let f = parse_family("C<-[C\\0]-+C", None).unwrap();
        assert!(f.nontrivial);
        assert_eq!(f.label, "C<-[C\\0]-+C");
    }

    #[test]
    fn syntax_errors() {
        assert!(parse_family("A'", None).is_err());
        assert!(parse_family("C<-[C-C", None).is_err());
        assert!(parse_family("C<-[]-C", None).is_err());
        assert!(parse_family("A'<-C", None).is_err());
    }

    #[test]
    fn orbit_membership_rules() {
        let fam = OrbitFamily::unconstrained();
        let z = Complex64::new(0.3, 0.1);
        assert!(fam.contains_orbit(&[z]));
        let nt = OrbitFamily::new(Region::Plane, Region::Plane, Region::Plane, true, "C<-+C");
        assert!(!nt.contains_orbit(&[z]));
        assert!(nt.contains_orbit(&[z, z]));
        let via_empty = OrbitFamily::new(Region::Plane, Region::Empty, Region::Plane, false, "C<-[0]-C");
        assert!(via_empty.contains_orbit(&[z, z]));
        assert!(!via_empty.contains_orbit(&[z, z, z]));
    }
}
