//! On-disk system definitions.
//!
//! A system file is TOML. Each entry names its row and column, a zero-mode
//! rule, and a list of homogeneous terms; coefficient modes are
//! `[eta_1(, eta_2), re, im]` rows and angular profiles are
//! `[direction_or_angle_mode, re, im]` rows (the direction is +-1 on the
//! 1-torus, an angle-frequency integer on the 2-torus):
//!
//! ```toml
//! n = 1
//! p = 1
//!
//! [[entry]]
//! row = 1
//! col = 1
//! zero_mode = "positive-axis"
//!
//! [[entry.term]]
//! degree = 0.0
//! coeff = [[1, 1.0, 0.0]]
//! angular = [[1, 1.0, 0.0]]
//! ```

use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::pdo_calculus::{
    AngularProfile, ClassicalSymbol, HomogeneousTerm, PdoSystem, ZeroModeRule,
};
use crate::refined_spaces::ManifoldSpec;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    n: usize,
    p: usize,
    #[serde(default)]
    entry: Vec<RawEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    row: usize,
    col: usize,
    #[serde(default)]
    zero_mode: Option<String>,
    #[serde(default)]
    term: Vec<RawTerm>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    degree: f64,
    coeff: Vec<Vec<f64>>,
    angular: Vec<Vec<f64>>,
    #[serde(default)]
    cutoff_radius: Option<f64>,
}

fn as_integer(v: f64, what: &str) -> Result<i64> {
    if (v - v.round()).abs() > 1e-9 {
        return Err(Error::Domain(format!("{what} must be an integer; got {v}")));
    }
    Ok(v.round() as i64)
}

fn parse_term(raw: &RawTerm, n: usize, at: &str) -> Result<HomogeneousTerm> {
    let mut coeff_modes = Vec::with_capacity(raw.coeff.len());
    for (i, row) in raw.coeff.iter().enumerate() {
        if row.len() != n + 2 {
            return Err(Error::Domain(format!(
                "{at}: coeff row {} needs {} values (eta, re, im); got {}",
                i + 1,
                n + 2,
                row.len()
            )));
        }
        let eta1 = as_integer(row[0], &format!("{at}: coeff row {} mode", i + 1))?;
        let eta2 = if n == 2 {
            as_integer(row[1], &format!("{at}: coeff row {} mode", i + 1))?
        } else {
            0
        };
        coeff_modes.push(([eta1, eta2], Complex64::new(row[n], row[n + 1])));
    }
    if coeff_modes.is_empty() {
        return Err(Error::Domain(format!("{at}: a term needs at least one coeff mode")));
    }
    let angular = match n {
        1 => {
            let mut plus = Complex64::new(0.0, 0.0);
            let mut minus = Complex64::new(0.0, 0.0);
            for (i, row) in raw.angular.iter().enumerate() {
                if row.len() != 3 {
                    return Err(Error::Domain(format!(
                        "{at}: angular row {} needs 3 values (direction, re, im)",
                        i + 1
                    )));
                }
                let dir = as_integer(row[0], &format!("{at}: angular row {} direction", i + 1))?;
                let value = Complex64::new(row[1], row[2]);
                match dir {
                    1 => plus += value,
                    -1 => minus += value,
                    other => {
                        return Err(Error::Domain(format!(
                            "{at}: direction must be 1 or -1 on the 1-torus; got {other}"
                        )))
                    }
                }
            }
            AngularProfile::Line { plus, minus }
        }
        _ => {
            let mut modes = Vec::with_capacity(raw.angular.len());
            for (i, row) in raw.angular.iter().enumerate() {
                if row.len() != 3 {
                    return Err(Error::Domain(format!(
                        "{at}: angular row {} needs 3 values (angle mode, re, im)",
                        i + 1
                    )));
                }
                let m = as_integer(row[0], &format!("{at}: angular row {} mode", i + 1))?;
                modes.push((m, Complex64::new(row[1], row[2])));
            }
            AngularProfile::Circle { modes }
        }
    };
    Ok(HomogeneousTerm {
        degree: raw.degree,
        coeff_modes,
        angular,
        cutoff_radius: raw.cutoff_radius.unwrap_or(1.0),
    })
}

/// Parse a system definition from TOML text.
pub fn parse_system(text: &str) -> Result<PdoSystem> {
    let raw: RawSystem =
        toml::from_str(text).map_err(|e| Error::Domain(format!("system file: {e}")))?;
    let spec = ManifoldSpec::torus(raw.n)?;
    if raw.p == 0 {
        return Err(Error::Domain("system size p must be positive".into()));
    }
    let mut entries: Vec<Option<ClassicalSymbol>> = vec![None; raw.p * raw.p];
    for e in &raw.entry {
        let at = format!("entry ({}, {})", e.row, e.col);
        if e.row == 0 || e.row > raw.p || e.col == 0 || e.col > raw.p {
            return Err(Error::Domain(format!("{at}: indices must lie in 1..={}", raw.p)));
        }
        let slot = (e.row - 1) * raw.p + (e.col - 1);
        if entries[slot].is_some() {
            return Err(Error::Domain(format!("{at}: duplicate entry")));
        }
        let zero_mode = match e.zero_mode.as_deref() {
            None | Some("positive-axis") => ZeroModeRule::PositiveAxis,
            Some("annihilate") => ZeroModeRule::Annihilate,
            Some(other) => {
                return Err(Error::Domain(format!(
                    "{at}: unknown zero_mode '{other}' (positive-axis | annihilate)"
                )))
            }
        };
        let mut terms = Vec::with_capacity(e.term.len());
        for (i, t) in e.term.iter().enumerate() {
            terms.push(parse_term(t, raw.n, &format!("{at} term {}", i + 1))?);
        }
        entries[slot] = Some(
            ClassicalSymbol::new(terms, zero_mode)
                .map_err(|err| Error::Domain(format!("{at}: {err}")))?,
        );
    }
    PdoSystem::new(spec, raw.p, entries)
}

/// Read and parse a system definition file.
pub fn load_system(path: &std::path::Path) -> Result<PdoSystem> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Domain(format!("cannot read {}: {e}", path.display())))?;
    parse_system(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SHIFT: &str = r#"
n = 1
p = 1

[[entry]]
row = 1
col = 1
zero_mode = "positive-axis"

[[entry.term]]
degree = 0.0
coeff = [[1, 1.0, 0.0]]
angular = [[1, 1.0, 0.0]]

[[entry.term]]
degree = 0.0
coeff = [[0, 1.0, 0.0]]
angular = [[-1, 1.0, 0.0]]
"#;

    #[test]
    fn parses_shift_toeplitz() {
        let sys = parse_system(SHIFT).unwrap();
        assert_eq!(sys.size(), 1);
        assert_eq!(sys.column_orders(), &[0.0]);
        // Matches the built-in gallery symbol action.
        let built = crate::pdo_calculus::gallery::shift_toeplitz();
        let e0 = crate::refined_spaces::FourierField::basis(sys.spec(), [0, 0]);
        let from_file = crate::pdo_calculus::apply(sys.entry(0, 0).unwrap(), &e0);
        let from_gallery = crate::pdo_calculus::apply(&built, &e0);
        assert!((from_file.get([1, 0]) - from_gallery.get([1, 0])).norm() < 1e-15);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(parse_system("n = 3\np = 1").is_err());
        assert!(parse_system("n = 1\np = 0").is_err());
        // Bad zero mode name.
        let bad = SHIFT.replace("positive-axis", "sideways");
        assert!(parse_system(&bad).is_err());
        // Non-integer mode index.
        let bad = SHIFT.replace("coeff = [[1, 1.0, 0.0]]", "coeff = [[1.5, 1.0, 0.0]]");
        assert!(parse_system(&bad).is_err());
        // Wrong arity.
        let bad = SHIFT.replace("coeff = [[1, 1.0, 0.0]]", "coeff = [[1, 1.0]]");
        assert!(parse_system(&bad).is_err());
        // Unknown field.
        assert!(parse_system(&format!("{SHIFT}\nq = 3\n")).is_err());
        // Duplicate entry.
        let dup = format!(
            "{SHIFT}\n[[entry]]\nrow = 1\ncol = 1\n[[entry.term]]\ndegree = 0.0\ncoeff = [[0, 1.0, 0.0]]\nangular = [[1, 1.0, 0.0]]\n"
        );
        assert!(parse_system(&dup).is_err());
    }

    #[test]
    fn two_torus_angular_profile() {
        let text = r#"
n = 2
p = 1

[[entry]]
row = 1
col = 1

[[entry.term]]
degree = 1.0
coeff = [[0, 0, 1.0, 0.0]]
angular = [[1, 0.0, 0.5], [-1, 0.0, 0.5]]
"#;
        let sys = parse_system(text).unwrap();
        assert_eq!(sys.spec().dim(), 2);
        assert_eq!(sys.column_orders(), &[1.0]);
    }
}
