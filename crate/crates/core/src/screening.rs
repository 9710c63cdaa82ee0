//! Molecule tables: ingestion, S1/T1 linear scaling and candidate selection.

use std::fmt;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const HEADER: [&str; 5] = ["name", "carbon_count", "e_s1_ev", "e_t1_ev", "centrosymmetric"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MoleculeRecord {
    pub name: String,
    pub carbon_count: u32,
    /// Vertical S0 → S1 excitation, eV.
    pub e_s1: f64,
    /// Vertical S0 → T1 excitation, eV.
    pub e_t1: f64,
    pub centrosymmetric: bool,
}

/// One rejected cell. `row` is the 1-based line number in the file (the
/// header is line 1).
#[derive(Debug, Clone, PartialEq)]
pub struct RowError {
    pub row: u64,
    pub column: String,
    pub reason: String,
}

impl fmt::Display for RowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "row {}, column '{}': {}", self.row, self.column, self.reason)
    }
}

#[derive(Debug, Error)]
pub enum ScreeningError {
    #[error("cannot read molecule table: {0}")]
    Io(#[from] std::io::Error),
    #[error("dataset is empty (no header row)")]
    EmptyDataset,
    #[error("header must be '{}', found '{found}'", HEADER.join(","))]
    BadHeader { found: String },
    #[error("{} invalid row(s): {}", .0.len(), .0.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; "))]
    Parse(Vec<RowError>),
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("invalid selection criteria: {0}")]
    InvalidCriteria(String),
}

pub fn ingest(path: &Path) -> Result<Vec<MoleculeRecord>, ScreeningError> {
    ingest_reader(std::fs::File::open(path)?)
}

pub fn ingest_reader<R: Read>(reader: R) -> Result<Vec<MoleculeRecord>, ScreeningError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows = rdr.records();
    let header = match rows.next() {
        None => return Err(ScreeningError::EmptyDataset),
        Some(h) => h.map_err(csv_io)?,
    };
    if header.iter().ne(HEADER.iter().copied()) {
        return Err(ScreeningError::BadHeader {
            found: header.iter().collect::<Vec<_>>().join(","),
        });
    }
    let mut out = Vec::new();
    let mut errors = Vec::new();
    for rec in rows {
        let rec = match rec {
            Ok(r) => r,
            Err(e) => {
                let row = e.position().map_or(0, |p| p.line());
                errors.push(RowError {
                    row,
                    column: String::new(),
                    reason: e.to_string(),
                });
                continue;
            }
        };
        let row = rec.position().map_or(0, |p| p.line());
        match parse_row(&rec, row) {
            Ok(m) => out.push(m),
            Err(mut e) => errors.append(&mut e),
        }
    }
    if errors.is_empty() {
        Ok(out)
    } else {
        Err(ScreeningError::Parse(errors))
    }
}

fn csv_io(e: csv::Error) -> ScreeningError {
    ScreeningError::Io(std::io::Error::other(e.to_string()))
}

fn parse_row(rec: &csv::StringRecord, row: u64) -> Result<MoleculeRecord, Vec<RowError>> {
    let err = |column: &str, reason: String| RowError {
        row,
        column: column.to_string(),
        reason,
    };
    if rec.len() != HEADER.len() {
        return Err(vec![err(
            "",
            format!("expected {} fields, found {}", HEADER.len(), rec.len()),
        )]);
    }
    let mut errors = Vec::new();
    let name = rec[0].to_string();
    if name.is_empty() {
        errors.push(err("name", "empty name".into()));
    }
    let carbon_count = match rec[1].parse::<u32>() {
        Ok(n) if n > 0 => n,
        Ok(_) => {
            errors.push(err("carbon_count", "must be positive".into()));
            0
        }
        Err(e) => {
            errors.push(err("carbon_count", format!("'{}': {e}", &rec[1])));
            0
        }
    };
    let mut energy = |idx: usize| match rec[idx].parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => v,
        Ok(v) => {
            errors.push(err(HEADER[idx], format!("energy must be positive and finite, got {v}")));
            f64::NAN
        }
        Err(e) => {
            errors.push(err(HEADER[idx], format!("'{}': {e}", &rec[idx])));
            f64::NAN
        }
    };
    let e_s1 = energy(2);
    let e_t1 = energy(3);
    let centrosymmetric = match rec[4].to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" => true,
        "false" | "0" | "no" => false,
        other => {
            errors.push(err("centrosymmetric", format!("'{other}' is not a boolean")));
            false
        }
    };
    if e_t1 > e_s1 {
        errors.push(err(
            "e_t1_ev",
            format!("T1 energy {e_t1} eV exceeds S1 energy {e_s1} eV"),
        ));
    }
    if errors.is_empty() {
        Ok(MoleculeRecord {
            name,
            carbon_count,
            e_s1,
            e_t1,
            centrosymmetric,
        })
    } else {
        Err(errors)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Ordinary least squares of e_t1 on e_s1. Points are summed in sorted order
/// so the result does not depend on record order.
pub fn fit_linear_scaling(records: &[MoleculeRecord]) -> Result<LinearFit, ScreeningError> {
    if records.len() < 2 {
        return Err(ScreeningError::DegenerateFit(format!(
            "need at least 2 records, got {}",
            records.len()
        )));
    }
    let mut pts: Vec<(f64, f64)> = records.iter().map(|r| (r.e_s1, r.e_t1)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx <= 1e-300 || pts.iter().all(|p| p.0 == pts[0].0) {
        return Err(ScreeningError::DegenerateFit("all S1 energies are equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
        points: pts.len(),
    })
}

/// Defaults are configuration choices, not measured boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct SelectionCriteria {
    /// eV
    #[serde(default = "default_min_t1")]
    pub min_t1: f64,
    /// eV
    #[serde(default = "default_max_s1")]
    pub max_s1: f64,
}

fn default_min_t1() -> f64 {
    2.0
}

fn default_max_s1() -> f64 {
    3.5
}

impl Default for SelectionCriteria {
    fn default() -> Self {
        Self {
            min_t1: default_min_t1(),
            max_s1: default_max_s1(),
        }
    }
}

impl SelectionCriteria {
    pub fn validate(&self) -> Result<(), ScreeningError> {
        if self.min_t1.is_finite() && self.max_s1.is_finite() && self.min_t1 < self.max_s1 {
            Ok(())
        } else {
            Err(ScreeningError::InvalidCriteria(format!(
                "need min_t1 < max_s1, got {} and {}",
                self.min_t1, self.max_s1
            )))
        }
    }

    pub fn admits(&self, r: &MoleculeRecord) -> bool {
        r.e_t1 >= self.min_t1 && r.e_s1 <= self.max_s1
    }
}

/// Records with e_t1 ≥ min_t1 and e_s1 ≤ max_s1, in input order.
pub fn select_candidates(
    records: &[MoleculeRecord],
    criteria: &SelectionCriteria,
) -> Result<Vec<MoleculeRecord>, ScreeningError> {
    criteria.validate()?;
    Ok(records.iter().filter(|r| criteria.admits(r)).cloned().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::rngs::ChaCha8Rng;
    use rand::{RngExt, SeedableRng};
    use rand_distr::{Distribution, Normal};

    const HEAD: &str = "name,carbon_count,e_s1_ev,e_t1_ev,centrosymmetric\n";

    fn rec(name: &str, s1: f64, t1: f64) -> MoleculeRecord {
        MoleculeRecord {
            name: name.into(),
            carbon_count: 20,
            e_s1: s1,
            e_t1: t1,
            centrosymmetric: true,
        }
    }

    #[test]
    fn header_only_is_empty() {
        assert!(ingest_reader(HEAD.as_bytes()).unwrap().is_empty());
        assert!(matches!(
            ingest_reader("".as_bytes()),
            Err(ScreeningError::EmptyDataset)
        ));
        assert!(matches!(
            ingest_reader("name,carbons,s1,t1,c\n".as_bytes()),
            Err(ScreeningError::BadHeader { .. })
        ));
    }

    #[test]
    fn rejects_inverted_energies_with_row() {
        let text = format!("{HEAD}pentacene,22,2.2,0.9,true\nbad,10,2.0,2.5,false\n");
        match ingest_reader(text.as_bytes()) {
            Err(ScreeningError::Parse(errs)) => {
                assert_eq!(errs.len(), 1);
                assert_eq!(errs[0].row, 3);
                assert_eq!(errs[0].column, "e_t1_ev");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_cells_are_located() {
        let text = format!("{HEAD}a,6,3.0,2.0,true\nb,x,3.0,2.0,true\nc,6,3.0,2.0,maybe\nd,6,3.0\n");
        let Err(ScreeningError::Parse(errs)) = ingest_reader(text.as_bytes()) else {
            panic!()
        };
        let located: Vec<(u64, &str)> = errs.iter().map(|e| (e.row, e.column.as_str())).collect();
        assert_eq!(located, vec![(3, "carbon_count"), (4, "centrosymmetric"), (5, "")]);
    }

    #[test]
    fn synthetic_file_round_trip() {
        let mut text = HEAD.to_string();
        for i in 0..26 {
            text.push_str(&format!(
                "mol{i},{},{},{},{}\n",
                10 + i,
                2.0 + 0.05 * i as f64,
                1.0 + 0.03 * i as f64,
                i % 2 == 0
            ));
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("molecules.csv");
        std::fs::write(&path, text).unwrap();
        let recs = ingest(&path).unwrap();
        assert_eq!(recs.len(), 26);
        assert_eq!(recs[3].carbon_count, 13);
        assert!(!recs[3].centrosymmetric);
    }

    #[test]
    fn two_point_fit() {
        let f = fit_linear_scaling(&[rec("a", 2.0, 1.0), rec("b", 4.0, 2.0)]).unwrap();
        assert!((f.slope - 0.5).abs() < 1e-12);
        assert!(f.intercept.abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        assert!(fit_linear_scaling(&[rec("a", 2.0, 1.0)]).is_err());
        assert!(fit_linear_scaling(&[rec("a", 2.0, 1.0), rec("b", 2.0, 1.5)]).is_err());
    }

    #[test]
    fn collinear_fit_is_exact() {
        let recs: Vec<_> = (0..30)
            .map(|i| {
                let s = 1.5 + 0.07 * i as f64;
                rec("m", s, 0.62 * s - 0.31)
            })
            .collect();
        let f = fit_linear_scaling(&recs).unwrap();
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        assert!((f.slope - 0.62).abs() < 1e-12);
    }

    #[test]
    fn noisy_fit_recovers_slope() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let noise = Normal::new(0.0, 0.05).unwrap();
        let (a, b) = (0.7, -0.4);
        let recs: Vec<_> = (0..200)
            .map(|_| {
                let s: f64 = 2.0 + 2.0 * rng.random::<f64>();
                rec("m", s, a * s + b + noise.sample(&mut rng))
            })
            .collect();
        let f = fit_linear_scaling(&recs).unwrap();
        // Slope standard error σ/√Sxx.
        let mx = recs.iter().map(|r| r.e_s1).sum::<f64>() / 200.0;
        let sxx: f64 = recs.iter().map(|r| (r.e_s1 - mx).powi(2)).sum();
        assert!((f.slope - a).abs() < 3.0 * 0.05 / sxx.sqrt());
    }

    #[test]
    fn selection_extremes() {
        let recs = vec![rec("a", 3.0, 2.5), rec("b", 4.0, 1.5), rec("c", 2.5, 2.1)];
        let all = SelectionCriteria {
            min_t1: 0.0,
            max_s1: 100.0,
        };
        assert_eq!(select_candidates(&recs, &all).unwrap(), recs);
        let none = SelectionCriteria {
            min_t1: 50.0,
            max_s1: 60.0,
        };
        assert!(select_candidates(&recs, &none).unwrap().is_empty());
        let picked = select_candidates(&recs, &SelectionCriteria::default()).unwrap();
        assert_eq!(picked.iter().map(|r| r.name.as_str()).collect::<Vec<_>>(), ["a", "c"]);
        assert!(select_candidates(
            &recs,
            &SelectionCriteria {
                min_t1: 3.0,
                max_s1: 3.0
            }
        )
        .is_err());
    }

    fn arb_records() -> impl Strategy<Value = Vec<MoleculeRecord>> {
        proptest::collection::vec((0.5f64..5.0, 0.1f64..1.0), 2..40).prop_map(|v| {
            v.into_iter()
                .enumerate()
                .map(|(i, (s, frac))| rec(&format!("m{i}"), s, s * frac))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn selection_is_idempotent_subsequence(recs in arb_records(), lo in 0.0f64..3.0, span in 0.1f64..3.0) {
            let c = SelectionCriteria { min_t1: lo, max_s1: lo + span };
            let once = select_candidates(&recs, &c).unwrap();
            let twice = select_candidates(&once, &c).unwrap();
            prop_assert_eq!(&once, &twice);
            let mut it = recs.iter();
            prop_assert!(once.iter().all(|o| it.any(|r| r == o)));
        }

        #[test]
        fn fit_ignores_order(recs in arb_records(), seed in 0u64..1000) {
            let mut shuffled = recs.clone();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for i in (1..shuffled.len()).rev() {
                let j = rng.random_range(0..=i);
                shuffled.swap(i, j);
            }
            prop_assert_eq!(fit_linear_scaling(&recs).ok(), fit_linear_scaling(&shuffled).ok());
        }
    }
}
