//! Host-guest state registry.
//!
//! A [`LevelKet`] names one product state of the guest electronic manifold,
//! its intramolecular vibron occupations, the host phonon occupations and the
//! nuclear spin projections. Mode indices point into the mode table of a
//! [`VibronicModel`](crate::vibronic::VibronicModel); kets never carry
//! frequencies themselves.
//!
//! Literal syntax (used in configs and logs):
//!
//! ```text
//! S1;v=[0,1];p=[];n=[(1/2,+1/2)]
//! T1,x;v=[];p=[2];n=[]
//! ```
//!
//! Printing is canonical and `print(parse(s)) == s` for every accepted `s`.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LevelError {
    #[error("invalid ket literal `{literal}`: {reason}")]
    Parse { literal: String, reason: String },
    #[error("invalid ket: {0}")]
    Invalid(String),
    #[error("populations sum to {0}, expected 1")]
    NotNormalized(f64),
    #[error("no excited-state population")]
    EmptyPopulation,
}

/// A non-negative or signed half-integer, stored as twice its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HalfInt(i32);

impl HalfInt {
    pub const fn from_twice(twice: i32) -> Self {
        Self(twice)
    }

    pub fn twice(self) -> i32 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    fn write(self, f: &mut fmt::Formatter<'_>, signed: bool) -> fmt::Result {
        let sign = if self.0 > 0 && signed {
            "+"
        } else if self.0 < 0 {
            "-"
        } else {
            ""
        };
        let a = self.0.unsigned_abs();
        if a.is_multiple_of(2) {
            write!(f, "{sign}{}", a / 2)
        } else {
            write!(f, "{sign}{a}/2")
        }
    }

    /// Parses the canonical spelling only: `0`, `1`, `3/2`, and for signed
    /// values `+1/2`, `-1`, ... (zero is never signed).
    fn parse(s: &str, signed: bool) -> Option<Self> {
        let (neg, body) = if signed {
            match s.as_bytes().first()? {
                b'+' => (false, &s[1..]),
                b'-' => (true, &s[1..]),
                _ if s == "0" => (false, s),
                _ => return None,
            }
        } else {
            (false, s)
        };
        let twice = if let Some((num, den)) = body.split_once('/') {
            if den != "2" {
                return None;
            }
            let n = parse_canonical_uint(num)?;
            if n % 2 == 0 {
                return None;
            }
            n as i32
        } else {
            2 * parse_canonical_uint(body)? as i32
        };
        if signed && twice == 0 && s != "0" {
            return None;
        }
        Some(Self(if neg { -twice } else { twice }))
    }
}

fn parse_canonical_uint(s: &str) -> Option<u32> {
    if s.is_empty() || (s.len() > 1 && s.starts_with('0')) || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Multiplicity {
    Singlet,
    Triplet,
}

/// Electronic manifold S_j or T_j. Only S0, S1 and T1 carry dynamics; higher
/// manifolds exist so that intersystem-crossing way-points can be named.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Manifold {
    pub multiplicity: Multiplicity,
    pub index: u32,
}

impl Manifold {
    pub const S0: Manifold = Manifold::singlet(0);
    pub const S1: Manifold = Manifold::singlet(1);
    pub const T1: Manifold = Manifold::triplet(1);

    pub const fn singlet(index: u32) -> Self {
        Self {
            multiplicity: Multiplicity::Singlet,
            index,
        }
    }

    pub const fn triplet(index: u32) -> Self {
        Self {
            multiplicity: Multiplicity::Triplet,
            index,
        }
    }

    pub fn is_triplet(self) -> bool {
        self.multiplicity == Multiplicity::Triplet
    }

    pub fn is_excited(self) -> bool {
        self != Manifold::S0
    }

    /// Position in the nominal energy ladder S0 < T1 < S1 < T2 < S2 < ...
    /// (T_j lies below S_j by the exchange energy).
    pub fn energy_rank(self) -> u32 {
        match self.multiplicity {
            Multiplicity::Singlet if self.index == 0 => 0,
            Multiplicity::Triplet => 2 * self.index - 1,
            Multiplicity::Singlet => 2 * self.index,
        }
    }
}

impl fmt::Display for Manifold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self.multiplicity {
            Multiplicity::Singlet => 'S',
            Multiplicity::Triplet => 'T',
        };
        write!(f, "{c}{}", self.index)
    }
}

/// Triplet sublevel, labelled by the zero-field principal axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(rename_all = "lowercase")]
pub enum Sublevel {
    X,
    Y,
    Z,
}

impl Sublevel {
    pub const ALL: [Sublevel; 3] = [Sublevel::X, Sublevel::Y, Sublevel::Z];

    fn tag(self) -> char {
        match self {
            Sublevel::X => 'x',
            Sublevel::Y => 'y',
            Sublevel::Z => 'z',
        }
    }
}

/// One nuclear spin label (I, m_I).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NuclearLabel {
    pub spin: HalfInt,
    pub projection: HalfInt,
}

impl NuclearLabel {
    pub fn new(spin: HalfInt, projection: HalfInt) -> Result<Self, LevelError> {
        if spin.twice() < 0 {
            return Err(LevelError::Invalid("nuclear spin must be non-negative".into()));
        }
        if projection.twice().abs() > spin.twice() || (spin.twice() - projection.twice()) % 2 != 0 {
            return Err(LevelError::Invalid(format!(
                "projection {} is not allowed for I = {}",
                projection.value(),
                spin.value()
            )));
        }
        Ok(Self { spin, projection })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct LevelKet {
    manifold: Manifold,
    sublevel: Option<Sublevel>,
    vibrons: Vec<u32>,
    phonons: Vec<u32>,
    nuclei: Vec<NuclearLabel>,
}

fn trimmed(v: &[u32]) -> &[u32] {
    let end = v.iter().rposition(|&x| x != 0).map_or(0, |i| i + 1);
    &v[..end]
}

impl LevelKet {
    pub fn new(
        manifold: Manifold,
        sublevel: Option<Sublevel>,
        vibrons: Vec<u32>,
        phonons: Vec<u32>,
        nuclei: Vec<NuclearLabel>,
    ) -> Result<Self, LevelError> {
        if manifold.is_triplet() != sublevel.is_some() {
            return Err(LevelError::Invalid(format!(
                "{manifold}: a sublevel tag is required for triplet manifolds and forbidden otherwise"
            )));
        }
        if manifold.is_triplet() && manifold.index == 0 {
            return Err(LevelError::Invalid("there is no T0 manifold".into()));
        }
        Ok(Self {
            manifold,
            sublevel,
            vibrons,
            phonons,
            nuclei,
        })
    }

    /// Vibrationless singlet ket |S_j; 0, 0⟩.
    pub fn singlet(index: u32) -> Self {
        Self::new(Manifold::singlet(index), None, vec![], vec![], vec![]).unwrap()
    }

    /// Vibrationless triplet ket |T_j^α; 0, 0⟩.
    pub fn triplet(index: u32, sublevel: Sublevel) -> Self {
        Self::new(Manifold::triplet(index.max(1)), Some(sublevel), vec![], vec![], vec![]).unwrap()
    }

    pub fn with_vibrons(mut self, vibrons: Vec<u32>) -> Self {
        self.vibrons = vibrons;
        self
    }

    pub fn with_phonons(mut self, phonons: Vec<u32>) -> Self {
        self.phonons = phonons;
        self
    }

    pub fn with_nuclei(mut self, nuclei: Vec<NuclearLabel>) -> Self {
        self.nuclei = nuclei;
        self
    }

    pub fn manifold(&self) -> Manifold {
        self.manifold
    }

    pub fn sublevel(&self) -> Option<Sublevel> {
        self.sublevel
    }

    pub fn nuclei(&self) -> &[NuclearLabel] {
        &self.nuclei
    }

    /// Occupation of vibron mode `mode` (0 when absent).
    pub fn vibron(&self, mode: usize) -> u32 {
        self.vibrons.get(mode).copied().unwrap_or(0)
    }

    pub fn phonon(&self, mode: usize) -> u32 {
        self.phonons.get(mode).copied().unwrap_or(0)
    }

    pub fn has_vibrons(&self) -> bool {
        self.vibrons.iter().any(|&n| n != 0)
    }

    pub fn has_phonons(&self) -> bool {
        self.phonons.iter().any(|&n| n != 0)
    }

    pub fn is_vibrationless(&self) -> bool {
        !self.has_vibrons() && !self.has_phonons()
    }

    /// Same electronic and nuclear labels with every occupation set to zero.
    pub fn relaxed(&self) -> LevelKet {
        LevelKet {
            vibrons: vec![],
            phonons: vec![],
            ..self.clone()
        }
    }

    fn key(&self) -> (Manifold, Option<Sublevel>, &[u32], &[u32], &[NuclearLabel]) {
        (
            self.manifold,
            self.sublevel,
            trimmed(&self.vibrons),
            trimmed(&self.phonons),
            &self.nuclei,
        )
    }
}

impl PartialEq for LevelKet {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for LevelKet {}

impl Hash for LevelKet {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key().hash(state);
    }
}

impl PartialOrd for LevelKet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for LevelKet {
    fn cmp(&self, other: &Self) -> Ordering {
        let a = self.key();
        let b = other.key();
        (a.0.energy_rank(), a.1, a.2, a.3, a.4).cmp(&(b.0.energy_rank(), b.1, b.2, b.3, b.4))
    }
}

impl fmt::Display for LevelKet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.manifold)?;
        if let Some(s) = self.sublevel {
            write!(f, ",{}", s.tag())?;
        }
        let list = |v: &[u32]| v.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
        write!(f, ";v=[{}];p=[{}];n=[", list(&self.vibrons), list(&self.phonons))?;
        for (i, n) in self.nuclei.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str("(")?;
            n.spin.write(f, false)?;
            f.write_str(",")?;
            n.projection.write(f, true)?;
            f.write_str(")")?;
        }
        f.write_str("]")
    }
}

impl FromStr for LevelKet {
    type Err = LevelError;

    fn from_str(s: &str) -> Result<Self, LevelError> {
        let fail = |reason: &str| LevelError::Parse {
            literal: s.to_string(),
            reason: reason.to_string(),
        };
        let mut parts = s.split(';');
        let head = parts.next().ok_or_else(|| fail("empty literal"))?;
        let v = parts.next().ok_or_else(|| fail("missing v=[...]"))?;
        let p = parts.next().ok_or_else(|| fail("missing p=[...]"))?;
        let n = parts.next().ok_or_else(|| fail("missing n=[...]"))?;
        if parts.next().is_some() {
            return Err(fail("too many `;`-separated fields"));
        }

        let (man, sub) = match head.split_once(',') {
            Some((m, s)) => (m, Some(s)),
            None => (head, None),
        };
        let multiplicity = match man.as_bytes().first() {
            Some(b'S') => Multiplicity::Singlet,
            Some(b'T') => Multiplicity::Triplet,
            _ => return Err(fail("manifold must start with S or T")),
        };
        let index = parse_canonical_uint(&man[1..]).ok_or_else(|| fail("bad manifold index"))?;
        let sublevel = match sub {
            None => None,
            Some("x") => Some(Sublevel::X),
            Some("y") => Some(Sublevel::Y),
            Some("z") => Some(Sublevel::Z),
            Some(_) => return Err(fail("sublevel must be x, y or z")),
        };

        let occupations = |field: &str, prefix: &str| -> Result<Vec<u32>, LevelError> {
            let body = field
                .strip_prefix(prefix)
                .and_then(|b| b.strip_prefix('['))
                .and_then(|b| b.strip_suffix(']'))
                .ok_or_else(|| fail(&format!("expected {prefix}[...]")))?;
            if body.is_empty() {
                return Ok(vec![]);
            }
            body.split(',')
                .map(|x| parse_canonical_uint(x).ok_or_else(|| fail("occupations must be non-negative integers")))
                .collect()
        };
        let vibrons = occupations(v, "v=")?;
        let phonons = occupations(p, "p=")?;

        let body = n
            .strip_prefix("n=[")
            .and_then(|b| b.strip_suffix(']'))
            .ok_or_else(|| fail("expected n=[...]"))?;
        let mut nuclei = Vec::new();
        let mut rest = body;
        while !rest.is_empty() {
            let inner_end = rest.find(')').ok_or_else(|| fail("unterminated nuclear label"))?;
            let inner = rest
                .strip_prefix('(')
                .map(|r| &r[..inner_end - 1])
                .ok_or_else(|| fail("nuclear label must be (I,m)"))?;
            let (i, m) = inner
                .split_once(',')
                .ok_or_else(|| fail("nuclear label must be (I,m)"))?;
            let spin = HalfInt::parse(i, false).ok_or_else(|| fail("bad nuclear spin"))?;
            let projection = HalfInt::parse(m, true).ok_or_else(|| fail("bad m_I"))?;
            nuclei.push(NuclearLabel::new(spin, projection).map_err(|e| fail(&e.to_string()))?);
            rest = &rest[inner_end + 1..];
            if let Some(r) = rest.strip_prefix(',') {
                if r.is_empty() {
                    return Err(fail("trailing comma"));
                }
                rest = r;
            } else if !rest.is_empty() {
                return Err(fail("nuclear labels must be comma separated"));
            }
        }

        LevelKet::new(Manifold { multiplicity, index }, sublevel, vibrons, phonons, nuclei)
            .map_err(|e| fail(&e.to_string()))
    }
}

impl TryFrom<String> for LevelKet {
    type Error = LevelError;
    fn try_from(s: String) -> Result<Self, LevelError> {
        s.parse()
    }
}

impl From<LevelKet> for String {
    fn from(k: LevelKet) -> String {
        k.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransitionClass {
    #[serde(rename = "ZPL")]
    Zpl,
    VibronicEmission,
    PhononWing,
    #[serde(rename = "ISC")]
    Isc,
    Phosphorescence,
    MicrowaveSpin,
    VibrationalRelaxation,
    Forbidden,
}

impl TransitionClass {
    /// Optical emission channels that contribute to detected fluorescence.
    pub fn is_fluorescence(self) -> bool {
        matches!(
            self,
            TransitionClass::Zpl | TransitionClass::VibronicEmission | TransitionClass::PhononWing
        )
    }
}

/// Classifies the ordered transition `from → to`. Total over all ket pairs.
///
/// Triplet-to-singlet crossings are reported as ISC; use
/// [`classify_radiative_transition`] to ask for the phosphorescence reading of
/// the vibrationless T1 → S0 decay.
pub fn classify_transition(from: &LevelKet, to: &LevelKet) -> TransitionClass {
    use TransitionClass::*;
    if from == to || from.nuclei != to.nuclei {
        return Forbidden;
    }
    let (a, b) = (from.manifold, to.manifold);
    if a.multiplicity != b.multiplicity {
        return Isc;
    }
    if a == b {
        if from.sublevel != to.sublevel {
            return if from.key().2 == to.key().2 && from.key().3 == to.key().3 {
                MicrowaveSpin
            } else {
                Forbidden
            };
        }
        return if occupation_decrease(from, to) {
            VibrationalRelaxation
        } else {
            Forbidden
        };
    }
    if a == Manifold::S1 && b == Manifold::S0 && from.is_vibrationless() {
        return if to.has_phonons() {
            PhononWing
        } else if to.has_vibrons() {
            VibronicEmission
        } else {
            Zpl
        };
    }
    Forbidden
}

/// Like [`classify_transition`], but vibrationless T1 → vibrationless S0 is
/// read as radiative (phosphorescence).
pub fn classify_radiative_transition(from: &LevelKet, to: &LevelKet) -> TransitionClass {
    let class = classify_transition(from, to);
    if class == TransitionClass::Isc
        && from.manifold == Manifold::T1
        && to.manifold == Manifold::S0
        && from.is_vibrationless()
        && to.is_vibrationless()
    {
        TransitionClass::Phosphorescence
    } else {
        class
    }
}

fn occupation_decrease(from: &LevelKet, to: &LevelKet) -> bool {
    let le = |x: &[u32], y: &[u32]| {
        (0..x.len().max(y.len())).all(|i| y.get(i).copied().unwrap_or(0) <= x.get(i).copied().unwrap_or(0))
    };
    le(&from.vibrons, &to.vibrons) && le(&from.phonons, &to.phonons) && from != to
}

/// Kasha's rule: emission starts from the vibrationless ket of the lowest
/// excited manifold that holds population.
///
/// For a triplet manifold the sublevel of the most populated ket in that
/// manifold is kept (ties resolve to the first of x, y, z).
pub fn kasha_emitting_state(populations: &[(LevelKet, f64)]) -> Result<LevelKet, LevelError> {
    let total: f64 = populations.iter().map(|(_, p)| p).sum();
    if (total - 1.0).abs() > 1e-9 || populations.iter().any(|(_, p)| *p < 0.0) {
        return Err(LevelError::NotNormalized(total));
    }
    let lowest = populations
        .iter()
        .filter(|(k, p)| *p > 0.0 && k.manifold.is_excited())
        .map(|(k, _)| k.manifold)
        .min_by_key(|m| m.energy_rank())
        .ok_or(LevelError::EmptyPopulation)?;

    let mut by_ket: HashMap<LevelKet, f64> = HashMap::new();
    for (k, p) in populations.iter().filter(|(k, p)| k.manifold == lowest && *p > 0.0) {
        *by_ket.entry(k.relaxed()).or_default() += p;
    }
    let mut candidates: Vec<(LevelKet, f64)> = by_ket.into_iter().collect();
    candidates.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(candidates.swap_remove(0).0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ket(s: &str) -> LevelKet {
        s.parse().unwrap()
    }

    #[test]
    fn documented_literal_round_trips() {
        let s = "S1;v=[0,1];p=[];n=[(1/2,+1/2)]";
        assert_eq!(ket(s).to_string(), s);
        let t = "T1,z;v=[2];p=[0,3];n=[(1,-1),(3/2,+1/2),(1,0)]";
        assert_eq!(ket(t).to_string(), t);
    }

    #[test]
    fn rejects_malformed_literals() {
        for bad in [
            "S1",
            "T1;v=[];p=[];n=[]",
            "S1,x;v=[];p=[];n=[]",
            "T0,x;v=[];p=[];n=[]",
            "S1;v=[01];p=[];n=[]",
            "S1;v=[-1];p=[];n=[]",
            "S1;v=[];p=[];n=[(1/2,1/2)]",
            "S1;v=[];p=[];n=[(1/2,+3/2)]",
            "S1;v=[];p=[];n=[(1,+1/2)]",
            "S1;v=[];p=[];n=[(2/2,0)]",
            "S1;v=[];p=[];n=[(1,+0)]",
            "S1;v=[];p=[];n=[(1/2,+1/2),]",
            "Q1;v=[];p=[];n=[]",
            "S1;v=[];p=[];n=[];extra",
        ] {
            assert!(bad.parse::<LevelKet>().is_err(), "{bad}");
        }
    }

    #[test]
    fn absent_occupation_means_zero() {
        assert_eq!(ket("S0;v=[1,0,0];p=[];n=[]"), ket("S0;v=[1];p=[0];n=[]"));
        assert_eq!(ket("S0;v=[0,2];p=[];n=[]").vibron(7), 0);
    }

    #[test]
    fn worked_classifications() {
        use TransitionClass::*;
        let s1 = LevelKet::singlet(1);
        let s0 = LevelKet::singlet(0);
        assert_eq!(classify_transition(&s1, &s0), Zpl);
        assert_eq!(
            classify_transition(&LevelKet::triplet(1, Sublevel::X), &LevelKet::triplet(1, Sublevel::Y)),
            MicrowaveSpin
        );
        assert_eq!(
            classify_transition(&ket("S0;v=[1];p=[];n=[]"), &s0),
            VibrationalRelaxation
        );
        assert_eq!(classify_transition(&s1, &ket("S0;v=[0,1];p=[];n=[]")), VibronicEmission);
        assert_eq!(classify_transition(&s1, &ket("S0;v=[1];p=[1];n=[]")), PhononWing);
        assert_eq!(classify_transition(&s1, &LevelKet::triplet(2, Sublevel::Z)), Isc);
        let t1 = LevelKet::triplet(1, Sublevel::Z);
        assert_eq!(classify_transition(&t1, &s0), Isc);
        assert_eq!(classify_radiative_transition(&t1, &s0), Phosphorescence);
        assert_eq!(classify_radiative_transition(&t1, &ket("S0;v=[1];p=[];n=[]")), Isc);
        // Hot luminescence and absorption are not emission channels here.
        assert_eq!(classify_transition(&ket("S1;v=[1];p=[];n=[]"), &s0), Forbidden);
        assert_eq!(classify_transition(&s0, &s1), Forbidden);
        assert_eq!(classify_transition(&s0, &ket("S0;v=[1];p=[];n=[]")), Forbidden);
    }

    fn small_ket_set() -> Vec<LevelKet> {
        let mut out = Vec::new();
        let nucs = [
            vec![],
            vec![NuclearLabel::new(HalfInt::from_twice(1), HalfInt::from_twice(1)).unwrap()],
        ];
        let heads: Vec<(Manifold, Option<Sublevel>)> = vec![
            (Manifold::S0, None),
            (Manifold::S1, None),
            (Manifold::singlet(2), None),
            (Manifold::T1, Some(Sublevel::X)),
            (Manifold::T1, Some(Sublevel::Y)),
            (Manifold::T1, Some(Sublevel::Z)),
            (Manifold::triplet(2), Some(Sublevel::Z)),
        ];
        for (m, s) in heads {
            for v in [vec![], vec![1], vec![0, 2]] {
                for p in [vec![], vec![1]] {
                    for n in &nucs {
                        out.push(LevelKet::new(m, s, v.clone(), p.clone(), n.clone()).unwrap());
                    }
                }
            }
        }
        out
    }

    #[test]
    fn classification_is_total_and_self_pairs_forbidden() {
        let kets = small_ket_set();
        let mut seen = HashMap::new();
        for a in &kets {
            assert_eq!(classify_transition(a, a), TransitionClass::Forbidden);
            for b in &kets {
                // Exactly one class per pair: the function is deterministic.
                let c = classify_transition(a, b);
                assert_eq!(c, classify_transition(a, b));
                *seen.entry(c).or_insert(0) += 1;
            }
        }
        for class in [
            TransitionClass::Zpl,
            TransitionClass::VibronicEmission,
            TransitionClass::PhononWing,
            TransitionClass::Isc,
            TransitionClass::MicrowaveSpin,
            TransitionClass::VibrationalRelaxation,
            TransitionClass::Forbidden,
        ] {
            assert!(seen.contains_key(&class), "{class:?} never produced");
        }
    }

    #[test]
    fn kasha_examples() {
        let hot = ket("S1;v=[0,1];p=[];n=[]");
        assert_eq!(kasha_emitting_state(&[(hot, 1.0)]).unwrap(), LevelKet::singlet(1));
        assert_eq!(
            kasha_emitting_state(&[(LevelKet::singlet(1), 1.0)]).unwrap(),
            LevelKet::singlet(1)
        );
        let t = ket("T1,z;v=[1];p=[];n=[]");
        assert_eq!(
            kasha_emitting_state(&[(t, 1.0)]).unwrap(),
            LevelKet::triplet(1, Sublevel::Z)
        );
        let mixed = [
            (ket("S2;v=[3];p=[];n=[]"), 0.25),
            (ket("S1;v=[1];p=[2];n=[]"), 0.25),
            (LevelKet::singlet(0), 0.5),
        ];
        assert_eq!(kasha_emitting_state(&mixed).unwrap(), LevelKet::singlet(1));
    }

    #[test]
    fn kasha_errors() {
        assert_eq!(
            kasha_emitting_state(&[(LevelKet::singlet(0), 1.0)]).unwrap_err(),
            LevelError::EmptyPopulation
        );
        assert!(matches!(
            kasha_emitting_state(&[(LevelKet::singlet(1), 0.9)]).unwrap_err(),
            LevelError::NotNormalized(_)
        ));
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        fn arb_ket() -> impl Strategy<Value = LevelKet> {
            let head = prop_oneof![
                (0u32..4).prop_map(|j| (Manifold::singlet(j), None)),
                (1u32..4, 0usize..3).prop_map(|(j, s)| (Manifold::triplet(j), Some(Sublevel::ALL[s]))),
            ];
            let nucleus = (0i32..5).prop_flat_map(|two_i| {
                (Just(two_i), 0..=two_i as usize).prop_map(|(two_i, k)| {
                    NuclearLabel::new(HalfInt::from_twice(two_i), HalfInt::from_twice(two_i - 2 * k as i32)).unwrap()
                })
            });
            (
                head,
                prop::collection::vec(0u32..12, 0..4),
                prop::collection::vec(0u32..12, 0..4),
                prop::collection::vec(nucleus, 0..3),
            )
                .prop_map(|((m, s), v, p, n)| LevelKet::new(m, s, v, p, n).unwrap())
        }

        proptest! {
            #[test]
            fn print_parse_is_bit_exact(k in arb_ket()) {
                let s = k.to_string();
                let back: LevelKet = s.parse().unwrap();
                prop_assert_eq!(back.to_string(), s);
                prop_assert_eq!(back, k);
            }

            #[test]
            fn self_transition_forbidden(k in arb_ket()) {
                prop_assert_eq!(classify_transition(&k, &k), TransitionClass::Forbidden);
            }
        }
    }
}
