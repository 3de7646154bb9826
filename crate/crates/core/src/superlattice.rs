//! Bi-periodically poled superlattice geometry.
//!
//! A design is `n_gap + 1` stacks of `n_nl` alternately poled domains,
//! separated by uniformly poled gaps `m_gap` stacks long. Each gap is poled
//! opposite to the domains on both sides of it.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_CRYSTAL_LENGTH_UM: f64 = 63_500.0;
/// Plausible range for a first-order QPM domain, μm.
pub const DOMAIN_SANITY_WINDOW_UM: (f64, f64) = (1.0, 50.0);

fn default_budget() -> f64 {
    DEFAULT_CRYSTAL_LENGTH_UM
}

/// Four-parameter superlattice description plus the crystal length available for it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignSpec {
    pub n_nl: u32,
    pub n_gap: u32,
    pub m_gap: u32,
    pub l_domain_um: f64,
    #[serde(default = "default_budget")]
    pub crystal_length_budget_um: f64,
}

impl DesignSpec {
    pub fn new(n_nl: u32, n_gap: u32, m_gap: u32, l_domain_um: f64) -> Self {
        Self {
            n_nl,
            n_gap,
            m_gap,
            l_domain_um,
            crystal_length_budget_um: DEFAULT_CRYSTAL_LENGTH_UM,
        }
    }

    /// Design 1 of the fabricated crystal: 16 domains per stack, 85 gaps of 8 stacks.
    pub fn design_1() -> Self {
        Self::new(16, 85, 8, 5.16)
    }

    /// Design 2: 64 domains per stack, 21 gaps of 8 stacks.
    pub fn design_2() -> Self {
        Self::new(64, 21, 8, 5.16)
    }

    /// Design 3: 16 domains per stack, 23 gaps of 32 stacks.
    pub fn design_3() -> Self {
        Self::new(16, 23, 32, 5.16)
    }

    pub fn n_stack(&self) -> u32 {
        self.n_gap + 1
    }

    pub fn l_stack(&self) -> f64 {
        self.n_nl as f64 * self.l_domain_um
    }

    pub fn l_gap(&self) -> f64 {
        self.m_gap as f64 * self.l_stack()
    }

    /// Stack plus gap: the super-period of the comb.
    pub fn super_period(&self) -> f64 {
        self.l_stack() + self.l_gap()
    }

    pub fn element_count(&self) -> usize {
        self.n_stack() as usize * self.n_nl as usize + self.n_gap as usize
    }

    pub fn domain_count(&self) -> usize {
        self.n_stack() as usize * self.n_nl as usize
    }

    /// Field-level checks needed before any geometry can be built.
    pub(crate) fn check_fields(&self) -> Result<()> {
        let report = self.field_violations();
        match report.first() {
            None => Ok(()),
            Some(v) => Err(Error::invalid(v.to_string())),
        }
    }

    fn field_violations(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        if self.n_nl < 1 {
            v.push(Violation::DomainsPerStack);
        }
        if self.n_gap > 0 && self.m_gap < 1 {
            v.push(Violation::GapMultiple);
        }
        if !(self.l_domain_um > 0.0) || !self.l_domain_um.is_finite() {
            v.push(Violation::DomainLength(self.l_domain_um));
        }
        v
    }
}

/// Eq.-(3) length of a design: l_stack · (n_gap·m_gap + n_gap + 1).
pub fn design_length(spec: &DesignSpec) -> Result<f64> {
    spec.check_fields()?;
    let n_gap = spec.n_gap as u64;
    let multiple = n_gap * spec.m_gap as u64 + n_gap + 1;
    Ok(spec.l_stack() * multiple as f64)
}

/// Orientation of the optic axis in a poled element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Up,
    Down,
}

impl Sign {
    pub fn flip(self) -> Self {
        match self {
            Sign::Up => Sign::Down,
            Sign::Down => Sign::Up,
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Sign::Up => 1.0,
            Sign::Down => -1.0,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Up => 1,
            Sign::Down => -1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ElementKind {
    Domain,
    Gap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Element {
    pub length_um: f64,
    pub sign: Sign,
    pub kind: ElementKind,
}

impl Element {
    pub fn domain(length_um: f64, sign: Sign) -> Self {
        Self {
            length_um,
            sign,
            kind: ElementKind::Domain,
        }
    }
}

/// Realized χ(z) profile: ordered poled elements with their front-edge coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSequence {
    elements: Vec<Element>,
    offsets: Vec<f64>,
    total_length: f64,
    lattice: Option<Lattice>,
}

/// Integer layout of a sequence whose edges all fall on multiples of one unit.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Lattice {
    pub(crate) unit_um: f64,
    /// (front edge, length) of every element, in units.
    pub(crate) spans: Vec<(u64, u64)>,
}

impl DomainSequence {
    /// Sequence from explicit elements; the total length is the running sum.
    pub fn from_elements(elements: Vec<Element>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::invalid("domain sequence must not be empty"));
        }
        if let Some(e) = elements.iter().find(|e| !(e.length_um > 0.0) || !e.length_um.is_finite()) {
            return Err(Error::invalid(format!("element length must be positive, got {}", e.length_um)));
        }
        let (offsets, total_length) = front_edges(&elements);
        Ok(Self {
            elements,
            offsets,
            total_length,
            lattice: None,
        })
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    /// Front-edge coordinate of every element; the first is 0.
    pub fn cumulative_offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn total_length(&self) -> f64 {
        self.total_length
    }

    /// Common length unit of all element edges, when the sequence was built from a design.
    pub fn lattice_unit(&self) -> Option<f64> {
        self.lattice.as_ref().map(|l| l.unit_um)
    }

    pub(crate) fn lattice(&self) -> Option<&Lattice> {
        self.lattice.as_ref()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Same geometry with every orientation reversed.
    pub fn flipped(&self) -> Self {
        Self {
            elements: self
                .elements
                .iter()
                .map(|e| Element {
                    sign: e.sign.flip(),
                    ..*e
                })
                .collect(),
            offsets: self.offsets.clone(),
            total_length: self.total_length,
            lattice: self.lattice.clone(),
        }
    }

    /// CSV with columns `index, z_front_um, length_um, sign`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["index", "z_front_um", "length_um", "sign"])?;
        for (i, (e, z)) in self.elements.iter().zip(&self.offsets).enumerate() {
            w.write_record([
                i.to_string(),
                crate::io::format_float(*z),
                crate::io::format_float(e.length_um),
                e.sign.as_i8().to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Running sum of lengths with Neumaier compensation, so coordinates deep in a
/// long crystal stay correctly rounded.
fn front_edges(elements: &[Element]) -> (Vec<f64>, f64) {
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    let offsets = elements
        .iter()
        .map(|e| {
            let front = sum + carry;
            let t = sum + e.length_um;
            if sum.abs() >= e.length_um.abs() {
                carry += (sum - t) + e.length_um;
            } else {
                carry += (e.length_um - t) + sum;
            }
            sum = t;
            front
        })
        .collect();
    (offsets, sum + carry)
}

/// Lays out the signed elements of a design. The first domain points up; each
/// stack alternates starting opposite to the preceding gap, and each gap is
/// opposite to the last domain before it.
pub fn build_sequence(spec: &DesignSpec) -> Result<DomainSequence> {
    let total_length = design_length(spec)?;
    let mut elements = Vec::with_capacity(spec.element_count());
    let mut spans = Vec::with_capacity(spec.element_count());
    let l_gap = spec.l_gap();
    let gap_units = spec.n_nl as u64 * spec.m_gap as u64;
    let mut front = 0u64;
    let mut next = Sign::Up;
    for stack in 0..spec.n_stack() {
        for _ in 0..spec.n_nl {
            elements.push(Element::domain(spec.l_domain_um, next));
            spans.push((front, 1));
            front += 1;
            next = next.flip();
        }
        if stack < spec.n_gap {
            // `next` is already opposite to the last domain
            elements.push(Element {
                length_um: l_gap,
                sign: next,
                kind: ElementKind::Gap,
            });
            spans.push((front, gap_units));
            front += gap_units;
            next = next.flip();
        }
    }
    let offsets = spans.iter().map(|&(f, _)| f as f64 * spec.l_domain_um).collect();
    Ok(DomainSequence {
        elements,
        offsets,
        total_length,
        lattice: Some(Lattice {
            unit_um: spec.l_domain_um,
            spans,
        }),
    })
}

/// Checks the poling sign rules of a sequence built from `spec`; returns the first broken rule.
pub fn audit_signs(seq: &DomainSequence, spec: &DesignSpec) -> std::result::Result<(), String> {
    let els = seq.elements();
    if els.len() != spec.element_count() {
        return Err(format!("expected {} elements, found {}", spec.element_count(), els.len()));
    }
    let mut gap_signs = Vec::new();
    for (i, e) in els.iter().enumerate() {
        match e.kind {
            ElementKind::Domain => {
                if let Some(prev) = i.checked_sub(1).map(|j| els[j]) {
                    if prev.kind == ElementKind::Domain && prev.sign == e.sign {
                        return Err(format!("domains {} and {i} share an orientation inside a stack", i - 1));
                    }
                }
            }
            ElementKind::Gap => {
                let before = i.checked_sub(1).map(|j| els[j]);
                let after = els.get(i + 1);
                match (before, after) {
                    (Some(b), Some(a)) if b.kind == ElementKind::Domain && a.kind == ElementKind::Domain => {
                        if b.sign == e.sign || a.sign == e.sign {
                            return Err(format!("gap {i} is not opposite to both neighbouring domains"));
                        }
                    }
                    _ => return Err(format!("gap {i} is not enclosed by domains")),
                }
                gap_signs.push(e.sign);
            }
        }
    }
    let even = spec.n_nl % 2 == 0;
    for w in gap_signs.windows(2) {
        if even && w[0] == w[1] {
            return Err("even n_nl requires alternating gap orientations".into());
        }
        if !even && w[0] != w[1] {
            return Err("odd n_nl requires uniform gap orientations".into());
        }
    }
    Ok(())
}

/// One broken constraint of a design.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Violation {
    DomainsPerStack,
    GapMultiple,
    DomainLength(f64),
    DomainOutsideSanityWindow(f64),
    Budget(f64),
    ExceedsBudget { design_um: f64, budget_um: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DomainsPerStack => write!(f, "n_nl must be >= 1"),
            Violation::GapMultiple => write!(f, "m_gap must be >= 1 when n_gap > 0"),
            Violation::DomainLength(l) => write!(f, "l_domain_um must be positive and finite, got {l}"),
            Violation::DomainOutsideSanityWindow(l) => write!(
                f,
                "l_domain_um = {l} is outside the [{}, {}] um sanity window",
                DOMAIN_SANITY_WINDOW_UM.0, DOMAIN_SANITY_WINDOW_UM.1
            ),
            Violation::Budget(b) => write!(f, "crystal_length_budget_um must be positive, got {b}"),
            Violation::ExceedsBudget { design_um, budget_um } => {
                write!(f, "design length {design_um} um exceeds the crystal budget {budget_um} um")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn messages(&self) -> Vec<String> {
        self.violations.iter().map(ToString::to_string).collect()
    }
}

/// Collects every constraint a design breaks, including the crystal budget.
pub fn validate(spec: &DesignSpec) -> ValidationReport {
    let mut violations = spec.field_violations();
    let (lo, hi) = DOMAIN_SANITY_WINDOW_UM;
    if spec.l_domain_um > 0.0 && !(lo..=hi).contains(&spec.l_domain_um) {
        violations.push(Violation::DomainOutsideSanityWindow(spec.l_domain_um));
    }
    if !(spec.crystal_length_budget_um > 0.0) {
        violations.push(Violation::Budget(spec.crystal_length_budget_um));
    }
    if let Ok(len) = design_length(spec) {
        if spec.crystal_length_budget_um > 0.0 && len > spec.crystal_length_budget_um {
            violations.push(Violation::ExceedsBudget {
                design_um: len,
                budget_um: spec.crystal_length_budget_um,
            });
        }
    }
    ValidationReport { violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn signs(seq: &DomainSequence) -> Vec<i8> {
        seq.elements().iter().map(|e| e.sign.as_i8()).collect()
    }

    fn lengths(seq: &DomainSequence) -> Vec<f64> {
        seq.elements().iter().map(|e| e.length_um).collect()
    }

    #[test]
    fn design_lengths() {
        assert_relative_eq!(design_length(&DesignSpec::design_1()).unwrap(), 63_240.96, max_relative = 1e-14);
        assert_relative_eq!(design_length(&DesignSpec::new(16, 0, 1, 5.16)).unwrap(), 82.56, max_relative = 1e-14);
        assert_relative_eq!(design_length(&DesignSpec::design_2()).unwrap(), 62_745.6, max_relative = 1e-14);
    }

    #[test]
    fn single_stack_length_is_stack_length() {
        let spec = DesignSpec::new(7, 0, 3, 4.0);
        assert_eq!(design_length(&spec).unwrap(), spec.l_stack());
    }

    #[test]
    fn invalid_fields_rejected() {
        assert!(design_length(&DesignSpec::new(0, 1, 1, 5.0)).is_err());
        assert!(design_length(&DesignSpec::new(4, 1, 0, 5.0)).is_err());
        assert!(design_length(&DesignSpec::new(4, 1, 1, -5.0)).is_err());
        assert!(build_sequence(&DesignSpec::new(4, 1, 1, f64::NAN)).is_err());
        // m_gap is irrelevant without gaps
        assert!(design_length(&DesignSpec::new(4, 0, 0, 5.0)).is_ok());
    }

    #[test]
    fn even_stack_example() {
        let seq = build_sequence(&DesignSpec::new(2, 1, 1, 1.0)).unwrap();
        assert_eq!(lengths(&seq), vec![1.0, 1.0, 2.0, 1.0, 1.0]);
        assert_eq!(signs(&seq), vec![1, -1, 1, -1, 1]);
        assert_eq!(seq.total_length(), 6.0);
        assert_eq!(seq.cumulative_offsets(), &[0.0, 1.0, 2.0, 4.0, 5.0]);
    }

    #[test]
    fn odd_stack_example() {
        let spec = DesignSpec::new(1, 2, 1, 1.0);
        let seq = build_sequence(&spec).unwrap();
        assert_eq!(signs(&seq), vec![1, -1, 1, -1, 1]);
        let gaps: Vec<i8> = seq
            .elements()
            .iter()
            .filter(|e| e.kind == ElementKind::Gap)
            .map(|e| e.sign.as_i8())
            .collect();
        assert_eq!(gaps, vec![-1, -1]);
        audit_signs(&seq, &spec).unwrap();
    }

    #[test]
    fn even_domains_alternate_gaps() {
        let spec = DesignSpec::new(16, 3, 1, 5.16);
        let seq = build_sequence(&spec).unwrap();
        let gaps: Vec<i8> = seq
            .elements()
            .iter()
            .filter(|e| e.kind == ElementKind::Gap)
            .map(|e| e.sign.as_i8())
            .collect();
        assert_eq!(gaps, vec![1, -1, 1]);
        audit_signs(&seq, &spec).unwrap();
    }

    #[test]
    fn design_1_counts() {
        let spec = DesignSpec::design_1();
        let seq = build_sequence(&spec).unwrap();
        assert_eq!(seq.len(), 1461);
        assert_eq!(spec.domain_count(), 1376);
        assert_eq!(seq.total_length(), design_length(&spec).unwrap());
        assert_relative_eq!(lengths(&seq).iter().sum::<f64>(), seq.total_length(), max_relative = 1e-12);
    }

    #[test]
    fn audit_catches_broken_sequence() {
        let spec = DesignSpec::new(2, 1, 1, 1.0);
        let seq = build_sequence(&spec).unwrap();
        let mut els = seq.elements().to_vec();
        els[2].sign = Sign::Down;
        let broken = DomainSequence::from_elements(els).unwrap();
        assert!(audit_signs(&broken, &spec).is_err());
    }

    #[test]
    fn validation_reports() {
        assert!(validate(&DesignSpec::design_1()).is_valid());
        let tight = DesignSpec {
            crystal_length_budget_um: 60_000.0,
            ..DesignSpec::design_1()
        };
        let report = validate(&tight);
        assert!(matches!(report.violations.as_slice(), [Violation::ExceedsBudget { .. }]));
        let report = validate(&DesignSpec::new(0, 3, 1, 5.16));
        assert_eq!(report.violations, vec![Violation::DomainsPerStack]);
        let report = validate(&DesignSpec::new(4, 3, 1, 0.2));
        assert_eq!(report.violations, vec![Violation::DomainOutsideSanityWindow(0.2)]);
    }

    #[test]
    fn spec_json_round_trip_and_strictness() {
        let json = r#"{"n_nl": 16, "n_gap": 85, "m_gap": 8, "l_domain_um": 5.16}"#;
        let spec: DesignSpec = serde_json::from_str(json).unwrap();
        assert_eq!(spec, DesignSpec::design_1());
        assert!(serde_json::from_str::<DesignSpec>(r#"{"n_nl": 16, "n_gap": 85, "m_gap": 8, "l_domain": 5.16}"#).is_err());
    }

    #[test]
    fn csv_export() {
        let seq = build_sequence(&DesignSpec::new(2, 1, 1, 1.0)).unwrap();
        let mut buf = Vec::new();
        seq.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "index,z_front_um,length_um,sign");
        assert_eq!(lines.len(), 6);
        assert!(lines[3].starts_with("2,") && lines[3].ends_with(",1"));
    }
}
