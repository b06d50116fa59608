//! Steel section catalog: CSV ingestion, lookup, and candidate pools.
//!
//! All stored quantities are SI. Imperial rows (`units = in`) are converted on
//! load with 1 in = 0.0254 m exactly. The catalog keeps a fixed order (nominal
//! depth family, then ascending area) so that pool indices decode identically
//! across runs.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Unit weight of structural steel, N/m³.
pub const STEEL_UNIT_WEIGHT: f64 = 77_008.0;

/// One inch in metres, exact by definition.
pub const INCH: f64 = 0.0254;

/// A wide-flange section with major-axis bending properties in SI units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub name: String,
    /// Cross-section area, m².
    pub area: f64,
    /// Overall depth, m.
    pub depth: f64,
    /// Major-axis second moment of area, m⁴.
    pub moment_of_inertia_major: f64,
    /// Major-axis elastic section modulus, m³.
    pub section_modulus_major: f64,
    /// Minor-axis radius of gyration, m.
    pub radius_of_gyration_minor: f64,
    /// Flange width, m.
    pub flange_width: f64,
    /// Flange thickness, m.
    pub flange_thickness: f64,
}

impl Section {
    /// Self-weight per unit length, N/m.
    pub fn unit_weight_per_length(&self) -> f64 {
        self.area * STEEL_UNIT_WEIGHT
    }

    /// Nominal depth family from the name (`W16X26` → 16). Falls back to the
    /// actual depth in whole inches when the name does not follow the W-shape
    /// convention, keeping the sort key total.
    pub fn nominal_depth(&self) -> u32 {
        let canon = canonical_name(&self.name);
        canon
            .strip_prefix('W')
            .and_then(|rest| rest.split('X').next())
            .and_then(|d| d.parse::<u32>().ok())
            .unwrap_or_else(|| (self.depth / INCH).round() as u32)
    }

    fn validate(&self, row: usize) -> Result<()> {
        let fields = [
            ("area", self.area),
            ("depth", self.depth),
            ("Ix", self.moment_of_inertia_major),
            ("Sx", self.section_modulus_major),
            ("ry", self.radius_of_gyration_minor),
            ("bf", self.flange_width),
            ("tf", self.flange_thickness),
        ];
        for (label, value) in fields {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::catalog(format!(
                    "row {row}: {label} must be positive, got {value}"
                )));
            }
        }
        // Sx cannot exceed I/c for the extreme fiber; tolerate rounding noise.
        let extreme_fiber = self.moment_of_inertia_major / (self.depth / 2.0);
        if self.section_modulus_major > extreme_fiber * (1.0 + 1e-9) {
            return Err(Error::catalog(format!(
                "row {row}: Sx {} exceeds Ix/(d/2) = {extreme_fiber}",
                self.section_modulus_major
            )));
        }
        Ok(())
    }
}

/// Pool request for a design group: either every catalog entry or a named list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PoolSpec {
    /// The literal string `"all"`.
    All(AllTag),
    Named(Vec<String>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AllTag {
    #[serde(rename = "all")]
    All,
}

impl PoolSpec {
    pub fn all() -> Self {
        PoolSpec::All(AllTag::All)
    }
}

/// Immutable ordered section table.
#[derive(Debug, Clone)]
pub struct SectionCatalog {
    entries: Vec<Section>,
    index: HashMap<String, usize>,
}

impl SectionCatalog {
    /// Parses the documented CSV schema: `name,units,area,depth,Ix,Sx,ry,bf,tf`.
    pub fn load_csv(content: &str) -> Result<Self> {
        let mut lines = content.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::catalog("empty catalog file"))?;
        let expected = ["name", "units", "area", "depth", "Ix", "Sx", "ry", "bf", "tf"];
        let got: Vec<&str> = header.split(',').map(str::trim).collect();
        if got != expected {
            return Err(Error::catalog(format!(
                "bad header: expected '{}', got '{}'",
                expected.join(","),
                header.trim()
            )));
        }

        let mut entries = Vec::new();
        for (line_no, line) in lines {
            let row = line_no + 1; // 1-based, header is row 1
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != expected.len() {
                return Err(Error::catalog(format!(
                    "row {row}: expected {} columns, got {}",
                    expected.len(),
                    fields.len()
                )));
            }
            let name = fields[0].to_string();
            let units = fields[1];
            let mut nums = [0.0f64; 7];
            for (slot, raw) in nums.iter_mut().zip(&fields[2..]) {
                *slot = raw.parse().map_err(|_| {
                    Error::catalog(format!("row {row}: cannot parse number '{raw}'"))
                })?;
            }
            let [area, depth, ix, sx, ry, bf, tf] = nums;
            let section = match units {
                "m" => Section {
                    name,
                    area,
                    depth,
                    moment_of_inertia_major: ix,
                    section_modulus_major: sx,
                    radius_of_gyration_minor: ry,
                    flange_width: bf,
                    flange_thickness: tf,
                },
                "in" => Section {
                    name,
                    area: area * INCH * INCH,
                    depth: depth * INCH,
                    moment_of_inertia_major: ix * INCH.powi(4),
                    section_modulus_major: sx * INCH.powi(3),
                    radius_of_gyration_minor: ry * INCH,
                    flange_width: bf * INCH,
                    flange_thickness: tf * INCH,
                },
                other => {
                    return Err(Error::catalog(format!(
                        "row {row}: units must be 'in' or 'm', got '{other}'"
                    )));
                }
            };
            section.validate(row)?;
            entries.push((row, section));
        }

        let mut seen: HashMap<String, usize> = HashMap::new();
        for (row, section) in &entries {
            if let Some(first) = seen.insert(canonical_name(&section.name), *row) {
                return Err(Error::catalog(format!(
                    "row {row}: duplicate section name '{}' (first at row {first})",
                    section.name
                )));
            }
        }

        let mut entries: Vec<Section> = entries.into_iter().map(|(_, s)| s).collect();
        entries.sort_by(|a, b| {
            (a.nominal_depth(), a.area)
                .partial_cmp(&(b.nominal_depth(), b.area))
                .expect("validated positive finite areas")
        });
        let index = entries
            .iter()
            .enumerate()
            .map(|(i, s)| (canonical_name(&s.name), i))
            .collect();
        Ok(SectionCatalog { entries, index })
    }

    /// The catalog shipped with the crate (44 common W-shapes).
    pub fn builtin() -> Self {
        SectionCatalog::load_csv(include_str!("../data/wshapes.csv"))
            .expect("bundled catalog is valid")
    }

    pub fn sections(&self) -> &[Section] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Case-insensitive exact lookup; unknown names report the three closest
    /// catalog entries by edit distance.
    pub fn lookup(&self, name: &str) -> Result<&Section> {
        let canon = canonical_name(name);
        match self.index.get(&canon) {
            Some(&i) => Ok(&self.entries[i]),
            None => {
                let mut ranked: Vec<(usize, &str)> = self
                    .entries
                    .iter()
                    .map(|s| (edit_distance(&canon, &canonical_name(&s.name)), s.name.as_str()))
                    .collect();
                ranked.sort_by_key(|&(d, n)| (d, n.to_string()));
                let suggestions = ranked
                    .iter()
                    .take(3)
                    .map(|&(_, n)| n)
                    .collect::<Vec<_>>()
                    .join(", ");
                Err(Error::UnknownSection {
                    name: name.to_string(),
                    suggestions,
                })
            }
        }
    }

    /// Resolves a pool spec to sections in catalog order. Duplicates are
    /// dropped with a warning; an empty result is an error.
    pub fn candidate_pool(&self, spec: &PoolSpec) -> Result<Vec<Section>> {
        let picked: Vec<usize> = match spec {
            PoolSpec::All(_) => (0..self.entries.len()).collect(),
            PoolSpec::Named(names) => {
                let mut indices = Vec::with_capacity(names.len());
                for name in names {
                    let section = self.lookup(name)?;
                    let idx = self.index[&canonical_name(&section.name)];
                    if indices.contains(&idx) {
                        log::warn!("duplicate section '{name}' in pool; keeping one copy");
                    } else {
                        indices.push(idx);
                    }
                }
                indices.sort_unstable();
                indices
            }
        };
        if picked.is_empty() {
            return Err(Error::catalog("candidate pool is empty"));
        }
        Ok(picked.into_iter().map(|i| self.entries[i].clone()).collect())
    }

    /// Serializes back to the CSV schema in SI units. Values print in Rust's
    /// shortest round-trip form, so load(to_csv(c)) reproduces c bit-for-bit.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,units,area,depth,Ix,Sx,ry,bf,tf\n");
        for s in &self.entries {
            writeln!(
                out,
                "{},m,{},{},{},{},{},{},{}",
                s.name,
                s.area,
                s.depth,
                s.moment_of_inertia_major,
                s.section_modulus_major,
                s.radius_of_gyration_minor,
                s.flange_width,
                s.flange_thickness
            )
            .expect("writing to String cannot fail");
        }
        out
    }
}

/// Uppercases so lookups ignore case, including the `X`/`x` separator.
fn canonical_name(name: &str) -> String {
    name.trim().to_ascii_uppercase()
}

fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut curr = vec![0; b.len() + 1];
    for (i, &ca) in a.iter().enumerate() {
        curr[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            curr[j + 1] = sub.min(prev[j + 1] + 1).min(curr[j] + 1);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}
