//! JSON problem configuration: schema types, the regular-grid frame
//! generator, and assembly of a runnable problem bundle.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fuzzy::{FitnessMode, MembershipShape, PenaltyConfig};
use crate::loading::{GravitySpec, SeismicSpec};
use crate::model::{
    ConnectionModel, DesignGroup, Frame, Member, MemberRole, Node, SupportFixity,
};
use crate::optimizer::GaConfig;
use crate::problem::{DesignLimits, FuzzySettings, Problem};
use crate::sections::{PoolSpec, SectionCatalog, STEEL_UNIT_WEIGHT};

pub const DEFAULT_TRIBUTARY_WIDTH: f64 = 5.0;
pub const DEFAULT_E_MODULUS: f64 = 2.059e11;
pub const DEFAULT_FY: f64 = 2.4e8;
pub const DEFAULT_DRIFT_DENOMINATOR: f64 = 300.0;

/// Regular rectangular frame: `bays` × `stories` with uniform spacing,
/// fixed bases, rigid-ended columns. Story bands group members vertically;
/// a band list like `[2, 5]` means stories 1–2 form the first band and 3–5
/// the second. Bands must end at the top story.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub bays: usize,
    pub bay_m: f64,
    pub stories: usize,
    pub story_m: f64,
    /// Column grouping bands (band-end stories, ascending). Default: one band.
    #[serde(default)]
    pub column_bands: Option<Vec<usize>>,
    /// Beam grouping bands. Default: one band.
    #[serde(default)]
    pub beam_bands: Option<Vec<usize>>,
    /// Put inner and outer column lines in separate groups (needs ≥ 2 bays).
    #[serde(default = "default_true")]
    pub split_columns: bool,
    /// Beam end connections: "rigid", "pinned", or "semirigid:<K>" with K in
    /// N·m/rad. Default rigid.
    #[serde(default)]
    pub beam_conn: Option<String>,
    /// Candidate pool shared by every group: "all" or a list of section
    /// names. Default: the whole catalog.
    #[serde(default)]
    pub pool: Option<PoolSpec>,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeConfig {
    pub id: usize,
    pub x: f64,
    pub y: f64,
}

fn default_conn() -> String {
    "rigid".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemberConfig {
    pub id: usize,
    pub node_a: usize,
    pub node_b: usize,
    pub role: MemberRole,
    pub group: usize,
    #[serde(default = "default_conn")]
    pub conn_a: String,
    #[serde(default = "default_conn")]
    pub conn_b: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupportConfig {
    pub node: usize,
    pub fixity: SupportFixity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupConfig {
    pub id: usize,
    /// Display label; defaults to "G<id+1>".
    #[serde(default)]
    pub label: Option<String>,
    pub role: MemberRole,
    #[serde(default = "PoolSpec::all")]
    pub pool: PoolSpec,
}

fn default_dead() -> f64 {
    5886.0
}
fn default_live() -> f64 {
    1962.0
}
fn default_roof_live() -> f64 {
    1471.5
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeismicConfig {
    #[serde(rename = "A", default = "default_seismic_a")]
    pub a: f64,
    #[serde(rename = "B", default = "default_seismic_b")]
    pub b: f64,
    #[serde(rename = "I", default = "default_seismic_i")]
    pub i: f64,
    #[serde(rename = "R", default = "default_seismic_r")]
    pub r: f64,
}

fn default_seismic_a() -> f64 {
    0.3
}
fn default_seismic_b() -> f64 {
    2.5
}
fn default_seismic_i() -> f64 {
    1.0
}
fn default_seismic_r() -> f64 {
    8.0
}

impl Default for SeismicConfig {
    fn default() -> Self {
        SeismicConfig {
            a: default_seismic_a(),
            b: default_seismic_b(),
            i: default_seismic_i(),
            r: default_seismic_r(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadsConfig {
    #[serde(default = "default_dead")]
    pub dead_npm2: f64,
    #[serde(default = "default_live")]
    pub live_npm2: f64,
    #[serde(default = "default_roof_live")]
    pub roof_live_npm2: f64,
    /// Overrides the top-level tributary width when set.
    #[serde(default)]
    pub tributary_width_m: Option<f64>,
    #[serde(default)]
    pub seismic: SeismicConfig,
    /// Include live load in the seismic effective weight (off by default:
    /// storage-type occupancies would turn this on).
    #[serde(default)]
    pub live_in_seismic_weight: bool,
}

impl Default for LoadsConfig {
    fn default() -> Self {
        LoadsConfig {
            dead_npm2: default_dead(),
            live_npm2: default_live(),
            roof_live_npm2: default_roof_live(),
            tributary_width_m: None,
            seismic: SeismicConfig::default(),
            live_in_seismic_weight: false,
        }
    }
}

fn default_drift() -> f64 {
    DEFAULT_DRIFT_DENOMINATOR
}
fn default_fy() -> f64 {
    DEFAULT_FY
}
fn default_e() -> f64 {
    DEFAULT_E_MODULUS
}
fn default_unit_weight() -> f64 {
    STEEL_UNIT_WEIGHT
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitsConfig {
    #[serde(default = "default_drift")]
    pub drift_denominator: f64,
    #[serde(default = "default_fy")]
    pub fy_pa: f64,
    #[serde(default = "default_e")]
    pub e_pa: f64,
    #[serde(default = "default_unit_weight")]
    pub unit_weight_npm3: f64,
}

impl Default for LimitsConfig {
    fn default() -> Self {
        LimitsConfig {
            drift_denominator: default_drift(),
            fy_pa: default_fy(),
            e_pa: default_e(),
            unit_weight_npm3: default_unit_weight(),
        }
    }
}

fn default_shape() -> MembershipShape {
    MembershipShape::Bilinear
}
fn default_knee() -> f64 {
    0.5
}
fn default_n_factor() -> f64 {
    1.2
}
fn default_delta_g() -> f64 {
    0.05
}
fn default_mode() -> FitnessMode {
    FitnessMode::Lambda
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FuzzyConfig {
    #[serde(default = "default_shape")]
    pub shape: MembershipShape,
    #[serde(default = "default_knee")]
    pub mu_knee: f64,
    /// Objective weight at full satisfaction, N. Derived when absent.
    #[serde(default)]
    pub f_lower: Option<f64>,
    /// Objective weight at the knee, N. Derived from a pilot run when absent.
    #[serde(default)]
    pub f_upper: Option<f64>,
    /// Objective weight at zero satisfaction, N. Derived when absent.
    #[serde(default)]
    pub f_max: Option<f64>,
    #[serde(default = "default_n_factor")]
    pub n_factor: f64,
    #[serde(default = "default_delta_g")]
    pub delta_g: f64,
    #[serde(default)]
    pub penalty: PenaltyConfig,
    #[serde(default = "default_mode")]
    pub mode: FitnessMode,
}

impl Default for FuzzyConfig {
    fn default() -> Self {
        FuzzyConfig {
            shape: default_shape(),
            mu_knee: default_knee(),
            f_lower: None,
            f_upper: None,
            f_max: None,
            n_factor: default_n_factor(),
            delta_g: default_delta_g(),
            penalty: PenaltyConfig::default(),
            mode: default_mode(),
        }
    }
}

/// Top-level problem document. The frame comes either from `grid` or from
/// the explicit `nodes`/`members`/`supports`/`groups` sections, never both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(default)]
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub nodes: Option<Vec<NodeConfig>>,
    #[serde(default)]
    pub members: Option<Vec<MemberConfig>>,
    #[serde(default)]
    pub supports: Option<Vec<SupportConfig>>,
    #[serde(default)]
    pub groups: Option<Vec<GroupConfig>>,
    #[serde(default)]
    pub tributary_width_m: Option<f64>,
    #[serde(default)]
    pub loads: LoadsConfig,
    #[serde(default)]
    pub limits: LimitsConfig,
    #[serde(default)]
    pub fuzzy: FuzzyConfig,
    #[serde(default)]
    pub ga: GaConfig,
    /// Fixed assignment (group label → section name) for `analyze`.
    #[serde(default)]
    pub design: Option<BTreeMap<String, String>>,
}

impl ProblemConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn tributary_width(&self) -> f64 {
        self.loads
            .tributary_width_m
            .or(self.tributary_width_m)
            .unwrap_or(DEFAULT_TRIBUTARY_WIDTH)
    }
}

/// Band-end story lists: `[2, 5]` puts stories 1–2 in band 0, 3–5 in band 1.
fn normalize_bands(bands: Option<&[usize]>, stories: usize, what: &str) -> Result<Vec<usize>> {
    let bands = match bands {
        None => return Ok(vec![stories]),
        Some(b) => b,
    };
    if bands.is_empty() {
        return Err(Error::config(format!("{what} must list at least one band-end story")));
    }
    let mut prev = 0;
    for &end in bands {
        if end <= prev {
            return Err(Error::config(format!("{what} must be strictly ascending story numbers")));
        }
        prev = end;
    }
    if prev != stories {
        return Err(Error::config(format!(
            "{what} must end at the top story ({stories}), got {prev}"
        )));
    }
    Ok(bands.to_vec())
}

fn band_index(bands: &[usize], story: usize) -> usize {
    bands
        .iter()
        .position(|&end| story <= end)
        .expect("bands validated to cover every story")
}

fn build_grid_frame(
    grid: &GridConfig,
    catalog: &SectionCatalog,
    tributary_width: f64,
) -> Result<Frame> {
    if grid.bays == 0 || grid.stories == 0 {
        return Err(Error::config("grid needs at least one bay and one story"));
    }
    if !(grid.bay_m.is_finite() && grid.bay_m > 0.0)
        || !(grid.story_m.is_finite() && grid.story_m > 0.0)
    {
        return Err(Error::config("grid spacings must be positive"));
    }
    let beam_conn = match &grid.beam_conn {
        Some(text) => ConnectionModel::parse(text)?,
        None => ConnectionModel::Rigid,
    };
    let pool_spec = grid.pool.clone().unwrap_or_else(PoolSpec::all);
    let pool = catalog.candidate_pool(&pool_spec)?;
    let column_bands = normalize_bands(grid.column_bands.as_deref(), grid.stories, "column_bands")?;
    let beam_bands = normalize_bands(grid.beam_bands.as_deref(), grid.stories, "beam_bands")?;
    let split = grid.split_columns && grid.bays >= 2;
    let column_sets = if split { 2 } else { 1 };
    let column_groups = column_sets * column_bands.len();

    let mut groups = Vec::with_capacity(column_groups + beam_bands.len());
    for id in 0..column_groups + beam_bands.len() {
        groups.push(DesignGroup {
            id,
            label: format!("G{}", id + 1),
            role: if id < column_groups { MemberRole::Column } else { MemberRole::Beam },
            pool: pool.clone(),
        });
    }

    let lines = grid.bays + 1;
    let mut nodes = Vec::with_capacity((grid.stories + 1) * lines);
    for level in 0..=grid.stories {
        for line in 0..lines {
            nodes.push(Node {
                id: level * lines + line,
                x: line as f64 * grid.bay_m,
                y: level as f64 * grid.story_m,
            });
        }
    }

    let mut members = Vec::with_capacity(grid.stories * (lines + grid.bays));
    for story in 1..=grid.stories {
        for line in 0..lines {
            let inner = line > 0 && line < grid.bays;
            let band = band_index(&column_bands, story);
            let group = if split && !inner { column_bands.len() + band } else { band };
            members.push(Member {
                id: members.len(),
                node_a: (story - 1) * lines + line,
                node_b: story * lines + line,
                role: MemberRole::Column,
                group,
                end_connection_a: ConnectionModel::Rigid,
                end_connection_b: ConnectionModel::Rigid,
            });
        }
    }
    for level in 1..=grid.stories {
        for bay in 0..grid.bays {
            let group = column_groups + band_index(&beam_bands, level);
            members.push(Member {
                id: members.len(),
                node_a: level * lines + bay,
                node_b: level * lines + bay + 1,
                role: MemberRole::Beam,
                group,
                end_connection_a: beam_conn.clone(),
                end_connection_b: beam_conn.clone(),
            });
        }
    }

    let supports = (0..lines).map(|line| (line, SupportFixity::Fixed)).collect();
    Frame::new(nodes, members, supports, groups, tributary_width)
}

fn build_explicit_frame(config: &ProblemConfig, catalog: &SectionCatalog) -> Result<Frame> {
    let (nodes_cfg, members_cfg, supports_cfg, groups_cfg) = match (
        &config.nodes,
        &config.members,
        &config.supports,
        &config.groups,
    ) {
        (Some(n), Some(m), Some(s), Some(g)) => (n, m, s, g),
        _ => {
            return Err(Error::config(
                "explicit frames need all of: nodes, members, supports, groups",
            ))
        }
    };

    let nodes = nodes_cfg.iter().map(|n| Node { id: n.id, x: n.x, y: n.y }).collect();
    let mut groups = Vec::with_capacity(groups_cfg.len());
    for g in groups_cfg {
        groups.push(DesignGroup {
            id: g.id,
            label: g.label.clone().unwrap_or_else(|| format!("G{}", g.id + 1)),
            role: g.role,
            pool: catalog.candidate_pool(&g.pool)?,
        });
    }
    let mut members = Vec::with_capacity(members_cfg.len());
    for m in members_cfg {
        members.push(Member {
            id: m.id,
            node_a: m.node_a,
            node_b: m.node_b,
            role: m.role,
            group: m.group,
            end_connection_a: ConnectionModel::parse(&m.conn_a)?,
            end_connection_b: ConnectionModel::parse(&m.conn_b)?,
        });
    }
    let supports = supports_cfg.iter().map(|s| (s.node, s.fixity)).collect();
    Frame::new(nodes, members, supports, groups, config.tributary_width())
}

/// Builds the frame from either the grid shorthand or the explicit sections.
pub fn build_frame(config: &ProblemConfig, catalog: &SectionCatalog) -> Result<Frame> {
    let explicit = config.nodes.is_some()
        || config.members.is_some()
        || config.supports.is_some()
        || config.groups.is_some();
    match (&config.grid, explicit) {
        (Some(_), true) => Err(Error::config(
            "grid and explicit frame sections are mutually exclusive",
        )),
        (Some(grid), false) => build_grid_frame(grid, catalog, config.tributary_width()),
        (None, true) => build_explicit_frame(config, catalog),
        (None, false) => Err(Error::config(
            "config must define a frame via grid or nodes/members/supports/groups",
        )),
    }
}

/// Everything a run needs: the physics problem, GA settings, and the
/// optional fixed design for analysis.
#[derive(Debug, Clone)]
pub struct ProblemBundle {
    pub problem: Problem,
    pub ga: GaConfig,
    pub design: Option<BTreeMap<String, String>>,
}

pub fn into_problem(config: &ProblemConfig, catalog: &SectionCatalog) -> Result<ProblemBundle> {
    config.ga.validate()?;
    config.fuzzy.penalty.validate()?;
    let loads = &config.loads;
    if loads.dead_npm2 < 0.0 || loads.live_npm2 < 0.0 || loads.roof_live_npm2 < 0.0 {
        return Err(Error::config("area loads must be non-negative"));
    }
    let width = config.tributary_width();
    if !(width.is_finite() && width > 0.0) {
        return Err(Error::config("tributary width must be positive"));
    }
    let limits = &config.limits;
    for (value, name) in [
        (limits.drift_denominator, "limits.drift_denominator"),
        (limits.fy_pa, "limits.fy_pa"),
        (limits.e_pa, "limits.e_pa"),
        (limits.unit_weight_npm3, "limits.unit_weight_npm3"),
    ] {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::config(format!("{name} must be positive")));
        }
    }

    let frame = build_frame(config, catalog)?;
    let problem = Problem {
        frame,
        gravity: GravitySpec {
            dead: loads.dead_npm2,
            live: loads.live_npm2,
            roof_live: loads.roof_live_npm2,
            tributary_width: width,
        },
        seismic: SeismicSpec {
            a: loads.seismic.a,
            b: loads.seismic.b,
            i: loads.seismic.i,
            r: loads.seismic.r,
        },
        live_in_seismic_weight: loads.live_in_seismic_weight,
        limits: DesignLimits {
            drift_denominator: limits.drift_denominator,
            fy: limits.fy_pa,
            e_modulus: limits.e_pa,
            unit_weight: limits.unit_weight_npm3,
        },
        fuzzy: FuzzySettings {
            shape: config.fuzzy.shape,
            mu_knee: config.fuzzy.mu_knee,
            f_lower: config.fuzzy.f_lower,
            f_upper: config.fuzzy.f_upper,
            f_max: config.fuzzy.f_max,
            n_factor: config.fuzzy.n_factor,
            delta_g: config.fuzzy.delta_g,
            penalty: config.fuzzy.penalty,
            mode: config.fuzzy.mode,
        },
    };
    Ok(ProblemBundle { problem, ga: config.ga, design: config.design.clone() })
}
