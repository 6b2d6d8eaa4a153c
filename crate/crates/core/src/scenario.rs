//! Hexagonal multi-site layout, relay placement, terminal drops and
//! wraparound geometry.

use std::ops::{Add, Mul, Sub};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::RadioParams;
use crate::error::ConfigError;
use crate::rng::{substream, StreamTag};

/// Largest macro power reduction the association model accepts, in dB.
pub const MAX_POWER_REDUCTION_DB: f64 = 16.0;

/// Relay counts per sector with a documented placement pattern.
pub const STANDARD_RN_COUNTS: [usize; 3] = [0, 4, 10];

/// Default relay ring radius as a fraction of the ISD.
pub const DEFAULT_RN_RADIUS_FACTOR: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn polar(radius: f64, angle_deg: f64) -> Self {
        let a = angle_deg.to_radians();
        Point::new(radius * a.cos(), radius * a.sin())
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point) -> f64 {
        (self - other).norm()
    }

    /// Direction of this vector in degrees, in (-180, 180].
    pub fn angle_deg(self) -> f64 {
        self.y.atan2(self.x).to_degrees()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }
}

/// Normalizes an angle in degrees to (-180, 180].
pub fn normalize_deg(angle: f64) -> f64 {
    let mut a = angle % 360.0;
    if a <= -180.0 {
        a += 360.0;
    } else if a > 180.0 {
        a -= 360.0;
    }
    a
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    Urban,
    Suburban,
}

impl ScenarioKind {
    pub fn default_isd_m(self) -> f64 {
        match self {
            ScenarioKind::Urban => 500.0,
            ScenarioKind::Suburban => 1732.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioKind::Urban => "urban",
            ScenarioKind::Suburban => "suburban",
        }
    }
}

impl std::str::FromStr for ScenarioKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "urban" => Ok(ScenarioKind::Urban),
            "suburban" => Ok(ScenarioKind::Suburban),
            other => Err(ConfigError::range("scenario", other, "{urban, suburban}")),
        }
    }
}

/// Relay ring around each site: radius and angular offsets from the
/// sector bisector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelayPlacement {
    pub radius_factor: f64,
    pub angles_deg: Vec<f64>,
}

impl RelayPlacement {
    /// Symmetric fan about the bisector; 4 relays at ±12.5° and ±37.5°,
    /// 10 relays at 11° spacing out to ±49.5°.
    pub fn default_for(rns_per_sector: usize) -> Self {
        let angles_deg = match rns_per_sector {
            0 => Vec::new(),
            4 => vec![-37.5, -12.5, 12.5, 37.5],
            10 => vec![
                -49.5, -38.5, -27.5, -16.5, -5.5, 5.5, 16.5, 27.5, 38.5, 49.5,
            ],
            n => {
                // evenly spread over ±50°
                let step = 100.0 / n as f64;
                (0..n).map(|i| -50.0 + step * (i as f64 + 0.5)).collect()
            }
        };
        RelayPlacement {
            radius_factor: DEFAULT_RN_RADIUS_FACTOR,
            angles_deg,
        }
    }
}

/// Scenario geometry and drop parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    pub isd_m: f64,
    pub n_sites: usize,
    pub sectors_per_site: usize,
    pub rns_per_sector: usize,
    pub ues_per_sector: usize,
    pub n_drops: usize,
    pub seed: u64,
    pub bias_db: f64,
    pub power_reduction_db: f64,
    pub allow_nonstandard_rns: bool,
    pub relay_placement: RelayPlacement,
}

impl ScenarioConfig {
    pub fn new(scenario: ScenarioKind, rns_per_sector: usize) -> Self {
        ScenarioConfig {
            scenario,
            isd_m: scenario.default_isd_m(),
            n_sites: 19,
            sectors_per_site: 3,
            rns_per_sector,
            ues_per_sector: 10,
            n_drops: 50,
            seed: 1,
            bias_db: 0.0,
            power_reduction_db: 0.0,
            allow_nonstandard_rns: false,
            relay_placement: RelayPlacement::default_for(rns_per_sector),
        }
    }

    /// Sets the relay count and resets the placement to its default fan.
    pub fn with_relays(mut self, rns_per_sector: usize) -> Self {
        self.rns_per_sector = rns_per_sector;
        self.relay_placement = RelayPlacement::default_for(rns_per_sector);
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.isd_m.is_finite() && self.isd_m > 0.0) {
            return Err(ConfigError::range("isd_m", self.isd_m, "(0, inf)"));
        }
        if rings_for_sites(self.n_sites).is_none() {
            return Err(ConfigError::range(
                "n_sites",
                self.n_sites,
                "hexagonal cluster sizes {1, 7, 19, 37, ...}",
            ));
        }
        if self.sectors_per_site != 3 {
            return Err(ConfigError::range(
                "sectors_per_site",
                self.sectors_per_site,
                "{3}",
            ));
        }
        if !self.allow_nonstandard_rns && !STANDARD_RN_COUNTS.contains(&self.rns_per_sector) {
            return Err(ConfigError::range(
                "rns_per_sector",
                self.rns_per_sector,
                "{0, 4, 10} (set allow_nonstandard_rns to override)",
            ));
        }
        if self.relay_placement.angles_deg.len() != self.rns_per_sector {
            return Err(ConfigError::Invalid(format!(
                "relay_placement.angles_deg has {} entries but rns_per_sector = {}",
                self.relay_placement.angles_deg.len(),
                self.rns_per_sector
            )));
        }
        let rf = self.relay_placement.radius_factor;
        if !(rf > 0.0 && rf < 1.0 / 3f64.sqrt()) {
            return Err(ConfigError::range(
                "relay_placement.radius_factor",
                rf,
                "(0, 0.577)",
            ));
        }
        if let Some(a) = self
            .relay_placement
            .angles_deg
            .iter()
            .find(|a| !(a.abs() < 60.0))
        {
            return Err(ConfigError::range(
                "relay_placement.angles_deg",
                a,
                "(-60, 60)",
            ));
        }
        if self.ues_per_sector == 0 {
            return Err(ConfigError::range("ues_per_sector", 0, "[1, inf)"));
        }
        if self.n_drops == 0 {
            return Err(ConfigError::range("n_drops", 0, "[1, inf)"));
        }
        if !(self.bias_db.is_finite() && self.bias_db >= 0.0) {
            return Err(ConfigError::range("bias_db", self.bias_db, "[0, inf)"));
        }
        if !(0.0..=MAX_POWER_REDUCTION_DB).contains(&self.power_reduction_db) {
            return Err(ConfigError::range(
                "power_reduction_db",
                self.power_reduction_db,
                "[0, 16]",
            ));
        }
        Ok(())
    }

    /// True when the run matches the published scenario dimensions.
    pub fn is_reference_deployment(&self) -> bool {
        self.isd_m == self.scenario.default_isd_m()
            && self.n_sites == 19
            && self.sectors_per_site == 3
            && self.ues_per_sector == 10
            && STANDARD_RN_COUNTS.contains(&self.rns_per_sector)
    }

    pub fn n_sectors(&self) -> usize {
        self.n_sites * self.sectors_per_site
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    MacroSector,
    RelayNode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: usize,
    pub kind: NodeKind,
    pub position: Point,
    /// Antenna boresight; `None` for omnidirectional relays.
    pub boresight_deg: Option<f64>,
    pub tx_power_dbm: f64,
    pub antenna_gain_dbi: f64,
    pub noise_figure_db: f64,
    /// Macro sector that hosts (or is) this node.
    pub sector: usize,
}

impl Node {
    pub fn is_macro(&self) -> bool {
        self.kind == NodeKind::MacroSector
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserTerminal {
    pub id: usize,
    pub position: Point,
    pub sector_of_drop: usize,
    pub penetration_loss_db: f64,
}

/// Drop area of one sector: the parallelogram `origin + s·edge_a + t·edge_b`,
/// `s, t ∈ [0, 1]`, which is the site's hexagon clipped to the 120° wedge
/// around the boresight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorArea {
    pub origin: Point,
    pub edge_a: Point,
    pub edge_b: Point,
    pub boresight_deg: f64,
}

impl SectorArea {
    fn new(site: Point, boresight_deg: f64, circumradius: f64) -> Self {
        SectorArea {
            origin: site,
            edge_a: Point::polar(circumradius, boresight_deg - 60.0),
            edge_b: Point::polar(circumradius, boresight_deg + 60.0),
            boresight_deg,
        }
    }

    pub fn point_at(&self, s: f64, t: f64) -> Point {
        self.origin + self.edge_a * s + self.edge_b * t
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let s: f64 = rng.random();
        let t: f64 = rng.random();
        self.point_at(s, t)
    }

    pub fn centroid(&self) -> Point {
        self.point_at(0.5, 0.5)
    }

    pub fn area(&self) -> f64 {
        (self.edge_a.x * self.edge_b.y - self.edge_a.y * self.edge_b.x).abs()
    }

    /// Parallelogram coordinates `(s, t)` of `p`.
    pub fn coordinates(&self, p: Point) -> (f64, f64) {
        let d = p - self.origin;
        let det = self.edge_a.x * self.edge_b.y - self.edge_a.y * self.edge_b.x;
        let s = (d.x * self.edge_b.y - d.y * self.edge_b.x) / det;
        let t = (self.edge_a.x * d.y - self.edge_a.y * d.x) / det;
        (s, t)
    }

    pub fn contains(&self, p: Point) -> bool {
        let (s, t) = self.coordinates(p);
        const EPS: f64 = 1e-9;
        (-EPS..=1.0 + EPS).contains(&s) && (-EPS..=1.0 + EPS).contains(&t)
    }
}

/// Immutable network geometry shared by all drops.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkLayout {
    pub nodes: Vec<Node>,
    pub site_centers: Vec<Point>,
    /// Translation vectors of the torus, identity first.
    pub wraparound_offsets: Vec<Point>,
    /// Drop area per macro sector, indexed by macro node id.
    pub sectors: Vec<SectorArea>,
    pub isd_m: f64,
}

impl NetworkLayout {
    /// Assembles a layout from explicit parts (small test networks, custom
    /// deployments). Node ids must equal their index; macro nodes come first.
    pub fn from_parts(
        nodes: Vec<Node>,
        site_centers: Vec<Point>,
        wraparound_offsets: Vec<Point>,
        sectors: Vec<SectorArea>,
        isd_m: f64,
    ) -> Result<Self, ConfigError> {
        if nodes.iter().enumerate().any(|(i, n)| n.id != i) {
            return Err(ConfigError::Invalid(
                "node ids must equal their index".into(),
            ));
        }
        let first_relay = nodes
            .iter()
            .position(|n| !n.is_macro())
            .unwrap_or(nodes.len());
        if nodes[first_relay..].iter().any(Node::is_macro) {
            return Err(ConfigError::Invalid(
                "macro nodes must precede relay nodes".into(),
            ));
        }
        if wraparound_offsets.first() != Some(&Point::default()) {
            return Err(ConfigError::Invalid(
                "first wraparound offset must be the identity".into(),
            ));
        }
        Ok(NetworkLayout {
            nodes,
            site_centers,
            wraparound_offsets,
            sectors,
            isd_m,
        })
    }

    pub fn n_macro(&self) -> usize {
        self.nodes.iter().take_while(|n| n.is_macro()).count()
    }

    pub fn n_relays(&self) -> usize {
        self.nodes.len() - self.n_macro()
    }

    pub fn macros(&self) -> &[Node] {
        &self.nodes[..self.n_macro()]
    }

    pub fn relays(&self) -> &[Node] {
        &self.nodes[self.n_macro()..]
    }

    /// Uniform point over the union of all sector drop areas.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let k = rng.random_range(0..self.sectors.len());
        self.sectors[k].sample(rng)
    }

    /// Nearest wraparound image of `position`, as `(image, distance)`.
    pub fn nearest_image(&self, from: Point, position: Point) -> (Point, f64) {
        let mut best = (position, f64::INFINITY);
        for &t in &self.wraparound_offsets {
            let img = position + t;
            let d = from.distance(img);
            if d < best.1 {
                best = (img, d);
            }
        }
        best
    }
}

/// Number of hexagonal rings around the center site for a cluster size.
pub fn rings_for_sites(n_sites: usize) -> Option<usize> {
    (0..64).find(|&n| 3 * n * n + 3 * n + 1 == n_sites)
}

fn axial_to_point(q: i64, r: i64, isd: f64) -> Point {
    Point::new(
        isd * (q as f64 + r as f64 / 2.0),
        isd * (r as f64 * 3f64.sqrt() / 2.0),
    )
}

/// Sites in spiral order: center, then ring 1, ring 2, ...
fn site_axials(rings: usize) -> Vec<(i64, i64)> {
    const DIRS: [(i64, i64); 6] = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)];
    let mut out = vec![(0, 0)];
    for ring in 1..=rings as i64 {
        // start at ring·(1, -1) rotated so the walk covers the ring once
        let (mut q, mut r) = (ring * DIRS[4].0, ring * DIRS[4].1);
        for dir in DIRS {
            for _ in 0..ring {
                out.push((q, r));
                q += dir.0;
                r += dir.1;
            }
        }
    }
    out
}

/// Identity plus the six translations that tile the plane with copies of a
/// hexagonal cluster of radius `rings`.
pub fn wraparound_offsets(rings: usize, isd: f64) -> Vec<Point> {
    let n = rings as i64;
    let (mut q, mut r) = (2 * n + 1, -n);
    let mut out = vec![Point::default()];
    for _ in 0..6 {
        out.push(axial_to_point(q, r, isd));
        (q, r) = (-r, q + r);
    }
    out
}

/// Builds the wrapped multi-site layout with relays on a ring about each
/// site.
pub fn build_layout(
    config: &ScenarioConfig,
    radio: &RadioParams,
) -> Result<NetworkLayout, ConfigError> {
    config.validate()?;
    let rings = rings_for_sites(config.n_sites).expect("validated");
    let isd = config.isd_m;
    let circumradius = isd / 3f64.sqrt();
    let site_centers: Vec<Point> = site_axials(rings)
        .into_iter()
        .map(|(q, r)| axial_to_point(q, r, isd))
        .collect();

    const BORESIGHTS: [f64; 3] = [30.0, 150.0, 270.0];
    let mut nodes = Vec::new();
    let mut sectors = Vec::new();
    for &site in &site_centers {
        for &b in &BORESIGHTS {
            let id = nodes.len();
            nodes.push(Node {
                id,
                kind: NodeKind::MacroSector,
                position: site,
                boresight_deg: Some(normalize_deg(b)),
                tx_power_dbm: radio.enb_tx_power_dbm,
                antenna_gain_dbi: radio.enb_antenna_gain_dbi,
                noise_figure_db: radio.enb_noise_figure_db,
                sector: id,
            });
            sectors.push(SectorArea::new(site, normalize_deg(b), circumradius));
        }
    }
    let radius = config.relay_placement.radius_factor * isd;
    for (sector_id, &area) in sectors.iter().enumerate() {
        for &off in &config.relay_placement.angles_deg {
            let id = nodes.len();
            nodes.push(Node {
                id,
                kind: NodeKind::RelayNode,
                position: area.origin + Point::polar(radius, area.boresight_deg + off),
                boresight_deg: None,
                tx_power_dbm: radio.rn_tx_power_dbm,
                antenna_gain_dbi: radio.rn_antenna_gain_dbi,
                noise_figure_db: radio.rn_noise_figure_db,
                sector: sector_id,
            });
        }
    }
    NetworkLayout::from_parts(
        nodes,
        site_centers,
        wraparound_offsets(rings, isd),
        sectors,
        isd,
    )
}

/// Drops `ues_per_sector` terminals uniformly over every sector area.
/// Positions depend only on `(seed, drop_index)`.
pub fn drop_users(
    layout: &NetworkLayout,
    config: &ScenarioConfig,
    radio: &RadioParams,
    drop_index: usize,
) -> Result<Vec<UserTerminal>, ConfigError> {
    if drop_index >= config.n_drops {
        return Err(ConfigError::range(
            "drop_index",
            drop_index,
            format!("[0, {})", config.n_drops),
        ));
    }
    let mut rng = substream(config.seed, drop_index as u64, StreamTag::TerminalPositions);
    let mut out = Vec::with_capacity(layout.sectors.len() * config.ues_per_sector);
    for (sector_id, area) in layout.sectors.iter().enumerate() {
        for _ in 0..config.ues_per_sector {
            out.push(UserTerminal {
                id: out.len(),
                position: area.sample(&mut rng),
                sector_of_drop: sector_id,
                penetration_loss_db: radio.penetration_loss_db,
            });
        }
    }
    Ok(out)
}

/// Distance from `a` to the nearest wraparound image of `node`, and the
/// azimuth of `a` seen from that image relative to the node boresight.
pub fn wrap_distance(a: Point, node: &Node, layout: &NetworkLayout) -> (f64, f64) {
    let (img, d) = layout.nearest_image(a, node.position);
    let azimuth = if d == 0.0 {
        0.0
    } else {
        normalize_deg((a - img).angle_deg() - node.boresight_deg.unwrap_or(0.0))
    };
    (d, azimuth)
}
