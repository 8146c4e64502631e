//! Random network layouts and link geometry.
//!
//! Small cells are dropped uniformly in a square; each UE is spawned in an
//! annulus around its own SC and stays associated with it. Every SC points
//! its transmit main lobe at its own UE and every UE points its receive beam
//! back at its SC, so deviations on serving links are zero by construction.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::SimRng;

/// A point in the plane, in meters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (other.x - self.x).hypot(other.y - self.y)
    }

    /// Bearing from `self` towards `other`, in radians.
    pub fn bearing(self, other: Point) -> f64 {
        (other.y - self.y).atan2(other.x - self.x)
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    w
}

/// Parameters of a random drop.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LayoutParams {
    pub density_per_km2: f64,
    pub area_side_m: f64,
    /// Inner radius of the UE annulus around its SC.
    pub ue_min_radius_m: f64,
    /// Outer radius of the UE annulus around its SC.
    pub ue_max_radius_m: f64,
}

impl LayoutParams {
    pub fn new(density_per_km2: f64, area_side_m: f64) -> Self {
        Self {
            density_per_km2,
            area_side_m,
            ue_min_radius_m: 10.0,
            ue_max_radius_m: 100.0,
        }
    }

    /// Number of SCs (and UEs) the drop will contain.
    pub fn sc_count(&self) -> usize {
        let km = self.area_side_m / 1000.0;
        (self.density_per_km2 * km * km).round() as usize
    }

    fn validate(&self) -> Result<()> {
        if !(self.density_per_km2 > 0.0 && self.density_per_km2.is_finite()) {
            return Err(Error::param("density_per_km2", "must be positive"));
        }
        if !(self.area_side_m > 0.0 && self.area_side_m.is_finite()) {
            return Err(Error::param("area_side_m", "must be positive"));
        }
        if !(self.ue_min_radius_m > 0.0) {
            return Err(Error::param("ue_min_radius_m", "serving radius must be positive"));
        }
        if !(self.ue_max_radius_m >= self.ue_min_radius_m) {
            return Err(Error::param(
                "ue_max_radius_m",
                "outer serving radius must not be below the inner radius",
            ));
        }
        if self.ue_min_radius_m >= self.area_side_m {
            return Err(Error::param("ue_min_radius_m", "larger than the deployment area"));
        }
        if self.sc_count() == 0 {
            return Err(Error::param(
                "density_per_km2",
                "density times area rounds to zero small cells",
            ));
        }
        Ok(())
    }
}

/// Positions of all SCs and UEs. UE `i` is served by SC `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkLayout {
    area_side_m: f64,
    sc_positions: Vec<Point>,
    ue_positions: Vec<Point>,
}

impl NetworkLayout {
    pub fn new(area_side_m: f64, sc_positions: Vec<Point>, ue_positions: Vec<Point>) -> Result<Self> {
        if !(area_side_m > 0.0) {
            return Err(Error::param("area_side_m", "must be positive"));
        }
        if sc_positions.len() != ue_positions.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} SCs but {} UEs; exactly one UE per SC is required",
                sc_positions.len(),
                ue_positions.len()
            )));
        }
        if sc_positions.is_empty() {
            return Err(Error::param("sc_positions", "layout has no small cells"));
        }
        let inside = |p: &Point| (0.0..=area_side_m).contains(&p.x) && (0.0..=area_side_m).contains(&p.y);
        if let Some(p) = sc_positions.iter().chain(&ue_positions).find(|p| !inside(p)) {
            return Err(Error::param(
                "positions",
                format!("({}, {}) lies outside [0, {area_side_m}]^2", p.x, p.y),
            ));
        }
        for (b, s) in sc_positions.iter().enumerate() {
            if let Some(k) = ue_positions.iter().position(|u| s.distance(*u) <= 0.0) {
                return Err(Error::param(
                    "positions",
                    format!("SC {b} is co-located with UE {k}"),
                ));
            }
        }
        Ok(Self {
            area_side_m,
            sc_positions,
            ue_positions,
        })
    }

    pub fn area_side_m(&self) -> f64 {
        self.area_side_m
    }

    pub fn sc_positions(&self) -> &[Point] {
        &self.sc_positions
    }

    pub fn ue_positions(&self) -> &[Point] {
        &self.ue_positions
    }

    /// Number of SCs, which equals the number of UEs.
    pub fn len(&self) -> usize {
        self.sc_positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sc_positions.is_empty()
    }

    /// UE served by `sc`.
    pub fn served_ue(&self, sc: usize) -> usize {
        sc
    }

    /// Serializes as `area_side_m <v>` followed by one `role index x y` line per node.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "area_side_m {}", self.area_side_m).unwrap();
        for (role, pts) in [("sc", &self.sc_positions), ("ue", &self.ue_positions)] {
            for (i, p) in pts.iter().enumerate() {
                writeln!(out, "{role} {i} {} {}", p.x, p.y).unwrap();
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse {
            context: format!("layout line {line}"),
            message,
        };
        let mut side = None;
        let mut scs: Vec<Option<Point>> = Vec::new();
        let mut ues: Vec<Option<Point>> = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let num = |s: &str| s.parse::<f64>().map_err(|e| err(n + 1, format!("{s:?}: {e}")));
            match fields.as_slice() {
                ["area_side_m", v] => side = Some(num(v)?),
                [role @ ("sc" | "ue"), idx, x, y] => {
                    let idx: usize = idx
                        .parse()
                        .map_err(|e| err(n + 1, format!("index {idx:?}: {e}")))?;
                    let list = if *role == "sc" { &mut scs } else { &mut ues };
                    if list.len() <= idx {
                        list.resize(idx + 1, None);
                    }
                    if list[idx].replace(Point::new(num(x)?, num(y)?)).is_some() {
                        return Err(err(n + 1, format!("duplicate {role} {idx}")));
                    }
                }
                _ => return Err(err(n + 1, format!("unrecognized record {line:?}"))),
            }
        }
        let side = side.ok_or_else(|| err(0, "missing area_side_m record".into()))?;
        let collect = |v: Vec<Option<Point>>, role: &str| {
            v.into_iter()
                .enumerate()
                .map(|(i, p)| p.ok_or_else(|| err(0, format!("missing {role} {i}"))))
                .collect::<Result<Vec<_>>>()
        };
        Self::new(side, collect(scs, "sc")?, collect(ues, "ue")?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

/// Draws a random layout.
pub fn generate_layout(params: &LayoutParams, rng: &mut SimRng) -> Result<NetworkLayout> {
    params.validate()?;
    let side = params.area_side_m;
    let n = params.sc_count();
    let scs: Vec<Point> = (0..n)
        .map(|_| Point::new(rng.random::<f64>() * side, rng.random::<f64>() * side))
        .collect();
    let (r_in2, r_out2) = (
        params.ue_min_radius_m.powi(2),
        params.ue_max_radius_m.powi(2),
    );
    let ues = scs
        .iter()
        .map(|sc| loop {
            // area-uniform radius in the annulus, rejected when it leaves the square
            let r = (r_in2 + rng.random::<f64>() * (r_out2 - r_in2)).sqrt();
            let phi = rng.random::<f64>() * 2.0 * PI;
            let p = Point::new(sc.x + r * phi.cos(), sc.y + r * phi.sin());
            if (0.0..=side).contains(&p.x) && (0.0..=side).contains(&p.y) {
                break p;
            }
        })
        .collect();
    NetworkLayout::new(side, scs, ues)
}

/// Distances and beam deviations for every ordered (SC, UE) pair, stored row-major by SC.
#[derive(Clone, Debug, PartialEq)]
pub struct LinkGeometry {
    n: usize,
    distance_m: Vec<f64>,
    tx_deviation_rad: Vec<f64>,
    rx_deviation_rad: Vec<f64>,
}

impl LinkGeometry {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn distance_m(&self, sc: usize, ue: usize) -> f64 {
        self.distance_m[sc * self.n + ue]
    }

    /// Angle between SC `sc`'s boresight and the direction to UE `ue`.
    pub fn tx_deviation_rad(&self, sc: usize, ue: usize) -> f64 {
        self.tx_deviation_rad[sc * self.n + ue]
    }

    /// Angle between UE `ue`'s receive boresight and the direction to SC `sc`.
    pub fn rx_deviation_rad(&self, sc: usize, ue: usize) -> f64 {
        self.rx_deviation_rad[sc * self.n + ue]
    }
}

pub fn compute_geometry(layout: &NetworkLayout) -> LinkGeometry {
    let n = layout.len();
    let scs = layout.sc_positions();
    let ues = layout.ue_positions();
    let mut geo = LinkGeometry {
        n,
        distance_m: Vec::with_capacity(n * n),
        tx_deviation_rad: Vec::with_capacity(n * n),
        rx_deviation_rad: Vec::with_capacity(n * n),
    };
    for (b, sc) in scs.iter().enumerate() {
        let boresight = sc.bearing(ues[layout.served_ue(b)]);
        for (k, ue) in ues.iter().enumerate() {
            geo.distance_m.push(sc.distance(*ue));
            if k == layout.served_ue(b) {
                geo.tx_deviation_rad.push(0.0);
                geo.rx_deviation_rad.push(0.0);
                continue;
            }
            geo.tx_deviation_rad.push(wrap_angle(sc.bearing(*ue) - boresight));
            let ue_boresight = ue.bearing(scs[k]);
            geo.rx_deviation_rad.push(wrap_angle(ue.bearing(*sc) - ue_boresight));
        }
    }
    geo
}
