use serde::{Deserialize, Serialize};

use super::pattern::{SatelliteParams, EARTH_RADIUS_M};
use crate::error::{invalid, Result};
use crate::model::GroupLayout;
use crate::numerics::RandomStream;

pub const NUM_BEAMS: usize = 7;

/// Users per beam: `Uniform(ρ)` puts `ρ` users in every beam,
/// `Hotspot(sizes)` gives the count for each beam, centre first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    Uniform(usize),
    Hotspot(Vec<usize>),
}

impl Placement {
    pub fn per_beam(&self) -> Result<Vec<usize>> {
        let sizes = match self {
            Placement::Uniform(rho) => vec![*rho; NUM_BEAMS],
            Placement::Hotspot(sizes) => sizes.clone(),
        };
        if sizes.len() != NUM_BEAMS {
            return Err(invalid(format!("need {NUM_BEAMS} beam sizes, got {}", sizes.len())));
        }
        if sizes.iter().any(|&s| s == 0) {
            return Err(invalid("every beam needs at least one user"));
        }
        Ok(sizes)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserPosition {
    pub beam: usize,
    /// Gnomonic coordinates `(tan θx, tan θy)` of the user seen from the
    /// satellite.
    pub coords: [f64; 2],
    /// Angle to every beam centre, radians.
    pub offsets: Vec<f64>,
    pub slant_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamGeometry {
    /// Gnomonic coordinates of the beam centres: centre beam then the ring.
    pub beam_centers: Vec<[f64; 2]>,
    pub users: Vec<UserPosition>,
}

impl BeamGeometry {
    pub fn num_beams(&self) -> usize {
        self.beam_centers.len()
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    /// Groups are beams; user `k` belongs to its serving beam.
    pub fn layout(&self) -> Result<GroupLayout> {
        let labels: Vec<usize> = self.users.iter().map(|u| u.beam).collect();
        GroupLayout::from_assignment(&labels)
    }

    /// Beams whose centres are one hexagon spacing apart.
    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        let spacing = (self.beam_centers[1][0].powi(2) + self.beam_centers[1][1].powi(2)).sqrt();
        a != b && dist(self.beam_centers[a], self.beam_centers[b]) < 1.5 * spacing
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn direction(c: [f64; 2]) -> [f64; 3] {
    let n = (c[0] * c[0] + c[1] * c[1] + 1.0).sqrt();
    [c[0] / n, c[1] / n, -1.0 / n]
}

/// Angle between two lines of sight, via `atan2(|a×b|, a·b)` so small
/// angles keep full precision.
pub fn angle_between(a: [f64; 2], b: [f64; 2]) -> f64 {
    let (u, v) = (direction(a), direction(b));
    let cross = [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
    let c = (cross[0].powi(2) + cross[1].powi(2) + cross[2].powi(2)).sqrt();
    let d = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
    c.atan2(d)
}

/// Distance from a nadir-pointing GEO satellite to the ground point seen
/// along `coords`.
pub fn slant_range(coords: [f64; 2], params: &SatelliteParams) -> Result<f64> {
    let v = direction(coords);
    let orbit = EARTH_RADIUS_M + params.height_m;
    // |S + t v|² = R² with S = (0, 0, orbit)
    let b = orbit * v[2];
    let disc = b * b - (orbit * orbit - EARTH_RADIUS_M * EARTH_RADIUS_M);
    if disc < 0.0 {
        return Err(invalid("line of sight misses the earth"));
    }
    Ok(-b - disc.sqrt())
}

/// Hexagonal seven-beam layout: neighbouring centres `√3·θ_3dB` apart so
/// each beam's hexagonal cell is inscribed in its 3 dB contour.
pub fn beam_centers(params: &SatelliteParams) -> Vec<[f64; 2]> {
    let ring = (3f64.sqrt() * params.theta_3db).tan();
    let mut centers = vec![[0.0, 0.0]];
    for j in 0..6 {
        let phi = (60.0 * j as f64).to_radians();
        centers.push([ring * phi.cos(), ring * phi.sin()]);
    }
    centers
}

fn in_hexagon(p: [f64; 2], apothem: f64) -> bool {
    (0..3).all(|j| {
        let phi = (60.0 * j as f64).to_radians();
        (p[0] * phi.cos() + p[1] * phi.sin()).abs() <= apothem
    })
}

/// Drop users uniformly over each serving beam's hexagonal cell, keeping
/// only points inside the 3 dB contour. Users are ordered beam by beam.
pub fn place_users(params: &SatelliteParams, placement: &Placement, stream: &mut RandomStream) -> Result<BeamGeometry> {
    params.validate()?;
    let sizes = placement.per_beam()?;
    let centers = beam_centers(params);
    let radius = params.theta_3db.tan();
    let apothem = radius * 3f64.sqrt() / 2.0;
    let mut users = Vec::with_capacity(sizes.iter().sum());
    for (beam, &count) in sizes.iter().enumerate() {
        let c = centers[beam];
        let mut placed = 0;
        while placed < count {
            let d = [stream.uniform_range(-apothem, apothem), stream.uniform_range(-radius, radius)];
            if !in_hexagon(d, apothem) {
                continue;
            }
            let coords = [c[0] + d[0], c[1] + d[1]];
            let offsets: Vec<f64> = centers.iter().map(|&b| angle_between(coords, b)).collect();
            if offsets[beam] > params.theta_3db {
                continue;
            }
            let slant_m = slant_range(coords, params)?;
            users.push(UserPosition { beam, coords, offsets, slant_m });
            placed += 1;
        }
    }
    Ok(BeamGeometry { beam_centers: centers, users })
}
