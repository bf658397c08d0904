//! Seeded synthetic stream generators.
//!
//! The background model is a sinusoidally rotating subspace
//! `U_t = U0 cos(theta_t) + V0 sin(theta_t)`, `theta_t = a sin(2 pi t / N)`,
//! observed as `u_t = U_t w_t + noise`, optionally with a moving square
//! occlusion of fixed intensity. Every frame is a pure function of
//! `(seed, t)`, so streams are reproducible and parallel synthesis is safe.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::grassmann::{self, chordal_distance, SubspacePoint};

/// Background model: a subspace rotating inside the fixed 2k-dimensional
/// frame spanned by the mutually orthogonal bases U0 and V0.
#[derive(Clone, Debug)]
pub struct RotatingSubspaceModel {
    u0: DMatrix<f64>,
    v0: DMatrix<f64>,
    /// Peak rotation angle in radians, within [0, pi/2).
    pub amplitude: f64,
    /// Frames per sinusoid period.
    pub period: usize,
    /// Standard deviation of the mixing coefficients w_t.
    pub coeff_std: f64,
    /// Per-entry additive noise level.
    pub noise_std: f64,
    pub seed: u64,
}

impl RotatingSubspaceModel {
    pub fn new(
        n: usize,
        k: usize,
        amplitude: f64,
        period: usize,
        coeff_std: f64,
        noise_std: f64,
        seed: u64,
    ) -> Result<Self> {
        if 2 * k > n {
            return Err(Error::Dimension(format!(
                "rotating model needs 2k <= n, got k={k}, n={n}"
            )));
        }
        if !(0.0..std::f64::consts::FRAC_PI_2).contains(&amplitude) {
            return Err(Error::Domain(format!(
                "amplitude {amplitude} outside [0, pi/2)"
            )));
        }
        if period == 0 {
            return Err(Error::Domain("period must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw = grassmann::gaussian_matrix(n, 2 * k, &mut rng);
        let joint = grassmann::orthonormalize(&raw)?;
        let u0 = joint.basis().columns(0, k).into_owned();
        let v0 = joint.basis().columns(k, k).into_owned();
        Ok(Self {
            u0,
            v0,
            amplitude,
            period,
            coeff_std,
            noise_std,
            seed,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.u0.nrows()
    }

    pub fn sub_dim(&self) -> usize {
        self.u0.ncols()
    }

    pub fn theta(&self, t: usize) -> f64 {
        self.amplitude * (2.0 * std::f64::consts::PI * t as f64 / self.period as f64).sin()
    }

    /// Orthonormal basis of the true subspace at frame t; orthonormality is
    /// exact by the cos^2 + sin^2 identity since U0 is orthogonal to V0.
    pub fn basis_at(&self, t: usize) -> DMatrix<f64> {
        let theta = self.theta(t);
        &self.u0 * theta.cos() + &self.v0 * theta.sin()
    }

    pub fn truth_at(&self, t: usize) -> SubspacePoint {
        SubspacePoint::from_orthonormal(self.basis_at(t))
            .expect("rotating basis is orthonormal by construction")
    }
}

/// A square occlusion undergoing a clamped random walk.
#[derive(Clone, Debug)]
pub struct OcclusionSpec {
    /// Frame shape (height, width); height * width must equal the model's
    /// ambient dimension.
    pub frame_shape: (usize, usize),
    /// First frame index carrying the occlusion.
    pub start_frame: usize,
    /// Side length of the square, in pixels.
    pub square_size: usize,
    /// Additive intensity on occluded pixels.
    pub intensity: f64,
    /// Maximum per-frame displacement in each direction.
    pub walk_step: usize,
    pub rng_seed: u64,
}

impl OcclusionSpec {
    pub fn new(
        frame_shape: (usize, usize),
        start_frame: usize,
        square_size: usize,
        intensity: f64,
        walk_step: usize,
        rng_seed: u64,
    ) -> Result<Self> {
        let (h, w) = frame_shape;
        if square_size == 0 || square_size > h || square_size > w {
            return Err(Error::Dimension(format!(
                "square size {square_size} does not fit a {h} x {w} frame"
            )));
        }
        Ok(Self {
            frame_shape,
            start_frame,
            square_size,
            intensity,
            walk_step,
            rng_seed,
        })
    }

    /// Top-left corner of the square at frame t, replaying the walk from
    /// `start_frame` so the position is a pure function of (seed, t).
    /// The walk starts at the frame center and clamps at the borders.
    pub fn position_at(&self, t: usize) -> Option<(usize, usize)> {
        if t < self.start_frame {
            return None;
        }
        let (h, w) = self.frame_shape;
        let s = self.square_size;
        let (mut row, mut col) = (((h - s) / 2) as i64, ((w - s) / 2) as i64);
        let mut rng = ChaCha8Rng::seed_from_u64(self.rng_seed);
        let step = self.walk_step as i64;
        for _ in self.start_frame..t {
            let dr = rng.random_range(-step..=step);
            let dc = rng.random_range(-step..=step);
            row = (row + dr).clamp(0, (h - s) as i64);
            col = (col + dc).clamp(0, (w - s) as i64);
        }
        Some((row as usize, col as usize))
    }

    /// Row-major pixel indices covered by the square at frame t.
    pub fn pixels_at(&self, t: usize) -> Vec<usize> {
        match self.position_at(t) {
            None => Vec::new(),
            Some((row, col)) => {
                let (_, w) = self.frame_shape;
                let mut out = Vec::with_capacity(self.square_size * self.square_size);
                for r in row..row + self.square_size {
                    for c in col..col + self.square_size {
                        out.push(r * w + c);
                    }
                }
                out
            }
        }
    }
}

/// One synthesized observation with its ground truth.
#[derive(Clone, Debug)]
pub struct LabeledFrame {
    pub observation: DVector<f64>,
    pub truth_subspace: SubspacePoint,
    pub foreground_mask: Vec<bool>,
    pub t: usize,
}

/// Synthesizes frame t: background component plus noise, plus the occlusion
/// contribution on masked pixels. Removing the occlusion term recovers the
/// unoccluded frame exactly, since the background and noise draws do not
/// depend on the occlusion.
pub fn frame_at(
    model: &RotatingSubspaceModel,
    occlusion: Option<&OcclusionSpec>,
    t: usize,
) -> Result<LabeledFrame> {
    let n = model.ambient_dim();
    if let Some(occ) = occlusion {
        let (h, w) = occ.frame_shape;
        if h * w != n {
            return Err(Error::Dimension(format!(
                "occlusion frame {h} x {w} does not match ambient dimension {n}"
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
    rng.set_stream(t as u64 + 1);
    let k = model.sub_dim();
    let coeff = DVector::from_fn(k, |_, _| {
        model.coeff_std * rng.sample::<f64, _>(StandardNormal)
    });
    let mut observation = model.basis_at(t) * coeff;
    if model.noise_std > 0.0 {
        for i in 0..n {
            observation[i] += model.noise_std * rng.sample::<f64, _>(StandardNormal);
        }
    }
    let mut foreground_mask = vec![false; n];
    if let Some(occ) = occlusion {
        for idx in occ.pixels_at(t) {
            foreground_mask[idx] = true;
            observation[idx] += occ.intensity;
        }
    }
    Ok(LabeledFrame {
        observation,
        truth_subspace: model.truth_at(t),
        foreground_mask,
        t,
    })
}

/// Chordal drift `d_c(U_{t+1}, U_t)` for t over one period; the maximum is
/// the empirical per-step drift bound.
pub fn drift_sequence(model: &RotatingSubspaceModel) -> Vec<f64> {
    (0..model.period)
        .map(|t| {
            chordal_distance(&model.truth_at(t + 1), &model.truth_at(t))
                .expect("same model, same ambient dimension")
        })
        .collect()
}

/// Synthetic video profile: generator plus occlusion parameters.
#[derive(Clone, Debug)]
pub struct VideoProfile {
    pub frame_height: usize,
    pub frame_width: usize,
    pub k: usize,
    pub amplitude: f64,
    pub period: usize,
    pub frames: usize,
    pub coeff_std: f64,
    pub noise_std: f64,
    pub occlusion_start: usize,
    pub occlusion_size: usize,
    pub occlusion_intensity: f64,
    pub walk_step: usize,
}

impl VideoProfile {
    /// Desk-scale profile: 32 x 32 frames, 120-frame period, occlusion from
    /// frame 21 with a 6 x 6 square. Keeps full runs under test budgets.
    pub fn desk() -> Self {
        Self {
            frame_height: 32,
            frame_width: 32,
            k: 5,
            amplitude: 0.5,
            period: 120,
            frames: 120,
            coeff_std: 10.0,
            noise_std: 0.01,
            occlusion_start: 21,
            occlusion_size: 6,
            occlusion_intensity: 5.0,
            walk_step: 2,
        }
    }

    /// Full-scale profile: 64 x 64 frames over 300 frames, occlusion from
    /// frame 51 with a 10 x 10 square at a foreground-to-noise ratio of 500.
    pub fn full() -> Self {
        Self {
            frame_height: 64,
            frame_width: 64,
            k: 5,
            amplitude: 0.5,
            period: 300,
            frames: 300,
            coeff_std: 10.0,
            noise_std: 0.01,
            occlusion_start: 51,
            occlusion_size: 10,
            occlusion_intensity: 5.0,
            walk_step: 3,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.frame_height * self.frame_width
    }

    /// Instantiates the generator pair for one seed. The occlusion walk uses
    /// a decorrelated stream of the same seed.
    pub fn build(&self, seed: u64) -> Result<(RotatingSubspaceModel, OcclusionSpec)> {
        let model = RotatingSubspaceModel::new(
            self.ambient_dim(),
            self.k,
            self.amplitude,
            self.period,
            self.coeff_std,
            self.noise_std,
            seed,
        )?;
        let occlusion = OcclusionSpec::new(
            (self.frame_height, self.frame_width),
            self.occlusion_start,
            self.occlusion_size,
            self.occlusion_intensity,
            self.walk_step,
            seed ^ 0x9e37_79b9_7f4a_7c15,
        )?;
        Ok((model, occlusion))
    }
}

// --- stream export: CSV (one frame per row) and raw little-endian binary
// --- with a 16-byte header (8-byte magic, u32 n, u32 frame count)

const FRAME_MAGIC: &[u8; 8] = b"GRSBIN01";
const MASK_MAGIC: &[u8; 8] = b"GRSMSK01";

/// 17 significant digits: lossless decimal round trip for f64.
pub(crate) fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_frames_csv(path: &Path, frames: &[DVector<f64>]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for frame in frames {
        let row: Vec<String> = frame.iter().map(|&x| format_f64(x)).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn read_frames_csv(path: &Path) -> Result<Vec<DVector<f64>>> {
    let reader = BufReader::new(File::open(path)?);
    let mut frames = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let values: std::result::Result<Vec<f64>, _> =
            line.split(',').map(|s| s.trim().parse::<f64>()).collect();
        let values = values.map_err(|e| Error::Parse {
            line: i + 1,
            msg: format!("bad float: {e}"),
        })?;
        frames.push(DVector::from_vec(values));
    }
    Ok(frames)
}

fn write_header(out: &mut impl Write, magic: &[u8; 8], n: usize, count: usize) -> Result<()> {
    out.write_all(magic)?;
    out.write_all(&(n as u32).to_le_bytes())?;
    out.write_all(&(count as u32).to_le_bytes())?;
    Ok(())
}

fn read_header(input: &mut impl Read, magic: &[u8; 8]) -> Result<(usize, usize)> {
    let mut head = [0u8; 16];
    input.read_exact(&mut head)?;
    if &head[0..8] != magic {
        return Err(Error::Parse {
            line: 0,
            msg: "bad magic in binary stream header".into(),
        });
    }
    let n = u32::from_le_bytes(head[8..12].try_into().unwrap()) as usize;
    let count = u32::from_le_bytes(head[12..16].try_into().unwrap()) as usize;
    Ok((n, count))
}

pub fn write_frames_bin(path: &Path, frames: &[DVector<f64>]) -> Result<()> {
    let n = frames.first().map_or(0, |f| f.len());
    let mut out = BufWriter::new(File::create(path)?);
    write_header(&mut out, FRAME_MAGIC, n, frames.len())?;
    for frame in frames {
        for &x in frame.iter() {
            out.write_all(&x.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_frames_bin(path: &Path) -> Result<Vec<DVector<f64>>> {
    let mut input = BufReader::new(File::open(path)?);
    let (n, count) = read_header(&mut input, FRAME_MAGIC)?;
    let mut frames = Vec::with_capacity(count);
    let mut buf = [0u8; 8];
    for _ in 0..count {
        let mut frame = DVector::zeros(n);
        for i in 0..n {
            input.read_exact(&mut buf)?;
            frame[i] = f64::from_le_bytes(buf);
        }
        frames.push(frame);
    }
    Ok(frames)
}

pub fn write_masks_csv(path: &Path, masks: &[Vec<bool>]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for mask in masks {
        let row: Vec<&str> = mask.iter().map(|&b| if b { "1" } else { "0" }).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn read_masks_csv(path: &Path) -> Result<Vec<Vec<bool>>> {
    let reader = BufReader::new(File::open(path)?);
    let mut masks = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let mut mask = Vec::new();
        for cell in line.split(',') {
            match cell.trim() {
                "0" => mask.push(false),
                "1" => mask.push(true),
                other => {
                    return Err(Error::Parse {
                        line: i + 1,
                        msg: format!("mask cell must be 0 or 1, got {other:?}"),
                    })
                }
            }
        }
        masks.push(mask);
    }
    Ok(masks)
}

pub fn write_masks_bin(path: &Path, masks: &[Vec<bool>]) -> Result<()> {
    let n = masks.first().map_or(0, |m| m.len());
    let mut out = BufWriter::new(File::create(path)?);
    write_header(&mut out, MASK_MAGIC, n, masks.len())?;
    for mask in masks {
        for &b in mask {
            out.write_all(&(if b { 1.0f64 } else { 0.0f64 }).to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_masks_bin(path: &Path) -> Result<Vec<Vec<bool>>> {
    let mut input = BufReader::new(File::open(path)?);
    let (n, count) = read_header(&mut input, MASK_MAGIC)?;
    let mut masks = Vec::with_capacity(count);
    let mut buf = [0u8; 8];
    for _ in 0..count {
        let mut mask = Vec::with_capacity(n);
        for _ in 0..n {
            input.read_exact(&mut buf)?;
            mask.push(f64::from_le_bytes(buf) != 0.0);
        }
        masks.push(mask);
    }
    Ok(masks)
}
