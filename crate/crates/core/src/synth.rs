//! Synthetic planar trajectories and the IMU streams they imply.
//!
//! A ground-truth trajectory is a sum of low-frequency sinusoids confined to
//! the plane through the origin with the configured normal, so position and
//! velocity are planar by construction and analytically smooth. Orientation
//! keeps the body z-axis on the plane normal while yaw tracks the velocity
//! heading. Measurements are derived so that re-integrating the gyro stream
//! reproduces the truth quaternions to machine precision.

use nalgebra::Vector3;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::so3::{Quaternion, Real};

/// Parameters of a synthetic planar run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrajectoryConfig {
    pub n_samples: usize,
    /// Sample period in seconds.
    pub dt: f64,
    /// Unit normal of the motion plane, in the global frame.
    pub normal: Vector3<f64>,
    pub seed: u64,
    /// RMS of the external (kinematic) acceleration in m·s⁻².
    pub accel_scale: f64,
    /// Magnitude of the gravity reading in m·s⁻².
    pub gravity_mag: f64,
    /// Unit magnetic field direction in the global frame.
    pub mag_field: Vector3<f64>,
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        Self {
            n_samples: 100,
            dt: 0.01,
            normal: Vector3::new(
                0.0,
                -std::f64::consts::FRAC_1_SQRT_2,
                std::f64::consts::FRAC_1_SQRT_2,
            ),
            seed: 0,
            accel_scale: 1.0,
            gravity_mag: 9.81,
            mag_field: Vector3::new(1.0, 0.0, 0.0),
        }
    }
}

impl TrajectoryConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples < 2 {
            return Err(Error::InvalidConfig("n_samples must be at least 2".into()));
        }
        if !(self.dt > 0.0) {
            return Err(Error::InvalidConfig("dt must be positive".into()));
        }
        if (self.normal.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfig("normal must be a unit vector".into()));
        }
        if (self.mag_field.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfig("mag_field must be a unit vector".into()));
        }
        if self.accel_scale < 0.0 || self.gravity_mag <= 0.0 {
            return Err(Error::InvalidConfig(
                "accel_scale must be nonnegative and gravity_mag positive".into(),
            ));
        }
        Ok(())
    }

    /// Gravity reading reference: what a static, identity-oriented
    /// accelerometer reports.
    pub fn gravity_ref(&self) -> Vector3<f64> {
        Vector3::new(0.0, 0.0, self.gravity_mag)
    }
}

/// Ground-truth state per sample.
#[derive(Clone, Debug)]
pub struct GroundTruth {
    pub t: Vec<f64>,
    /// Orientation, sign-continuous along the trace.
    pub q: Vec<Quaternion<f64>>,
    pub p: Vec<Vector3<f64>>,
    pub v: Vec<Vector3<f64>>,
}

impl GroundTruth {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

/// One IMU sample in the body (relative) frame.
#[derive(Clone, Copy, Debug)]
pub struct ImuSample<T = f64> {
    pub t: T,
    /// Angular rate, rad·s⁻¹.
    pub omega: Vector3<T>,
    /// Specific force, m·s⁻².
    pub accel: Vector3<T>,
    /// Magnetic field direction (unit for noiseless data).
    pub mag: Vector3<T>,
}

/// Additive sensor noise model.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub gyro_noise_std: f64,
    pub gyro_bias: Vector3<f64>,
    pub accel_noise_std: f64,
    pub mag_noise_std: f64,
    pub seed: u64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            gyro_noise_std: 0.0,
            gyro_bias: Vector3::zeros(),
            accel_noise_std: 0.0,
            mag_noise_std: 0.0,
            seed: 0,
        }
    }
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if self.gyro_noise_std < 0.0 || self.accel_noise_std < 0.0 || self.mag_noise_std < 0.0 {
            return Err(Error::InvalidConfig(
                "noise std values must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// Number of sinusoids per in-plane axis.
const HARMONICS: usize = 3;

struct PlanarMotion {
    e1: Vector3<f64>,
    e2: Vector3<f64>,
    // (amplitude, angular frequency, phase) per in-plane axis and harmonic.
    terms: [[(f64, f64, f64); HARMONICS]; 2],
}

impl PlanarMotion {
    fn sample(cfg: &TrajectoryConfig, rng: &mut ChaCha8Rng) -> Self {
        let (e1, e2) = plane_basis(&cfg.normal);
        let mut terms = [[(0.0, 0.0, 0.0); HARMONICS]; 2];
        for axis in &mut terms {
            for term in axis.iter_mut() {
                let amp = rng.random_range(0.5..1.0);
                let freq_hz = rng.random_range(0.05..0.25);
                let phase = rng.random_range(0.0..std::f64::consts::TAU);
                *term = (amp, std::f64::consts::TAU * freq_hz, phase);
            }
        }
        Self { e1, e2, terms }
    }

    fn scale_amplitudes(&mut self, factor: f64) {
        for axis in &mut self.terms {
            for term in axis.iter_mut() {
                term.0 *= factor;
            }
        }
    }

    fn position(&self, t: f64) -> Vector3<f64> {
        self.eval(|amp, w, ph| amp * (w * t + ph).sin())
    }

    fn velocity(&self, t: f64) -> Vector3<f64> {
        self.eval(|amp, w, ph| amp * w * (w * t + ph).cos())
    }

    fn acceleration(&self, t: f64) -> Vector3<f64> {
        self.eval(|amp, w, ph| -amp * w * w * (w * t + ph).sin())
    }

    fn eval(&self, f: impl Fn(f64, f64, f64) -> f64) -> Vector3<f64> {
        let mut out = Vector3::zeros();
        for (axis_idx, basis) in [self.e1, self.e2].iter().enumerate() {
            let mut s = 0.0;
            for &(amp, w, ph) in &self.terms[axis_idx] {
                s += f(amp, w, ph);
            }
            out += basis * s;
        }
        out
    }
}

/// Orthonormal basis of the plane with the given unit normal.
fn plane_basis(normal: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let pick = if normal.x.abs() < 0.9 {
        Vector3::new(1.0, 0.0, 0.0)
    } else {
        Vector3::new(0.0, 1.0, 0.0)
    };
    let e1 = (pick - normal * pick.dot(normal)).normalize();
    let e2 = normal.cross(&e1);
    (e1, e2)
}

/// Generates a smooth random trajectory confined to the configured plane.
///
/// With `accel_scale = 0` the platform is static: constant position, zero
/// velocity, constant orientation.
pub fn generate_truth(cfg: &TrajectoryConfig) -> Result<GroundTruth> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut motion = PlanarMotion::sample(cfg, &mut rng);

    // Scale the harmonics so the RMS of ‖acceleration‖ matches accel_scale.
    let probe: f64 = (0..cfg.n_samples)
        .map(|k| motion.acceleration(k as f64 * cfg.dt).norm_squared())
        .sum::<f64>()
        / cfg.n_samples as f64;
    let rms = probe.sqrt();
    if cfg.accel_scale == 0.0 || rms == 0.0 {
        motion.scale_amplitudes(0.0);
    } else {
        motion.scale_amplitudes(cfg.accel_scale / rms);
    }

    let (e1, _) = plane_basis(&cfg.normal);
    let n = cfg.n_samples;
    let mut t = Vec::with_capacity(n);
    let mut q = Vec::with_capacity(n);
    let mut p = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);

    for k in 0..n {
        let tk = k as f64 * cfg.dt;
        let pk = motion.position(tk);
        let vk = motion.velocity(tk);

        // Yaw follows the velocity heading; the default heading covers the
        // static case. Body z stays on the plane normal.
        let heading = {
            let in_plane = vk - cfg.normal * vk.dot(&cfg.normal);
            if in_plane.norm() > 1e-9 {
                in_plane.normalize()
            } else {
                e1
            }
        };
        let y_axis = cfg.normal.cross(&heading);
        let m = nalgebra::Matrix3::from_columns(&[heading, y_axis, cfg.normal]);
        let mut qk = Quaternion::from_matrix(&m);
        if let Some(prev) = q.last() {
            if qk.dot(prev) < 0.0 {
                qk = -qk;
            }
        }

        t.push(tk);
        q.push(qk);
        p.push(pk);
        v.push(vk);
    }

    Ok(GroundTruth { t, q, p, v })
}

/// Derives the noiseless IMU stream consistent with a ground-truth
/// trajectory: the gyro rate is the exact log of the orientation increment,
/// the accelerometer reads the external acceleration plus the gravity
/// reference rotated into the body frame, and the magnetometer reads the
/// rotated field direction.
pub fn derive_measurements(truth: &GroundTruth, cfg: &TrajectoryConfig) -> Result<Vec<ImuSample>> {
    let n = truth.len();
    if n < 2 {
        return Err(Error::InvalidConfig(
            "ground truth needs at least 2 samples".into(),
        ));
    }
    let g_ref = cfg.gravity_ref();
    let mut samples = Vec::with_capacity(n);
    for k in 0..n {
        let dt = if k == 0 {
            truth.t[1] - truth.t[0]
        } else {
            truth.t[k] - truth.t[k - 1]
        };
        let omega = if k == 0 {
            Vector3::zeros()
        } else {
            let delta = truth.q[k - 1].conjugate() * truth.q[k];
            delta.log().expect("truth quaternions are unit").v / dt
        };
        // External acceleration from central velocity differences; any
        // linear combination of in-plane velocities stays in-plane, which
        // keeps the plane constraint exact.
        let a_ext = if k == 0 {
            (truth.v[1] - truth.v[0]) / dt
        } else if k == n - 1 {
            (truth.v[n - 1] - truth.v[n - 2]) / dt
        } else {
            (truth.v[k + 1] - truth.v[k - 1]) / (2.0 * dt)
        };
        let q_inv = truth.q[k].conjugate();
        samples.push(ImuSample {
            t: truth.t[k],
            omega,
            accel: q_inv.rotate(&(a_ext + g_ref)),
            mag: q_inv.rotate(&cfg.mag_field),
        });
    }
    Ok(samples)
}

/// Adds Gaussian noise and a constant gyro bias, deterministically under the
/// spec's seed. Draw order is fixed: per sample, gyro, accel, then mag, one
/// axis at a time.
pub fn inject_noise(samples: &[ImuSample], spec: &NoiseSpec) -> Result<Vec<ImuSample>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let gyro = Normal::new(0.0, spec.gyro_noise_std).expect("validated std");
    let accel = Normal::new(0.0, spec.accel_noise_std).expect("validated std");
    let mag = Normal::new(0.0, spec.mag_noise_std).expect("validated std");
    let draw3 = |d: &Normal<f64>, rng: &mut ChaCha8Rng| {
        Vector3::new(d.sample(rng), d.sample(rng), d.sample(rng))
    };
    Ok(samples
        .iter()
        .map(|s| ImuSample {
            t: s.t,
            omega: s.omega + spec.gyro_bias + draw3(&gyro, &mut rng),
            accel: s.accel + draw3(&accel, &mut rng),
            mag: s.mag + draw3(&mag, &mut rng),
        })
        .collect())
}

impl ImuSample<f64> {
    /// Rebinds the sample to another scalar type.
    pub fn cast<T: Real>(&self) -> ImuSample<T> {
        let conv = |v: &Vector3<f64>| {
            Vector3::new(
                nalgebra::convert(v.x),
                nalgebra::convert(v.y),
                nalgebra::convert(v.z),
            )
        };
        ImuSample {
            t: nalgebra::convert(self.t),
            omega: conv(&self.omega),
            accel: conv(&self.accel),
            mag: conv(&self.mag),
        }
    }
}
