//! Multiplicative extended Kalman filter for attitude and gyro bias.
//!
//! The inner state is a 6-vector: the canonical axis-angle log of the
//! orientation followed by the gyro bias, with a 6×6 covariance. Prediction
//! integrates the bias-corrected gyro rate multiplicatively; the update
//! corrects the orientation by a quaternion perturbation estimated from the
//! accelerometer and magnetometer against their global references.

use nalgebra::{Matrix3, Matrix6, Vector3, Vector6};

use crate::error::{Error, Result};
use crate::so3::{self, real, AxisAngle, Quaternion, Real};
use crate::synth::ImuSample;

/// Residual formulation used by the update step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualMode {
    /// Measured minus predicted reference vectors, in the body frame.
    Subtractive,
    /// Cross products of measured and predicted vectors.
    Multiplicative,
}

/// Order of the state-transition approximation `Φ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum PhiOrder {
    First,
    Second,
}

/// Filter tuning and reference vectors.
#[derive(Clone, Debug)]
pub struct FilterParams<T> {
    /// Process noise added at every prediction.
    pub process_noise: Matrix6<T>,
    /// Measurement noise of the stacked accel/mag innovation.
    pub measurement_noise: Matrix6<T>,
    /// Gravity reading reference in the global frame (what a static,
    /// identity-oriented accelerometer reports).
    pub g_ref: Vector3<T>,
    /// Magnetic field direction in the global frame.
    pub b_ref: Vector3<T>,
    pub residual_mode: ResidualMode,
    pub phi_order: PhiOrder,
}

impl<T: Real> FilterParams<T> {
    /// Scalar-times-identity noise matrices, the common tuning shorthand.
    pub fn isotropic(qk: T, uk: T, g_ref: Vector3<T>, b_ref: Vector3<T>) -> Self {
        Self {
            process_noise: Matrix6::identity() * qk,
            measurement_noise: Matrix6::identity() * uk,
            g_ref,
            b_ref,
            residual_mode: ResidualMode::Subtractive,
            phi_order: PhiOrder::Second,
        }
    }
}

/// Filter state: orientation log, gyro bias, and covariance.
#[derive(Clone, Debug)]
pub struct FilterState<T> {
    /// `x[0..3]`: canonical axis-angle of the orientation;
    /// `x[3..6]`: gyro bias in rad·s⁻¹.
    pub x: Vector6<T>,
    pub p: Matrix6<T>,
}

impl<T: Real> FilterState<T> {
    /// State with the given orientation, zero bias, and `P₀ = 1e-2·I`.
    pub fn from_orientation(q: &Quaternion<T>) -> Self {
        let log = q.log().expect("orientation must be unit").v;
        let mut x = Vector6::zeros();
        x.fixed_rows_mut::<3>(0).copy_from(&log);
        Self {
            x,
            p: Matrix6::identity() * real::<T>(1e-2),
        }
    }

    pub fn orientation(&self) -> Quaternion<T> {
        AxisAngle::new(self.attitude_log()).exp()
    }

    pub fn attitude_log(&self) -> Vector3<T> {
        self.x.fixed_rows::<3>(0).into_owned()
    }

    pub fn bias(&self) -> Vector3<T> {
        self.x.fixed_rows::<3>(3).into_owned()
    }
}

/// Initializes the filter from the first accelerometer/magnetometer pair:
/// triad attitude, zero bias, `P₀ = 1e-2·I`.
pub fn init_from_measurements<T: Real>(
    accel: &Vector3<T>,
    mag: &Vector3<T>,
    params: &FilterParams<T>,
) -> Result<FilterState<T>> {
    let q = so3::triad(accel, mag, &params.g_ref, &params.b_ref)?;
    Ok(FilterState::from_orientation(&q))
}

/// Prediction step: integrates the bias-corrected gyro rate and propagates
/// the covariance through `Φ = I + F·dt (+ ½F²·dt²)` with
/// `F[0..3,0..3] = −[ω̂]×` and `F[0..3,3..6] = −I`.
pub fn predict<T: Real>(
    state: &FilterState<T>,
    params: &FilterParams<T>,
    omega: &Vector3<T>,
    dt: T,
) -> FilterState<T> {
    let corrected = omega - state.bias();
    let q_prev = state.orientation();
    let q_pred = q_prev * AxisAngle::new(corrected * dt).exp();
    let log = q_pred.log().expect("unit by construction").v;

    let mut f = Matrix6::zeros();
    f.fixed_view_mut::<3, 3>(0, 0).copy_from(&(-so3::skew(&corrected)));
    f.fixed_view_mut::<3, 3>(0, 3).copy_from(&(-Matrix3::identity()));

    let mut phi = Matrix6::identity() + f * dt;
    if params.phi_order == PhiOrder::Second {
        phi += f * f * (dt * dt * real::<T>(0.5));
    }

    let mut x = state.x;
    x.fixed_rows_mut::<3>(0).copy_from(&log);
    let p = phi * state.p * phi.transpose() + params.process_noise;

    FilterState {
        x,
        p: symmetrize(&p),
    }
}

/// Measurement matrix for the given predicted orientation. The left 3×3
/// blocks act on the orientation error; the bias columns are zero because
/// neither reference vector observes it directly.
///
/// `mag_ref_override` substitutes the global magnetometer reference (used by
/// the heuristic's predicted-magnetometer mode).
pub fn measurement_matrix<T: Real>(
    q: &Quaternion<T>,
    params: &FilterParams<T>,
    mag_ref_override: Option<&Vector3<T>>,
) -> Matrix6<T> {
    let b_ref = mag_ref_override.unwrap_or(&params.b_ref);
    let q_inv = q.conjugate();
    let g_body = q_inv.rotate(&params.g_ref);
    let b_body = q_inv.rotate(b_ref);
    let mut h = Matrix6::zeros();
    match params.residual_mode {
        ResidualMode::Subtractive => {
            h.fixed_view_mut::<3, 3>(0, 0).copy_from(&so3::skew(&g_body));
            h.fixed_view_mut::<3, 3>(3, 0).copy_from(&so3::skew(&b_body));
        }
        ResidualMode::Multiplicative => {
            let proj = |v: &Vector3<T>| Matrix3::identity() * v.norm_squared() - v * v.transpose();
            h.fixed_view_mut::<3, 3>(0, 0).copy_from(&proj(&g_body));
            h.fixed_view_mut::<3, 3>(3, 0).copy_from(&proj(&b_body));
        }
    }
    h
}

/// Update step: fuses an accelerometer/magnetometer pair into the predicted
/// state. Measured vectors are rescaled to their reference magnitudes so the
/// innovation is insensitive to sensor scale.
pub fn update<T: Real>(
    state: &FilterState<T>,
    params: &FilterParams<T>,
    accel: &Vector3<T>,
    mag: &Vector3<T>,
) -> Result<FilterState<T>> {
    update_with_mag_reference(state, params, accel, mag, None)
}

/// `update` with an optional override of the global magnetometer reference.
pub fn update_with_mag_reference<T: Real>(
    state: &FilterState<T>,
    params: &FilterParams<T>,
    accel: &Vector3<T>,
    mag: &Vector3<T>,
    mag_ref_override: Option<&Vector3<T>>,
) -> Result<FilterState<T>> {
    let b_ref = mag_ref_override.unwrap_or(&params.b_ref);
    let an = accel.norm();
    let mn = mag.norm();
    if an == T::zero() || mn == T::zero() {
        return Err(Error::DegenerateMeasurement("zero accel or mag vector"));
    }
    let q_pred = state.orientation();
    let q_inv = q_pred.conjugate();
    let accel_scaled = accel * (params.g_ref.norm() / an);
    let mag_scaled = mag * (b_ref.norm() / mn);
    let g_body = q_inv.rotate(&params.g_ref);
    let b_body = q_inv.rotate(b_ref);

    let mut y = Vector6::zeros();
    match params.residual_mode {
        ResidualMode::Subtractive => {
            y.fixed_rows_mut::<3>(0).copy_from(&(accel_scaled - g_body));
            y.fixed_rows_mut::<3>(3).copy_from(&(mag_scaled - b_body));
        }
        ResidualMode::Multiplicative => {
            y.fixed_rows_mut::<3>(0).copy_from(&accel_scaled.cross(&g_body));
            y.fixed_rows_mut::<3>(3).copy_from(&mag_scaled.cross(&b_body));
        }
    }

    let h = measurement_matrix(&q_pred, params, mag_ref_override);
    let s = symmetrize(&(h * state.p * h.transpose() + params.measurement_noise));

    // Condition guard on the symmetric innovation covariance.
    let eig = s.symmetric_eigenvalues();
    let mut min_ev = eig[0];
    let mut max_ev = eig[0];
    for i in 1..6 {
        if eig[i] < min_ev {
            min_ev = eig[i];
        }
        if eig[i] > max_ev {
            max_ev = eig[i];
        }
    }
    if min_ev <= T::zero() || max_ev / min_ev > real::<T>(1e12) {
        return Err(Error::SingularInnovation);
    }
    let chol = s.cholesky().ok_or(Error::SingularInnovation)?;
    // K = P Hᵀ S⁻¹, computed as (S⁻¹ (P Hᵀ)ᵀ)ᵀ since S is symmetric.
    let pht = state.p * h.transpose();
    let k = chol.solve(&pht.transpose()).transpose();

    let correction = k * y;
    let delta = AxisAngle::new(correction.fixed_rows::<3>(0).into_owned());
    let q_new = q_pred * delta.exp();
    let log = q_new.log().expect("unit by construction").v;

    let mut x = state.x;
    x.fixed_rows_mut::<3>(0).copy_from(&log);
    let new_bias = state.bias() + correction.fixed_rows::<3>(3);
    x.fixed_rows_mut::<3>(3).copy_from(&new_bias);

    let p = (Matrix6::identity() - k * h) * state.p;
    Ok(FilterState {
        x,
        p: symmetrize(&p),
    })
}

/// One full filter step: prediction followed by update.
pub fn step<T: Real>(
    state: &FilterState<T>,
    params: &FilterParams<T>,
    sample: &ImuSample<T>,
    dt: T,
) -> Result<FilterState<T>> {
    let predicted = predict(state, params, &sample.omega, dt);
    update(&predicted, params, &sample.accel, &sample.mag)
}

pub(crate) fn symmetrize<T: Real>(m: &Matrix6<T>) -> Matrix6<T> {
    (m + m.transpose()) * real::<T>(0.5)
}
