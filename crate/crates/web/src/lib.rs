//! Browser bindings: quasi-flow trajectories, the cosine-symbol onset and a
//! map of the quantum deformation ħ²|β_t^(2)| over the phase plane.
//!
//! Each export returns a flat `Float64Array` of fixed-width rows. The plain
//! Rust functions in [`demo`] carry the logic and are what the tests call.

use wasm_bindgen::prelude::*;

pub mod demo {
    use num_complex::Complex64 as C64;
    use quasiflow::discrepancy::{cosine_symbol_t, improperness};
    use quasiflow::phase_space::{ComplexAmplitude, FrequencyModel};
    use quasiflow::quasi_flow::quasi_flow;

    pub const MAX_STEPS: usize = 20_000;
    pub const MAX_MESH: usize = 400;

    pub fn frequency(family: &str, strength: f64) -> Result<FrequencyModel, String> {
        if !strength.is_finite() {
            return Err("strength must be finite".into());
        }
        match family {
            "harmonic" => Ok(FrequencyModel::harmonic(strength)),
            "kerr" => Ok(FrequencyModel::kerr(strength)),
            "cubic-action" => Ok(FrequencyModel::cubic_action(strength)),
            other => Err(format!("unknown family '{other}' (harmonic, kerr, cubic-action)")),
        }
    }

    fn check(hbar: f64, t_max: f64, steps: usize) -> Result<(), String> {
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err("hbar must be positive".into());
        }
        if !(t_max >= 0.0 && t_max.is_finite()) {
            return Err("t_max must be non-negative".into());
        }
        if steps == 0 || steps > MAX_STEPS {
            return Err(format!("steps must lie in [1, {MAX_STEPS}]"));
        }
        Ok(())
    }

    fn time(i: usize, steps: usize, t_max: f64) -> f64 {
        t_max * i as f64 / steps as f64
    }

    /// Rows [t, classical_re, classical_im, total_re, total_im, ħ²|corr|]
    /// for t = 0, t_max/steps, …, t_max.
    pub fn quasi_flow_curve(
        family: &str,
        strength: f64,
        hbar: f64,
        beta_re: f64,
        beta_im: f64,
        t_max: f64,
        steps: usize,
    ) -> Result<Vec<f64>, String> {
        let fm = frequency(family, strength)?;
        check(hbar, t_max, steps)?;
        if !(beta_re.is_finite() && beta_im.is_finite()) {
            return Err("beta must be finite".into());
        }
        let beta = ComplexAmplitude(C64::new(beta_re, beta_im));
        let mut out = Vec::with_capacity(6 * (steps + 1));
        for i in 0..=steps {
            let t = time(i, steps, t_max);
            let r = quasi_flow(beta, &fm, hbar, t);
            out.extend([t, r.classical.re, r.classical.im, r.total.re, r.total.im, r.deformation()]);
        }
        Ok(out)
    }

    /// Rows [t, C_t(Q, 0), excess] for cos(αP̂) at the image point (Q, 0).
    pub fn cosine_onset(
        family: &str,
        strength: f64,
        hbar: f64,
        alpha: f64,
        q: f64,
        t_max: f64,
        steps: usize,
    ) -> Result<Vec<f64>, String> {
        let fm = frequency(family, strength)?;
        check(hbar, t_max, steps)?;
        if !(alpha.is_finite() && q.is_finite()) {
            return Err("alpha and Q must be finite".into());
        }
        let mut out = Vec::with_capacity(3 * (steps + 1));
        for i in 0..=steps {
            let t = time(i, steps, t_max);
            let c = cosine_symbol_t(q, alpha, &fm, hbar, t);
            let imp = improperness(c, 1.0).map_err(|e| e.to_string())?;
            out.extend([t, c, imp.excess]);
        }
        Ok(out)
    }

    /// ħ²|β_t^(2)| on an n×n mesh over [−extent, extent]², row-major in p
    /// (outer) then q (inner).
    pub fn deformation_map(family: &str, strength: f64, hbar: f64, t: f64, extent: f64, n: usize) -> Result<Vec<f64>, String> {
        let fm = frequency(family, strength)?;
        check(hbar, t, 1)?;
        if !(extent > 0.0 && extent.is_finite()) {
            return Err("extent must be positive".into());
        }
        if !(2..=MAX_MESH).contains(&n) {
            return Err(format!("mesh size must lie in [2, {MAX_MESH}]"));
        }
        let axis = |i: usize| -extent + 2.0 * extent * i as f64 / (n - 1) as f64;
        let mut out = Vec::with_capacity(n * n);
        for ip in 0..n {
            for iq in 0..n {
                let beta = ComplexAmplitude(C64::new(axis(iq), axis(ip)) * std::f64::consts::FRAC_1_SQRT_2);
                out.push(quasi_flow(beta, &fm, hbar, t).deformation());
            }
        }
        Ok(out)
    }
}

fn js(r: Result<Vec<f64>, String>) -> Result<Vec<f64>, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = quasiFlowCurve)]
pub fn quasi_flow_curve(
    family: &str,
    strength: f64,
    hbar: f64,
    beta_re: f64,
    beta_im: f64,
    t_max: f64,
    steps: usize,
) -> Result<Vec<f64>, JsError> {
    js(demo::quasi_flow_curve(family, strength, hbar, beta_re, beta_im, t_max, steps))
}

#[wasm_bindgen(js_name = cosineOnset)]
pub fn cosine_onset(
    family: &str,
    strength: f64,
    hbar: f64,
    alpha: f64,
    q: f64,
    t_max: f64,
    steps: usize,
) -> Result<Vec<f64>, JsError> {
    js(demo::cosine_onset(family, strength, hbar, alpha, q, t_max, steps))
}

#[wasm_bindgen(js_name = deformationMap)]
pub fn deformation_map(family: &str, strength: f64, hbar: f64, t: f64, extent: f64, n: usize) -> Result<Vec<f64>, JsError> {
    js(demo::deformation_map(family, strength, hbar, t, extent, n))
}
