//! Browser demo: the Schottky-type Fuchsian group in `SL2(R)` generated by
//! `diag(e^s, e^-s)` and the hyperbolic element with the same translation
//! length and axis rotated by a quarter turn.

use isoflag::anosov::{self, samples, AnosovConfig, Word};
use isoflag::cartan;
use isoflag::Tolerances;

fn fuchsian(s: f64) -> Result<anosov::RepSpec, String> {
    if !(s.is_finite() && s > 0.0 && s < 20.0) {
        return Err(format!("translation parameter {s} outside (0, 20)"));
    }
    Ok(samples::fuchsian_sl2(s))
}

fn radius_ok(radius: usize, max: usize) -> Result<(), String> {
    if radius == 0 || radius > max {
        return Err(format!("radius must lie in 1..={max}"));
    }
    Ok(())
}

/// Limit points as angles in `[0, pi)` of lines in `R^2`, sorted.
pub fn limit_angles(s: f64, radius: usize) -> Result<Vec<f64>, String> {
    radius_ok(radius, 7)?;
    let rep = fuchsian(s)?;
    let sample = anosov::limit_set(&rep, radius, 1, &AnosovConfig::default(), &Tolerances::default()).map_err(|e| e.to_string())?;
    let mut out: Vec<f64> = sample
        .points
        .iter()
        .map(|p| {
            let v = p.subspace.basis();
            let a = v.get(1, 0).w.atan2(v.get(0, 0).w);
            a.rem_euclid(std::f64::consts::PI)
        })
        .collect();
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Smallest `alpha_1(mu(rho(w)))` over words of each length `1..=radius`.
pub fn divergence_minima(s: f64, radius: usize) -> Result<Vec<f64>, String> {
    radius_ok(radius, 9)?;
    let rep = fuchsian(s)?;
    let p = anosov::divergence_profile(&rep, 1, radius, &AnosovConfig::default()).map_err(|e| e.to_string())?;
    Ok(p.minima)
}

/// `[lambda, mu(g)/1, mu(g^2)/2, mu(g^4)/4, ...]` for the first root
/// coordinate and `g = rho(word)`, up to the power `2^max_exp`.
pub fn mu_power_curve(s: f64, word: &str, max_exp: u32) -> Result<Vec<f64>, String> {
    if max_exp > 20 {
        return Err("max_exp must be at most 20".into());
    }
    let rep = fuchsian(s)?;
    let w: Word = word.parse().map_err(|e: isoflag::Error| e.to_string())?;
    let g = rep.evaluate(&w).map_err(|e| e.to_string())?;
    let group = rep.group();
    let mut out = vec![cartan::lyapunov_lambda(&g, group).map_err(|e| e.to_string())?.values()[0]];
    for e in 0..=max_exp {
        let mu = cartan::mu_of_power(&g, group, 1 << e).map_err(|e| e.to_string())?;
        out.push(mu.values()[0]);
    }
    Ok(out)
}

#[cfg(target_arch = "wasm32")]
mod bindings {
    use wasm_bindgen::prelude::*;

    fn js(r: Result<Vec<f64>, String>) -> Result<Vec<f64>, JsError> {
        r.map_err(|e| JsError::new(&e))
    }

    #[wasm_bindgen(js_name = limitAngles)]
    pub fn limit_angles(s: f64, radius: usize) -> Result<Vec<f64>, JsError> {
        js(super::limit_angles(s, radius))
    }

    #[wasm_bindgen(js_name = divergenceMinima)]
    pub fn divergence_minima(s: f64, radius: usize) -> Result<Vec<f64>, JsError> {
        js(super::divergence_minima(s, radius))
    }

    #[wasm_bindgen(js_name = muPowerCurve)]
    pub fn mu_power_curve(s: f64, word: &str, max_exp: u32) -> Result<Vec<f64>, JsError> {
        js(super::mu_power_curve(s, word, max_exp))
    }
}
