//! Thin JSON facade over trainkit for the browser demo. Every entry point
//! takes plain strings and numbers and returns a JSON string, so the page
//! needs no generated bindings beyond the wasm-bindgen glue.

use wasm_bindgen::prelude::*;

use trainkit::approx::polygonal_approximant;
use trainkit::families::FamilySpec;
use trainkit::metrics::{dx_distance, l1_norm};
use trainkit::{CombinedFunction, ToleranceConfig};

fn family(spec: &str) -> Result<CombinedFunction, String> {
    let parsed: FamilySpec = spec.parse().map_err(|e| format!("{e}"))?;
    let train = parsed.make_train().map_err(|e| format!("{e}"))?;
    Ok(train.into())
}

fn grid(a: f64, b: f64, points: u32) -> Result<Vec<f64>, String> {
    if !(a.is_finite() && b.is_finite()) || a < 0.0 || b <= a {
        return Err(format!("bad sampling window [{a}, {b}]"));
    }
    if points < 2 || points > 20_000 {
        return Err(format!("point count {points} outside [2, 20000]"));
    }
    let step = (b - a) / (points - 1) as f64;
    Ok((0..points).map(|i| a + i as f64 * step).collect())
}

fn rows(f: &CombinedFunction, xs: &[f64]) -> Vec<(f64, f64)> {
    xs.iter().map(|&x| (x, f.value_at(x))).collect()
}

/// Samples a family over [a, b]; returns {family, samples: [[x, v], ...]}.
#[wasm_bindgen]
pub fn sample_family(spec: &str, a: f64, b: f64, points: u32) -> Result<String, String> {
    let f = family(spec)?;
    let xs = grid(a, b, points)?;
    let doc = serde_json::json!({
        "family": spec,
        "samples": rows(&f, &xs),
    });
    Ok(doc.to_string())
}

/// Builds a certified polygonal approximant; returns the certificate along
/// with overlay samples of the target and the approximant.
#[wasm_bindgen]
pub fn approximate_family(spec: &str, eps: f64) -> Result<String, String> {
    let f = family(spec)?;
    let cfg = ToleranceConfig::default();
    let (chain, cert) = polygonal_approximant(&f, eps, &cfg).map_err(|e| format!("{e}"))?;
    let upper = cert.cutoff_index as f64 + cert.ramp_width + 1.0;
    let xs = grid(0.0, upper, 900)?;
    let approx: CombinedFunction = chain.into();
    let doc = serde_json::json!({
        "family": spec,
        "epsilon": eps,
        "certificate": cert,
        "target": rows(&f, &xs),
        "approximant": rows(&approx, &xs),
    });
    Ok(doc.to_string())
}

/// Certified distance between two families, with their integral norms.
#[wasm_bindgen]
pub fn distance_between(first: &str, second: &str) -> Result<String, String> {
    let f = family(first)?;
    let g = family(second)?;
    let cfg = ToleranceConfig::default();
    let d = dx_distance(&f, &g, &cfg).map_err(|e| format!("{e}"))?;
    let nf = l1_norm(&f, &cfg).map_err(|e| format!("{e}"))?;
    let ng = l1_norm(&g, &cfg).map_err(|e| format!("{e}"))?;
    let doc = serde_json::json!({
        "first": first,
        "second": second,
        "dx": d,
        "first_l1": nf,
        "second_l1": ng,
    });
    Ok(doc.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_carry_exact_apexes() {
        let out = sample_family("triangle", 0.0, 6.0, 7).unwrap();
        let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
        let samples = doc["samples"].as_array().unwrap();
        assert_eq!(samples.len(), 7);
        for (i, pair) in samples.iter().enumerate() {
            assert_eq!(pair[0].as_f64().unwrap(), i as f64);
            assert_eq!(pair[1].as_f64().unwrap(), i as f64);
        }
    }

    #[test]
    fn approximation_reports_a_certified_budget() {
        let out = approximate_family("triangle:t=0.05", 0.05).unwrap();
        let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
        let achieved = doc["certificate"]["achieved"]["value"].as_f64().unwrap()
            + doc["certificate"]["achieved"]["error_bound"].as_f64().unwrap();
        assert!(achieved < 0.05, "{achieved}");
        assert_eq!(doc["target"].as_array().unwrap().len(), 900);
        assert_eq!(doc["approximant"].as_array().unwrap().len(), 900);
    }

    #[test]
    fn distances_match_the_library() {
        let out = distance_between("triangle", "smooth").unwrap();
        let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
        let v = doc["dx"]["value"].as_f64().unwrap();
        assert!(v > 0.0 && v < 2.0, "{v}");
        let l1 = doc["first_l1"]["value"].as_f64().unwrap();
        assert!((l1 - 1.0).abs() < 1e-9, "{l1}");
    }

    #[test]
    fn bad_inputs_surface_as_messages() {
        assert!(sample_family("waves", 0.0, 1.0, 5).is_err());
        assert!(sample_family("triangle", 3.0, 1.0, 5).is_err());
        assert!(approximate_family("triangle", 0.0).is_err());
        assert!(distance_between("triangle", "power").is_err());
    }
}
