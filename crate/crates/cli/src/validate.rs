//! Internal oracle suite: quadrature results against closed forms and exact
//! identities.

use arrival_core::analytic::{closed_form_current, delta_lambda, jplus_second_order, validity_window};
use arrival_core::comparison::relative_difference;
use arrival_core::observables::{Experiment, Side};
use arrival_core::{GaussianPacket, QuadratureSpec, Result, ScatteringModel, SuperpositionState};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, outcome: Result<(bool, String)>) -> Check {
    match outcome {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check { name, passed: false, detail: format!("error: {e}") },
    }
}

fn free(p0: f64, dp: f64, quad: &QuadratureSpec) -> Result<(GaussianPacket, Experiment)> {
    let g = GaussianPacket::new(p0, dp, 0.0)?;
    Ok((g, Experiment::new(g.into(), ScatteringModel::Free, *quad)?))
}

fn closed_form(quad: &QuadratureSpec) -> Result<(bool, String)> {
    let (g, e) = free(0.5, 0.01, quad)?;
    let mut worst = 0.0f64;
    for k in 0..20 {
        let t = 600.0 * k as f64 / 19.0;
        let j = e.expectation_j(150.0, t)?;
        let c = closed_form_current(&g, 150.0, t);
        worst = worst.max(((j - c) / c).abs());
    }
    Ok((worst < 1e-8, format!("max relative error {worst:.2e}")))
}

fn moments(quad: &QuadratureSpec) -> Result<(bool, String)> {
    let (g, e) = free(0.5, 0.01, quad)?;
    let mut worst = 0.0f64;
    for &(x, t) in &[(150.0, 0.0), (150.0, 300.0), (80.0, 120.0), (260.0, 550.0), (20.0, 45.0)] {
        let i1 = e.functional(|_| 1.0, x, t)?;
        let ip = e.functional(|p| p, x, t)?;
        let ip2 = e.functional(|p| p * p, x, t)?;
        let dl = delta_lambda(&g, x, t);
        let expect_p = dl.lambda * i1;
        let expect_p2 = (dl.lambda * dl.lambda + 0.5 / dl.delta) * i1;
        worst = worst.max((ip - expect_p).norm() / expect_p.norm()).max((ip2 - expect_p2).norm() / expect_p2.norm());
    }
    Ok((worst < 1e-9, format!("max relative error {worst:.2e}")))
}

fn normalization(quad: &QuadratureSpec) -> Result<(bool, String)> {
    let s = SuperpositionState::new(2.0, 0.2, 0.5, 0.01, 0.0)?;
    let e = Experiment::new(s.into(), ScatteringModel::Free, *quad)?;
    let err = (e.transmittance() - 1.0).abs();
    Ok((err < 1e-9, format!("|norm − 1| = {err:.2e}")))
}

fn second_order(quad: &QuadratureSpec) -> Result<(bool, String)> {
    let (g, e) = free(0.5, 0.01, quad)?;
    let w = validity_window(&g, 150.0)?;
    let mut worst = 0.0f64;
    for k in 0..=20 {
        let t = w.t_range.1 * k as f64 / 20.0;
        let q = e.expectation_jplus(150.0, t)?;
        worst = worst.max(((jplus_second_order(&g, 150.0, t).value - q) / q).abs());
    }
    Ok((worst < 1e-5, format!("max relative deviation {worst:.2e} on the validity window")))
}

fn tails(quad: &QuadratureSpec) -> Result<(bool, String)> {
    let g = GaussianPacket::new(0.5, 0.1, -22.0)?;
    let e = Experiment::new(g.into(), ScatteringModel::barrier(4.0, 0.8)?, *quad)?;
    let below = e.position_tail_probability(4.0, Side::Below, 80.0)?;
    let above = e.position_tail_probability(4.0, Side::Above, 80.0)?;
    let err = (below + above - e.transmittance()).abs();
    Ok((err < 1e-8, format!("|P(x<d) + P(x>d) − 𝖳| = {err:.2e}")))
}

fn positivity(quad: &QuadratureSpec) -> Result<(bool, String)> {
    let s = SuperpositionState::new(2.0, 0.2, 0.5, 0.01, 0.0)?;
    let e = Experiment::new(s.into(), ScatteringModel::Free, *quad)?;
    let mut negatives = 0;
    let mut exact = true;
    for k in 0..200 {
        let sample = e.sample(150.0, 4.0 * k as f64)?;
        if sample.j_plus < 0.0 {
            negatives += 1;
        }
        if let Some((d, da)) = relative_difference(sample.j, sample.j_plus) {
            exact &= if sample.j < 0.0 { d + da == 2.0 } else { d == da };
        }
    }
    Ok((negatives == 0 && exact, format!("{negatives} negative ⟨J⁺⟩ samples, Δ/Δ_abs relation exact: {exact}")))
}

pub fn run_checks(quad: &QuadratureSpec) -> Vec<Check> {
    vec![
        check("closed-form current", closed_form(quad)),
        check("moment identities", moments(quad)),
        check("superposition norm", normalization(quad)),
        check("second-order positive current", second_order(quad)),
        check("position tails", tails(quad)),
        check("positivity and modulus relation", positivity(quad)),
    ]
}
