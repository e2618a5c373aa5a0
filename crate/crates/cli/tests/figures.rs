//! Qualitative shape of the preset sweeps in `configs/`.

use std::path::PathBuf;

use retention_cli::output::SweepRow;
use retention_cli::{cmd_sweep, Cli, Command};
use retention_core::Region;

fn preset(name: &str) -> Vec<SweepRow> {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "configs", &format!("{name}.json")]
        .iter()
        .collect();
    let cli = Cli {
        config: Some(path),
        overrides: Vec::new(),
        seed: None,
        out_csv: None,
        out_svg: None,
        command: Command::Sweep,
    };
    let cfg = retention_cli::load_config(&cli).expect("preset parses");
    cmd_sweep(&cfg).expect("preset sweeps")
}

fn us(rows: &[SweepRow]) -> Vec<f64> {
    rows.iter().map(|r| r.u_star).collect()
}

fn as_(rows: &[SweepRow]) -> Vec<f64> {
    rows.iter().map(|r| r.a_star).collect()
}

fn increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] > w[0])
}

fn decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn second_differences(v: &[f64]) -> impl Iterator<Item = f64> + '_ {
    v.windows(3).map(|w| w[2] - 2.0 * w[1] + w[0])
}

#[test]
fn sigma1_convex_then_no_reinsurance() {
    let rows = preset("sigma1");
    let first_full = rows.iter().position(|r| r.region == Region::AI).expect("saturates");
    assert!(rows[first_full..].iter().all(|r| r.u_star == 1.0));
    let interior = us(&rows[..first_full]);
    assert!(second_differences(&interior).all(|d| d > -1e-12));
    let min = interior.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(min < interior[0] && min < 1.0);
}

#[test]
fn sigma2_null_then_concave() {
    let rows = preset("sigma2");
    let start = rows.iter().position(|r| r.u_star > 0.0).expect("leaves A0");
    assert!(start > 0 && rows[..start].iter().all(|r| r.region == Region::A0));
    let rest = us(&rows[start..]);
    assert!(increasing(&rest));
    assert!(second_differences(&rest).all(|d| d < 1e-12));
}

#[test]
fn sigma2_without_correlation_leaves_retention_constant() {
    let rows = preset("sigma2_independent");
    let u = us(&rows);
    assert!(u.iter().all(|v| (v - u[0]).abs() <= 1e-15));
    assert!(decreasing(&as_(&rows)));
}

#[test]
fn sigma0_investment_tracks_retention() {
    let rows = preset("sigma0");
    let full: Vec<f64> = rows.iter().filter(|r| r.region == Region::AI).map(|r| r.a_star).collect();
    let mid: Vec<f64> = rows.iter().filter(|r| r.region == Region::Interior).map(|r| r.a_star).collect();
    let none: Vec<&SweepRow> = rows.iter().filter(|r| r.region == Region::A0).collect();
    assert!(full.len() > 2 && !mid.is_empty() && none.len() > 2);
    assert!(decreasing(&full));
    assert!(increasing(&mid));
    // back at the zero-volatility level mu / (A S)
    let level = 0.08 / (std::f64::consts::FRAC_1_SQRT_2 * 0.5);
    assert!(none.iter().all(|r| (r.a_star - level).abs() < 1e-12));
    // regions appear in order AI, Interior, A0
    assert!(rows.windows(2).all(|w| !(w[0].region == Region::A0 && w[1].region != Region::A0)));
}

#[test]
fn sigma0_without_correlation() {
    let rows = preset("sigma0_independent");
    let a = as_(&rows);
    assert!(a.iter().all(|v| *v == a[0]));
    let u = us(&rows);
    assert!(u.windows(2).all(|w| w[1] <= w[0]));
    assert!(*u.last().unwrap() < 0.02 && *u.last().unwrap() > 0.0);
}

#[test]
fn wealth_symmetric_and_rising_away_from_threshold() {
    let rows = preset("wealth");
    let n = rows.len();
    for i in 0..n {
        assert!((rows[i].u_star - rows[n - 1 - i].u_star).abs() <= 1e-12);
        assert!((rows[i].a_star - rows[n - 1 - i].a_star).abs() <= 1e-12);
    }
    let right = &rows[n / 2..];
    assert!(increasing(&us(right)) && increasing(&as_(right)));
}

#[test]
fn threshold_acts_like_wealth() {
    // x = 1 fixed: u*(d) equals u*(x') at x' = 1 - d, i.e. the mirrored row
    let by_d = preset("threshold");
    let by_x = preset("wealth");
    assert_eq!(by_d.len(), by_x.len());
    for (d, x) in by_d.iter().zip(&by_x) {
        assert!((d.u_star - x.u_star).abs() <= 1e-9, "{} vs {}", d.param, x.param);
        assert!((d.a_star - x.a_star).abs() <= 1e-9);
    }
}

#[test]
fn risk_aversion_lowers_retention_and_investment() {
    let rows = preset("risk_aversion");
    assert!(us(&rows).windows(2).all(|w| w[1] <= w[0]));
    assert!(decreasing(&as_(&rows)));
}

#[test]
fn scale_raises_retention_and_investment() {
    let rows = preset("scale");
    assert!(increasing(&us(&rows)) && increasing(&as_(&rows)));
}

#[test]
fn excess_of_loss_loading_threshold() {
    let rows = preset("excess_of_loss_theta");
    for r in &rows {
        if r.param <= 0.08 {
            assert_eq!(r.u_star, 0.0, "theta {}", r.param);
        } else {
            assert!(r.u_star > 0.0, "theta {}", r.param);
        }
    }
    assert!(increasing(&us(&rows[rows.iter().position(|r| r.u_star > 0.0).unwrap()..])));
}
