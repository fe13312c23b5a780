//! One PASS/FAIL line per acceptance criterion. Run with `--nocapture`
//! to see the lines.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use skewdiff::core_num::quad::panel_nodes;
use skewdiff::core_num::special::gauss;
use skewdiff::core_num::{gl_rule, QuadConfig};
use skewdiff::experiments::{
    kernel_bound_certificates, lipschitz_experiment, local_time_experiment, two_sided_bound_experiment, weak_error_density, ExperimentSpec,
    ModelSpec,
};
use skewdiff::model::{catalog, DriftSpec, SigmaSpec, TimeGrid};
use skewdiff::parametrix_continuous::{density_series_many, SeriesConfig};
use skewdiff::scheme::{
    chain_density, mc_density_estimate, mc_expectations, one_step_density, scheme_density_series_many, DiscreteSeriesConfig,
};
use skewdiff::skew_kernels::{frozen_density, local_time_mean, DriftedSkewLaw, DriftedSkewParam, FrozenParam};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn sup_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `0.3 + k/2` for `k = −4..4`: nine points around the drifted mean.
fn lattice9() -> Vec<f64> {
    (-4..=4).map(|k| 0.3 + 0.5 * k as f64).collect()
}

fn exact_scheme_collapse() -> Outcome {
    let c = catalog::model("constant").map_err(|e| e.to_string())?;
    let grid = TimeGrid::new(1.0, 8).unwrap();
    let ys = lattice9();
    let exact = |var: f64, mean: f64, y: f64| gauss(var, y - mean);
    let bw = 0.05;
    let mc = mc_density_estimate(&c, &grid, 0.0, 1_000_000, bw, &ys, 2024).map_err(|e| e.to_string())?;
    // the kernel estimate targets the law smoothed by g_{bw²}, exact here
    let z = sup_abs((0..9).map(|k| (mc.estimate[k] - exact(1.44 + bw * bw, 0.3, ys[k])) / mc.std_error[k]));
    let quad = QuadConfig::default();
    let chain = sup_abs(ys.iter().map(|&y| chain_density(&c, &grid, 0, 2, 0.0, y, &quad).unwrap() - exact(1.44 * 0.25, 0.3 * 0.25, y)));
    let series = scheme_density_series_many(&c, &grid, &DiscreteSeriesConfig::default(), 0, 8, 0.0, &ys).map_err(|e| e.to_string())?;
    let dp = sup_abs(series.iter().map(|p| p.value - exact(1.44, 0.3, p.y)));
    check(z <= 3.0 && chain <= 1e-3 && dp <= 1e-3, format!("MC max |z| = {z:.2}, 2-step chain err = {chain:.1e}, series err = {dp:.1e}"))
}

fn skew_bm_exactness() -> Outcome {
    let c = catalog::model("skew-bm").map_err(|e| e.to_string())?;
    let fs = [|y: f64| if y >= 0.0 { 1.0 } else { 0.0 }];
    let mut zs = Vec::new();
    for n in [1, 4, 16] {
        let m = mc_expectations(&c, &TimeGrid::new(1.0, n).unwrap(), 0.0, 1_000_000, 77, &fs).map_err(|e| e.to_string())?[0];
        zs.push((m.mean - 0.7).abs() / m.std_error);
    }
    let fp = FrozenParam::new(1.0, 0.7).unwrap();
    let ys = lattice9();
    let grid = TimeGrid::new(1.0, 16).unwrap();
    let series = scheme_density_series_many(&c, &grid, &DiscreteSeriesConfig::default(), 0, 16, 0.0, &ys).map_err(|e| e.to_string())?;
    let err = sup_abs(series.iter().map(|p| p.value - frozen_density(&fp, 1.0, 0.0, p.y).unwrap()));
    check(zs.iter().all(|z| *z <= 3.0) && err <= 1e-3, format!("|P(X>=0) - 0.7|/SE = {zs:.2?} for N = 1, 4, 16; series err = {err:.1e}"))
}

fn integrate(f: impl Fn(f64) -> f64, lo: f64, hi: f64, breaks: &[f64]) -> f64 {
    let mut nodes = Vec::new();
    panel_nodes(lo, hi, 200, breaks, &gl_rule(20), &mut nodes);
    nodes.iter().map(|&(z, w)| w * f(z)).sum()
}

fn normalizations() -> Outcome {
    let mut worst = 0.0f64;
    for alpha in [0.1, 0.5, 0.9] {
        for t in [0.01, 0.5, 2.0] {
            for x in [-1.0, 0.0, 1.0] {
                for a in [0.5, 2.0] {
                    let p = FrozenParam::new(a, alpha).unwrap();
                    let r = 14.0 * (a * t).sqrt();
                    let m = integrate(|y| frozen_density(&p, t, x, y).unwrap(), x - r, x + r, &[0.0]);
                    worst = worst.max((m - 1.0).abs());
                }
                for mu in [-1.0, 0.0, 1.0] {
                    let law = DriftedSkewLaw::new(DriftedSkewParam::new(alpha, mu, t, x).unwrap()).unwrap();
                    let (c, r) = (x + mu * t, 14.0 * t.sqrt() + mu.abs() * t);
                    let m = integrate(|y| law.density(y), c.min(x) - r, c.max(x) + r, &[0.0]);
                    worst = worst.max((m - 1.0).abs());
                }
                let coeffs = catalog::holder_bump(1.0, 0.4, 0.3, alpha).unwrap();
                let r = 14.0 * (1.4 * t).sqrt() + 0.3 * t;
                let m = integrate(|y| one_step_density(&coeffs, t, x, y).unwrap(), x - r, x + r, &[0.0]);
                worst = worst.max((m - 1.0).abs());
            }
        }
    }
    check(worst <= 1e-8, format!("max |mass - 1| = {worst:.1e} over 270 parameter points"))
}

fn kernel_certificates() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for name in ["holder-bump", "holder-bump-half"] {
        let c = catalog::model(name).map_err(|e| e.to_string())?;
        let k = kernel_bound_certificates(&c, &QuadConfig::default()).map_err(|e| e.to_string())?;
        ok &= k.h.holds() && k.h_n.holds();
        parts.push(format!(
            "{name}: H (C={:.3}, c={:.2}, viol={:.1e}), H_N (C={:.3}, c={:.2}, viol={:.1e})",
            k.h.fitted_big_c, k.h.fitted_c, k.h.max_violation, k.h_n.fitted_big_c, k.h_n.fitted_c, k.h_n.max_violation
        ));
    }
    check(ok, parts.join("; "))
}

/// Sup over targets of each term, and the smallest ratio `sup_r / sup_{r+1}`
/// over `r ≥ 1`.
fn min_decay(terms: &[Vec<f64>]) -> f64 {
    let orders = terms[0].len();
    let sups: Vec<f64> = (0..orders).map(|r| sup_abs(terms.iter().map(|t| t[r]))).collect();
    sups.windows(2).skip(1).map(|w| w[0] / w[1]).fold(f64::INFINITY, f64::min)
}

fn series_convergence() -> Outcome {
    let c = catalog::model("holder-bump").map_err(|e| e.to_string())?;
    let ys: Vec<f64> = (-8..=10).map(|k| 0.25 * k as f64).filter(|&y| y != 0.0).collect();
    let mut worst = f64::INFINITY;
    let mut parts = Vec::new();
    for t in [0.25, 1.0] {
        let p = density_series_many(&c, &SeriesConfig::with_order(5), t, 0.0, &ys).map_err(|e| e.to_string())?;
        let cont = min_decay(&p.into_iter().map(|v| v.terms).collect::<Vec<_>>());
        let grid = TimeGrid::new(t, 8).unwrap();
        let q = scheme_density_series_many(&c, &grid, &DiscreteSeriesConfig::default(), 0, 8, 0.0, &ys).map_err(|e| e.to_string())?;
        let disc = min_decay(&q.into_iter().map(|v| v.terms).collect::<Vec<_>>());
        worst = worst.min(cont).min(disc);
        parts.push(format!("t={t}: continuous {cont:.2}, discrete {disc:.2}"));
    }
    check(worst >= 2.0, format!("smallest consecutive decay factor ({})", parts.join(", ")))
}

fn two_sided_bounds() -> Outcome {
    let skew = |alpha: f64| ModelSpec::Inline {
        drift: DriftSpec::Zero,
        sigma: SigmaSpec::Constant { value: 1.0 },
        alpha,
        eta: 1.0,
        l_bound: 1.0,
        lambda: 2.0,
    };
    let models = [("holder-bump", ModelSpec::catalog("holder-bump")), ("skew-bm 0.3", skew(0.3)), ("skew-bm 0.7", skew(0.7)), ("skew-bm 0.9", skew(0.9))];
    let mut ok = true;
    let mut parts = Vec::new();
    for (label, model) in models {
        let spec = ExperimentSpec { model, n_list: vec![16], ..ExperimentSpec::default() };
        let pair = two_sided_bound_experiment(&spec).map_err(|e| e.to_string())?;
        ok &= pair.holds() && pair.upper.excluded == 0 && pair.lower.excluded == 0;
        parts.push(format!("{label}: upper C={:.2} c={:.2}, lower C={:.2} c={:.2}", pair.upper.fitted_big_c, pair.upper.fitted_c, pair.lower.fitted_big_c, pair.lower.fitted_c));
    }
    check(ok, parts.join("; "))
}

fn density_rate() -> Outcome {
    let run = |name: &str| {
        let spec = ExperimentSpec { model: ModelSpec::catalog(name), n_list: vec![4, 8, 16, 32], ..ExperimentSpec::default() };
        weak_error_density(&spec).map_err(|e| e.to_string())
    };
    let one = run("holder-bump")?;
    let half = run("holder-bump-half")?;
    let ratios_ok = one.ratios.iter().all(|r| (1.2..=1.7).contains(r));
    let slope = half.fit.map_or(f64::NAN, |f| f.slope);
    check(
        ratios_ok && (0.10..=0.45).contains(&slope),
        format!("eta=1 ratios {:.3?} (slope {:.3}); eta=0.5 slope {slope:.3}", one.ratios, one.fit.map_or(f64::NAN, |f| f.slope)),
    )
}

fn local_time() -> Outcome {
    let (a, s) = (1.44, 1.0);
    let closed = local_time_mean(a, 0.7, s, 0.0).map_err(|e| e.to_string())?;
    let formula = (2.0 * a * s / std::f64::consts::PI).sqrt();
    let r = local_time_experiment(a, 0.7, s, 0.4, 4000, 20_000, 5).map_err(|e| e.to_string())?;
    check(
        (closed - formula).abs() <= 1e-8 && r.z_score <= 3.0,
        format!(
            "closed form err {:.1e}; MC {:.4} ± {:.4} vs {:.4} (z = {:.2})",
            (closed - formula).abs(),
            r.extrapolated.mean,
            r.extrapolated.std_error,
            closed,
            r.z_score
        ),
    )
}

fn time_lipschitz() -> Outcome {
    let lattice: Vec<(f64, f64)> = [-0.5, 0.0, 0.5].iter().flat_map(|&x| [-1.5, -0.4, 0.3, 1.1, 2.0].map(|y| (x, y))).collect();
    let mut ok = true;
    let mut parts = Vec::new();
    for name in ["constant", "skew-bm"] {
        let c = catalog::model(name).map_err(|e| e.to_string())?;
        let e = lipschitz_experiment(&c, &SeriesConfig::default(), 1.0, &lattice).map_err(|e| e.to_string())?;
        ok &= e.within_bounds() && e.drift < 1.5;
        let ratios: Vec<f64> = e.reports.iter().map(|r| r.ratio).collect();
        parts.push(format!("{name}: ratios {ratios:.3?} vs bounds {:.3?}, drift {:.3}", e.analytic_bounds, e.drift));
    }
    check(ok, parts.join("; "))
}

fn cli_run(config: &Path, threads: usize) -> Result<(), String> {
    let o = Command::new(env!("CARGO_BIN_EXE_skewdiff")).arg(config).arg("--threads").arg(threads.to_string()).output().map_err(|e| e.to_string())?;
    if o.status.success() {
        Ok(())
    } else {
        Err(String::from_utf8_lossy(&o.stderr).into_owned())
    }
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let configs = [
        ("simulate", "command = \"simulate\"\n[model]\nname = \"holder-bump-half\"\n[grid]\nT = 1.0\nN = 16\n[run]\nseed = 3\nn_paths = 1000\noutput = \"OUT\"\n"),
        (
            "rate-functional",
            "command = \"rate-functional\"\n[model]\nname = \"holder-bump\"\n[grid]\nT = 1.0\nN_list = [2, 4, 8]\n[run]\nseed = 9\nn_paths = 20000\noutput = \"OUT\"\nreference = { kind = \"richardson\", n = 16 }\n",
        ),
        (
            "density",
            "command = \"density\"\n[model]\nname = \"holder-bump\"\n[grid]\nT = 1.0\nN = 8\n[run]\nseed = 4\nn_paths = 10000\nbandwidth = 0.1\nlattice = [-1.0, 0.5, 1.5]\noutput = \"OUT\"\n[run.series]\norder = 3\n",
        ),
    ];
    let mut same = 0;
    for (cmd, body) in configs {
        let mut bytes = Vec::new();
        for threads in [1, 4] {
            let out = dir.path().join(format!("{cmd}-{threads}"));
            let cfg = dir.path().join(format!("{cmd}-{threads}.toml"));
            fs::write(&cfg, body.replace("OUT", &out.display().to_string())).map_err(|e| e.to_string())?;
            cli_run(&cfg, threads)?;
            bytes.push(fs::read(out.join(format!("{cmd}.csv"))).map_err(|e| e.to_string())?);
        }
        if bytes[0] == bytes[1] {
            same += 1;
        }
    }
    check(same == 3, format!("{same}/3 commands byte-identical with 1 and 4 threads"))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("exact-scheme collapse", exact_scheme_collapse),
        ("skew-BM exactness", skew_bm_exactness),
        ("normalizations", normalizations),
        ("kernel smoothing certificates", kernel_certificates),
        ("series convergence", series_convergence),
        ("two-sided Gaussian bounds", two_sided_bounds),
        ("density weak rate", density_rate),
        ("local-time identity", local_time),
        ("time-Lipschitz property", time_lipschitz),
        ("CLI determinism", determinism),
    ];
    // straight to the handle so the report shows without --nocapture
    let mut out = std::io::stdout();
    let mut failed = Vec::new();
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        let (tag, d) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed.push(k + 1);
                ("FAIL", d)
            }
        };
        writeln!(out, "{tag} {:>2} {name}: {d} [{secs:.1} s]", k + 1).unwrap();
        out.flush().unwrap();
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
