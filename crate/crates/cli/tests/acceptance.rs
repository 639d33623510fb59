//! Acceptance criteria, one line each. Expected values are frozen from
//! closed forms or from separately computed oracles before any assertion.
//!
//! Optional corpus check: set `SEMADEV_NOVEL` and `SEMADEV_CHEMISTRY` to two
//! analyzable inputs (embedding files, or texts with same-stem embeddings).

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use semadev::batch::{run_batch, write_batch};
use semadev::pipeline::{self, curve_and_fit, shuffle_section, Document};
use semadev::signal_file::{Generator, SignalFile};
use semadev::AnalysisConfig;
use semadev_core::allan::{adev_at, adev_curve, adev_naive, make_tau_grid, AllanCurve, AllanPoint};
use semadev_core::embedding::{write_jsonl, EmbeddingSeries};
use semadev_core::rng::rng_from_seed;
use semadev_core::scaling::{detect_horizon, fit_exponent, HorizonParams};
use semadev_core::signal::{build_phase, increments_of, IncrementSeries};
use semadev_core::synth::{crossover_components, simulate, SignalKind};

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

use Outcome::*;

type Check = fn() -> Outcome;

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Pass(detail)
    } else {
        Fail(detail)
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn signal_alpha(kind: SignalKind, n: usize, seed: u64) -> f64 {
    let inc = simulate(&kind, n, seed).unwrap();
    curve_and_fit(&AnalysisConfig::default(), &inc, n + 1)
        .unwrap()
        .1
        .alpha
}

fn hand_oracle() -> Outcome {
    let phase = [0.0, 1.0, 0.0, 1.0, 0.0];
    // Second differences at tau 1 are -2, 2, -2 (three terms): sqrt(12 / 6) = sqrt 2.
    // At tau 2 they are 0 - 0 + 0 = 0.
    let expected = [(1, 2f64.sqrt(), 3), (2, 0.0, 1)];
    let mut worst = 0.0f64;
    let mut ok = true;
    for (tau, want, terms) in expected {
        let (got, n) = adev_at(&phase, tau).unwrap();
        worst = worst.max((got - want).abs());
        ok &= n == terms;
    }
    verdict(ok && worst <= 1e-12, format!("max |error| {worst:.1e}"))
}

fn oracle_equivalence() -> Outcome {
    let mut rng = rng_from_seed(0xACCE);
    let mut worst = 0.0f64;
    let cases = 1500;
    for _ in 0..cases {
        let m = rng.random_range(5..3000usize);
        let step_scale = rng.random_range(0.01..3.0);
        let mut phase = vec![0.0f64];
        for _ in 1..m {
            let x: f64 = StandardNormal.sample(&mut rng);
            phase.push(phase.last().unwrap() + step_scale * x.abs());
        }
        let tau = rng.random_range(1..=(m - 1) / 2);
        let fast = adev_at(&phase, tau).unwrap().0;
        let naive = adev_naive(&phase, tau).unwrap();
        worst = worst.max((fast - naive).abs() / naive.abs());
    }
    verdict(
        worst <= 1e-12,
        format!("{cases} cases, max relative error {worst:.1e}"),
    )
}

fn white_limit() -> Outcome {
    let want = -0.5;
    let alphas: Vec<f64> = (0..10)
        .map(|s| signal_alpha(SignalKind::White { sigma: 1.0 }, 20_000, s))
        .collect();
    let m = mean(&alphas);
    verdict(
        (m - want).abs() <= 0.05,
        format!("mean alpha {m:.4} (target {want})"),
    )
}

fn correlated_regime() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for hurst in [0.75, 0.9] {
        // Allan deviation of fGn scales as tau^(H - 1).
        let want = hurst - 1.0;
        let alphas: Vec<f64> = (0..10)
            .map(|s| signal_alpha(SignalKind::Fgn { hurst }, 16_384, s))
            .collect();
        let m = mean(&alphas);
        ok &= (m - want).abs() <= 0.08;
        parts.push(format!("H={hurst}: mean alpha {m:.4} (target {want:.2})"));
    }
    verdict(ok, parts.join("; "))
}

fn shuffle_collapse() -> Outcome {
    let n = 16_384;
    let inc = simulate(&SignalKind::Fgn { hurst: 0.75 }, n, 0).unwrap();
    let cfg = AnalysisConfig {
        seed: 2024,
        ..AnalysisConfig::default()
    };
    let original = curve_and_fit(&cfg, &inc, n + 1).unwrap().1.alpha;
    let doc = Document {
        source_id: "fgn-0.75".into(),
        genre: None,
        n_sentences: n + 1,
        increments: inc,
        embeddings: None,
    };
    let s = shuffle_section(&cfg, &doc, original, 10).unwrap();
    let lo = s
        .shuffled_alphas
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let hi = s
        .shuffled_alphas
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    verdict(
        (-0.55..=-0.45).contains(&s.mean_shuffled_alpha) && original > -0.40,
        format!(
            "original {original:.4}; shuffled mean {:.4} ± {:.4} (range {lo:.4}..{hi:.4})",
            s.mean_shuffled_alpha, s.std_shuffled_alpha
        ),
    )
}

fn curve_from(taus: &[usize], m: usize, f: impl Fn(f64) -> f64) -> AllanCurve {
    AllanCurve {
        source_id: "constructed".into(),
        m_phase_len: m,
        points: taus
            .iter()
            .map(|&tau| AllanPoint {
                tau,
                sigma: f(tau as f64),
                n_terms: m - 2 * tau,
            })
            .collect(),
    }
}

fn horizon_knee() -> Outcome {
    let tau_c = 50.0;
    let m = 2001;
    let grid = make_tau_grid(m, 20).unwrap();
    let taus = grid.taus();
    let curve = curve_from(taus, m, |t| {
        if t < tau_c {
            t.powf(-0.5)
        } else {
            tau_c.powf(-0.5)
        }
    });
    let params = HorizonParams::default();
    let half = params.window / 2;
    // Oracle: first window centre whose window has most of its points at or past the knee.
    let oracle = (half..taus.len() - half)
        .find(|&c| {
            taus[c - half..=c + half]
                .iter()
                .filter(|&&t| t as f64 >= tau_c)
                .count()
                > half
        })
        .unwrap();
    // Short-time fit over tau <= 40, entirely below the knee.
    let fit = fit_exponent(&curve, 400, 0.1).unwrap();
    let h = detect_horizon(&curve, &fit, &params, None).unwrap();
    match h.tau_star {
        Some(t) => {
            let idx = taus.iter().position(|&x| x == t).unwrap();
            verdict(
                idx.abs_diff(oracle) <= half,
                format!(
                    "tau* {t}, oracle centre {} (tolerance {half} grid points)",
                    taus[oracle]
                ),
            )
        }
        None => Fail(format!("no horizon found; oracle centre {}", taus[oracle])),
    }
}

fn horizon_crossover() -> Outcome {
    let (sigma, amplitude, hurst, m) = (1.0, 0.15, 0.98, 50_000);
    let mut ok = true;
    let mut parts = Vec::new();
    for seed in 0..3u64 {
        // Oracle: where the standalone component curves cross.
        let (w, f) = crossover_components(sigma, amplitude, hurst, m, seed).unwrap();
        let wc = component_curve(w);
        let fc = component_curve(f);
        let cross = wc
            .points
            .iter()
            .zip(&fc.points)
            .find(|(a, b)| b.sigma >= a.sigma)
            .map(|(a, _)| a.tau);
        let inc = simulate(
            &SignalKind::Crossover {
                sigma,
                amplitude,
                hurst,
            },
            m,
            seed,
        )
        .unwrap();
        let cfg = AnalysisConfig::default();
        let (curve, fit) = curve_and_fit(&cfg, &inc, m + 1).unwrap();
        let h = detect_horizon(&curve, &fit, &cfg.horizon_params(), None).unwrap();
        let within = match (h.tau_star, cross) {
            (Some(t), Some(c)) => (t as f64 / c as f64).log2().abs() <= 1.0,
            _ => false,
        };
        ok &= within;
        parts.push(format!(
            "seed {seed}: tau* {:?}, intersection {:?}, fit tau <= {}, alpha {:.3}",
            h.tau_star, cross, fit.fit_tau_max, fit.alpha
        ));
    }
    verdict(ok, parts.join("; "))
}

fn component_curve(values: Vec<f64>) -> AllanCurve {
    let inc = IncrementSeries::from_values(values, "component").unwrap();
    let phase = build_phase(&inc);
    let grid = make_tau_grid(phase.len(), 20).unwrap();
    adev_curve(phase.values(), &grid, "component").unwrap()
}

fn horizon_power_law() -> Outcome {
    let m = 20_001;
    let grid = make_tau_grid(m, 20).unwrap();
    let curve = curve_from(grid.taus(), m, |t| 0.8 * t.powf(-0.4));
    let fit = fit_exponent(&curve, m, 0.1).unwrap();
    let h = detect_horizon(&curve, &fit, &HorizonParams::default(), None).unwrap();
    verdict(
        !h.found && h.tau_star.is_none(),
        format!("found = {}", h.found),
    )
}

fn random_orthogonal(dim: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    while basis.len() < dim {
        let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut *rng)).collect();
        for b in &basis {
            let d: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            basis.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    basis
}

fn invariance() -> Outcome {
    let mut rng = rng_from_seed(0x1A7);
    let (mut offset, mut trend, mut rot, mut equi, mut fit_inv) =
        (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..200 {
        let m = rng.random_range(50..2000usize);
        let phase: Vec<f64> = (0..m).map(|_| StandardNormal.sample(&mut rng)).collect();
        let c: f64 = rng.random_range(-1e3..1e3);
        let slope: f64 = rng.random_range(-10.0..10.0);
        let k: f64 = rng.random_range(0.01..100.0);
        let shifted: Vec<f64> = phase.iter().map(|p| p + c).collect();
        let tilted: Vec<f64> = phase
            .iter()
            .enumerate()
            .map(|(i, p)| p + slope * i as f64)
            .collect();
        let scaled: Vec<f64> = phase.iter().map(|p| k * p).collect();
        for tau in [1, 2, 5, (m - 1) / 2] {
            let base = adev_at(&phase, tau).unwrap().0;
            offset = offset.max((adev_at(&shifted, tau).unwrap().0 - base).abs() / base);
            trend = trend.max((adev_at(&tilted, tau).unwrap().0 - base).abs() / base);
            equi = equi.max((adev_at(&scaled, tau).unwrap().0 - k * base).abs() / (k * base));
        }

        let grid = make_tau_grid(m, 20).unwrap();
        let curve = adev_curve(&phase, &grid, "x").unwrap();
        if let Ok(fit) = fit_exponent(&curve, m, 0.2) {
            let refit = fit_exponent(&curve.scaled(k), m, 0.2).unwrap();
            fit_inv = fit_inv.max((refit.alpha - fit.alpha).abs());
        }
    }
    for _ in 0..50 {
        let dim = rng.random_range(2..24usize);
        let n = rng.random_range(3..200usize);
        let q = random_orthogonal(dim, &mut rng);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect())
            .collect();
        let moved: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| {
                let s: f64 = rng.random_range(0.001..1000.0);
                q.iter()
                    .map(|qi| s * qi.iter().zip(r).map(|(a, b)| a * b).sum::<f64>())
                    .collect()
            })
            .collect();
        let a = increments_of(&rows, "a").unwrap();
        let b = increments_of(&moved, "b").unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            rot = rot.max((x - y).abs());
        }
    }
    let ok = offset <= 1e-9 && trend <= 1e-9 && rot <= 1e-9 && equi <= 1e-9 && fit_inv <= 1e-9;
    verdict(
        ok,
        format!(
            "offset {offset:.1e}, trend {trend:.1e} (rel); rotation+rescale {rot:.1e} (abs); equivariance {equi:.1e} (rel); fit under scaling {fit_inv:.1e}"
        ),
    )
}

fn write_corpus(root: &Path) {
    for (i, hurst) in [0.55, 0.7, 0.85].into_iter().enumerate() {
        let dir = root.join(if i % 2 == 0 { "novels" } else { "papers" });
        std::fs::create_dir_all(&dir).unwrap();
        let kind = SignalKind::Fgn { hurst };
        let n = 2000 + 700 * i;
        let inc = simulate(&kind, n, i as u64).unwrap();
        let file = SignalFile::new(
            &inc,
            Some(Generator {
                kind,
                n,
                seed: i as u64,
            }),
        );
        std::fs::write(dir.join(format!("sig{i}.json")), file.to_json()).unwrap();
    }
    let mut rng = rng_from_seed(77);
    let rows: Vec<Vec<f32>> = (0..600)
        .map(|_| {
            (0..12)
                .map(|_| StandardNormal.sample(&mut rng))
                .map(|x: f64| x as f32)
                .collect()
        })
        .collect();
    let series = EmbeddingSeries::from_rows(&rows, "emb").unwrap();
    write_jsonl(&series, root.join("papers/emb.jsonl")).unwrap();
    let text: String = (0..600)
        .map(|i| format!("Sentence {i} is here. "))
        .collect();
    std::fs::write(root.join("novels/story.txt"), text).unwrap();
    write_jsonl(&series, root.join("novels/story.jsonl")).unwrap();
}

fn without_wall_time(text: &str) -> String {
    text.lines()
        .filter(|l| !l.trim_start().starts_with("\"wall_time_s\""))
        .collect::<Vec<_>>()
        .join("\n")
}

fn files_under(dir: &Path) -> Vec<PathBuf> {
    let mut out: Vec<PathBuf> = walkdir::WalkDir::new(dir)
        .into_iter()
        .filter_map(Result::ok)
        .filter(|e| e.file_type().is_file())
        .map(|e| e.path().strip_prefix(dir).unwrap().to_path_buf())
        .collect();
    out.sort();
    out
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    write_corpus(&data);
    let cfg = AnalysisConfig {
        n_shuffles: 3,
        seed: 31337,
        workers: 4,
        ..AnalysisConfig::with_input(&data)
    };
    let run = |out: &Path| {
        let outcome = run_batch(&cfg).unwrap();
        write_batch(&outcome, out).unwrap();
        outcome.reports.len()
    };
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let n = run(&a);
    run(&b);
    let files = files_under(&a);
    if files != files_under(&b) {
        return Fail("runs wrote different file sets".into());
    }
    let differing: Vec<String> = files
        .iter()
        .filter(|f| {
            let x = std::fs::read_to_string(a.join(f)).unwrap();
            let y = std::fs::read_to_string(b.join(f)).unwrap();
            without_wall_time(&x) != without_wall_time(&y)
        })
        .map(|f| f.display().to_string())
        .collect();
    verdict(
        differing.is_empty() && n == 5,
        format!(
            "{n} reports, {} files compared, differing: {differing:?}",
            files.len()
        ),
    )
}

fn corpus_ordering() -> Outcome {
    let (Some(novel), Some(chem)) = (
        std::env::var_os("SEMADEV_NOVEL"),
        std::env::var_os("SEMADEV_CHEMISTRY"),
    ) else {
        return Skip("set SEMADEV_NOVEL and SEMADEV_CHEMISTRY to run".into());
    };
    let alpha = |p: PathBuf| -> Result<f64, String> {
        let sidecar = ["jsonl", "semb"]
            .iter()
            .map(|e| p.with_extension(e))
            .find(|s| s.is_file() && *s != p);
        let cfg = AnalysisConfig {
            embeddings: sidecar,
            ..AnalysisConfig::with_input(&p)
        };
        pipeline::analyze(&cfg)
            .map(|r| r.fit.alpha)
            .map_err(|e| e.to_string())
    };
    match (alpha(novel.into()), alpha(chem.into())) {
        (Ok(n), Ok(c)) => verdict(n < c, format!("novel {n:.4}, chemistry {c:.4}")),
        (n, c) => Fail(format!("novel {n:?}, chemistry {c:?}")),
    }
}

fn main() {
    let criteria: [(&str, Check); 11] = [
        ("hand oracle", hand_oracle),
        ("oracle equivalence", oracle_equivalence),
        ("white-noise limit", white_limit),
        ("correlated regime", correlated_regime),
        ("shuffle collapse", shuffle_collapse),
        ("horizon: constructed knee", horizon_knee),
        ("horizon: white + fGn crossover", horizon_crossover),
        ("horizon: pure power law", horizon_power_law),
        ("invariance suite", invariance),
        ("batch determinism", determinism),
        ("novel steeper than chemistry", corpus_ordering),
    ];
    let mut failed = Vec::new();
    for (name, check) in criteria {
        let started = Instant::now();
        let outcome = check();
        let secs = started.elapsed().as_secs_f64();
        let (tag, detail) = match &outcome {
            Pass(d) => ("PASS", d),
            Fail(d) => ("FAIL", d),
            Skip(d) => ("SKIP", d),
        };
        println!("{tag}  {name:<32} {detail}  [{secs:.1}s]");
        if matches!(outcome, Fail(_)) {
            failed.push(name);
        }
    }
    if !failed.is_empty() {
        println!(
            "\n{} criterion/criteria failed: {}",
            failed.len(),
            failed.join(", ")
        );
        std::process::exit(1);
    }
}
