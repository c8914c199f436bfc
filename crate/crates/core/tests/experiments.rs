use wassdeconv_core::experiments::*;
use wassdeconv_core::kernel::KernelSpec;
use wassdeconv_core::quadrature;

fn config(
    truth: &str,
    noise: &str,
    extra: &str,
    n_list: &str,
    replicates: usize,
) -> RateStudyConfig {
    let text = format!(
        "p = 1.0\nn_list = {n_list}\nreplicates = {replicates}\nseed = 99\n{extra}\n[truth]\n{truth}\n{noise}\n"
    );
    RateStudyConfig::from_toml(&text).unwrap()
}

const MIXTURE: &str = "kind = \"gaussian-mixture\"\nweights = [0.5, 0.5]\nmeans = [[-2.0], [2.0]]\nvariances = [0.25, 0.25]";

fn gaussian(sigma: f64) -> String {
    format!("[[noise]]\nkind = \"gaussian\"\nsigma = {sigma}")
}

#[test]
fn point_mass_error_is_kernel_smoothing() {
    let h = 0.3;
    let cfg = config(
        "kind = \"discrete\"\npoints = [[0.0]]\nweights = [1.0]",
        "[[noise]]\nkind = \"dirac-zero\"",
        &format!("bandwidth = {h}"),
        "[1000]",
        2,
    );
    let spec = KernelSpec::new(1.0).unwrap();
    let moment =
        2.0 * quadrature::integrate_upper(|u| u * spec.density(u), 0.0, 1e-12, 1e-10).value;
    let r = run_rate_study(&cfg).unwrap();
    for row in &r.rows {
        assert!(
            row.wpp > 0.0 && row.wpp <= h * moment,
            "{} vs {}",
            row.wpp,
            h * moment
        );
        // the grid margin keeps nearly all of the kernel mass
        assert!(row.wpp > 0.6 * h * moment);
    }
}

#[test]
fn studies_are_deterministic() {
    let cfg = config(MIXTURE, &gaussian(1.0), "", "[200, 400, 800]", 2);
    let a = run_rate_study(&cfg).unwrap();
    let b = run_rate_study(&cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.rows.len(), 6);
    let dir = tempfile::tempdir().unwrap();
    let fa = emit_report(&a, &dir.path().join("a")).unwrap();
    let fb = emit_report(&b, &dir.path().join("b")).unwrap();
    for (x, y) in [
        (&fa.rows, &fb.rows),
        (&fa.summary, &fb.summary),
        (&fa.plot, &fb.plot),
    ] {
        assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap());
    }
    let rows = std::fs::read_to_string(&fa.rows).unwrap();
    assert_eq!(rows.lines().count(), 7);
    assert!(rows.starts_with("n,replicate,wpp,seconds\n"));
    assert!(rows.lines().skip(1).all(|l| l.ends_with(",0")));
    let summary = std::fs::read_to_string(&fa.summary).unwrap();
    assert_eq!(summary.lines().count(), 4);
    assert_eq!(summary.lines().next().unwrap(), "n,mean,stderr,bandwidth");
    // re-emitting gives the same bytes
    let again = emit_report(&a, &dir.path().join("a")).unwrap();
    assert_eq!(std::fs::read_to_string(&again.rows).unwrap(), rows);
    // summary is recomputable from the rows
    let bw: Vec<(usize, f64)> = a.summary.iter().map(|s| (s.n, s.bandwidth)).collect();
    assert_eq!(RateStudyResult::summarize(&a.rows, &bw), a.summary);
}

#[test]
fn seeds_follow_the_schedule() {
    assert_eq!(cell_seed(5, 0, 0), 5);
    assert_eq!(cell_seed(5, 2, 3), 2_000_008);
    let cfg = config(MIXTURE, &gaussian(1.0), "", "[200]", 1);
    let mut other = cfg.clone();
    other.seed = 100;
    assert_ne!(
        run_rate_study(&cfg).unwrap().rows,
        run_rate_study(&other).unwrap().rows
    );
}

#[test]
fn empty_result_gives_header_only_files() {
    let empty = RateStudyResult {
        p: 1.0,
        rows: vec![],
        summary: vec![],
        fitted_exponent: None,
        failures: vec![],
    };
    let dir = tempfile::tempdir().unwrap();
    let f = emit_report(&empty, dir.path()).unwrap();
    assert_eq!(
        std::fs::read_to_string(f.rows).unwrap(),
        "n,replicate,wpp,seconds\n"
    );
    assert_eq!(
        std::fs::read_to_string(f.summary).unwrap(),
        "n,mean,stderr,bandwidth\n"
    );
    assert_eq!(
        std::fs::read_to_string(f.plot).unwrap(),
        "loglog_n,log_mean\n"
    );
}

#[test]
fn harder_noise_gives_larger_risk() {
    let run = |noise: &str| {
        let s = run_rate_study(&config(MIXTURE, noise, "bandwidth = 0.5", "[1000]", 20)).unwrap();
        s.summary[0].clone()
    };
    let wide = run(&gaussian(2.0));
    let narrow = run(&gaussian(0.5));
    let none = run("[[noise]]\nkind = \"dirac-zero\"");
    for (hi, lo) in [(&wide, &narrow), (&narrow, &none)] {
        let se = (hi.stderr.powi(2) + lo.stderr.powi(2)).sqrt();
        assert!(hi.mean - lo.mean >= -2.0 * se, "{hi:?} vs {lo:?}");
    }
}

#[test]
fn rotated_noise_matches_axis_aligned_study() {
    let truth =
        "kind = \"gaussian-mixture\"\nweights = [1.0]\nmeans = [[0.0, 0.0]]\nvariances = [0.5]";
    let noise =
        "[[noise]]\nkind = \"gaussian\"\nsigma = 0.3\n[[noise]]\nkind = \"gaussian\"\nsigma = 0.8";
    let (c, s) = (0.5f64.cos(), 0.5f64.sin());
    let extra = "max_atoms = 400\ngrid = { nodes = 64 }";
    let plain = run_rate_study(&config(truth, noise, extra, "[500]", 20)).unwrap();
    let rotated_extra = format!("{extra}\nmixing = [[{c}, {}], [{s}, {c}]]", -s);
    let rotated = run_rate_study(&config(truth, noise, &rotated_extra, "[500]", 20)).unwrap();
    let (a, b) = (&plain.summary[0], &rotated.summary[0]);
    let se = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
    assert!((a.mean - b.mean).abs() <= 2.0 * se, "{a:?} vs {b:?}");
}

#[test]
fn lowerbound_proxy_tracks_the_rate() {
    let s = run_lowerbound_study(&LowerBoundStudyConfig::gaussian_default()).unwrap();
    assert!(s.decay_passes);
    for w in s.rows.windows(2) {
        assert!(w[1].proxy <= w[0].proxy && w[1].b_n >= w[0].b_n);
    }
    for r in &s.rows {
        assert!((1.0 / 3.0..=3.0).contains(&r.ratio), "{r:?}");
        assert!(r.log_n_chi2 < 0.0);
        assert!((r.le_cam - 0.5).abs() < 1e-12);
    }
}
