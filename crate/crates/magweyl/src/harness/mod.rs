//! Verification harness: configured checks, their runner and the report.

pub mod checks;
pub mod config;
pub mod report;
pub mod seminorm;

pub use checks::{CheckDef, Ctx, CATALOGUE};
pub use config::SuiteConfig;
pub use report::{emit_report, CheckRecord, Env, Format, Report};

use crate::error::Result;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

/// FNV-1a of the check id; selects the check's private random stream.
fn stream_of(id: &str) -> u64 {
    id.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Random source of one check; independent of scheduling and of the other checks.
pub fn check_rng(seed: u64, id: &str) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_of(id));
    rng
}

/// Runs one check. Errors and panics yield a NaN residual, which never passes.
pub fn run_check(cfg: &SuiteConfig, def: &CheckDef) -> CheckRecord {
    let ctx = Ctx { cfg, suite: def.suite };
    let mut rng = check_rng(cfg.seed, def.id);
    let start = Instant::now();
    let residual = match catch_unwind(AssertUnwindSafe(|| (def.run)(&ctx, &mut rng))) {
        Ok(Ok(r)) => r,
        Ok(Err(_)) | Err(_) => f64::NAN,
    };
    let ms = start.elapsed().as_millis() as u64;
    CheckRecord::new(def.id, def.anchor, residual, cfg.tolerance(def.id, def.tol), ms)
}

/// Runs the catalogue entries accepted by `select`, concurrently, and keeps
/// catalogue order in the report.
pub fn run_selected(cfg: &SuiteConfig, select: impl Fn(&CheckDef) -> bool) -> Result<Report> {
    cfg.validate()?;
    let defs: Vec<&CheckDef> = CATALOGUE.iter().filter(|d| select(d)).collect();
    let slots: Vec<Mutex<Option<CheckRecord>>> = defs.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(defs.len().max(1));
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(def) = defs.get(i) else { break };
                let rec = run_check(cfg, def);
                *slots[i].lock().unwrap_or_else(|e| e.into_inner()) = Some(rec);
            });
        }
    });
    let checks = slots
        .into_iter()
        .map(|m| m.into_inner().unwrap_or_else(|e| e.into_inner()).expect("every slot is filled"))
        .collect();
    let env = Env { d: cfg.grid.d, n: cfg.grid.n, l: cfg.grid.l, eps: cfg.eps, lambda: cfg.lambda, seed: cfg.seed };
    Ok(Report { version: report::REPORT_VERSION, env, checks })
}

/// Runs every check of the configured suites.
pub fn run_suite(cfg: &SuiteConfig) -> Result<Report> {
    run_selected(cfg, |d| cfg.suites.iter().any(|s| s == d.suite))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_differ_by_id() {
        use rand::Rng;
        let a: u64 = check_rng(1, "peetre").random();
        let b: u64 = check_rng(1, "plancherel").random();
        assert_ne!(a, b);
        assert_eq!(a, check_rng(1, "peetre").random::<u64>());
    }

    #[test]
    fn empty_selection_gives_empty_report() {
        let mut cfg = SuiteConfig::default();
        cfg.suites.clear();
        let r = run_suite(&cfg).unwrap();
        assert!(r.checks.is_empty());
        assert!(r.all_pass());
    }

    #[test]
    fn order_follows_catalogue() {
        let cfg = SuiteConfig::default();
        let r = run_selected(&cfg, |d| d.suite == "inequalities" || d.suite == "grid").unwrap();
        let ids: Vec<&str> = r.checks.iter().map(|c| c.id.as_str()).collect();
        assert_eq!(ids, ["sfourier-involution", "plancherel", "peetre", "bracket-squeeze", "bracket-failure-direction"]);
    }
}
