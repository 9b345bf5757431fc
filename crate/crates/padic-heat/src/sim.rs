//! Path-parallel simulation; each path owns its RNG stream, so the result
//! does not depend on the thread count.

use std::io::Write;

use rayon::prelude::*;

use padic_heat_core::diffusion::{simulate_path, SimConfig, Trajectory};
use padic_heat_core::Result;

use crate::io::{fmt_f64, step_records, IoError};

/// Same output as `padic_heat_core::diffusion::simulate`, in path order.
pub fn simulate_parallel(cfg: &SimConfig) -> Result<Vec<Trajectory>> {
    let law = cfg.law()?;
    Ok((0..cfg.paths).into_par_iter().map(|i| simulate_path(cfg, &law, i)).collect())
}

#[derive(Debug, thiserror::Error)]
pub enum WriteError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Format(#[from] IoError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// One JSON object per step.
pub fn write_jsonl<W: Write + ?Sized>(out: &mut W, trajectories: &[Trajectory]) -> std::result::Result<(), WriteError> {
    for tr in trajectories {
        for rec in step_records(tr)? {
            serde_json::to_writer(&mut *out, &rec)?;
            out.write_all(b"\n")?;
        }
    }
    Ok(())
}

/// `path, step, t, radius_exp, increment_exp, clipped, state` with the
/// state's coordinates as `ord:digits` joined by `;`.
pub fn write_csv<W: Write>(out: W, trajectories: &[Trajectory]) -> std::result::Result<(), WriteError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["path", "step", "t", "radius_exp", "increment_exp", "clipped", "state"])?;
    let opt = |v: Option<i32>| v.map_or(String::new(), |m| m.to_string());
    for tr in trajectories {
        for rec in step_records(tr)? {
            let state: Vec<String> = rec.state.iter().map(|s| format!("{}:{}", s.0, s.1)).collect();
            w.write_record([
                rec.path.to_string(),
                rec.step.to_string(),
                fmt_f64(rec.t),
                opt(rec.radius_exp),
                opt(rec.increment_exp),
                rec.clipped.to_string(),
                state.join(";"),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use padic_heat_core::diffusion::simulate;
    use padic_heat_core::kernel::KernelParams;

    #[test]
    fn parallel_matches_sequential_bit_for_bit() {
        let cfg = SimConfig::new(KernelParams::new(3, 2, 0.5, 1.0).unwrap(), 0.1, 5, 64, 11);
        let mut cfg = cfg;
        cfg.window = padic_heat_core::diffusion::StateWindow::new(-48, 32).unwrap();
        let seq = simulate(&cfg).unwrap();
        let par = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap().install(|| simulate_parallel(&cfg).unwrap());
        assert_eq!(seq, par);
    }

    #[test]
    fn jsonl_has_one_record_per_step() {
        let cfg = SimConfig::new(KernelParams::new(2, 1, 1.0, 1.0).unwrap(), 0.5, 3, 2, 1);
        let tr = simulate_parallel(&cfg).unwrap();
        let mut buf = Vec::new();
        write_jsonl(&mut buf, &tr).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 8);
        let v: serde_json::Value = serde_json::from_str(lines[1]).unwrap();
        assert_eq!(v["path"], 0);
        assert_eq!(v["step"], 1);
        assert!(v["state"][0][0].is_string());
        let mut csv_buf = Vec::new();
        write_csv(&mut csv_buf, &tr).unwrap();
        assert_eq!(String::from_utf8(csv_buf).unwrap().lines().count(), 9);
    }
}
