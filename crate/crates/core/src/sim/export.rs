use crate::error::Result;
use crate::table::{Cell, CsvTable};

use super::empirical::FiringEstimate;
use super::path::{PathRecord, Terminal};
use crate::model::RESET;

/// `path_id,event,t,x` with `event ∈ {sample, jump, kill}`, ordered by path
/// then time; a firing precedes a sample at the same instant.
pub fn paths_to_csv(paths: &[PathRecord]) -> Result<CsvTable> {
    let mut t = CsvTable::new(["path_id", "event", "t", "x"]);
    for (id, p) in paths.iter().enumerate() {
        let mut events: Vec<(f64, u8, f64)> =
            Vec::with_capacity(p.times.len() + p.jump_times.len());
        let n_jumps = p.jump_times.len();
        for (k, &tj) in p.jump_times.iter().enumerate() {
            let killed = p.terminal == Terminal::KilledAtFirstJump && k + 1 == n_jumps;
            events.push((tj, if killed { 1 } else { 0 }, RESET));
        }
        for (&ts, &xs) in p.times.iter().zip(&p.states) {
            events.push((ts, 2, xs));
        }
        events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for (time, kind, x) in events {
            let name = ["jump", "kill", "sample"][kind as usize];
            t.push(vec![Cell::from(id), name.into(), time.into(), x.into()])?;
        }
    }
    Ok(t)
}

/// `t_bin,N_hat,stderr`.
pub fn firing_estimate_to_csv(est: &FiringEstimate) -> Result<CsvTable> {
    let mut t = CsvTable::new(["t_bin", "N_hat", "stderr"]);
    for ((&tb, &r), &e) in est.t_bin.iter().zip(&est.rate).zip(&est.stderr) {
        t.push(vec![tb.into(), r.into(), e.into()])?;
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn events_are_time_ordered_with_jumps_first() {
        let mut p = PathRecord::new();
        p.times = vec![0.0, 0.5];
        p.states = vec![-1.0, 0.0];
        p.jump_times = vec![0.5];
        p.terminal = Terminal::KilledAtFirstJump;
        p.end_time = 0.5;
        let csv = paths_to_csv(&[p]).unwrap().render();
        assert_eq!(
            csv,
            "path_id,event,t,x\n0,sample,0,-1\n0,kill,0.5,0\n0,sample,0.5,0\n"
        );
    }
}
