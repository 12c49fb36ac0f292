use std::io::{self, Write};

use super::Trajectory;

/// Long-format CSV `t,zeta,x_1,…,x_n`, one row per (snapshot, node).
/// Only every `stride`-th snapshot is written (the last one always is).
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, stride: usize, mut out: W) -> io::Result<()> {
    let metric = traj.metric();
    let n = metric.n();
    let grid = metric.grid();
    write!(out, "t,zeta")?;
    for k in 1..=n {
        write!(out, ",x_{k}")?;
    }
    writeln!(out)?;
    let stride = stride.max(1);
    let last = traj.len() - 1;
    for (k, x) in traj.snapshots().iter().enumerate() {
        if k % stride != 0 && k != last {
            continue;
        }
        let t = traj.time(k);
        for (i, z) in grid.nodes().enumerate() {
            write!(out, "{t:.16e},{z:.16e}")?;
            for c in 0..n {
                write!(out, ",{:.16e}", x[i * n + c])?;
            }
            writeln!(out)?;
        }
    }
    out.flush()
}

/// CSV `t,energy` for every snapshot.
pub fn write_energy_csv<W: Write>(traj: &Trajectory, mut out: W) -> io::Result<()> {
    writeln!(out, "t,energy")?;
    for (k, x) in traj.snapshots().iter().enumerate() {
        writeln!(out, "{:.16e},{:.16e}", traj.time(k), traj.metric().energy(x))?;
    }
    out.flush()
}
