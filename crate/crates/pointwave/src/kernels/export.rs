//! CSV output for kernels and gain traces, in global coordinates.

use std::io::Write;

use crate::control::GainSet;
use crate::error::Result;

use super::KernelSet;

/// Columns `x,y,k,s,sub`. Subdomain 2 is written back in the original
/// orientation: `k₂(x,y) = −K̂(1−x, 1−y)` on `ξ ≤ x ≤ y ≤ 1`.
pub fn write_kernels_csv<W: Write>(ks: &KernelSet, mut out: W) -> Result<()> {
    writeln!(out, "x,y,k,s,sub")?;
    let a = &ks.sub1;
    for i in 0..a.n() {
        let x = a.k().node(i);
        for j in 0..=i {
            let y = a.k().node(j);
            writeln!(out, "{x},{y},{},{},1", a.k().get(i, j), a.s().get(i, j))?;
        }
    }
    let b = &ks.sub2;
    for i in 0..b.n() {
        let x = 1.0 - b.k().node(i);
        for j in 0..=i {
            let y = 1.0 - b.k().node(j);
            writeln!(out, "{x},{y},{},{},2", -b.k().get(i, j), -b.s().get(i, j))?;
        }
    }
    Ok(())
}

/// Columns `y,gk,gs,sub`, preceded by a `#` comment with the scalar gains.
pub fn write_gains_csv<W: Write>(g: &GainSet, mut out: W) -> Result<()> {
    writeln!(
        out,
        "# c0={},c_alpha={},c_v={},h1_xi={}",
        g.c0, g.c_alpha, g.c_v, g.h1_xi
    )?;
    writeln!(out, "y,gk,gs,sub")?;
    for (sub, (gk, gs)) in [(1, (&g.gk1, &g.gs1)), (2, (&g.gk2, &g.gs2))] {
        for (i, y) in gk.grid().nodes().into_iter().enumerate() {
            writeln!(out, "{y},{},{},{sub}", gk.values()[i], gs.values()[i])?;
        }
    }
    Ok(())
}
