//! CSV and JSON artifacts, written atomically.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::pmp::Trajectory;
use crate::reduction::ReducedTrajectory;
use crate::scalar::Real;

/// Formats with 17 significant digits.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

fn push_row(out: &mut String, values: impl IntoIterator<Item = f64>) {
    let mut first = true;
    for v in values {
        if !first {
            out.push(',');
        }
        first = false;
        out.push_str(&fmt_num(v));
    }
    out.push('\n');
}

fn header(names: &[(&str, usize)]) -> String {
    let mut cols = Vec::new();
    for (name, n) in names {
        if *n == 0 && ["t", "H", "Hbar"].contains(name) {
            cols.push(name.to_string());
        }
        for i in 1..=*n {
            cols.push(format!("{name}_{i}"));
        }
    }
    let mut line = cols.join(",");
    line.push('\n');
    line
}

/// `t, x_1..x_m, lambda_1..lambda_m, u_1..u_d, H, J_1..J_k`.
pub fn full_trajectory_csv<T: Real>(traj: &Trajectory<T>) -> String {
    let m = traj.states.first().map(|s| s.x.len()).unwrap_or(0);
    let d = traj.controls.first().map(|u| u.len()).unwrap_or(0);
    let k = traj.momentum.first().map(|j| j.len()).unwrap_or(0);
    let mut out = header(&[
        ("t", 0),
        ("x", m),
        ("lambda", m),
        ("u", d),
        ("H", 0),
        ("J", k),
    ]);
    for i in 0..traj.times.len() {
        let s = &traj.states[i];
        let row = std::iter::once(traj.times[i])
            .chain(s.x.iter().copied())
            .chain(s.lambda.iter().copied())
            .chain(traj.controls[i].iter().copied())
            .chain(std::iter::once(traj.hamiltonian[i]))
            .chain(
                traj.momentum
                    .get(i)
                    .into_iter()
                    .flat_map(|j| j.iter().copied()),
            )
            .map(|v| v.as_f64());
        push_row(&mut out, row);
    }
    out
}

/// `t, xbar_*, lambdabar_*, mutilde_*, xitilde_*, Hbar`, plus `g_*` when `with_group`.
pub fn reduced_trajectory_csv<T: Real>(rt: &ReducedTrajectory<T>, with_group: bool) -> String {
    let s = rt.states.first().map(|st| st.xbar.len()).unwrap_or(0);
    let k = rt.states.first().map(|st| st.mutilde.len()).unwrap_or(0);
    let g = if with_group { k } else { 0 };
    let mut out = header(&[
        ("t", 0),
        ("xbar", s),
        ("lambdabar", s),
        ("mutilde", k),
        ("xitilde", k),
        ("Hbar", 0),
        ("g", g),
    ]);
    for i in 0..rt.times.len() {
        let st = &rt.states[i];
        let f = &rt.fields[i];
        let group: &[T] = if with_group { st.g.as_slice() } else { &[] };
        let row = std::iter::once(rt.times[i])
            .chain(st.xbar.iter().copied())
            .chain(st.lambdabar.iter().copied())
            .chain(st.mutilde.iter().copied())
            .chain(f.xitilde.iter().copied())
            .chain(std::iter::once(f.hamiltonian))
            .chain(group.iter().copied())
            .map(|v| v.as_f64());
        push_row(&mut out, row);
    }
    out
}

/// Pretty JSON with a trailing newline.
pub fn to_json<S: Serialize>(value: &S) -> std::io::Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
    s.push('\n');
    Ok(s)
}

/// Writes `contents` to a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path
        .file_name()
        .and_then(|n| n.to_str())
        .unwrap_or("output");
    let mut tmp_name = String::new();
    let _ = write!(tmp_name, ".{name}.tmp-{}", std::process::id());
    let tmp = dir.join(tmp_name);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}
