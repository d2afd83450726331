use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{bipolar_from_angles, Point5};
use crate::error::{domain, Result};
use crate::geodesic::GeodesicProfile;
use crate::scalar::{sq, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    /// `alpha,t,x,y,z,u,v` rows; lossless.
    Csv,
    /// `v` lines projected onto the three coordinates of largest variance.
    Obj,
}

/// Vertex grid of the bipolar surface on `[0, 2π) × [0, t0)`, stored
/// row-major in `t` then `α`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceMesh<T> {
    pub n_alpha: usize,
    pub n_t: usize,
    pub vertices: Vec<Point5<T>>,
    pub params: Vec<(T, T)>,
}

impl<T: Real> SurfaceMesh<T> {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex(&self, i_alpha: usize, j_t: usize) -> &Point5<T> {
        &self.vertices[j_t * self.n_alpha + i_alpha]
    }

    /// Indices of the three coordinates with the largest sample variance,
    /// in ascending order.
    pub fn projection_axes(&self) -> [usize; 3] {
        let n = T::from_usize_lossy(self.vertices.len().max(1));
        let mut var: Vec<(usize, T)> = (0..5)
            .map(|k| {
                let mean = self.vertices.iter().map(|v| v[k]).sum::<T>() / n;
                (k, self.vertices.iter().map(|v| sq(v[k] - mean)).sum::<T>() / n)
            })
            .collect();
        var.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal).then(a.0.cmp(&b.0)));
        let mut axes = [var[0].0, var[1].0, var[2].0];
        axes.sort_unstable();
        axes
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "alpha,t,x,y,z,u,v")?;
        for ((al, t), v) in self.params.iter().zip(&self.vertices) {
            writeln!(out, "{},{},{},{},{},{},{}", al, t, v[0], v[1], v[2], v[3], v[4])?;
        }
        Ok(())
    }

    pub fn write_obj<W: Write>(&self, mut out: W) -> Result<()> {
        let axes = self.projection_axes();
        writeln!(out, "# bipolar surface, {} x {} vertices, axes {:?} of (x,y,z,u,v)", self.n_alpha, self.n_t, axes)?;
        for v in &self.vertices {
            writeln!(out, "v {} {} {}", v[axes[0]], v[axes[1]], v[axes[2]])?;
        }
        Ok(())
    }

    /// Reads a mesh written by [`SurfaceMesh::write_csv`]; the grid shape is
    /// recovered from the number of distinct `α` values in the first row.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines.next().transpose()?;
        if header.as_deref().map(str::trim) != Some("alpha,t,x,y,z,u,v") {
            return Err(domain("mesh", "mesh CSV must start with header alpha,t,x,y,z,u,v"));
        }
        let mut params = Vec::new();
        let mut vertices = Vec::new();
        for (k, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let vals: Vec<f64> = line
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| domain("mesh", format!("mesh CSV row {}: {e}", k + 2)))?;
            if vals.len() != 7 {
                return Err(domain("mesh", format!("mesh CSV row {}: expected 7 fields, got {}", k + 2, vals.len())));
            }
            params.push((T::lit(vals[0]), T::lit(vals[1])));
            vertices.push([T::lit(vals[2]), T::lit(vals[3]), T::lit(vals[4]), T::lit(vals[5]), T::lit(vals[6])]);
        }
        let t_first = params.first().map(|p| p.1);
        let n_alpha = params.iter().take_while(|p| Some(p.1) == t_first).count();
        let n_t = params.len().checked_div(n_alpha).unwrap_or(0);
        if n_alpha * n_t != params.len() {
            return Err(domain("mesh", "mesh CSV rows do not form a rectangular grid"));
        }
        Ok(Self { n_alpha, n_t, vertices, params })
    }
}

/// Samples the bipolar surface on an `n_alpha × n_t` grid.
pub fn mesh<T: Real>(profile: &GeodesicProfile<T>, n_alpha: usize, n_t: usize) -> Result<SurfaceMesh<T>> {
    if n_alpha < 8 || n_t < 8 {
        return Err(domain("mesh", format!("mesh resolution must be at least 8 x 8, got {n_alpha} x {n_t}")));
    }
    let t0 = profile.t0();
    let two_pi = T::two() * T::PI();
    let mut vertices = Vec::with_capacity(n_alpha * n_t);
    let mut params = Vec::with_capacity(n_alpha * n_t);
    for j in 0..n_t {
        let t = t0 * T::from_usize_lossy(j) / T::from_usize_lossy(n_t);
        let st = profile.bipolar.state(t);
        for i in 0..n_alpha {
            let al = two_pi * T::from_usize_lossy(i) / T::from_usize_lossy(n_alpha);
            vertices.push(bipolar_from_angles(al, st.phi, st.theta));
            params.push((al, t));
        }
    }
    Ok(SurfaceMesh { n_alpha, n_t, vertices, params })
}

/// Samples the surface and writes it to `path`.
pub fn export_mesh<T: Real>(
    profile: &GeodesicProfile<T>,
    n_alpha: usize,
    n_t: usize,
    format: MeshFormat,
    path: &Path,
) -> Result<SurfaceMesh<T>> {
    let m = mesh(profile, n_alpha, n_t)?;
    let mut out = BufWriter::new(File::create(path)?);
    match format {
        MeshFormat::Csv => m.write_csv(&mut out)?,
        MeshFormat::Obj => m.write_obj(&mut out)?,
    }
    out.flush()?;
    Ok(m)
}

/// Convenience wrapper around [`SurfaceMesh::read_csv`] for files.
pub fn read_mesh_csv<T: Real>(path: &Path) -> Result<SurfaceMesh<T>> {
    SurfaceMesh::read_csv(BufReader::new(File::open(path)?))
}
