//! Exact Euclidean distance transforms measured between pixel centers.
//!
//! [`edt_exact`] is the production path (separable lower envelope of
//! parabolas, linear time). [`edt_brute`] scans every boundary pixel for
//! every pixel and exists as the reference it is tested against.

use std::ops::Deref;

use crate::error::{Error, Result};
use crate::field::{BinaryMask, Pixel, ScalarField};

/// Euclidean distance (pixels) from each pixel center to the nearest seed
/// pixel center. Zero exactly on the seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceField(ScalarField);

impl DistanceField {
    /// Wraps a field without checking that it is a distance map. Values must
    /// be non-negative.
    pub fn from_field_unchecked(field: ScalarField) -> Self {
        DistanceField(field)
    }

    pub fn field(&self) -> &ScalarField {
        &self.0
    }

    pub fn into_field(self) -> ScalarField {
        self.0
    }
}

impl Deref for DistanceField {
    type Target = ScalarField;
    fn deref(&self) -> &ScalarField {
        &self.0
    }
}

fn check_boundary(boundary: &[Pixel], width: usize, height: usize) -> Result<()> {
    if boundary.is_empty() {
        return Err(Error::NoBoundary);
    }
    if let Some(p) = boundary.iter().find(|p| p.u >= width || p.v >= height) {
        return Err(Error::InvalidParameter(format!(
            "boundary pixel ({}, {}) outside {width}x{height} frame",
            p.u, p.v
        )));
    }
    Ok(())
}

/// Exhaustive O(N * |boundary|) distance transform.
pub fn edt_brute(boundary: &[Pixel], width: usize, height: usize) -> Result<DistanceField> {
    check_boundary(boundary, width, height)?;
    let field = ScalarField::from_fn(width, height, |u, v| {
        let best = boundary
            .iter()
            .map(|b| {
                let du = u as i64 - b.u as i64;
                let dv = v as i64 - b.v as i64;
                du * du + dv * dv
            })
            .min()
            .expect("boundary is non-empty");
        (best as f64).sqrt()
    })?;
    Ok(DistanceField(field))
}

/// Separable exact transform: a per-column nearest-seed sweep followed by a
/// per-row lower envelope of parabolas.
pub fn edt_exact(boundary: &[Pixel], width: usize, height: usize) -> Result<DistanceField> {
    check_boundary(boundary, width, height)?;
    let mut seeds = vec![false; width * height];
    for p in boundary {
        seeds[p.v * width + p.u] = true;
    }
    let sq = squared_edt(&seeds, width, height);
    let field = ScalarField::new(width, height, sq.into_iter().map(f64::sqrt).collect())?;
    Ok(DistanceField(field))
}

/// Squared distances (exact integers stored as f64) to the nearest `true`
/// entry of `seeds`. At least one seed must be present.
pub(crate) fn squared_edt(seeds: &[bool], width: usize, height: usize) -> Vec<f64> {
    let inf = f64::INFINITY;
    // column pass: squared vertical distance to the nearest seed in the column
    let mut g = vec![inf; width * height];
    for u in 0..width {
        let mut last: Option<usize> = None;
        for v in 0..height {
            if seeds[v * width + u] {
                last = Some(v);
            }
            if let Some(l) = last {
                g[v * width + u] = (v - l) as f64;
            }
        }
        let mut next: Option<usize> = None;
        for v in (0..height).rev() {
            if seeds[v * width + u] {
                next = Some(v);
            }
            if let Some(n) = next {
                let d = (n - v) as f64;
                let i = v * width + u;
                if d < g[i] {
                    g[i] = d;
                }
            }
        }
        for v in 0..height {
            let i = v * width + u;
            g[i] *= g[i];
        }
    }

    // row pass
    let mut out = vec![0.0; width * height];
    let mut sites = Vec::with_capacity(width);
    let mut starts = Vec::with_capacity(width + 1);
    for v in 0..height {
        let row = &g[v * width..(v + 1) * width];
        lower_envelope(row, &mut sites, &mut starts);
        let mut k = 0;
        for (u, slot) in out[v * width..(v + 1) * width].iter_mut().enumerate() {
            let x = u as f64;
            while k + 1 < sites.len() && starts[k + 1] < x {
                k += 1;
            }
            let q = sites[k];
            let d = x - q as f64;
            *slot = d * d + row[q];
        }
    }
    out
}

/// Lower envelope of the parabolas `(x - q)^2 + f[q]` over finite `f[q]`.
/// `sites[k]` owns the interval starting at `starts[k]`.
fn lower_envelope(f: &[f64], sites: &mut Vec<usize>, starts: &mut Vec<f64>) {
    sites.clear();
    starts.clear();
    for (q, &fq) in f.iter().enumerate() {
        if !fq.is_finite() {
            continue;
        }
        let qf = q as f64;
        loop {
            let Some(&p) = sites.last() else {
                sites.push(q);
                starts.push(f64::NEG_INFINITY);
                break;
            };
            let pf = p as f64;
            let s = ((fq + qf * qf) - (f[p] + pf * pf)) / (2.0 * (qf - pf));
            if s <= *starts.last().unwrap() {
                sites.pop();
                starts.pop();
            } else {
                sites.push(q);
                starts.push(s);
                break;
            }
        }
    }
}

/// Unsigned distance to the inner boundary of `mask`.
pub fn mask_to_dt(mask: &BinaryMask) -> Result<DistanceField> {
    let count = mask.count();
    if count == 0 {
        return Err(Error::EmptyMask);
    }
    if count == mask.bits().len() {
        return Err(Error::TrivialMask);
    }
    edt_exact(&mask.boundary_pixels(), mask.width(), mask.height())
}

/// Distance from every pixel center to the nearest background pixel center,
/// where everything outside the frame counts as background. Zero on the
/// background itself.
pub fn interior_distance(mask: &BinaryMask) -> Result<DistanceField> {
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    let (w, h) = mask.dims();
    let (pw, ph) = (w + 2, h + 2);
    let seeds: Vec<bool> = (0..ph)
        .flat_map(|v| (0..pw).map(move |u| (u, v)))
        .map(|(u, v)| {
            u == 0 || v == 0 || u == pw - 1 || v == ph - 1 || !mask.get(u - 1, v - 1)
        })
        .collect();
    let sq = squared_edt(&seeds, pw, ph);
    let field = ScalarField::from_fn(w, h, |u, v| sq[(v + 1) * pw + u + 1].sqrt())?;
    Ok(DistanceField(field))
}
