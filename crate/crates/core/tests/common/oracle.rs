//! Straight-loop reference implementations, written against the formulas
//! rather than the library code. Images are `[channel][row][col]` vectors.

#![allow(dead_code)]

pub type Grid = Vec<Vec<Vec<f64>>>;

pub fn from_planar(data: &[f64], h: usize, w: usize, c: usize) -> Grid {
    (0..c).map(|ch| (0..h).map(|i| (0..w).map(|j| data[ch * h * w + i * w + j]).collect()).collect()).collect()
}

pub fn to_planar(g: &Grid) -> Vec<f64> {
    g.iter().flat_map(|p| p.iter().flat_map(|r| r.iter().copied())).collect()
}

fn at(p: &[Vec<f64>], i: isize, j: isize) -> f64 {
    let h = p.len() as isize;
    let w = p[0].len() as isize;
    p[i.clamp(0, h - 1) as usize][j.clamp(0, w - 1) as usize]
}

pub fn laplacian(g: &Grid) -> Grid {
    g.iter()
        .map(|p| {
            (0..p.len() as isize)
                .map(|i| {
                    (0..p[0].len() as isize)
                        .map(|j| {
                            let c = at(p, i, j);
                            (at(p, i + 1, j) - 2.0 * c + at(p, i - 1, j))
                                + (at(p, i, j + 1) - 2.0 * c + at(p, i, j - 1))
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

pub fn gaussian_smooth(g: &Grid, sigma: f64) -> Grid {
    let r = (3.0 * sigma).ceil() as isize;
    let mut weights = Vec::new();
    let mut total = 0.0;
    for dy in -r..=r {
        for dx in -r..=r {
            let w = (-((dx * dx + dy * dy) as f64) / (2.0 * sigma * sigma)).exp();
            weights.push((dy, dx, w));
            total += w;
        }
    }
    g.iter()
        .map(|p| {
            (0..p.len() as isize)
                .map(|i| {
                    (0..p[0].len() as isize)
                        .map(|j| weights.iter().map(|&(dy, dx, w)| w / total * at(p, i + dy, j + dx)).sum())
                        .collect()
                })
                .collect()
        })
        .collect()
}

pub fn coefficient(us: &Grid, lap: &Grid, k: f64, alpha: f64) -> Grid {
    let m = us.iter().flatten().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    us.iter()
        .zip(lap)
        .map(|(p, l)| {
            p.iter()
                .zip(l)
                .map(|(row, lrow)| {
                    row.iter()
                        .zip(lrow)
                        .map(|(&u, &d)| {
                            if m == 0.0 {
                                return 0.0;
                            }
                            let first = 2.0 * u.abs().powf(alpha) / (m.powf(alpha) + u.abs().powf(alpha));
                            first / (1.0 + (d.abs() / k).powi(2))
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

pub struct Params {
    pub lambda: f64,
    pub lambda_f: f64,
    pub k: f64,
    pub alpha: f64,
    pub xi: f64,
    pub v: f64,
    pub tau: f64,
    pub eps: f64,
}

impl Default for Params {
    fn default() -> Self {
        Params { lambda: 1.5, lambda_f: 1.5, k: 2.0, alpha: 2.0, xi: 2.0, v: 1.0, tau: 0.05, eps: 1e-12 }
    }
}

/// One explicit update written exactly as the discretized equation, plus
/// the relative change it produces.
pub fn step(u: &Grid, u_prev: &Grid, guide: &Grid, t: &[Vec<f64>], p: &Params) -> (Grid, f64) {
    let us = gaussian_smooth(u, p.xi);
    let g = coefficient(&us, &laplacian(&us), p.k, p.alpha);
    let lap_u = laplacian(u);
    let inner: Grid = g
        .iter()
        .zip(&lap_u)
        .map(|(gp, lp)| {
            gp.iter().zip(lp).map(|(gr, lr)| gr.iter().zip(lr).map(|(a, b)| p.v * a * b).collect()).collect()
        })
        .collect();
    let flux = laplacian(&inner);

    let mut next = u.clone();
    let (mut diff, mut norm) = (0.0, 0.0);
    for c in 0..u.len() {
        for i in 0..u[0].len() {
            for j in 0..u[0][0].len() {
                let fid = p.lambda_f * t[i][j] * t[i][j] * (u[c][i][j] - guide[c][i][j]);
                let raw =
                    ((2.0 + p.lambda * p.tau) * u[c][i][j] - u_prev[c][i][j] - p.tau * p.tau * (flux[c][i][j] + fid))
                        / (1.0 + p.lambda * p.tau);
                next[c][i][j] = raw.clamp(0.0, 1.0);
                diff += (next[c][i][j] - u[c][i][j]).powi(2);
                norm += u[c][i][j].powi(2);
            }
        }
    }
    let rel = diff.sqrt() / (norm.sqrt() + p.eps);
    (next, rel)
}
