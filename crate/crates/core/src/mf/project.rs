use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::FactorModel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tag {
    User,
    High,
    Mid,
    Low,
}

impl Tag {
    pub fn name(self) -> &'static str {
        match self {
            Tag::User => "user",
            Tag::High => "high",
            Tag::Mid => "mid",
            Tag::Low => "low",
        }
    }
}

/// Top tenth of items by utility are `High`, bottom tenth `Low`, the rest
/// `Mid`. Each tenth has `ceil(n / 10)` items; with fewer than two tenths'
/// worth of items the high tag takes precedence. Ties rank by item index.
pub fn decile_tags(utilities: &[f64]) -> Vec<Tag> {
    let n = utilities.len();
    let size = n.div_ceil(10);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| utilities[b].total_cmp(&utilities[a]).then(a.cmp(&b)));
    let mut tags = vec![Tag::Mid; n];
    for &j in order.iter().take(size) {
        tags[j] = Tag::High;
    }
    let n_low = size.min(n - size.min(n));
    for &j in order.iter().rev().take(n_low) {
        tags[j] = Tag::Low;
    }
    tags
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectedPoint {
    pub x: f64,
    pub y: f64,
    pub kind: Tag,
    pub item: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub user: usize,
    pub points: Vec<ProjectedPoint>,
}

/// The user's factor vector followed by every item, tagged by the user's
/// utility deciles.
pub fn project_latent(model: &FactorModel, user: usize, utilities: &[f64]) -> Result<Projection> {
    if model.k != 2 {
        return Err(Error::invalid(format!("projection needs k = 2, model has k = {}", model.k)));
    }
    let Some(p) = model.p.get(user) else {
        return Err(Error::invalid(format!("user {user} outside the model")));
    };
    if utilities.len() != model.q.len() {
        return Err(Error::invalid(format!(
            "{} utilities for {} items",
            utilities.len(),
            model.q.len()
        )));
    }
    let mut points = vec![ProjectedPoint {
        x: p[0],
        y: p[1],
        kind: Tag::User,
        item: None,
    }];
    for (j, (q, tag)) in model.q.iter().zip(decile_tags(utilities)).enumerate() {
        points.push(ProjectedPoint {
            x: q[0],
            y: q[1],
            kind: tag,
            item: Some(j),
        });
    }
    Ok(Projection { user, points })
}

/// Mean user-item latent distance over the high and the low decile items
/// of every user, as `(high, low)`.
pub fn mean_decile_distances(model: &FactorModel, utilities: &[Vec<f64>]) -> (f64, f64) {
    let (mut hi, mut n_hi, mut lo, mut n_lo) = (0.0, 0usize, 0.0, 0usize);
    for (i, row) in utilities.iter().enumerate() {
        for (j, tag) in decile_tags(row).into_iter().enumerate() {
            match tag {
                Tag::High => {
                    hi += model.distance(i, j);
                    n_hi += 1;
                }
                Tag::Low => {
                    lo += model.distance(i, j);
                    n_lo += 1;
                }
                _ => {}
            }
        }
    }
    (hi / n_hi.max(1) as f64, lo / n_lo.max(1) as f64)
}

/// `x,y,kind,item_id` rows; the user row has an empty item id.
pub fn write_projection_csv<W: Write>(mut writer: W, projection: &Projection, item_ids: &[String]) -> Result<()> {
    writeln!(writer, "x,y,kind,item_id")?;
    for pt in &projection.points {
        let id = pt.item.map(|j| item_ids.get(j).cloned().unwrap_or_else(|| j.to_string()));
        writeln!(writer, "{},{},{},{}", pt.x, pt.y, pt.kind.name(), id.unwrap_or_default())?;
    }
    Ok(())
}

impl Projection {
    /// Standalone SVG scatter: user as a blue square, high items green,
    /// low items red, the rest grey.
    pub fn to_svg(&self, title: &str) -> String {
        const W: f64 = 480.0;
        const PAD: f64 = 40.0;
        let xs = self.points.iter().map(|p| p.x);
        let ys = self.points.iter().map(|p| p.y);
        let (x0, x1) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        let (y0, y1) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        let span = (x1 - x0).max(y1 - y0).max(1e-9);
        let sx = |x: f64| PAD + (x - x0) / span * (W - 2.0 * PAD);
        let sy = |y: f64| W - PAD - (y - y0) / span * (W - 2.0 * PAD);

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{W}" viewBox="0 0 {W} {W}">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="20" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
            W / 2.0,
            escape(title)
        );
        let _ = writeln!(
            s,
            r##"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="#999"/>"##,
            W - 2.0 * PAD,
            W - 2.0 * PAD
        );
        let mut ordered: Vec<&ProjectedPoint> = self.points.iter().filter(|p| p.kind != Tag::User).collect();
        ordered.sort_by_key(|p| match p.kind {
            Tag::Mid => 0,
            Tag::Low => 1,
            _ => 2,
        });
        for p in ordered {
            let color = match p.kind {
                Tag::High => "#2a9d3a",
                Tag::Low => "#d62728",
                _ => "#bbbbbb",
            };
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="{color}"><title>{} {}</title></circle>"#,
                sx(p.x),
                sy(p.y),
                p.kind.name(),
                p.item.unwrap_or_default()
            );
        }
        for p in self.points.iter().filter(|p| p.kind == Tag::User) {
            let _ = writeln!(
                s,
                r##"<rect x="{:.2}" y="{:.2}" width="10" height="10" fill="#1f5fbf"><title>user {}</title></rect>"##,
                sx(p.x) - 5.0,
                sy(p.y) - 5.0,
                self.user
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
