//! Ranking lines in projection space and the unrolled projection axis.
//!
//! A polyline is built through projected items (in rank order), through
//! rating centroids, or through centroids of user-lassoed regions. Every
//! item is then dropped onto its nearest point on the polyline; the arc
//! length of that foot point is its position on the straightened axis and
//! the unsigned distance is its height.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::data::ItemId;
use crate::error::{Error, Result};
use crate::geometry::{centroid, point_in_polygon, Point};
use crate::projection::Projection;
use crate::rating::RatingPartition;
use crate::weights::Ranking;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolylineKind {
    Sequence,
    Rating,
    SelfDefined,
}

/// A polyline vertex. `label` is a rank for sequence lines, a rating index
/// for rating lines and a 1-based region index for self-defined lines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub point: Point,
    pub label: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolylineSource {
    pub weights_fingerprint: String,
    pub projection_fingerprint: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingPolyline {
    pub kind: PolylineKind,
    pub anchors: Vec<Anchor>,
    pub source: PolylineSource,
}

impl RatingPolyline {
    /// Consecutive anchors at the same point are merged, keeping the first.
    pub fn new(kind: PolylineKind, anchors: Vec<Anchor>, source: PolylineSource) -> Result<Self> {
        let mut merged: Vec<Anchor> = Vec::with_capacity(anchors.len());
        for a in anchors {
            if !a.point.is_finite() {
                return Err(Error::InvalidParameter("anchor coordinates must be finite".into()));
            }
            if merged.last().is_some_and(|last| last.point == a.point) {
                continue;
            }
            merged.push(a);
        }
        if merged.len() < 2 {
            return Err(Error::DegeneratePolyline);
        }
        Ok(Self { kind, anchors: merged, source })
    }

    pub fn segment_count(&self) -> usize {
        self.anchors.len() - 1
    }

    pub fn segment(&self, index: usize) -> (Point, Point) {
        (self.anchors[index].point, self.anchors[index + 1].point)
    }

    /// Arc length at each anchor; the last entry is the total length.
    pub fn cumulative_lengths(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(self.anchors.len());
        out.push(0.0);
        for w in self.anchors.windows(2) {
            acc += w[0].point.distance(w[1].point);
            out.push(acc);
        }
        out
    }

    pub fn length(&self) -> f64 {
        *self.cumulative_lengths().last().unwrap()
    }
}

fn source_of(projection: &Projection) -> PolylineSource {
    PolylineSource {
        weights_fingerprint: projection.weights_fingerprint.clone(),
        projection_fingerprint: projection.fingerprint(),
    }
}

/// Connects every projected item from rank 1 to rank N.
pub fn sequence_ranking_line(ranking: &Ranking, projection: &Projection) -> Result<RatingPolyline> {
    let index = projection.index();
    let anchors = ranking
        .entries()
        .iter()
        .map(|e| {
            let i = index.get(&e.id).ok_or_else(|| Error::UnknownItem(e.id.clone()))?;
            Ok(Anchor { point: projection.point(*i), label: e.rank })
        })
        .collect::<Result<Vec<_>>>()?;
    RatingPolyline::new(PolylineKind::Sequence, anchors, source_of(projection))
}

/// Connects the centroid of each rating, best rating first.
pub fn rating_line(partition: &RatingPartition, projection: &Projection) -> Result<RatingPolyline> {
    if partition.n_ratings < 2 {
        return Err(Error::InvalidParameter("a rating line needs at least 2 ratings".into()));
    }
    let index = projection.index();
    let mut members: Vec<Vec<Point>> = vec![Vec::new(); partition.n_ratings as usize];
    for a in &partition.ratings {
        let i = index.get(&a.id).ok_or_else(|| Error::UnknownItem(a.id.clone()))?;
        let slot = members
            .get_mut(a.rating as usize - 1)
            .ok_or_else(|| Error::InvalidParameter(format!("rating {} out of range", a.rating)))?;
        slot.push(projection.point(*i));
    }
    let anchors = members
        .iter()
        .enumerate()
        .map(|(r, pts)| {
            let label = r as u32 + 1;
            centroid(pts).map(|point| Anchor { point, label }).ok_or(Error::EmptyRating(label))
        })
        .collect::<Result<Vec<_>>>()?;
    RatingPolyline::new(PolylineKind::Rating, anchors, source_of(projection))
}

/// Connects the centroids of the items inside each lasso polygon, in the
/// order the regions were drawn. Region indices in errors are 0-based.
pub fn self_defined_rating_line(regions: &[Vec<Point>], projection: &Projection) -> Result<RatingPolyline> {
    let points = projection.points();
    let anchors = regions
        .iter()
        .enumerate()
        .map(|(r, polygon)| {
            let inside = points.iter().filter(|p| point_in_polygon(**p, polygon));
            centroid(inside).map(|point| Anchor { point, label: r as u32 + 1 }).ok_or(Error::EmptyRegion(r))
        })
        .collect::<Result<Vec<_>>>()?;
    RatingPolyline::new(PolylineKind::SelfDefined, anchors, source_of(projection))
}

/// Nearest point on a polyline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolylineFoot {
    pub segment_index: usize,
    pub t: f64,
    pub foot: Point,
    pub distance: f64,
    pub arc_position: f64,
}

/// Drops `point` onto the closest point of `polyline`. Equidistant segments
/// resolve to the lower index.
pub fn project_onto_polyline(point: Point, polyline: &RatingPolyline) -> PolylineFoot {
    let cumulative = polyline.cumulative_lengths();
    let mut best: Option<PolylineFoot> = None;
    for s in 0..polyline.segment_count() {
        let (a, b) = polyline.segment(s);
        let ab = b - a;
        let len_sq = ab.dot(ab);
        let t = if len_sq > 0.0 { ((point - a).dot(ab) / len_sq).clamp(0.0, 1.0) } else { 0.0 };
        let foot = a + ab * t;
        let distance = point.distance(foot);
        if best.is_none_or(|b| distance < b.distance) {
            best = Some(PolylineFoot {
                segment_index: s,
                t,
                foot,
                distance,
                arc_position: cumulative[s] + t * (cumulative[s + 1] - cumulative[s]),
            });
        }
    }
    best.expect("polyline has at least one segment")
}

/// Pair of anchor labels around an item's foot point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bracket {
    pub low: u32,
    pub high: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Consistency {
    Consistent,
    /// The projection places the item among better ratings than its own.
    Improved,
    /// The projection places the item among worse ratings than its own.
    Worsened,
}

impl Consistency {
    pub fn from_inverse_ordinal(value: i32) -> Self {
        match value.signum() {
            1 => Consistency::Improved,
            -1 => Consistency::Worsened,
            _ => Consistency::Consistent,
        }
    }
}

/// Signed number of whole ratings an item skips when it is re-inserted
/// between the bracket ratings.
///
/// An item of rating 4 landing between ratings 1 and 2 jumps over ratings 2
/// and 3, giving `+2`. An item of rating 1 landing between ratings 2 and 3
/// falls behind rating 2, giving `-1`. Ratings within the bracket give 0.
pub fn inverse_ordinal(item_rating: u32, bracket: Bracket) -> Result<i32> {
    if bracket.low < 1 || bracket.high <= bracket.low {
        return Err(Error::InvalidBracket { low: bracket.low, high: bracket.high });
    }
    Ok(if item_rating > bracket.high {
        (item_rating - bracket.high) as i32
    } else if item_rating < bracket.low {
        -((bracket.low - item_rating) as i32)
    } else {
        0
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisPlacement {
    pub id: ItemId,
    pub segment_index: usize,
    pub t: f64,
    pub arc_position: f64,
    pub distance: f64,
    pub bracket: Bracket,
    pub rating: u32,
    pub inverse_ordinal: i32,
    pub consistency: Consistency,
}

/// Places every projected item on the unrolled polyline.
///
/// A foot point exactly on an interior anchor takes the bracket of the
/// segment that starts there; the final anchor keeps its incoming segment.
pub fn build_axis(
    partition: &RatingPartition,
    polyline: &RatingPolyline,
    projection: &Projection,
) -> Result<Vec<AxisPlacement>> {
    if polyline.kind == PolylineKind::Sequence {
        return Err(Error::AxisRequiresRatingAnchors);
    }
    let ratings = partition.lookup();
    projection
        .coords
        .iter()
        .map(|c| {
            let rating = *ratings.get(&c.id).ok_or_else(|| Error::UnknownItem(c.id.clone()))?;
            let mut foot = project_onto_polyline(Point::new(c.x, c.y), polyline);
            if foot.t == 1.0 && foot.segment_index + 1 < polyline.segment_count() {
                foot.segment_index += 1;
                foot.t = 0.0;
            }
            let bracket = Bracket {
                low: polyline.anchors[foot.segment_index].label,
                high: polyline.anchors[foot.segment_index + 1].label,
            };
            let inverse = inverse_ordinal(rating, bracket)?;
            Ok(AxisPlacement {
                id: c.id.clone(),
                segment_index: foot.segment_index,
                t: foot.t,
                arc_position: foot.arc_position,
                distance: foot.distance,
                bracket,
                rating,
                inverse_ordinal: inverse,
                consistency: Consistency::from_inverse_ordinal(inverse),
            })
        })
        .collect()
}

/// Writes `id,arc_position,distance,bracket_low,bracket_high,inverse_ordinal`.
pub fn write_axis_csv<W: Write>(placements: &[AxisPlacement], writer: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(["id", "arc_position", "distance", "bracket_low", "bracket_high", "inverse_ordinal"])?;
    for p in placements {
        out.write_record([
            p.id.to_string(),
            p.arc_position.to_string(),
            p.distance.to_string(),
            p.bracket.low.to_string(),
            p.bracket.high.to_string(),
            p.inverse_ordinal.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projection::{ProjectedItem, ProjectionConfig};
    use crate::rating::RatingAssignment;

    fn source() -> PolylineSource {
        PolylineSource { weights_fingerprint: String::new(), projection_fingerprint: String::new() }
    }

    fn line(points: &[(f64, f64)], kind: PolylineKind) -> RatingPolyline {
        let anchors = points
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| Anchor { point: Point::new(x, y), label: i as u32 + 1 })
            .collect();
        RatingPolyline::new(kind, anchors, source()).unwrap()
    }

    fn projection(points: &[(&str, f64, f64)]) -> Projection {
        Projection {
            coords: points.iter().map(|&(id, x, y)| ProjectedItem { id: id.into(), x, y }).collect(),
            config: ProjectionConfig::pca(),
            weights_fingerprint: "w".into(),
            degenerate: false,
        }
    }

    fn partition(ratings: &[(&str, u32)], n: u32) -> RatingPartition {
        RatingPartition {
            n_ratings: n,
            split_points: (1..n).map(f64::from).collect(),
            ratings: ratings.iter().map(|&(id, rating)| RatingAssignment { id: id.into(), rating }).collect(),
        }
    }

    #[test]
    fn perpendicular_drop() {
        let pl = line(&[(0.0, 0.0), (10.0, 0.0)], PolylineKind::Rating);
        let f = project_onto_polyline(Point::new(3.0, 4.0), &pl);
        assert_eq!(f.segment_index, 0);
        assert!((f.t - 0.3).abs() < 1e-15);
        assert_eq!(f.foot, Point::new(3.0, 0.0));
        assert_eq!(f.distance, 4.0);
        assert!((f.arc_position - 3.0).abs() < 1e-15);
    }

    #[test]
    fn point_on_line_has_zero_distance() {
        let pl = line(&[(0.0, 0.0), (4.0, 0.0), (4.0, 3.0)], PolylineKind::Rating);
        let f = project_onto_polyline(Point::new(4.0, 1.0), &pl);
        assert_eq!(f.distance, 0.0);
        assert_eq!(f.arc_position, 5.0);
        assert_eq!(pl.length(), 7.0);
    }

    #[test]
    fn equidistant_segments_prefer_lower_index() {
        // (1, 1) is exactly 1 away from both the first and last segment.
        let pl = line(&[(0.0, 0.0), (2.0, 0.0), (2.0, 2.0), (0.0, 2.0)], PolylineKind::Rating);
        let f = project_onto_polyline(Point::new(1.0, 1.0), &pl);
        assert_eq!(f.segment_index, 0);
    }

    #[test]
    fn coincident_anchors_merge() {
        let pl = line(&[(0.0, 0.0), (0.0, 0.0), (1.0, 0.0)], PolylineKind::Rating);
        assert_eq!(pl.anchors.len(), 2);
        assert_eq!(pl.anchors[1].label, 3);
        let anchors = vec![Anchor { point: Point::new(1.0, 1.0), label: 1 }; 3];
        assert!(matches!(RatingPolyline::new(PolylineKind::Rating, anchors, source()), Err(Error::DegeneratePolyline)));
    }

    #[test]
    fn worked_inverse_ordinals() {
        assert_eq!(inverse_ordinal(4, Bracket { low: 1, high: 2 }).unwrap(), 2);
        assert_eq!(inverse_ordinal(1, Bracket { low: 2, high: 3 }).unwrap(), -1);
        assert_eq!(inverse_ordinal(2, Bracket { low: 2, high: 3 }).unwrap(), 0);
        assert_eq!(inverse_ordinal(3, Bracket { low: 2, high: 3 }).unwrap(), 0);
        assert!(inverse_ordinal(1, Bracket { low: 0, high: 1 }).is_err());
        assert!(inverse_ordinal(1, Bracket { low: 2, high: 2 }).is_err());
    }

    #[test]
    fn sequence_line_follows_rank_order() {
        let proj = projection(&[("a", 0.0, 0.0), ("b", 1.0, 0.0), ("c", 2.0, 1.0)]);
        let ranking = Ranking::from_scores(vec![("a".into(), 0.1), ("b".into(), 0.9), ("c".into(), 0.5)]);
        let pl = sequence_ranking_line(&ranking, &proj).unwrap();
        let pts: Vec<Point> = pl.anchors.iter().map(|a| a.point).collect();
        assert_eq!(pts, vec![Point::new(1.0, 0.0), Point::new(2.0, 1.0), Point::new(0.0, 0.0)]);
        assert_eq!(pl.segment_count(), 2);
    }

    #[test]
    fn rating_line_uses_centroids() {
        let proj = projection(&[("a", 0.0, 0.0), ("b", 2.0, 2.0), ("c", 5.0, 5.0)]);
        let part = partition(&[("a", 1), ("b", 1), ("c", 2)], 2);
        let pl = rating_line(&part, &proj).unwrap();
        assert_eq!(pl.anchors[0].point, Point::new(1.0, 1.0));
        assert_eq!(pl.anchors[1].point, Point::new(5.0, 5.0));
        let part = partition(&[("a", 1), ("b", 1), ("c", 1)], 2);
        assert!(matches!(rating_line(&part, &proj), Err(Error::EmptyRating(2))));
    }

    #[test]
    fn self_defined_regions() {
        let proj = projection(&[("a", 0.0, 0.0), ("b", 1.0, 0.0), ("c", 5.0, 5.0)]);
        let boxed = |x0: f64, y0: f64, x1: f64, y1: f64| {
            vec![Point::new(x0, y0), Point::new(x1, y0), Point::new(x1, y1), Point::new(x0, y1)]
        };
        // `b` sits on the right edge of the first box and still counts.
        let pl = self_defined_rating_line(&[boxed(-1.0, -1.0, 1.0, 1.0), boxed(4.0, 4.0, 6.0, 6.0)], &proj).unwrap();
        assert_eq!(pl.anchors[0].point, Point::new(0.5, 0.0));
        assert_eq!(pl.anchors[1].point, Point::new(5.0, 5.0));
        let err = self_defined_rating_line(&[boxed(-1.0, -1.0, 1.0, 1.0), boxed(10.0, 10.0, 11.0, 11.0)], &proj);
        assert!(matches!(err, Err(Error::EmptyRegion(1))));
    }

    #[test]
    fn axis_rejects_sequence_lines() {
        let proj = projection(&[("a", 0.0, 0.0), ("b", 1.0, 0.0), ("c", 2.0, 1.0)]);
        let pl = line(&[(0.0, 0.0), (1.0, 0.0)], PolylineKind::Sequence);
        let part = partition(&[("a", 1), ("b", 2), ("c", 2)], 2);
        assert!(matches!(build_axis(&part, &pl, &proj), Err(Error::AxisRequiresRatingAnchors)));
    }

    #[test]
    fn axis_brackets_and_anchor_rule() {
        // Rating anchors along the x axis at 0, 10, 20, 30.
        let pl = line(&[(0.0, 0.0), (10.0, 0.0), (20.0, 0.0), (30.0, 0.0)], PolylineKind::Rating);
        let proj = projection(&[("d2", 5.0, 3.0), ("d3", 15.0, -2.0), ("on_anchor", 10.0, 0.0), ("end", 35.0, 0.0)]);
        let part = partition(&[("d2", 4), ("d3", 1), ("on_anchor", 2), ("end", 4)], 4);
        let axis = build_axis(&part, &pl, &proj).unwrap();
        assert_eq!(axis[0].bracket, Bracket { low: 1, high: 2 });
        assert_eq!(axis[0].inverse_ordinal, 2);
        assert_eq!(axis[0].consistency, Consistency::Improved);
        assert_eq!(axis[1].bracket, Bracket { low: 2, high: 3 });
        assert_eq!(axis[1].inverse_ordinal, -1);
        assert_eq!(axis[1].consistency, Consistency::Worsened);
        assert_eq!(axis[2].bracket, Bracket { low: 2, high: 3 });
        assert_eq!(axis[2].arc_position, 10.0);
        assert_eq!(axis[2].consistency, Consistency::Consistent);
        assert_eq!(axis[3].bracket, Bracket { low: 3, high: 4 });
        assert_eq!(axis[3].distance, 5.0);
    }

    #[test]
    fn mirror_points_share_placement() {
        let pl = line(&[(0.0, 0.0), (10.0, 0.0), (10.0, 10.0)], PolylineKind::Rating);
        let proj = projection(&[("up", 3.0, 4.0), ("down", 3.0, -4.0)]);
        let part = partition(&[("up", 1), ("down", 1)], 3);
        let axis = build_axis(&part, &pl, &proj).unwrap();
        let strip =
            |p: &AxisPlacement| (p.segment_index, p.t, p.arc_position, p.distance, p.bracket, p.inverse_ordinal);
        assert_eq!(strip(&axis[0]), strip(&axis[1]));
    }

    #[test]
    fn axis_csv_header() {
        let mut buf = Vec::new();
        write_axis_csv(&[], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap().trim(),
            "id,arc_position,distance,bracket_low,bracket_high,inverse_ordinal"
        );
    }
}
