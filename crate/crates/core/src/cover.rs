//! Finite covers with exact partitions of unity, their nerves and colorings.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::exactpp::{bspline_on, reduce_mod, smoothstep, AxisKind, Interval, PPFunction};
use crate::forms::{Domain, Role};
use crate::rational::Rational;

/// Box (or arc product) over the manifold axes, in manifold-axis order.
pub type Region = Vec<Interval>;

/// Intersection of two closed arcs/intervals with nonempty interior.
///
/// On a circle the result is normalized so that `lo` lies in `[0, period)`;
/// an intersection made of two arcs is rejected.
pub fn intersect_axis(kind: &AxisKind, a: &Interval, b: &Interval) -> Result<Option<Interval>> {
    match kind {
        AxisKind::Line => {
            let lo = if a.lo > b.lo { &a.lo } else { &b.lo };
            let hi = if a.hi < b.hi { &a.hi } else { &b.hi };
            Ok(if lo < hi { Some(Interval::new(lo.clone(), hi.clone())) } else { None })
        }
        AxisKind::Circle { period } => {
            let mut pieces = Vec::new();
            for k in -1i64..=1 {
                let s = period * &Rational::from_int(k);
                let blo = &b.lo + &s;
                let bhi = &b.hi + &s;
                let lo = if a.lo > blo { a.lo.clone() } else { blo };
                let hi = if a.hi < bhi { a.hi.clone() } else { bhi };
                if lo < hi {
                    pieces.push(Interval::new(lo, hi));
                }
            }
            match pieces.len() {
                0 => Ok(None),
                1 => Ok(Some(normalize_arc(pieces.pop().unwrap(), period))),
                _ => Err(Error::WrappedIntersection(format!(
                    "arcs [{}, {}] and [{}, {}] meet in {} pieces",
                    a.lo,
                    a.hi,
                    b.lo,
                    b.hi,
                    pieces.len()
                ))),
            }
        }
    }
}

/// True if the closed sets meet (touching counts).
pub fn closed_sets_meet(kind: &AxisKind, a: &Interval, b: &Interval) -> bool {
    match kind {
        AxisKind::Line => a.lo <= b.hi && b.lo <= a.hi,
        AxisKind::Circle { period } => (-1i64..=1).any(|k| {
            let s = period * &Rational::from_int(k);
            a.lo <= &b.hi + &s && &b.lo + &s <= a.hi
        }),
    }
}

fn normalize_arc(iv: Interval, period: &Rational) -> Interval {
    let lo = reduce_mod(&iv.lo, period);
    let shift = &lo - &iv.lo;
    Interval::new(lo, &iv.hi + &shift)
}

fn interior_contains(kind: &AxisKind, iv: &Interval, x: &Rational) -> bool {
    match kind {
        AxisKind::Line => &iv.lo < x && x < &iv.hi,
        AxisKind::Circle { period } => {
            let y = reduce_mod(x, period);
            (iv.lo < y && y < iv.hi) || (iv.lo < (&y + period) && (&y + period) < iv.hi)
        }
    }
}

/// Finite cover of a domain's manifold axes with an exact partition of unity.
#[derive(Clone, Debug)]
pub struct Cover {
    domain: Arc<Domain>,
    charts: Vec<Region>,
    pou: Vec<PPFunction>,
}

/// One axis worth of charts: support interval and univariate bump.
struct AxisFamily {
    charts: Vec<Interval>,
    bumps: Vec<PPFunction>,
}

fn bspline_axis(kind: &AxisKind, extent: &Interval, degree: u32, res: usize) -> Result<AxisFamily> {
    if res == 0 {
        return Err(Error::InvalidCover("resolution must be positive".into()));
    }
    let h = extent.len() / Rational::from_int(res as i64);
    let d = degree as i64;
    let mut charts = Vec::new();
    let mut bumps = Vec::new();
    match kind {
        AxisKind::Line => {
            for k in -d..res as i64 {
                let lo = &extent.lo + &(&h * &Rational::from_int(k));
                let hi = &lo + &(&h * &Rational::from_int(d + 1));
                bumps.push(bspline_on(degree, &lo, &hi)?);
                charts.push(Interval::new(lo, hi));
            }
        }
        AxisKind::Circle { period } => {
            // two translates j cells apart meet on both sides unless res >= 2d + 1
            let need = (d + 2).max(2 * d + 1);
            if (res as i64) < need {
                return Err(Error::InvalidCover(format!(
                    "circle resolution {} < {}: a chart or an intersection would wrap around",
                    res, need
                )));
            }
            for k in 0..res as i64 {
                let lo = &h * &Rational::from_int(k);
                let hi = &lo + &(&h * &Rational::from_int(d + 1));
                bumps.push(bspline_on(degree, &lo, &hi)?.periodize(0, period)?);
                charts.push(Interval::new(lo, hi));
            }
        }
    }
    Ok(AxisFamily { charts, bumps })
}

fn plateau_axis(kind: &AxisKind, extent: &Interval, step_degree: u32, res: usize) -> Result<AxisFamily> {
    if res == 0 {
        return Err(Error::InvalidCover("resolution must be positive".into()));
    }
    let h = extent.len() / Rational::from_int(res as i64);
    let g = &h / &Rational::from_int(4);
    let step = |c: &Rational| smoothstep(step_degree, &(c - &g), &(c + &g));
    let mut charts = Vec::new();
    let mut bumps = Vec::new();
    match kind {
        AxisKind::Line => {
            // steps at lo - g, interior cell walls, hi + g: the telescoping sum is 1 on the core
            let mut walls = vec![&extent.lo - &g];
            for k in 1..res as i64 {
                walls.push(&extent.lo + &(&h * &Rational::from_int(k)));
            }
            walls.push(&extent.hi + &g);
            for i in 0..res {
                let up = step(&walls[i])?;
                let down = step(&walls[i + 1])?;
                bumps.push(up.sub(&down)?);
                charts.push(Interval::new(&walls[i] - &g, &walls[i + 1] + &g));
            }
        }
        AxisKind::Circle { period } => {
            if res < 3 {
                return Err(Error::InvalidCover(format!(
                    "circle resolution {} < 3: neighbouring charts would meet in two arcs",
                    res
                )));
            }
            for i in 0..res as i64 {
                let a = &h * &Rational::from_int(i);
                let b = &a + &h;
                let bump = step(&a)?.sub(&step(&b)?)?;
                bumps.push(bump.periodize(0, period)?);
                charts.push(normalize_arc(Interval::new(&a - &g, &b + &g), period));
            }
        }
    }
    Ok(AxisFamily { charts, bumps })
}

impl Cover {
    /// Tensor-product B-spline cover: charts are the supports of the cardinal
    /// translates, which are themselves the partition of unity.
    pub fn bspline(domain: &Arc<Domain>, degree: u32, resolution: &[usize]) -> Result<Cover> {
        Cover::tensor(domain, resolution, |k, e, r| bspline_axis(k, e, degree, r))
    }

    /// Tensor-product cover by telescoping smooth steps: `rho_i = E_i - E_{i+1}`
    /// with `C^{step_degree}` steps. At most two charts overlap per axis.
    pub fn plateau(domain: &Arc<Domain>, step_degree: u32, resolution: &[usize]) -> Result<Cover> {
        Cover::tensor(domain, resolution, |k, e, r| plateau_axis(k, e, step_degree, r))
    }

    fn tensor(
        domain: &Arc<Domain>,
        resolution: &[usize],
        family: impl Fn(&AxisKind, &Interval, usize) -> Result<AxisFamily>,
    ) -> Result<Cover> {
        let man = domain.manifold_axes();
        let res: Vec<usize> = match resolution.len() {
            1 => vec![resolution[0]; man.len()],
            l if l == man.len() => resolution.to_vec(),
            l => return Err(Error::InvalidCover(format!("{} resolutions given for {} manifold axes", l, man.len()))),
        };
        let fams: Vec<AxisFamily> = man
            .iter()
            .zip(&res)
            .map(|(&a, &r)| family(&domain.axes()[a].kind, &domain.axes()[a].extent, r))
            .collect::<Result<_>>()?;
        let mut charts = Vec::new();
        let mut pou = Vec::new();
        let counts: Vec<usize> = fams.iter().map(|f| f.charts.len()).collect();
        let total: usize = counts.iter().product();
        for flat in 0..total {
            let mut idx = vec![0usize; fams.len()];
            let mut r = flat;
            for k in (0..fams.len()).rev() {
                idx[k] = r % counts[k];
                r /= counts[k];
            }
            let region: Region = idx.iter().enumerate().map(|(k, &i)| fams[k].charts[i].clone()).collect();
            let mut mi = 0;
            let factors: Vec<PPFunction> = domain
                .axes()
                .iter()
                .map(|ax| match ax.role {
                    Role::Manifold => {
                        let f = fams[mi].bumps[idx[mi]].clone();
                        mi += 1;
                        f
                    }
                    Role::Parameter => PPFunction::constant_on(core::slice::from_ref(&ax.kind), Rational::one()),
                })
                .collect();
            charts.push(region);
            pou.push(PPFunction::tensor(&factors));
        }
        let cover = Cover { domain: domain.clone(), charts, pou };
        cover.validate()?;
        Ok(cover)
    }

    /// Cover from explicit charts and partition of unity, validated exactly.
    pub fn from_parts(domain: &Arc<Domain>, charts: Vec<Region>, pou: Vec<PPFunction>) -> Result<Cover> {
        if charts.len() != pou.len() || charts.is_empty() {
            return Err(Error::InvalidCover(format!("{} charts but {} functions", charts.len(), pou.len())));
        }
        let n = domain.n();
        let man = domain.manifold_axes();
        let mut norm = Vec::with_capacity(charts.len());
        for (i, c) in charts.into_iter().enumerate() {
            if c.len() != n {
                return Err(Error::InvalidCover(format!("chart {} has {} intervals, need {}", i, c.len(), n)));
            }
            let mut r = Vec::with_capacity(n);
            for (k, iv) in c.into_iter().enumerate() {
                let kind = &domain.axes()[man[k]].kind;
                if iv.lo >= iv.hi {
                    return Err(Error::InvalidCover(format!("chart {} is empty on axis {}", i, man[k])));
                }
                if let AxisKind::Circle { period } = kind {
                    if &iv.len() >= period {
                        return Err(Error::InvalidCover(format!("chart {} wraps around axis {}", i, man[k])));
                    }
                    r.push(normalize_arc(iv, period));
                } else {
                    r.push(iv);
                }
            }
            norm.push(r);
        }
        let cover = Cover { domain: domain.clone(), charts: norm, pou };
        cover.validate()?;
        Ok(cover)
    }

    /// Checks supports, parameter independence and `sum rho = 1` on the core.
    pub fn validate(&self) -> Result<()> {
        let kinds = self.domain.kinds();
        for (i, (c, rho)) in self.charts.iter().zip(&self.pou).enumerate() {
            if rho.kinds() != kinds {
                return Err(Error::InvalidCover(format!("partition function {} has the wrong axes", i)));
            }
            if !rho.vanishes_outside(&self.full_region(c)) {
                return Err(Error::InvalidCover(format!("partition function {} leaves its chart", i)));
            }
            for a in self.domain.parameter_axes() {
                if rho.drop_constant_axis(a).is_err() {
                    return Err(Error::InvalidCover(format!("partition function {} depends on a parameter", i)));
                }
            }
        }
        let chi = self.domain.core_indicator();
        let s = self.pou_sum()?;
        if !s.mul(&chi)?.equals(&chi) {
            return Err(Error::InvalidCover("partition of unity does not sum to 1 on the domain".into()));
        }
        Ok(())
    }

    pub fn pou_sum(&self) -> Result<PPFunction> {
        let mut s = self.domain.zero_fn();
        for r in &self.pou {
            s = s.add(r)?;
        }
        Ok(s)
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.charts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.charts.is_empty()
    }

    pub fn charts(&self) -> &[Region] {
        &self.charts
    }

    pub fn pou(&self) -> &[PPFunction] {
        &self.pou
    }

    /// Region over manifold axes, widened to all axes (`None` on parameters).
    pub fn full_region(&self, r: &Region) -> Vec<Option<Interval>> {
        let mut out = vec![None; self.domain.dim()];
        for (k, a) in self.domain.manifold_axes().into_iter().enumerate() {
            out[a] = Some(r[k].clone());
        }
        out
    }

    fn manifold_kinds(&self) -> Vec<AxisKind> {
        self.domain.manifold_axes().into_iter().map(|a| self.domain.axes()[a].kind.clone()).collect()
    }

    /// Greedy coloring of the chart intersection graph (closed supports).
    pub fn coloring(&self) -> Coloring {
        color_regions(&self.manifold_kinds(), &self.charts)
    }
}

/// Ordered simplex of the nerve with its intersection region.
#[derive(Clone, Debug)]
pub struct Simplex {
    pub vertices: Vec<usize>,
    pub region: Region,
}

/// Nerve of a cover, enumerated up to a level bound.
#[derive(Clone, Debug)]
pub struct Nerve {
    kinds: Vec<AxisKind>,
    levels: Vec<Vec<Simplex>>,
    index: Vec<BTreeMap<Vec<usize>, usize>>,
    /// `faces[p][s][i]`: id at level `p - 1` of the face omitting vertex `i`.
    faces: Vec<Vec<Vec<usize>>>,
    /// `cofaces[p][s]`: `(id at level p + 1, position of the new vertex)`.
    cofaces: Vec<Vec<Vec<(usize, usize)>>>,
    depth: usize,
}

impl Nerve {
    /// Nerve of a cover with all levels `p <= max_level`.
    pub fn of_cover(cover: &Cover, max_level: usize) -> Result<Nerve> {
        Nerve::from_regions(&cover.manifold_kinds(), cover.charts(), max_level)
    }

    /// Nerve of an arbitrary list of closed boxes (intersections need interior).
    pub fn from_regions(kinds: &[AxisKind], charts: &[Region], max_level: usize) -> Result<Nerve> {
        let mut levels: Vec<Vec<Simplex>> = Vec::new();
        let mut index: Vec<BTreeMap<Vec<usize>, usize>> = Vec::new();
        let mut lvl0 = Vec::new();
        let mut idx0 = BTreeMap::new();
        for (i, c) in charts.iter().enumerate() {
            if c.len() != kinds.len() {
                return Err(Error::InvalidCover(format!("chart {} has the wrong number of intervals", i)));
            }
            idx0.insert(vec![i], lvl0.len());
            lvl0.push(Simplex { vertices: vec![i], region: c.clone() });
        }
        levels.push(lvl0);
        index.push(idx0);
        while levels.len() <= max_level {
            let prev = levels.last().unwrap();
            let mut next = Vec::new();
            let mut idx = BTreeMap::new();
            for s in prev {
                let last = *s.vertices.last().unwrap();
                'cand: for (j, c) in charts.iter().enumerate().skip(last + 1) {
                    let mut region = Vec::with_capacity(kinds.len());
                    for (k, kind) in kinds.iter().enumerate() {
                        match intersect_axis(kind, &s.region[k], &c[k])? {
                            Some(iv) => region.push(iv),
                            None => continue 'cand,
                        }
                    }
                    let mut v = s.vertices.clone();
                    v.push(j);
                    idx.insert(v.clone(), next.len());
                    next.push(Simplex { vertices: v, region });
                }
            }
            if next.is_empty() {
                break;
            }
            levels.push(next);
            index.push(idx);
        }
        let mut faces = vec![Vec::new()];
        for p in 1..levels.len() {
            let f: Vec<Vec<usize>> = levels[p]
                .iter()
                .map(|s| {
                    (0..s.vertices.len())
                        .map(|i| {
                            let mut v = s.vertices.clone();
                            v.remove(i);
                            index[p - 1][&v]
                        })
                        .collect()
                })
                .collect();
            faces.push(f);
        }
        let mut cofaces: Vec<Vec<Vec<(usize, usize)>>> = levels.iter().map(|l| vec![Vec::new(); l.len()]).collect();
        for p in 1..levels.len() {
            for (sid, fl) in faces[p].iter().enumerate() {
                for (i, &f) in fl.iter().enumerate() {
                    cofaces[p - 1][f].push((sid, i));
                }
            }
        }
        let depth = max_depth(kinds, charts);
        Ok(Nerve { kinds: kinds.to_vec(), levels, index, faces, cofaces, depth })
    }

    /// Nerve dimension `P`: one less than the largest number of charts whose
    /// interiors share a point.
    pub fn dimension(&self) -> usize {
        self.depth
    }

    /// Highest enumerated level.
    pub fn top_level(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, p: usize) -> &[Simplex] {
        self.levels.get(p).map_or(&[], |l| l.as_slice())
    }

    pub fn count(&self, p: usize) -> usize {
        self.level(p).len()
    }

    pub fn total_simplices(&self) -> usize {
        self.levels.iter().map(|l| l.len()).sum()
    }

    pub fn find(&self, vertices: &[usize]) -> Option<usize> {
        self.index.get(vertices.len().checked_sub(1)?)?.get(vertices).copied()
    }

    pub fn faces(&self, p: usize, s: usize) -> &[usize] {
        &self.faces[p][s]
    }

    pub fn cofaces(&self, p: usize, s: usize) -> &[(usize, usize)] {
        self.cofaces.get(p).map_or(&[], |c| c[s].as_slice())
    }

    pub fn kinds(&self) -> &[AxisKind] {
        &self.kinds
    }
}

fn max_depth(kinds: &[AxisKind], charts: &[Region]) -> usize {
    if charts.is_empty() {
        return 0;
    }
    // one sample point per open cell of the arrangement of chart endpoints
    let samples: Vec<Vec<Rational>> = kinds
        .iter()
        .enumerate()
        .map(|(k, kind)| {
            let mut ends: Vec<Rational> = Vec::new();
            for c in charts {
                match kind {
                    AxisKind::Line => {
                        ends.push(c[k].lo.clone());
                        ends.push(c[k].hi.clone());
                    }
                    AxisKind::Circle { period } => {
                        ends.push(reduce_mod(&c[k].lo, period));
                        ends.push(reduce_mod(&c[k].hi, period));
                    }
                }
            }
            ends.sort();
            ends.dedup();
            let half = Rational::new(1, 2);
            let mut pts: Vec<Rational> = ends.windows(2).map(|w| (&w[0] + &w[1]) * &half).collect();
            if let AxisKind::Circle { period } = kind {
                let first = ends[0].clone();
                let last = ends.last().unwrap().clone();
                pts.push((&last + &(&first + period)) * &half);
            }
            pts
        })
        .collect();
    let mut best = 0;
    let mut idx = vec![0usize; kinds.len()];
    if samples.iter().any(|s| s.is_empty()) {
        return 0;
    }
    loop {
        let count = charts
            .iter()
            .filter(|c| kinds.iter().enumerate().all(|(k, kind)| interior_contains(kind, &c[k], &samples[k][idx[k]])))
            .count();
        best = best.max(count);
        let mut k = kinds.len();
        loop {
            if k == 0 {
                return best.saturating_sub(1);
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < samples[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// Partition of chart indices into classes of pairwise disjoint charts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coloring {
    pub color_of: Vec<usize>,
    pub classes: Vec<Vec<usize>>,
}

impl Coloring {
    pub fn count(&self) -> usize {
        self.classes.len()
    }
}

/// Greedy coloring: regions sharing a class have disjoint closures.
pub fn color_regions(kinds: &[AxisKind], regions: &[Region]) -> Coloring {
    let n = regions.len();
    let meets = |a: &Region, b: &Region| kinds.iter().enumerate().all(|(k, kind)| closed_sets_meet(kind, &a[k], &b[k]));
    let mut color_of = vec![usize::MAX; n];
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        let mut used = Vec::new();
        for j in 0..i {
            if meets(&regions[i], &regions[j]) {
                used.push(color_of[j]);
            }
        }
        let c = (0..).find(|c| !used.contains(c)).unwrap();
        color_of[i] = c;
        if c == classes.len() {
            classes.push(Vec::new());
        }
        classes[c].push(i);
    }
    Coloring { color_of, classes }
}

/// Maximum number of other regions a region's closure meets.
pub fn max_neighbours(kinds: &[AxisKind], regions: &[Region]) -> usize {
    (0..regions.len())
        .map(|i| {
            (0..regions.len())
                .filter(|&j| {
                    j != i
                        && kinds
                            .iter()
                            .enumerate()
                            .all(|(k, kind)| closed_sets_meet(kind, &regions[i][k], &regions[j][k]))
                })
                .count()
        })
        .max()
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn iv(a: i64, b: i64) -> Interval {
        Interval::new(q(a, 1), q(b, 1))
    }

    #[test]
    fn line_hat_cover() {
        let dom = Domain::boxed(&[(q(0, 1), q(1, 1))]).unwrap();
        let c = Cover::bspline(&dom, 1, &[4]).unwrap();
        assert_eq!(c.len(), 5);
        let nerve = Nerve::of_cover(&c, 4).unwrap();
        assert_eq!(nerve.dimension(), 1);
        assert_eq!(nerve.count(1), 4);
        assert_eq!(nerve.count(2), 0);
    }

    #[test]
    fn circle_hat_cover() {
        let dom = Domain::torus(&[q(1, 1)]).unwrap();
        let c = Cover::bspline(&dom, 1, &[4]).unwrap();
        assert_eq!(c.len(), 4);
        assert_eq!(c.pou_sum().unwrap().coarsen().as_constant(), Some(q(1, 1)));
        assert!(matches!(Cover::bspline(&dom, 3, &[4]), Err(Error::InvalidCover(_))));
    }

    #[test]
    fn path_nerve() {
        let kinds = [AxisKind::Line];
        let charts = vec![vec![iv(0, 2)], vec![iv(1, 3)], vec![iv(2, 4)]];
        let n = Nerve::from_regions(&kinds, &charts, 5).unwrap();
        assert_eq!((n.count(0), n.count(1), n.count(2)), (3, 2, 0));
        assert_eq!(n.dimension(), 1);
    }

    #[test]
    fn square_hat_nerve_dimension() {
        let dom = Domain::boxed(&[(q(0, 1), q(1, 1)), (q(0, 1), q(1, 1))]).unwrap();
        let c = Cover::bspline(&dom, 1, &[3]).unwrap();
        let n = Nerve::of_cover(&c, 5).unwrap();
        assert_eq!(n.dimension(), 3);
        assert_eq!(n.top_level(), 3);
        let col = c.coloring();
        assert!(col.count() <= 1 + max_neighbours(&[AxisKind::Line, AxisKind::Line], c.charts()));
    }

    #[test]
    fn wrapped_intersection_detected() {
        let kinds = [AxisKind::circle(q(4, 1))];
        let charts = vec![vec![iv(0, 3)], vec![iv(2, 5)]];
        assert!(matches!(Nerve::from_regions(&kinds, &charts, 3), Err(Error::WrappedIntersection(_))));
    }

    #[test]
    fn plateau_covers() {
        let dom = Domain::boxed(&vec![(q(0, 1), q(1, 1)); 3]).unwrap();
        let c = Cover::plateau(&dom, 1, &[2]).unwrap();
        assert_eq!(c.len(), 8);
        let n = Nerve::of_cover(&c, 8).unwrap();
        assert_eq!(n.dimension(), 7);
        assert_eq!(n.total_simplices(), 255);
        let t = Domain::torus(&[q(1, 1), q(1, 1)]).unwrap();
        let ct = Cover::plateau(&t, 1, &[3]).unwrap();
        assert_eq!(Nerve::of_cover(&ct, 4).unwrap().dimension(), 3);
        assert!(Cover::plateau(&t, 1, &[2]).is_err());
    }

    #[test]
    fn single_chart_one_color() {
        let col = color_regions(&[AxisKind::Line], &[vec![iv(0, 1)]]);
        assert_eq!(col.count(), 1);
    }
}
