//! Exact rational inequality systems, Fourier-Motzkin elimination and 2-D
//! rate-region geometry.

mod frontier;

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub use frontier::{
    frontier_contains, frontier_from_halfplanes, frontier_intersect, frontier_union, region_equal,
    Frontier2D, Halfplane, REGION_GRID,
};

pub type Rat = BigRational;

/// Granularity at which doubles enter exact systems.
pub const RATIONAL_GRANULARITY: i64 = 1_000_000_000_000;

/// Rounds `x` to the nearest multiple of 1e-12.
pub fn rationalize(x: f64) -> Rat {
    let scaled = (x * RATIONAL_GRANULARITY as f64).round();
    let num = BigInt::from(scaled as i128);
    Rat::new(num, BigInt::from(RATIONAL_GRANULARITY))
}

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `Σ coeffs[v]·v ≤ bound`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinIneq {
    pub coeffs: BTreeMap<String, Rat>,
    pub bound: Rat,
}

impl LinIneq {
    pub fn new<I, S>(coeffs: I, bound: Rat) -> Self
    where
        I: IntoIterator<Item = (S, Rat)>,
        S: Into<String>,
    {
        let mut map: BTreeMap<String, Rat> = BTreeMap::new();
        for (name, c) in coeffs {
            *map.entry(name.into()).or_insert_with(Rat::zero) += c;
        }
        map.retain(|_, c| !c.is_zero());
        LinIneq { coeffs: map, bound }
    }

    /// Integer-coefficient shorthand.
    pub fn int(terms: &[(&str, i64)], bound: Rat) -> Self {
        LinIneq::new(terms.iter().map(|(n, c)| (*n, rat(*c))), bound)
    }

    pub fn coeff(&self, var: &str) -> Rat {
        self.coeffs.get(var).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Exact membership of a point given as rationals.
    pub fn holds_at(&self, point: &BTreeMap<String, Rat>) -> bool {
        let lhs: Rat = self
            .coeffs
            .iter()
            .map(|(v, c)| c * point.get(v).cloned().unwrap_or_else(Rat::zero))
            .sum();
        lhs <= self.bound
    }

    /// Float membership with tolerance.
    pub fn holds_at_f64(&self, point: &BTreeMap<String, f64>, tol: f64) -> bool {
        let lhs: f64 = self
            .coeffs
            .iter()
            .map(|(v, c)| to_f64(c) * point.get(v).copied().unwrap_or(0.0))
            .sum();
        lhs <= to_f64(&self.bound) + tol
    }
}

impl fmt::Display for LinIneq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            write!(f, "0")?;
        }
        for (k, (v, c)) in self.coeffs.iter().enumerate() {
            let sign = if c.is_negative() {
                "-"
            } else if k > 0 {
                "+"
            } else {
                ""
            };
            let mag = c.abs();
            if k > 0 {
                write!(f, " ")?;
            }
            if mag.is_one() {
                write!(f, "{sign}{v}")?;
            } else {
                write!(f, "{sign}{mag}*{v}")?;
            }
        }
        write!(f, " <= {}", self.bound)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IneqSystem {
    pub variables: Vec<String>,
    pub inequalities: Vec<LinIneq>,
}

impl IneqSystem {
    pub fn new<S: Into<String>>(variables: impl IntoIterator<Item = S>) -> Self {
        IneqSystem {
            variables: variables.into_iter().map(Into::into).collect(),
            inequalities: Vec::new(),
        }
    }

    pub fn push(&mut self, ineq: LinIneq) -> Result<()> {
        if let Some(v) = ineq.coeffs.keys().find(|v| !self.variables.contains(v)) {
            return Err(Error::UnknownVariable(v.clone()));
        }
        self.inequalities.push(ineq);
        Ok(())
    }

    /// Adds `lhs = rhs` as a pair of inequalities.
    pub fn push_eq(&mut self, ineq: LinIneq) -> Result<()> {
        let neg = LinIneq::new(
            ineq.coeffs.iter().map(|(v, c)| (v.clone(), -c.clone())),
            -ineq.bound.clone(),
        );
        self.push(ineq)?;
        self.push(neg)
    }

    /// Adds `var ≥ 0` for each listed variable.
    pub fn push_nonneg(&mut self, vars: &[&str]) -> Result<()> {
        for v in vars {
            self.push(LinIneq::int(&[(v, -1)], Rat::zero()))?;
        }
        Ok(())
    }

    pub fn holds_at(&self, point: &BTreeMap<String, Rat>) -> bool {
        self.inequalities.iter().all(|q| q.holds_at(point))
    }

    /// True when a constant inequality `0 ≤ b` with `b < 0` is present.
    pub fn has_contradiction(&self) -> bool {
        self.inequalities
            .iter()
            .any(|q| q.is_constant() && q.bound.is_negative())
    }
}

impl fmt::Display for IneqSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in &self.inequalities {
            writeln!(f, "{q}")?;
        }
        Ok(())
    }
}

/// Dense working row used during elimination.
#[derive(Clone, Debug)]
struct Row {
    a: Vec<Rat>,
    b: Rat,
    af: Vec<f64>,
    bf: f64,
    pos: u64,
    neg: u64,
}

impl Row {
    fn new(a: Vec<Rat>, b: Rat) -> Self {
        let mut r = Row {
            af: Vec::new(),
            bf: 0.0,
            pos: 0,
            neg: 0,
            a,
            b,
        };
        r.normalize();
        r
    }

    /// Scales so the first nonzero coefficient has magnitude one.
    fn normalize(&mut self) {
        if let Some(lead) = self.a.iter().find(|c| !c.is_zero()).map(|c| c.abs()) {
            if !lead.is_one() {
                for c in &mut self.a {
                    *c = &*c / &lead;
                }
                self.b = &self.b / &lead;
            }
        }
        self.af = self.a.iter().map(to_f64).collect();
        self.bf = to_f64(&self.b);
        self.pos = 0;
        self.neg = 0;
        for (k, c) in self.a.iter().enumerate() {
            if c.is_positive() {
                self.pos |= 1 << k;
            } else if c.is_negative() {
                self.neg |= 1 << k;
            }
        }
    }

    fn support(&self) -> u64 {
        self.pos | self.neg
    }

    fn is_constant(&self) -> bool {
        self.support() == 0
    }
}

fn rows_of(sys: &IneqSystem) -> Result<Vec<Row>> {
    if sys.variables.len() > 64 {
        return Err(Error::InvalidSystem(
            "at most 64 variables supported".into(),
        ));
    }
    sys.inequalities
        .iter()
        .map(|q| {
            if let Some(v) = q.coeffs.keys().find(|v| !sys.variables.contains(v)) {
                return Err(Error::UnknownVariable(v.clone()));
            }
            let a = sys.variables.iter().map(|v| q.coeff(v)).collect();
            Ok(Row::new(a, q.bound.clone()))
        })
        .collect()
}

fn system_of(vars: Vec<String>, rows: &[Row]) -> IneqSystem {
    let inequalities = rows
        .iter()
        .map(|r| LinIneq::new(vars.iter().cloned().zip(r.a.iter().cloned()), r.b.clone()))
        .collect();
    IneqSystem {
        variables: vars,
        inequalities,
    }
}

/// Can `c` be written as `λ·i + μ·j` with `λ, μ ≥ 0` and a looser bound?
fn implied_by_pair(c: &Row, i: &Row, j: &Row) -> bool {
    let sc = c.support();
    if c.pos & !(i.pos | j.pos) != 0 || c.neg & !(i.neg | j.neg) != 0 {
        return false;
    }
    let outside = !sc;
    if (i.support() ^ j.support()) & outside != 0
        || i.pos & j.pos & outside != 0
        || i.neg & j.neg & outside != 0
    {
        return false;
    }
    // float pre-check on the best-conditioned pivot pair
    let n = c.a.len();
    let mut best: Option<(usize, usize, f64)> = None;
    for p in 0..n {
        for q in p + 1..n {
            let det = i.af[p] * j.af[q] - i.af[q] * j.af[p];
            if det.abs() > best.map_or(0.0, |b| b.2.abs()) {
                best = Some((p, q, det));
            }
        }
    }
    let Some((p, q, det)) = best else {
        return false;
    };
    if det.abs() < 1e-12 {
        return false;
    }
    let lf = (c.af[p] * j.af[q] - c.af[q] * j.af[p]) / det;
    let mf = (i.af[p] * c.af[q] - i.af[q] * c.af[p]) / det;
    if lf < -1e-9 || mf < -1e-9 {
        return false;
    }
    if (0..n).any(|k| (lf * i.af[k] + mf * j.af[k] - c.af[k]).abs() > 1e-7 * (1.0 + c.af[k].abs()))
    {
        return false;
    }
    if lf * i.bf + mf * j.bf > c.bf + 1e-6 * (1.0 + c.bf.abs()) {
        return false;
    }
    // exact confirmation
    let det = &i.a[p] * &j.a[q] - &i.a[q] * &j.a[p];
    if det.is_zero() {
        return false;
    }
    let l = (&c.a[p] * &j.a[q] - &c.a[q] * &j.a[p]) / &det;
    let m = (&i.a[p] * &c.a[q] - &i.a[q] * &c.a[p]) / &det;
    if l.is_negative() || m.is_negative() {
        return false;
    }
    if (0..n).any(|k| &l * &i.a[k] + &m * &j.a[k] != c.a[k]) {
        return false;
    }
    &l * &i.b + &m * &j.b <= c.b
}

/// Deduplicates, drops trivial constants and pairwise-implied rows.
fn simplify(rows: Vec<Row>) -> Vec<Row> {
    let mut kept: Vec<Row> = Vec::with_capacity(rows.len());
    for r in rows {
        if r.is_constant() {
            if r.b.is_negative() {
                return vec![r];
            }
            continue;
        }
        if let Some(k) = kept.iter_mut().find(|k| k.a == r.a) {
            if r.b < k.b {
                *k = r;
            }
            continue;
        }
        kept.push(r);
    }
    let mut alive = vec![true; kept.len()];
    for c in 0..kept.len() {
        let others: Vec<usize> = (0..kept.len()).filter(|&k| k != c && alive[k]).collect();
        'search: for (x, &i) in others.iter().enumerate() {
            for &j in &others[x + 1..] {
                if implied_by_pair(&kept[c], &kept[i], &kept[j]) {
                    alive[c] = false;
                    break 'search;
                }
            }
        }
    }
    kept.into_iter()
        .zip(alive)
        .filter_map(|(r, a)| a.then_some(r))
        .collect()
}

fn eliminate_rows(rows: Vec<Row>, v: usize) -> Vec<Row> {
    let (mut pos, mut neg, mut out) = (Vec::new(), Vec::new(), Vec::new());
    for r in rows {
        if r.a[v].is_positive() {
            pos.push(r);
        } else if r.a[v].is_negative() {
            neg.push(r);
        } else {
            out.push(r);
        }
    }
    for p in &pos {
        for n in &neg {
            let sp = -n.a[v].clone();
            let sn = p.a[v].clone();
            let a: Vec<Rat> =
                p.a.iter()
                    .zip(&n.a)
                    .map(|(x, y)| x * &sp + y * &sn)
                    .collect();
            let b = &p.b * &sp + &n.b * &sn;
            out.push(Row::new(a, b));
        }
    }
    simplify(out)
}

fn drop_column(rows: Vec<Row>, v: usize) -> Vec<Row> {
    rows.into_iter()
        .map(|mut r| {
            r.a.remove(v);
            Row::new(r.a, r.b)
        })
        .collect()
}

/// Projects out `var`, keeping the remaining variables in order.
pub fn fme_eliminate(sys: &IneqSystem, var: &str) -> Result<IneqSystem> {
    let v = sys
        .variables
        .iter()
        .position(|x| x == var)
        .ok_or_else(|| Error::UnknownVariable(var.to_string()))?;
    let rows = eliminate_rows(rows_of(sys)?, v);
    let mut vars = sys.variables.clone();
    vars.remove(v);
    Ok(system_of(vars, &drop_column(rows, v)))
}

/// Eliminates every listed variable, greedily picking the one with the
/// fewest generated rows at each step.
pub fn fme_eliminate_all(sys: &IneqSystem, vars: &[&str]) -> Result<IneqSystem> {
    for v in vars {
        if !sys.variables.iter().any(|x| x == v) {
            return Err(Error::UnknownVariable(v.to_string()));
        }
    }
    let mut names = sys.variables.clone();
    let mut rows = simplify(rows_of(sys)?);
    let mut todo: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
    while !todo.is_empty() {
        let (t, _) = todo
            .iter()
            .enumerate()
            .map(|(t, name)| {
                let k = names
                    .iter()
                    .position(|x| x == name)
                    .expect("tracked variable");
                let p = rows.iter().filter(|r| r.a[k].is_positive()).count();
                let n = rows.iter().filter(|r| r.a[k].is_negative()).count();
                (t, p * n)
            })
            .min_by_key(|&(t, cost)| (cost, t))
            .expect("nonempty");
        let name = todo.remove(t);
        let k = names
            .iter()
            .position(|x| *x == name)
            .expect("tracked variable");
        rows = drop_column(eliminate_rows(rows, k), k);
        names.remove(k);
    }
    Ok(system_of(names, &rows))
}

/// Frontier of a system over exactly the two rate variables, intersected with
/// the nonnegative quadrant. Infeasible systems give the empty frontier.
pub fn project_to_frontier(sys: &IneqSystem, r1: &str, r2: &str) -> Result<Frontier2D> {
    for q in &sys.inequalities {
        if let Some(v) = q.coeffs.keys().find(|v| *v != r1 && *v != r2) {
            return Err(Error::InvalidSystem(format!(
                "variable `{v}` must be eliminated first"
            )));
        }
    }
    if sys.has_contradiction() {
        return Ok(Frontier2D::empty());
    }
    // lines as (a1, a2, b) over (r1, r2)
    let mut lines: Vec<(Rat, Rat, Rat)> = sys
        .inequalities
        .iter()
        .filter(|q| !q.is_constant())
        .map(|q| (q.coeff(r1), q.coeff(r2), q.bound.clone()))
        .collect();
    lines.push((rat(-1), Rat::zero(), Rat::zero()));
    lines.push((Rat::zero(), rat(-1), Rat::zero()));
    let feasible = |x: &Rat, y: &Rat| lines.iter().all(|(a, b, c)| a * x + b * y <= *c);
    let mut verts: Vec<(Rat, Rat)> = Vec::new();
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            let (a1, b1, c1) = &lines[i];
            let (a2, b2, c2) = &lines[j];
            let det = a1 * b2 - a2 * b1;
            if det.is_zero() {
                continue;
            }
            let x = (c1 * b2 - c2 * b1) / &det;
            let y = (a1 * c2 - a2 * c1) / &det;
            if feasible(&x, &y) && !verts.iter().any(|(vx, vy)| *vx == x && *vy == y) {
                verts.push((x, y));
            }
        }
    }
    if verts.is_empty() {
        return Ok(Frontier2D::empty());
    }
    // recession directions of a 2-D cone lie on the axes or along edges
    let mut dirs = vec![(rat(1), Rat::zero()), (Rat::zero(), rat(1))];
    for (a, b, _) in &lines {
        for (dx, dy) in [(b.clone(), -a.clone()), (-b.clone(), a.clone())] {
            if !dx.is_negative() && !dy.is_negative() && !(dx.is_zero() && dy.is_zero()) {
                dirs.push((dx, dy));
            }
        }
    }
    if dirs.iter().any(|(dx, dy)| {
        lines
            .iter()
            .all(|(a, b, _)| !(a * dx + b * dy).is_positive())
    }) {
        return Err(Error::Unbounded);
    }
    let pts: Vec<(f64, f64)> = verts.iter().map(|(x, y)| (to_f64(y), to_f64(x))).collect();
    Ok(Frontier2D::from_vertices(pts))
}
