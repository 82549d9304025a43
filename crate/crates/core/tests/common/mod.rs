//! Shared generators and exact reference evaluation for integration tests.
#![allow(dead_code)]

use std::collections::HashMap;

use fpfilter::error_bounds::{derive, ErrorBound, MagnitudeExpr};
use fpfilter::fpn::Dyadic;
use fpfilter::{Builtin, Expr, FpnParams};
use rand::{RngExt, SeedableRng};
use rand_xoshiro::SplitMix64;

pub fn rng(seed: u64) -> SplitMix64 {
    SplitMix64::seed_from_u64(seed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dist {
    Uniform,
    NearDegenerate,
    Tiny,
    Huge,
    Grid,
}

impl Dist {
    pub const ALL: [Dist; 5] = [Dist::Uniform, Dist::NearDegenerate, Dist::Tiny, Dist::Huge, Dist::Grid];
}

fn unit(r: &mut SplitMix64) -> f64 {
    r.random_range(-1.0..1.0)
}

/// Moves `x` by up to three floats either way.
fn nudge(r: &mut SplitMix64, x: f64) -> f64 {
    let mut v = x;
    for _ in 0..r.random_range(0..4u32) {
        v = if r.random::<bool>() { v.next_up() } else { v.next_down() };
    }
    v
}

/// A configuration that is degenerate in real arithmetic up to the rounding
/// of its construction, with half of the samples nudged by a few ulps.
fn near_degenerate(b: Builtin, r: &mut SplitMix64) -> Vec<f64> {
    let mut x = match b {
        Builtin::Orient2d => {
            let (a, c) = ([unit(r), unit(r)], [unit(r), unit(r)]);
            let t = unit(r) * 2.0;
            vec![a[0], a[1], c[0], c[1], a[0] + t * (c[0] - a[0]), a[1] + t * (c[1] - a[1])]
        }
        Builtin::Incircle2d => {
            let (cx, cy, rad) = (unit(r), unit(r), r.random_range(0.1..1.0));
            (0..4)
                .flat_map(|_| {
                    let th: f64 = r.random_range(0.0..std::f64::consts::TAU);
                    [cx + rad * th.cos(), cy + rad * th.sin()]
                })
                .collect()
        }
        Builtin::Orient3d => {
            let p: Vec<[f64; 3]> = (0..3).map(|_| [unit(r), unit(r), unit(r)]).collect();
            let (s, t) = (unit(r), unit(r));
            let mut v: Vec<f64> = p.iter().flatten().copied().collect();
            for k in 0..3 {
                v.push(p[0][k] + s * (p[1][k] - p[0][k]) + t * (p[2][k] - p[0][k]));
            }
            v
        }
        Builtin::PowerSide3d => {
            let (c, rad, w) = ([unit(r), unit(r), unit(r)], r.random_range(0.1..1.0), unit(r));
            (0..5)
                .flat_map(|_| {
                    let d = [unit(r), unit(r), unit(r)];
                    let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt().max(1e-3);
                    [c[0] + rad * d[0] / n, c[1] + rad * d[1] / n, c[2] + rad * d[2] / n, w]
                })
                .collect()
        }
    };
    if r.random::<bool>() {
        let k = r.random_range(0..x.len());
        x[k] = nudge(r, x[k]);
    }
    x
}

pub fn sample(b: Builtin, d: Dist, r: &mut SplitMix64) -> Vec<f64> {
    let n = b.arity();
    match d {
        Dist::Uniform => (0..n).map(|_| unit(r)).collect(),
        Dist::NearDegenerate => near_degenerate(b, r),
        Dist::Tiny => (0..n).map(|_| unit(r) * 2f64.powi(-1000)).collect(),
        Dist::Huge => (0..n).map(|_| unit(r) * 2f64.powi(800)).collect(),
        Dist::Grid => (0..n).map(|_| r.random_range(0..8u32) as f64).collect(),
    }
}

/// Magnitude of the coordinates a distribution produces.
pub fn scale(d: Dist) -> f64 {
    match d {
        Dist::Uniform | Dist::NearDegenerate => 2.0,
        Dist::Tiny => 2f64.powi(-1000),
        Dist::Huge => 2f64.powi(800),
        Dist::Grid => 8.0,
    }
}

#[derive(Clone, Copy, Debug)]
enum Op {
    Input(usize),
    Const(f64),
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
}

/// Distinct subexpressions of an expression, children before parents.
pub struct Dag {
    ops: Vec<Op>,
    pub exprs: Vec<Expr>,
    index: HashMap<String, usize>,
}

impl Dag {
    pub fn new(e: &Expr) -> Dag {
        let mut d = Dag {
            ops: Vec::new(),
            exprs: Vec::new(),
            index: HashMap::new(),
        };
        d.add(e);
        d
    }

    fn add(&mut self, e: &Expr) -> usize {
        let key = e.to_string();
        if let Some(&k) = self.index.get(&key) {
            return k;
        }
        let op = match e {
            Expr::Input(i) => Op::Input(*i - 1),
            Expr::Constant(c) => Op::Const(*c),
            Expr::Sum(l, r) => Op::Add(self.add(l), self.add(r)),
            Expr::Difference(l, r) => Op::Sub(self.add(l), self.add(r)),
            Expr::Product(l, r) => Op::Mul(self.add(l), self.add(r)),
        };
        self.ops.push(op);
        self.exprs.push(e.clone());
        self.index.insert(key, self.ops.len() - 1);
        self.ops.len() - 1
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn find(&self, e: &Expr) -> Option<usize> {
        self.index.get(&e.to_string()).copied()
    }

    /// Rounded value per node, and whether any operation up to it underflowed.
    pub fn eval_naive(&self, x: &[f64]) -> (Vec<f64>, Vec<bool>) {
        let mut v = Vec::with_capacity(self.len());
        let mut uf = Vec::with_capacity(self.len());
        for op in &self.ops {
            let (val, flag) = match *op {
                Op::Input(i) => (x[i], false),
                Op::Const(c) => (c, false),
                Op::Add(a, b) => {
                    let s = v[a] + v[b];
                    (s, uf[a] || uf[b] || f64::is_subnormal(s))
                }
                Op::Sub(a, b) => {
                    let s = v[a] - v[b];
                    (s, uf[a] || uf[b] || f64::is_subnormal(s))
                }
                Op::Mul(a, b) => {
                    let p: f64 = v[a] * v[b];
                    let under = p.is_subnormal() || (p == 0.0 && v[a] != 0.0 && v[b] != 0.0);
                    (p, uf[a] || uf[b] || under)
                }
            };
            v.push(val);
            uf.push(flag);
        }
        (v, uf)
    }

    /// Exact value per node.
    pub fn eval_exact(&self, x: &[f64]) -> Vec<Dyadic> {
        let mut v: Vec<Dyadic> = Vec::with_capacity(self.len());
        for op in &self.ops {
            let val = match *op {
                Op::Input(i) => Dyadic::from_f64(x[i]).expect("finite input"),
                Op::Const(c) => Dyadic::from_f64(c).expect("finite constant"),
                Op::Add(a, b) => &v[a] + &v[b],
                Op::Sub(a, b) => &v[a] - &v[b],
                Op::Mul(a, b) => &v[a] * &v[b],
            };
            v.push(val);
        }
        v
    }
}

/// A magnitude expression with its `|q̃|` leaves resolved to DAG nodes.
pub enum Mag {
    Abs(usize),
    Const(f64),
    Add(Box<Mag>, Box<Mag>),
    Mul(Box<Mag>, Box<Mag>),
}

impl Mag {
    pub fn compile(m: &MagnitudeExpr, dag: &Dag) -> Mag {
        match m {
            MagnitudeExpr::AbsOf(e) => Mag::Abs(dag.find(e).expect("magnitudes refer to subexpressions")),
            MagnitudeExpr::Const { value, .. } => Mag::Const(*value),
            MagnitudeExpr::Sum(l, r) => Mag::Add(Box::new(Mag::compile(l, dag)), Box::new(Mag::compile(r, dag))),
            MagnitudeExpr::Product(l, r) => {
                Mag::Mul(Box::new(Mag::compile(l, dag)), Box::new(Mag::compile(r, dag)))
            }
        }
    }

    /// Rounded value and whether evaluation (including the referenced
    /// realisations) underflowed.
    pub fn eval(&self, naive: &[f64], uf: &[bool]) -> (f64, bool) {
        match self {
            Mag::Abs(k) => (naive[*k].abs(), uf[*k]),
            Mag::Const(c) => (*c, false),
            Mag::Add(l, r) => {
                let ((a, fa), (b, fb)) = (l.eval(naive, uf), r.eval(naive, uf));
                let s = a + b;
                (s, fa || fb || s.is_subnormal())
            }
            Mag::Mul(l, r) => {
                let ((a, fa), (b, fb)) = (l.eval(naive, uf), r.eval(naive, uf));
                let p = a * b;
                (p, fa || fb || p.is_subnormal() || (p == 0.0 && a != 0.0 && b != 0.0))
            }
        }
    }
}

/// Error bounds of every distinct subexpression under one rule map.
pub struct NodeBound {
    pub bound: ErrorBound,
    pub a_at_eps: Dyadic,
    pub mag: Mag,
}

pub fn node_bounds(dag: &Dag, ufp: bool) -> Vec<NodeBound> {
    let params = FpnParams::binary64();
    dag.exprs
        .iter()
        .map(|q| {
            let bound = derive(q, ufp, &params).expect("built-ins derive");
            let a_at_eps = bound.a.eval_at(&params);
            let mag = Mag::compile(&bound.m, dag);
            NodeBound { bound, a_at_eps, mag }
        })
        .collect()
}

/// Counters for the I2.1, I2.2 and I3 checks.
#[derive(Clone, Copy, Debug, Default)]
pub struct BoundCheck {
    pub checked: u64,
    pub skipped_underflow: u64,
    pub i21: u64,
    pub i22: u64,
    pub i3: u64,
}

impl BoundCheck {
    pub fn violations(&self) -> u64 {
        self.i21 + self.i22 + self.i3
    }
}

/// Checks every subexpression of one input against its bound.
/// For the non-UFP map, the I2.2 check is skipped when anything underflowed.
pub fn check_bounds(dag: &Dag, bounds: &[NodeBound], ufp: bool, x: &[f64], out: &mut BoundCheck) {
    let (naive, uf) = dag.eval_naive(x);
    let exact = dag.eval_exact(x);
    let u_n = f64::MIN_POSITIVE;
    for (k, nb) in bounds.iter().enumerate() {
        let (m, m_uf) = nb.mag.eval(&naive, &uf);
        out.checked += 1;
        if !m.is_finite() {
            continue;
        }
        // I2.1; a NaN realisation under a finite bound counts too.
        if !(naive[k].abs() <= m) {
            out.i21 += 1;
            continue;
        }
        let err = (&Dyadic::from_f64(naive[k]).expect("finite below a finite bound") - &exact[k]).abs();
        let exact_node = err.is_zero();
        // I2.2
        if ufp || !(uf[k] || m_uf) {
            let rhs = &nb.a_at_eps * &Dyadic::from_f64(m).unwrap();
            if err > rhs {
                out.i22 += 1;
            }
        } else {
            out.skipped_underflow += 1;
        }
        // I3
        if ufp && !exact_node && m < u_n {
            out.i3 += 1;
        }
    }
}

use fpfilter::filters::{
    ExpansionStage, IntervalFilter, SemiStaticFilter, StaticFilter, TranslationFilter, ZeroFilter,
};
use fpfilter::fpn::oracle_sign;
use fpfilter::interval::Interval;
use fpfilter::{FilterOutcome, Profile, Sign, Stage, StagedPredicate};

/// Certifications and wrong certifications of one stage.
#[derive(Clone, Debug, Default)]
pub struct StageTally {
    pub name: String,
    pub certified: u64,
    pub wrong: u64,
    pub skipped: u64,
}

/// Every filter stage, both staged pipelines, and how each fared against
/// the exact sign on `n` samples of one distribution.
pub fn validity(b: Builtin, d: Dist, n: usize, seed: u64) -> Vec<StageTally> {
    let e = b.expr();
    let plain = SemiStaticFilter::new(&e, false).unwrap();
    let bounds = vec![Interval::new(-scale(d), scale(d)); b.arity()];
    // `scoped` stages are only valid absent underflow.
    let stages: Vec<(Box<dyn Stage>, bool)> = vec![
        (Box::new(plain.clone()), true),
        (Box::new(SemiStaticFilter::new(&e, true).unwrap()), false),
        (Box::new(ZeroFilter::new(&e)), false),
        (Box::new(IntervalFilter::new(&e)), false),
        (Box::new(TranslationFilter::new(&e)), false),
        (Box::new(ExpansionStage::new(&e)), false),
        (Box::new(StaticFilter::new(&e, &bounds, false).unwrap()), true),
        (Box::new(StaticFilter::new(&e, &bounds, true).unwrap()), false),
    ];
    let names: Vec<String> = stages.iter().map(|(s, _)| s.name().to_string()).collect();
    let safe = StagedPredicate::default_pipeline(b, Profile::Safe);
    let fast = StagedPredicate::default_pipeline(b, Profile::Fast);
    let mut tally: Vec<StageTally> = names
        .iter()
        .map(|s| StageTally {
            name: s.clone(),
            ..StageTally::default()
        })
        .chain(["pipeline-safe", "pipeline-fast"].map(|s| StageTally {
            name: s.to_string(),
            ..StageTally::default()
        }))
        .collect();
    // The two static stages share a name; tell them apart.
    tally[6].name = "static".into();
    tally[7].name = "static-ufp".into();
    let mut r = rng(seed);
    for _ in 0..n {
        let x = sample(b, d, &mut r);
        let exact = oracle_sign(&e, &x).unwrap();
        let underflow = plain.underflows(&x);
        for (k, (s, scoped)) in stages.iter().enumerate() {
            if let FilterOutcome::Certain(sg) = s.apply(&x) {
                if *scoped && underflow {
                    tally[k].skipped += 1;
                    continue;
                }
                tally[k].certified += 1;
                if sg != exact {
                    tally[k].wrong += 1;
                }
            }
        }
        let k = stages.len();
        let got: Sign = safe.apply(&x).unwrap();
        tally[k].certified += 1;
        if got != exact {
            tally[k].wrong += 1;
        }
        if underflow {
            tally[k + 1].skipped += 1;
        } else {
            tally[k + 1].certified += 1;
            if fast.apply(&x).unwrap() != exact {
                tally[k + 1].wrong += 1;
            }
        }
    }
    tally
}
