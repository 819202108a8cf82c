//! Randomized identity suites over a fixed set of covers.

use serde::Serialize;

use exactdr_core::antidiff::CechSplitting;
use exactdr_core::cechdr::{CechComplex, Cochain, ComplexOptions, TotalCochain};
use exactdr_core::cover::Cover;
use exactdr_core::forms::Domain;
use exactdr_core::random::{self, RandomOptions, TestRng};
use exactdr_core::{q, Rational, Result};

#[derive(Clone, Debug, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub identity: &'static str,
    pub instances: usize,
    pub failures: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<String>,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub per_identity: usize,
    pub suites: Vec<SuiteResult>,
    pub passed: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct SelftestOptions {
    pub seed: u64,
    /// Nonzero instances per identity.
    pub count: usize,
    /// Flip one sign inside every identity; the suites must then fail.
    pub inject_fault: bool,
}

impl Default for SelftestOptions {
    fn default() -> Self {
        SelftestOptions { seed: 1, count: 30, inject_fault: false }
    }
}

struct Fixture {
    name: &'static str,
    cx: CechComplex,
    split: CechSplitting,
}

fn fixtures(opts: &ComplexOptions) -> Result<Vec<Fixture>> {
    let b1 = Domain::boxed(&[(q(0, 1), q(2, 1))])?;
    let t1 = Domain::torus(&[q(1, 1)])?;
    let b2 = Domain::boxed(&[(q(0, 1), q(1, 1)), (q(0, 1), q(1, 1))])?;
    let t2 = Domain::torus(&[q(1, 1), q(1, 1)])?;
    let fam = Domain::boxed(&[(q(0, 1), q(1, 1))])?.with_parameters(&[(q(0, 1), q(1, 1))])?;
    let covers = [
        ("box1-bspline", Cover::bspline(&b1, 2, &[3])?),
        ("circle-bspline", Cover::bspline(&t1, 2, &[5])?),
        ("box2-plateau", Cover::plateau(&b2, 1, &[2])?),
        ("torus2-plateau", Cover::plateau(&t2, 1, &[3])?),
        ("family-plateau", Cover::plateau(&fam, 1, &[2])?),
    ];
    covers
        .into_iter()
        .map(|(name, c)| {
            let cx = CechComplex::new(&c, opts)?;
            let split = CechSplitting::build(cx.nerve())?;
            Ok(Fixture { name, cx, split })
        })
        .collect()
}

fn small() -> RandomOptions {
    RandomOptions { terms: 1, density: 50, ..Default::default() }
}

/// One instance: `Ok(None)` for a zero input (not counted), `Ok(Some(ok))` otherwise.
type Check = fn(&Fixture, &mut TestRng, usize, bool) -> Result<Option<bool>>;

fn flip(c: &Cochain, fault: bool) -> Cochain {
    if fault {
        c.neg()
    } else {
        c.clone()
    }
}

fn sign(fault: bool) -> Rational {
    Rational::from_int(if fault { -1 } else { 1 })
}

fn row_contraction(fx: &Fixture, rng: &mut TestRng, slot: usize, fault: bool) -> Result<Option<bool>> {
    let cx = &fx.cx;
    let n = cx.n();
    let ps = cx.nerve().top_level() as isize + 1;
    let p = (slot % ps as usize) as isize - 1;
    let qq = (slot / ps as usize) % (n + 1);
    let c = random::cochain(rng, cx, p, qq, &small())?;
    if c.is_zero() {
        return Ok(None);
    }
    let kc = flip(&cx.k(&c)?, fault);
    cx.check_supports(&kc)?;
    let mut lhs = cx.d_h(&kc)?;
    if p >= 0 {
        lhs = lhs.add(&flip(&cx.k(&cx.d_h(&c)?)?, fault))?;
    }
    Ok(Some(lhs.equals(&c)))
}

fn column_contraction(fx: &Fixture, rng: &mut TestRng, slot: usize, fault: bool) -> Result<Option<bool>> {
    let cx = &fx.cx;
    let n = cx.n();
    let ps = cx.nerve().top_level() + 1;
    let p = (slot % ps) as isize;
    let qq = (slot / ps) % (n + 2);
    let c = random::cochain(rng, cx, p, qq, &small())?;
    if c.is_zero() {
        return Ok(None);
    }
    let mut lhs = Cochain::zero(p, qq);
    if qq >= 1 {
        let lc = flip(&cx.l(&c)?, fault);
        cx.check_supports(&lc)?;
        lhs = lhs.add(&cx.d_v(&lc)?)?;
    }
    if qq <= n {
        lhs = lhs.add(&flip(&cx.l(&cx.d_v(&c)?)?, fault))?;
    }
    Ok(Some(lhs.equals(&c)))
}

fn q_homotopy(fx: &Fixture, rng: &mut TestRng, slot: usize, fault: bool) -> Result<Option<bool>> {
    let cx = &fx.cx;
    let n = cx.n();
    let p = cx.nerve().top_level().min(1);
    let qq = slot % (n + 1);
    let c = random::cochain(rng, cx, p as isize, qq, &small())?;
    let Some((sid, e)) = c.entries.iter().next() else {
        return Ok(None);
    };
    let w = e.as_form().expect("rows below the top hold forms");
    if w.is_zero() {
        return Ok(None);
    }
    let b = cx.bumps(p, *sid);
    let s = sign(fault);
    let mut lhs = cx.q_op(&w.d(), b)?.scale(&s);
    if qq > 0 {
        lhs = lhs.add(&cx.q_op(w, b)?.scale(&s).d())?;
    }
    let rhs = if qq > 0 { w.sub(&cx.e_pi(w, b)?)? } else { w.clone() };
    Ok(Some(lhs.equals(&rhs)))
}

fn total_square(fx: &Fixture, rng: &mut TestRng, slot: usize, fault: bool) -> Result<Option<bool>> {
    let cx = &fx.cx;
    let n = cx.n();
    let k = slot % n;
    let len = (n - k + 1).min(cx.nerve().top_level() + 1);
    let comps = (0..len).map(|m| random::cochain(rng, cx, m as isize, k + m, &small())).collect::<Result<Vec<_>>>()?;
    let t = TotalCochain { k, comps };
    if t.is_zero() {
        return Ok(None);
    }
    let dt = cx.total_d(&t)?;
    let mut ok = cx.total_d(&dt)?.is_zero();
    // componentwise: d_h d_v + d_v d_h = 0
    let s = sign(fault);
    for c in &t.comps {
        if c.p >= 1 && c.q < n {
            let cross = cx.d_h(&cx.d_v(c)?)?.add(&cx.d_v(&cx.d_h(c)?)?.scale(&s))?;
            ok &= cross.is_zero();
        }
    }
    Ok(Some(ok))
}

fn splitting(fx: &Fixture, rng: &mut TestRng, slot: usize, fault: bool) -> Result<Option<bool>> {
    let cx = &fx.cx;
    let top = cx.nerve().top_level();
    if top == 0 {
        return Ok(None);
    }
    let p = 1 + slot % top;
    let c = random::cochain(rng, cx, p as isize, cx.n() + 1, &small())?;
    let y = cx.d_h(&c)?;
    if y.is_zero() {
        return Ok(None);
    }
    let zero = exactdr_core::exactpp::PPFunction::zero_on(
        &cx.domain().parameter_axes().iter().map(|&a| cx.domain().axes()[a].kind.clone()).collect::<Vec<_>>(),
    );
    let x = flip(&fx.split.apply(&y, &zero)?, fault);
    Ok(Some(cx.d_h(&x)?.equals(&y)))
}

const SUITES: [(&str, &str, Check); 5] = [
    ("row-contraction", "d^h K + K d^h = id", row_contraction),
    ("fiber-homotopy", "dQ + Qd = 1 - e*π*", q_homotopy),
    ("column-contraction", "d_v L + L d_v = id", column_contraction),
    ("total-differential", "D² = 0", total_square),
    ("splitting", "d^h T d^h = d^h", splitting),
];

/// Runs every suite until `count` nonzero instances have been checked.
pub fn run(opts: &SelftestOptions) -> Result<SelftestReport> {
    let fx = fixtures(&ComplexOptions::default())?;
    let mut suites = Vec::new();
    for (i, (name, identity, check)) in SUITES.iter().enumerate() {
        let mut rng = random::rng(opts.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(i as u64));
        let mut res = SuiteResult { name, identity, instances: 0, failures: 0, first_failure: None, passed: false };
        let mut attempt = 0usize;
        while res.instances < opts.count && attempt < 20 * opts.count + 100 {
            let f = &fx[attempt % fx.len()];
            let slot = attempt / fx.len();
            attempt += 1;
            match check(f, &mut rng, slot, opts.inject_fault) {
                Ok(None) => {}
                Ok(Some(true)) => res.instances += 1,
                Ok(Some(false)) => {
                    res.instances += 1;
                    res.failures += 1;
                    res.first_failure.get_or_insert_with(|| format!("{}: instance {}", f.name, res.instances));
                }
                Err(e) => {
                    res.instances += 1;
                    res.failures += 1;
                    res.first_failure.get_or_insert_with(|| format!("{}: {e}", f.name));
                }
            }
        }
        res.passed = res.failures == 0 && res.instances >= opts.count;
        suites.push(res);
    }
    let passed = suites.iter().all(|s| s.passed);
    Ok(SelftestReport { seed: opts.seed, per_identity: opts.count, suites, passed })
}
