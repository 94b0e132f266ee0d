use crate::model::Parameter;
use crate::par;
use crate::sim::EnvValuation;
use crate::Rational;

use super::EquivError;

/// The integer box spanned by the model parameters.
#[derive(Debug, Clone)]
pub struct SearchSpace {
    params: Vec<Parameter>,
    size: u128,
    /// Per-dimension increments of the R_d low-discrepancy sequence.
    alpha: Vec<f64>,
}

impl SearchSpace {
    pub fn new(params: &[Parameter]) -> Self {
        let d = params.len();
        // phi_d is the positive root of x^(d+1) = x + 1.
        let mut phi = 2.0f64;
        for _ in 0..64 {
            phi = (1.0 + phi).powf(1.0 / (d as f64 + 1.0));
        }
        let alpha = (1..=d).map(|j| phi.powi(-(j as i32))).collect();
        let size = params.iter().fold(1u128, |acc, p| acc.saturating_mul(p.domain_size()));
        SearchSpace { params: params.to_vec(), size, alpha }
    }

    pub fn size(&self) -> u128 {
        self.size
    }

    /// Valuation number `index` in lexicographic order, the last parameter
    /// varying fastest.
    pub fn decode(&self, mut index: u128) -> EnvValuation {
        let mut values = vec![0i64; self.params.len()];
        for (slot, p) in values.iter_mut().zip(&self.params).rev() {
            let n = p.domain_size();
            *slot = p.lo + (index % n) as i64;
            index /= n;
        }
        self.valuation(&values)
    }

    /// Point `k` of the quasi-random sequence, mapped into the box.
    pub fn quasi_random(&self, k: u64) -> EnvValuation {
        let values: Vec<i64> = self
            .params
            .iter()
            .zip(&self.alpha)
            .map(|(p, a)| {
                let u = (0.5 + a * (k as f64 + 1.0)).fract();
                let offset = (u * p.domain_size() as f64).floor() as i128;
                (p.lo as i128 + offset).min(p.hi as i128) as i64
            })
            .collect();
        self.valuation(&values)
    }

    fn valuation(&self, values: &[i64]) -> EnvValuation {
        EnvValuation(self.params.iter().zip(values).map(|(p, v)| (p.name.clone(), *v)).collect())
    }

    /// Neighbours one step away along each axis, in parameter order.
    fn neighbours(&self, env: &EnvValuation) -> Vec<EnvValuation> {
        let mut out = Vec::new();
        for p in &self.params {
            let v = env.get(&p.name).expect("complete valuation");
            for next in [v.checked_sub(1), v.checked_add(1)].into_iter().flatten() {
                if (p.lo..=p.hi).contains(&next) {
                    let mut n = env.clone();
                    n.0.insert(p.name.clone(), next);
                    out.push(n);
                }
            }
        }
        out
    }
}

type Scored = (EnvValuation, (Rational, Rational));

/// First strictly largest divergence wins.
fn best_of(scored: Vec<Scored>) -> Option<Scored> {
    scored.into_iter().reduce(|best, s| if s.1 .0 > best.1 .0 { s } else { best })
}

/// Returns the best valuation, the number of evaluations and whether the
/// whole space was covered.
pub(super) fn run<F>(space: &SearchSpace, budget: u64, eval: F) -> Result<(Scored, u64, bool), EquivError>
where
    F: Fn(&EnvValuation) -> Result<(Rational, Rational), EquivError> + Sync + Send,
{
    if space.size() == 0 {
        return Err(EquivError::InvalidProblem("empty parameter space".into()));
    }
    let score = |env: EnvValuation| eval(&env).map(|d| (env, d));
    if space.size() <= budget as u128 {
        let n = space.size() as usize;
        let scored = par::map_range(n, |i| score(space.decode(i as u128))).into_iter().collect::<Result<_, _>>()?;
        return Ok((best_of(scored).expect("non-empty space"), n as u64, true));
    }

    let scored = par::map_range(budget as usize, |k| score(space.quasi_random(k as u64)))
        .into_iter()
        .collect::<Result<_, _>>()?;
    let mut best = best_of(scored).expect("budget is positive");
    let mut explored = budget;
    let mut extra = 0u64;
    'ascent: loop {
        let mut improved = false;
        for cand in space.neighbours(&best.0) {
            if extra == budget {
                break 'ascent;
            }
            extra += 1;
            let s = score(cand)?;
            if s.1 .0 > best.1 .0 {
                best = s;
                improved = true;
                break;
            }
        }
        if !improved {
            break;
        }
    }
    explored += extra;
    Ok((best, explored, false))
}
