//! Self-check suite: numerically verifies the closed-form identities and
//! the gradient engine on randomized instances. Backs `mixgan --task
//! verify`; every check reports its tolerance and the worst deviation seen.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::divergences::{
    complement_pdf, mixture_pdf, optimal_adversarial, optimal_supplementary,
    value_from_definition, value_js_form, value_kl_form, DiscreteDistribution, DivergenceError,
    MixtureModel,
};
use crate::models::{Mlp, MlpSpec, OutputActivation, StagedMlp};
use crate::rng;
use crate::tape::Tape;
use crate::tensor::Tensor;

/// Outcome of one verification check.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub tolerance: f64,
    pub max_deviation: f64,
    pub pass: bool,
}

impl CheckResult {
    fn new(name: &str, tolerance: f64, max_deviation: f64) -> Self {
        CheckResult {
            name: name.to_string(),
            tolerance,
            max_deviation,
            pass: max_deviation <= tolerance,
        }
    }

    pub fn summary_line(&self) -> String {
        format!(
            "{}: {} (tolerance {:e}, max deviation {:.3e})",
            self.name,
            if self.pass { "PASS" } else { "FAIL" },
            self.tolerance,
            self.max_deviation
        )
    }
}

/// A random instance with support 2..=16, K in {2,3,4}, every density
/// floored at 1e-3 and renormalized so no sentinel is reachable.
pub fn random_floored_instance(
    r: &mut ChaCha8Rng,
) -> (DiscreteDistribution, MixtureModel) {
    let support = r.gen_range(2..=16);
    let k = r.gen_range(2..=4);
    let mut draw = |n: usize| -> DiscreteDistribution {
        let raw: Vec<f64> = (0..n).map(|_| r.gen::<f64>().max(1e-3)).collect();
        DiscreteDistribution::normalized(&raw).expect("positive weights")
    };
    let p_real = draw(support);
    let components: Vec<_> = (0..k).map(|_| draw(support)).collect();
    (p_real, MixtureModel::uniform(components).expect("shared support"))
}

fn optimal_tables(
    p_real: &DiscreteDistribution,
    m: &MixtureModel,
) -> Result<(Vec<f64>, Vec<Vec<f64>>), DivergenceError> {
    let h = optimal_adversarial(p_real, &mixture_pdf(m))?;
    let hks = (0..m.component_count())
        .map(|k| optimal_supplementary(m, k))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((h, hks))
}

/// Value-function identity chain over `instances` random instances,
/// with the JS route supplied by the caller (tests inject mutants).
pub fn identity_chain_check_with<J>(seed: u64, instances: usize, js_form: J) -> CheckResult
where
    J: Fn(&DiscreteDistribution, &MixtureModel) -> Result<f64, DivergenceError>,
{
    let mut r = rng::stream(seed, "verify:identity");
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let (p_real, m) = random_floored_instance(&mut r);
        let (h, hks) = match optimal_tables(&p_real, &m) {
            Ok(t) => t,
            Err(_) => return CheckResult::new("value identity chain", 1e-9, f64::INFINITY),
        };
        let routes = (
            value_from_definition(&p_real, &m, &h, &hks),
            value_kl_form(&p_real, &m),
            js_form(&p_real, &m),
        );
        match routes {
            (Ok(def), Ok(kl), Ok(js)) => {
                worst = worst.max((def - kl).abs()).max((kl - js).abs());
            }
            _ => return CheckResult::new("value identity chain", 1e-9, f64::INFINITY),
        }
    }
    CheckResult::new("value identity chain", 1e-9, worst)
}

pub fn identity_chain_check(seed: u64, instances: usize) -> CheckResult {
    identity_chain_check_with(seed, instances, value_js_form)
}

/// Σ_k h_k* = 1 pointwise on random instances.
pub fn supplementary_partition_check(seed: u64, instances: usize) -> CheckResult {
    let mut r = rng::stream(seed, "verify:partition");
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let (_, m) = random_floored_instance(&mut r);
        let tables: Vec<Vec<f64>> = (0..m.component_count())
            .map(|k| optimal_supplementary(&m, k).expect("uniform weights"))
            .collect();
        for x in 0..m.support_size() {
            let total: f64 = tables.iter().map(|t| t[x]).sum();
            worst = worst.max((total - 1.0).abs());
        }
    }
    CheckResult::new("optimal supplementary responses sum to 1", 1e-12, worst)
}

/// h* is exactly 1/2 when the real density equals the mixture.
pub fn adversarial_fixed_point_check(seed: u64, instances: usize) -> CheckResult {
    let mut r = rng::stream(seed, "verify:fixed-point");
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let (_, m) = random_floored_instance(&mut r);
        let mix = mixture_pdf(&m);
        let table = optimal_adversarial(&mix, &mix).expect("shared support");
        for v in table {
            worst = worst.max((v - 0.5).abs());
        }
    }
    CheckResult::new("adversarial optimum is 1/2 at equality", 1e-12, worst)
}

/// All-equal K=2 instance evaluates to ln 4 on all three routes.
pub fn ln4_fixed_point_check() -> CheckResult {
    let c = DiscreteDistribution::new(vec![0.5, 0.5]).expect("normalized");
    let m = MixtureModel::uniform(vec![c.clone(), c.clone()]).expect("shared support");
    let ln4 = (4.0f64).ln();
    let mut worst: f64 = 0.0;
    if let Ok((h, hks)) = optimal_tables(&c, &m) {
        if let Ok(def) = value_from_definition(&c, &m, &h, &hks) {
            worst = worst.max((def - ln4).abs());
        }
        if let Ok(kl) = value_kl_form(&c, &m) {
            worst = worst.max((kl - ln4).abs());
        }
        if let Ok(js) = value_js_form(&c, &m) {
            worst = worst.max((js - ln4).abs());
        }
    } else {
        worst = f64::INFINITY;
    }
    CheckResult::new("all-equal K=2 value is ln 4", 1e-12, worst)
}

/// Mean of the complement densities recovers the mixture pointwise.
pub fn complement_mixture_check(seed: u64, instances: usize) -> CheckResult {
    let mut r = rng::stream(seed, "verify:complement");
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let (_, m) = random_floored_instance(&mut r);
        let k = m.component_count();
        let mix = mixture_pdf(&m);
        let mut mean = vec![0.0; m.support_size()];
        for idx in 0..k {
            let c = complement_pdf(&m, idx).expect("uniform weights");
            for (acc, &p) in mean.iter_mut().zip(c.probabilities()) {
                *acc += p / k as f64;
            }
        }
        for (a, b) in mean.iter().zip(mix.probabilities()) {
            worst = worst.max((a - b).abs());
        }
    }
    CheckResult::new("complement mean recovers mixture", 1e-12, worst)
}

/// Tape gradients of a 2-layer sigmoid MLP under a BCE-style loss against
/// central finite differences (h = 1e-6), relative error.
#[allow(clippy::needless_range_loop)]
pub fn gradient_check(seed: u64) -> CheckResult {
    let spec = MlpSpec::new(vec![4, 6, 1], OutputActivation::Sigmoid).expect("valid spec");
    let mlp = Mlp::init(spec, rng::derive_seed(seed, "verify:gradcheck"));
    let mut r = rng::stream(seed, "verify:gradcheck-data");
    let batch = 3;
    let x = Tensor::new(
        vec![batch, 4],
        (0..batch * 4).map(|_| r.gen_range(-2.0..2.0)).collect(),
    )
    .expect("shape");
    let y = Tensor::new(vec![batch, 1], vec![1.0, 0.0, 1.0]).expect("shape");

    let loss_of = |mlp: &Mlp| -> f64 {
        let mut tape = Tape::new();
        let staged = StagedMlp::stage(&mut tape, mlp);
        let x_id = tape.leaf(x.clone());
        let y_id = tape.leaf(y.clone());
        let p = staged.forward(&mut tape, x_id).expect("forward");
        let log_p = tape.log_clamped(p, 1e-12);
        let q = tape.one_minus(p);
        let log_q = tape.log_clamped(q, 1e-12);
        let not_y = tape.one_minus(y_id);
        let pos = tape.mul(y_id, log_p).expect("shapes");
        let neg = tape.mul(not_y, log_q).expect("shapes");
        let s = tape.add(pos, neg).expect("shapes");
        let m = tape.mean(s);
        let loss = tape.neg(m);
        tape.value(loss).item()
    };

    // Analytic gradients.
    let grads: Vec<Vec<f64>> = {
        let mut tape = Tape::new();
        let staged = StagedMlp::stage(&mut tape, &mlp);
        let x_id = tape.leaf(x.clone());
        let y_id = tape.leaf(y.clone());
        let p = staged.forward(&mut tape, x_id).expect("forward");
        let log_p = tape.log_clamped(p, 1e-12);
        let q = tape.one_minus(p);
        let log_q = tape.log_clamped(q, 1e-12);
        let not_y = tape.one_minus(y_id);
        let pos = tape.mul(y_id, log_p).expect("shapes");
        let neg = tape.mul(not_y, log_q).expect("shapes");
        let s = tape.add(pos, neg).expect("shapes");
        let m = tape.mean(s);
        let loss = tape.neg(m);
        tape.backward(loss).expect("scalar loss");
        staged
            .grads(&tape)
            .iter()
            .map(|g| g.values().to_vec())
            .collect()
    };

    let h = 1e-6;
    let mut worst: f64 = 0.0;
    let param_count = mlp.params().len();
    let mut probe = mlp.clone();
    for pi in 0..param_count {
        for vi in 0..mlp.params()[pi].numel() {
            let original = mlp.params()[pi].values()[vi];
            probe.params_mut()[pi].values_mut()[vi] = original + h;
            let plus = loss_of(&probe);
            probe.params_mut()[pi].values_mut()[vi] = original - h;
            let minus = loss_of(&probe);
            probe.params_mut()[pi].values_mut()[vi] = original;
            let fd = (plus - minus) / (2.0 * h);
            let tape_g = grads[pi][vi];
            let denom = fd.abs().max(tape_g.abs()).max(1e-3);
            worst = worst.max((fd - tape_g).abs() / denom);
        }
    }
    CheckResult::new("mlp gradients vs finite differences", 1e-4, worst)
}

/// The full suite in a fixed order.
pub fn run_all(seed: u64) -> Vec<CheckResult> {
    vec![
        identity_chain_check(seed, 100),
        supplementary_partition_check(seed, 50),
        adversarial_fixed_point_check(seed, 50),
        ln4_fixed_point_check(),
        complement_mixture_check(seed, 50),
        gradient_check(seed),
    ]
}
