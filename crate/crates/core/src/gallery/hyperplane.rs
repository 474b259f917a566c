//! Families attaining the `δ(n-1)` inequalities: the flat-ambient family
//! built from a phase function of `λ`, and the projective family built from
//! an ODE in `(θ, λ, μ)`.

use std::sync::Arc;

use num_complex::Complex64;

use super::legendrian::LegendrianMap;
use super::{Ambient, ImmersionChart};
use crate::error::{Error, Result};

fn check_family(n: usize, phi: &dyn LegendrianMap) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("family needs n >= 2, got {n}")));
    }
    if phi.target_dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: phi.target_dim(),
        });
    }
    Ok(())
}

/// Open admissible interval `(0, ((n+1)b)^{(n-1)/n})` of `λ`; both
/// constraints share the right endpoint.
pub fn theorem92_interval(n: usize, b: f64) -> (f64, f64) {
    let nf = n as f64;
    (0.0, ((nf + 1.0) * b).powf((nf - 1.0) / nf))
}

fn csc_argument(n: usize, b: f64, lambda: f64) -> Result<f64> {
    if !(b > 0.0) {
        return Err(Error::Domain(format!("b must be positive, got {b}")));
    }
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("λ must be positive, got {lambda}")));
    }
    let nf = n as f64;
    let arg = (nf + 1.0) * b * lambda.powf(nf / (1.0 - nf));
    if !(arg >= 1.0) {
        return Err(Error::Domain(format!(
            "csc⁻¹ argument (n+1)bλ^(n/(1-n)) = {arg} is below 1 at λ = {lambda}"
        )));
    }
    Ok(arg)
}

/// `φ(λ) = -((n+1)/n) csc⁻¹((n+1) b λ^{n/(1-n)})`, principal branch
/// `csc⁻¹ x = asin(1/x)`.
pub fn phase_of_lambda(n: usize, b: f64, lambda: f64) -> Result<f64> {
    let arg = csc_argument(n, b, lambda)?;
    let nf = n as f64;
    Ok(-(nf + 1.0) / nf * (1.0 / arg).asin())
}

/// `μ(λ) = sqrt(b² λ^{2/(1-n)} - λ²/(n+1)²)`.
pub fn mu_of_lambda(n: usize, b: f64, lambda: f64) -> Result<f64> {
    csc_argument(n, b, lambda)?;
    let nf = n as f64;
    let sq = b * b * lambda.powf(2.0 / (1.0 - nf)) - lambda * lambda / ((nf + 1.0) * (nf + 1.0));
    if !(sq > 0.0) {
        return Err(Error::Domain(format!(
            "b²λ^(2/(1-n)) - λ²/(n+1)² = {sq} is not positive at λ = {lambda}"
        )));
    }
    Ok(sq.sqrt())
}

/// `L(λ, u) = (n+1) e^{-iφ(λ)} / ((n+1)μ(λ) + iλ) · ψ(u)` for a minimal
/// Legendrian `ψ` into `S^{2n-1}`; chart coordinates `(λ, u_2, .., u_n)`.
pub fn theorem92_chart(n: usize, b: f64, legendrian_phi: Arc<dyn LegendrianMap>) -> Result<ImmersionChart> {
    check_family(n, legendrian_phi.as_ref())?;
    if !(b > 0.0) {
        return Err(Error::Domain(format!("b must be positive, got {b}")));
    }
    let nf = n as f64;
    let (lo, hi) = theorem92_interval(n, b);
    let mut bounds = vec![(f64::NEG_INFINITY, f64::INFINITY); n];
    bounds[0] = (lo, hi);
    Ok(ImmersionChart::new(n, Ambient::Flat, move |x: &[f64]| {
        let lambda = x[0];
        let ph = phase_of_lambda(n, b, lambda)?;
        let mu = mu_of_lambda(n, b, lambda)?;
        let f = Complex64::from_polar(nf + 1.0, -ph) / Complex64::new((nf + 1.0) * mu, lambda);
        Ok(legendrian_phi.eval(&x[1..]).into_iter().map(|z| f * z).collect())
    })
    .with_bounds(bounds))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeState93 {
    pub t: f64,
    pub theta: f64,
    pub lambda: f64,
    pub mu: f64,
}

impl OdeState93 {
    /// `(θ, λ, μ)(0) = (0, 1, 0)`.
    pub fn default_init() -> Self {
        OdeState93 { t: 0.0, theta: 0.0, lambda: 1.0, mu: 0.0 }
    }
}

/// `dθ/dt = -λ/(n+1)`, `dλ/dt = (n-1)λμ`, `dμ/dt = -1 - μ² - nλ²/(n+1)²`.
fn rhs(n: usize, s: [f64; 3]) -> [f64; 3] {
    let nf = n as f64;
    let [_, l, m] = s;
    [
        -l / (nf + 1.0),
        (nf - 1.0) * l * m,
        -1.0 - m * m - nf * l * l / ((nf + 1.0) * (nf + 1.0)),
    ]
}

fn rk4(n: usize, s: [f64; 3], h: f64) -> [f64; 3] {
    let add = |a: [f64; 3], k: [f64; 3], w: f64| [a[0] + w * k[0], a[1] + w * k[1], a[2] + w * k[2]];
    let k1 = rhs(n, s);
    let k2 = rhs(n, add(s, k1, h / 2.0));
    let k3 = rhs(n, add(s, k2, h / 2.0));
    let k4 = rhs(n, add(s, k3, h));
    let mut out = s;
    for i in 0..3 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory93 {
    pub n: usize,
    pub step: f64,
    pub states: Vec<OdeState93>,
    /// Set when `λ` reached zero before the end of the requested range.
    pub truncated: bool,
}

impl Trajectory93 {
    pub fn start(&self) -> f64 {
        self.states[0].t
    }

    pub fn end(&self) -> f64 {
        self.states[self.states.len() - 1].t
    }

    /// Largest deviation of the five-point central difference of the nodes
    /// from the right-hand side, over interior nodes.
    pub fn residual(&self) -> f64 {
        let s: Vec<[f64; 3]> = self.states.iter().map(|x| [x.theta, x.lambda, x.mu]).collect();
        let h = self.step;
        let mut worst = 0.0f64;
        for k in 2..s.len().saturating_sub(2) {
            let f = rhs(self.n, s[k]);
            for i in 0..3 {
                let d = (-s[k + 2][i] + 8.0 * s[k + 1][i] - 8.0 * s[k - 1][i] + s[k - 2][i]) / (12.0 * h);
                worst = worst.max((d - f[i]).abs());
            }
        }
        worst
    }

    /// State at time `t`, by a partial RK4 step from the preceding node.
    pub fn at(&self, t: f64) -> Result<OdeState93> {
        let (a, b) = (self.start(), self.end());
        if !(t >= a && t <= b) {
            return Err(Error::Domain(format!("t = {t} outside the trajectory [{a}, {b}]")));
        }
        let k = (((t - a) / self.step).floor() as usize).min(self.states.len() - 1);
        let s = self.states[k];
        let [theta, lambda, mu] = rk4(self.n, [s.theta, s.lambda, s.mu], t - s.t);
        Ok(OdeState93 { t, theta, lambda, mu })
    }
}

/// Fixed-step RK4 from `init` over `[init.t, t_end]`.
pub fn ode93_integrate(n: usize, init: OdeState93, t_end: f64, step: f64) -> Result<Trajectory93> {
    if !(init.lambda != 0.0) {
        return Err(Error::Domain("initial λ must be non-zero".into()));
    }
    if !(step > 0.0) || !(t_end > init.t) {
        return Err(Error::InvalidInput(format!("need step > 0 and t_end > t0, got {step}, {t_end}")));
    }
    let steps = ((t_end - init.t) / step).round() as usize;
    let sign = init.lambda.signum();
    let mut states = Vec::with_capacity(steps + 1);
    states.push(init);
    let mut cur = [init.theta, init.lambda, init.mu];
    let mut truncated = false;
    for k in 1..=steps {
        let next = rk4(n, cur, step);
        if !(next[1] * sign > 1e-12) || !next.iter().all(|v| v.is_finite()) {
            truncated = true;
            break;
        }
        cur = next;
        states.push(OdeState93 {
            t: init.t + k as f64 * step,
            theta: cur[0],
            lambda: cur[1],
            mu: cur[2],
        });
    }
    Ok(Trajectory93 { n, step, states, truncated })
}

/// Residuals at successive step halvings and the observed orders.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderCheck {
    /// `(step, residual)`, coarsest first.
    pub residuals: Vec<(f64, f64)>,
    /// `log2` of consecutive residual ratios.
    pub orders: Vec<f64>,
}

impl OrderCheck {
    /// Order from the coarsest pair, where rounding has not yet set in.
    pub fn leading_order(&self) -> f64 {
        self.orders[0]
    }
}

/// Residuals at `8h, 4h, 2h, h`.
pub fn ode93_order_check(n: usize, init: OdeState93, t_end: f64, step: f64) -> Result<OrderCheck> {
    let mut residuals = Vec::new();
    for f in [8.0, 4.0, 2.0, 1.0] {
        let tr = ode93_integrate(n, init, t_end, step * f)?;
        residuals.push((step * f, tr.residual()));
    }
    let orders = residuals.windows(2).map(|w| (w[0].1 / w[1].1).log2()).collect();
    Ok(OrderCheck { residuals, orders })
}

/// `L(t, u) = (e^{-iθ}ψ(u), (iλ/(n+1) - μ) e^{-inθ}) / sqrt(1 + μ² + λ²/(n+1)²)`
/// in `S^{2n+1}`, chart coordinates `(t, u_2, .., u_n)` with `t` restricted to
/// `window`.
pub fn theorem93_chart(
    trajectory: &Trajectory93,
    window: (f64, f64),
    legendrian_phi: Arc<dyn LegendrianMap>,
) -> Result<ImmersionChart> {
    let n = trajectory.n;
    check_family(n, legendrian_phi.as_ref())?;
    if window.1 > trajectory.end() || window.0 < trajectory.start() {
        let why = if trajectory.truncated { "trajectory truncated at λ = 0" } else { "trajectory too short" };
        return Err(Error::Domain(format!(
            "{why}: window [{}, {}] exceeds [{}, {}]",
            window.0,
            window.1,
            trajectory.start(),
            trajectory.end()
        )));
    }
    let tr = trajectory.clone();
    let nf = n as f64;
    let mut bounds = vec![(f64::NEG_INFINITY, f64::INFINITY); n];
    bounds[0] = window;
    Ok(ImmersionChart::new(n, Ambient::Sphere, move |x: &[f64]| {
        let s = tr.at(x[0])?;
        let d = (1.0 + s.mu * s.mu + s.lambda * s.lambda / ((nf + 1.0) * (nf + 1.0))).sqrt();
        let e1 = Complex64::from_polar(1.0 / d, -s.theta);
        let mut v: Vec<Complex64> = legendrian_phi.eval(&x[1..]).into_iter().map(|z| e1 * z).collect();
        let last = Complex64::new(-s.mu, s.lambda / (nf + 1.0)) * Complex64::from_polar(1.0 / d, -nf * s.theta);
        v.push(last);
        Ok(v)
    })
    .with_bounds(bounds))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::{clifford_legendrian, horizontality, induced_data_flat, induced_data_horizontal, omega_pullback};
    use crate::lagrangian::mean_curvature;

    #[test]
    fn phase_domain_errors() {
        let (_, hi) = theorem92_interval(3, 1.0);
        assert!((hi - 16f64.powf(1.0 / 3.0)).abs() < 1e-14);
        assert!(phase_of_lambda(3, 1.0, 1.0).is_ok());
        assert!(matches!(phase_of_lambda(3, 1.0, hi * 1.01), Err(Error::Domain(m)) if m.contains("csc")));
        assert!(matches!(mu_of_lambda(3, 1.0, -1.0), Err(Error::Domain(m)) if m.contains("positive")));
        let mu = mu_of_lambda(3, 1.0, 1.0).unwrap();
        assert!((mu - (1.0f64 - 1.0 / 16.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn theorem92_is_lagrangian_and_not_minimal() {
        let chart = theorem92_chart(3, 1.0, Arc::new(clifford_legendrian(3).unwrap())).unwrap();
        let x = [1.2, 0.4, -0.9];
        assert!(omega_pullback(&chart, &x).unwrap() < 1e-8);
        let e = induced_data_flat(&chart, &x).unwrap();
        assert!(mean_curvature(&e.data.h).1 > 1e-3);
    }

    #[test]
    fn ode_residual_and_sign() {
        let tr = ode93_integrate(3, OdeState93::default_init(), 0.5, 1e-3).unwrap();
        assert_eq!(tr.states.len(), 501);
        assert!(!tr.truncated);
        assert!(tr.residual() < 1e-9, "{}", tr.residual());
        assert!(tr.states.iter().all(|s| s.lambda > 0.0));
        let oc = ode93_order_check(3, OdeState93::default_init(), 0.5, 1e-3).unwrap();
        assert!((oc.leading_order() - 4.0).abs() < 0.5, "{oc:?}");
        assert!(ode93_integrate(3, OdeState93 { lambda: 0.0, ..OdeState93::default_init() }, 1.0, 1e-3).is_err());
    }

    #[test]
    fn theorem93_chart_is_horizontal() {
        let tr = ode93_integrate(3, OdeState93::default_init(), 0.5, 1e-3).unwrap();
        let chart = theorem93_chart(&tr, (0.0, 0.5), Arc::new(clifford_legendrian(3).unwrap())).unwrap();
        let x = [0.25, 0.3, 1.1];
        let v = chart.eval(&x).unwrap();
        assert!((super::super::re_dot(&v, &v) - 1.0).abs() < 1e-12);
        assert!(horizontality(&chart, &x).unwrap() < 1e-6);
        assert!(induced_data_horizontal(&chart, &x).is_ok());
        assert!(theorem93_chart(&tr, (0.0, 0.6), Arc::new(clifford_legendrian(3).unwrap())).is_err());
    }
}
