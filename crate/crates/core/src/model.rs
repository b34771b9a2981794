//! Parameter types for the two-level master equation and the map from the
//! Hermitian environment coupling matrix to Bloch-equation rates and drifts.
//!
//! Rates are stored as non-negative damping coefficients: a positive `gamma3`
//! means `Z` decays. The thermal-bath family follows the same convention, so
//! `thermal_bath(g, n)` has positive `gamma1..3` and the drift `c3 = -g`
//! that pulls `Z` towards the lower level.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance on `a[i][j] - conj(a[j][i])`.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Residuals within this distance of zero count as satisfied.
pub const CP_TOL: f64 = 1e-10;

/// Norm slack allowed on integrator output.
pub const PHYSICAL_TOL: f64 = 1e-6;

/// 3x3 Hermitian coupling matrix `A` of the dissipator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingMatrix {
    a: [[Complex64; 3]; 3],
}

impl CouplingMatrix {
    pub fn new(a: [[Complex64; 3]; 3]) -> Result<Self> {
        for i in 0..3 {
            for j in i..3 {
                let mismatch = (a[i][j] - a[j][i].conj()).norm();
                if mismatch > HERMITIAN_TOL {
                    return Err(Error::NonHermitian {
                        i: i + 1,
                        j: j + 1,
                        mismatch,
                    });
                }
            }
        }
        Ok(Self { a })
    }

    pub fn zero() -> Self {
        Self {
            a: [[Complex64::new(0.0, 0.0); 3]; 3],
        }
    }

    /// Entry with 1-based indices, matching the `a_ij` notation.
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.a[i - 1][j - 1]
    }

    pub fn entries(&self) -> &[[Complex64; 3]; 3] {
        &self.a
    }
}

/// Dissipator rates and drifts of `v' = M v + C`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DissipatorParams {
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma_sym: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl DissipatorParams {
    /// Transverse rate `gamma_r` on X and Y, longitudinal rate `gamma` on Z.
    pub fn uniaxial(gamma_r: f64, gamma: f64) -> Self {
        Self {
            gamma1: gamma_r,
            gamma2: gamma_r,
            gamma3: gamma,
            ..Self::default()
        }
    }

    pub fn isotropic(g: f64) -> Self {
        Self::uniaxial(g, g)
    }

    pub fn is_zero(&self) -> bool {
        self.as_array().iter().all(|&x| x == 0.0)
    }

    /// `(gamma_r, gamma)` when the dissipator is diagonal with `gamma1 == gamma2`.
    pub fn uniaxial_rates(&self) -> Option<(f64, f64)> {
        let diagonal = self.alpha == 0.0 && self.beta == 0.0 && self.gamma_sym == 0.0;
        (diagonal && self.gamma1 == self.gamma2).then_some((self.gamma1, self.gamma3))
    }

    fn as_array(&self) -> [f64; 9] {
        [
            self.gamma1,
            self.gamma2,
            self.gamma3,
            self.alpha,
            self.beta,
            self.gamma_sym,
            self.c1,
            self.c2,
            self.c3,
        ]
    }
}

/// Hamiltonian `H = (delta sx + delta_prime sy + omega0(t) sz) / 2` plus the
/// drive amplitude and frequency of `omega0(t) = b0 cos(omega0_freq t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianParams {
    pub delta: f64,
    pub delta_prime: f64,
    pub b0: f64,
    pub omega0_freq: f64,
}

impl HamiltonianParams {
    pub fn new(delta: f64, omega0_freq: f64) -> Self {
        Self {
            delta,
            delta_prime: 0.0,
            b0: 1.0,
            omega0_freq,
        }
    }

    /// Sweep rate `b0 * omega0_freq` of the drive near a zero.
    pub fn slope(&self) -> f64 {
        self.b0 * self.omega0_freq
    }
}

impl Default for HamiltonianParams {
    fn default() -> Self {
        Self::new(0.0, 0.0)
    }
}

/// How the `Z` drift is treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RelaxationMode {
    /// Constant drift `C`, nominally zero.
    #[default]
    None,
    /// Constant drift `C` together with damping.
    Homogeneous,
    /// `C3 = -gamma3 * sign(omega0(t))`: relaxation towards the instantaneous lower level.
    SignFollowing,
}

impl RelaxationMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            RelaxationMode::None => "none",
            RelaxationMode::Homogeneous => "homogeneous",
            RelaxationMode::SignFollowing => "sign_following",
        }
    }
}

impl std::str::FromStr for RelaxationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "homogeneous" => Ok(Self::Homogeneous),
            "sign_following" => Ok(Self::SignFollowing),
            other => Err(Error::Validation(format!(
                "unknown relaxation_mode '{other}' (expected none, homogeneous or sign_following)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SystemParams {
    pub hamiltonian: HamiltonianParams,
    pub dissipator: DissipatorParams,
    pub relaxation_mode: RelaxationMode,
}

impl SystemParams {
    pub fn unitary(hamiltonian: HamiltonianParams) -> Self {
        Self {
            hamiltonian,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let h = &self.hamiltonian;
        let d = &self.dissipator;
        let all = [h.delta, h.delta_prime, h.b0, h.omega0_freq]
            .into_iter()
            .chain(d.as_array());
        if all.into_iter().any(|x| !x.is_finite()) {
            return Err(Error::Validation("parameters must be finite".into()));
        }
        if h.b0 < 0.0 {
            return Err(Error::Validation(format!("b0 must be >= 0, got {}", h.b0)));
        }
        if h.omega0_freq < 0.0 {
            return Err(Error::Validation(format!(
                "omega0 must be >= 0, got {}",
                h.omega0_freq
            )));
        }
        if self.relaxation_mode == RelaxationMode::SignFollowing && d.gamma3 < 0.0 {
            return Err(Error::Validation(format!(
                "sign_following relaxation requires gamma3 >= 0, got {}",
                d.gamma3
            )));
        }
        Ok(())
    }
}

/// Bloch vector `(X, Y, Z)` of `rho = (1 + X sx + Y sy + Z sz) / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BlochState {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochState {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    /// Fully magnetized along `+z`.
    pub const fn up() -> Self {
        Self::new(0.0, 0.0, 1.0)
    }

    /// Fully magnetized along `-z`.
    pub const fn down() -> Self {
        Self::new(0.0, 0.0, -1.0)
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn is_physical(&self, tol: f64) -> bool {
        self.x * self.x + self.y * self.y + self.z * self.z <= 1.0 + tol
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(v: [f64; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }
}

/// Rates and drifts of the Bloch equation generated by `A`.
pub fn rates_from_coupling(a: &CouplingMatrix) -> DissipatorParams {
    let e = |i, j| a.get(i, j);
    let two_i = Complex64::new(0.0, 2.0);
    DissipatorParams {
        gamma1: 2.0 * (e(2, 2) + e(3, 3)).re,
        gamma2: 2.0 * (e(3, 3) + e(1, 1)).re,
        gamma3: 2.0 * (e(1, 1) + e(2, 2)).re,
        alpha: (e(1, 2) + e(2, 1)).re,
        beta: (e(1, 3) + e(3, 1)).re,
        gamma_sym: (e(2, 3) + e(3, 2)).re,
        c1: (two_i * (e(2, 3) - e(3, 2))).re,
        c2: (two_i * (e(3, 1) - e(1, 3))).re,
        c3: (two_i * (e(1, 2) - e(2, 1))).re,
    }
}

/// Isotropic thermal bath with coupling `g` and mean phonon number `n_bar`.
pub fn thermal_bath(g: f64, n_bar: f64) -> Result<DissipatorParams> {
    if !(g >= 0.0) || !g.is_finite() {
        return Err(Error::Validation(format!("bath coupling g must be >= 0, got {g}")));
    }
    if !(n_bar >= 0.0) || !n_bar.is_finite() {
        return Err(Error::Validation(format!(
            "mean phonon number must be >= 0, got {n_bar}"
        )));
    }
    let transverse = g * (n_bar + 0.5);
    Ok(DissipatorParams {
        gamma1: transverse,
        gamma2: transverse,
        gamma3: g * (2.0 * n_bar + 1.0),
        c3: -g,
        ..DissipatorParams::default()
    })
}

/// One inequality of the complete-positivity audit.
#[derive(Debug, Clone, PartialEq)]
pub struct CpCheck {
    pub id: &'static str,
    /// Satisfied margin; negative means violated.
    pub residual: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CpReport {
    pub checks: Vec<CpCheck>,
    pub pass: bool,
}

impl CpReport {
    pub fn get(&self, id: &str) -> Option<&CpCheck> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn worst(&self) -> Option<&CpCheck> {
        self.checks
            .iter()
            .min_by(|a, b| a.residual.total_cmp(&b.residual))
    }
}

/// Complete-positivity audit of the dissipator.
///
/// The conditions are the principal-minor conditions of `A >= 0` rewritten in
/// the rate/drift variables:
///
/// * `triangle_k`: `0 <= gamma_k <= gamma_i + gamma_j` (residual is the smaller margin);
/// * `quadratic_k`: `4 (s^2 + C_k^2 / 4) <= gamma_k^2 - (gamma_i - gamma_j)^2`
///   with `s` the symmetric term opposite to `k`;
/// * `cubic`: the mixed inequality, whose residual equals `16 det A`.
pub fn cp_audit(d: &DissipatorParams) -> CpReport {
    let DissipatorParams {
        gamma1: g1,
        gamma2: g2,
        gamma3: g3,
        alpha: a,
        beta: b,
        gamma_sym: s,
        c1,
        c2,
        c3,
    } = *d;

    let triangle = |gk: f64, gi: f64, gj: f64| gk.min(gi + gj - gk);
    let quadratic = |sym: f64, ck: f64, gk: f64, gi: f64, gj: f64| {
        gk * gk - (gi - gj).powi(2) - 4.0 * (sym * sym + 0.25 * ck * ck)
    };

    let lhs = 4.0 * b * (a * s - 0.25 * c3 * c1) - 2.0 * c2 * (0.5 * a * c1 + 0.5 * s * c3);
    let rhs = (g1 + g3 - g2) * (b * b + 0.25 * c2 * c2)
        + (g2 + g1 - g3) * (a * a + 0.25 * c3 * c3 - 0.25 * g3 * g3 + 0.25 * (g2 - g1).powi(2))
        + (g3 + g2 - g1) * (s * s + 0.25 * c1 * c1);

    let residuals = [
        ("triangle_1", triangle(g1, g2, g3)),
        ("triangle_2", triangle(g2, g3, g1)),
        ("triangle_3", triangle(g3, g1, g2)),
        ("quadratic_1", quadratic(s, c1, g1, g2, g3)),
        ("quadratic_2", quadratic(b, c2, g2, g3, g1)),
        ("quadratic_3", quadratic(a, c3, g3, g1, g2)),
        ("cubic", lhs - rhs),
    ];

    let checks: Vec<CpCheck> = residuals
        .into_iter()
        .map(|(id, residual)| CpCheck {
            id,
            residual,
            pass: residual >= -CP_TOL,
        })
        .collect();
    let pass = checks.iter().all(|c| c.pass);
    CpReport { checks, pass }
}
