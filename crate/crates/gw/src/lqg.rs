//! LQG stabilization: regulator and filter CAREs, gains, and the estimator-augmented loop.
//!
//! Both CAREs are solved in double-double. The regulator solution has `‖P‖ ~ 10¹³`
//! against `‖A‖ ~ 10⁸`, so rounding `P` to f64 alone leaves a residual many orders
//! above `10⁻⁸‖Q‖`.

use crate::error::{GwError, GwResult};
use crate::model::{control_channels, ctrb_obsv};
use crate::params::GwParams;
use num_complex::Complex64;
use qfb_core::linalg::{care_residual, eigenvalues, refine_care, solve_care};
use qfb_core::scalar::re;
use qfb_core::{CMatrix64, CMatrixDD, DoubleDouble, StateSpaceModel64};

/// Regulator weight `Q`, control weight `R` and the diagonal input covariance `V`.
#[derive(Clone, Debug, PartialEq)]
pub struct LqgWeights {
    pub q: CMatrix64,
    pub r: f64,
    pub v: Vec<f64>,
}

impl LqgWeights {
    /// `Q = q_scale·I₁₂`, `R = r`, `V = diag(v_fgw, 1/2, …, 1/2)`.
    pub fn from_params(p: &GwParams) -> Self {
        let mut v = vec![0.5; 9];
        v[0] = p.v_fgw;
        Self { q: CMatrix64::identity(12).scale(Complex64::new(p.q_scale, 0.0)), r: p.r, v }
    }

    fn v_matrix(&self) -> CMatrix64 {
        CMatrix64::diag(&self.v.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>())
    }
}

/// Accuracy of one CARE solve, measured in double-double.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CareReport {
    /// `‖PA + AᵀP − PBR⁻¹BᵀP + Q‖_F`.
    pub residual: f64,
    pub q_norm: f64,
    /// `max |P − Pᵀ|`.
    pub asymmetry: f64,
    pub newton_steps: usize,
}

impl CareReport {
    pub fn relative(&self) -> f64 {
        self.residual / self.q_norm
    }
}

#[derive(Clone, Debug)]
pub struct LqgDesign {
    /// `1 × 12` regulator gain `R⁻¹B_uᵀP_F`.
    pub f_u: CMatrix64,
    /// `12 × 1` filter gain `(P_K C_mᵀ + B_w V D_mᵀ)(D_m V D_mᵀ)⁻¹`.
    pub k_u: CMatrix64,
    pub regulator: CareReport,
    pub filter: CareReport,
    pub rank_c: usize,
    pub rank_o: usize,
    pub a_tot: CMatrix64,
    pub b_tot: CMatrix64,
    pub c_tot: CMatrix64,
    pub d_tot: CMatrix64,
    /// `max Re eig` of `A`, `A − B_uF_u`, `A − K_uC_m` and `A_tot`.
    pub max_re_open: f64,
    pub max_re_regulator: f64,
    pub max_re_filter: f64,
    pub max_re_total: f64,
}

impl LqgDesign {
    pub fn is_stable(&self) -> bool {
        self.max_re_total < 0.0
    }

    /// `(A_tot, B_tot, C_tot, D_tot)` as a model from the nine noise inputs to `y_m`.
    pub fn total_model(&self) -> StateSpaceModel64 {
        StateSpaceModel64::new(self.a_tot.clone(), self.b_tot.clone(), self.c_tot.clone(), self.d_tot.clone())
            .expect("assembled with consistent dimensions")
    }
}

pub fn max_real_eig(a: &CMatrix64) -> GwResult<f64> {
    Ok(eigenvalues(a)?.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max))
}

fn to_dd(m: &CMatrix64) -> CMatrixDD {
    m.cast::<DoubleDouble>()
}

/// Stabilizing solution of `PA + AᵀP − PBR⁻¹BᵀP + Q = 0`: Hamiltonian Schur in f64,
/// then Newton steps in double-double.
pub fn solve_care_dd(
    a: &CMatrix64,
    b: &CMatrix64,
    q: &CMatrix64,
    r: &CMatrix64,
    which: &'static str,
) -> GwResult<(CMatrixDD, CareReport)> {
    let care_err = |e: qfb_core::Error| GwError::Care { which, detail: e.to_string() };
    let seed = solve_care(a, b, q, r).map_err(care_err)?;
    let (ad, bd, qd) = (to_dd(a), to_dd(b), to_dd(q));
    let g = &(&bd * &to_dd(r).inverse().map_err(care_err)?) * &bd.adjoint();
    let sol = refine_care(&ad, &g, &qd, &to_dd(&seed.p), 30).map_err(care_err)?;
    let res = care_residual(&ad, &g, &qd, &sol.p).norm_fro();
    let asym = (&sol.p - &sol.p.transpose()).max_abs();
    let report = CareReport {
        residual: res.into(),
        q_norm: q.norm_fro(),
        asymmetry: asym.into(),
        newton_steps: sol.newton_steps,
    };
    Ok((sol.p, report))
}

/// `A_tot = [[A − B_uF, −B_uF], [0, A − KC_m]]`, `B_tot = [B_w; KD_m − B_w]`,
/// `C_tot = [C_m 0]`, `D_tot = D_m` over the state and the estimation error.
pub fn assemble_total(
    m: &StateSpaceModel64,
    f_u: &CMatrix64,
    k_u: &CMatrix64,
) -> (CMatrix64, CMatrix64, CMatrix64, CMatrix64) {
    let (bu, cm, dm) = control_channels(m);
    let (a, bw) = (m.a(), m.b());
    let n = m.order();
    let bf = &bu * f_u;
    let mut a_tot = CMatrix64::zeros(2 * n, 2 * n);
    a_tot.set_block(0, 0, &(a - &bf));
    a_tot.set_block(0, n, &-&bf);
    a_tot.set_block(n, n, &(a - &(k_u * &cm)));
    let mut b_tot = CMatrix64::zeros(2 * n, bw.cols());
    b_tot.set_block(0, 0, bw);
    b_tot.set_block(n, 0, &(&(k_u * &dm) - bw));
    let mut c_tot = CMatrix64::zeros(1, 2 * n);
    c_tot.set_block(0, 0, &cm);
    (a_tot, b_tot, c_tot, dm)
}

/// Full LQG design for the detector model.
///
/// The filter CARE carries the cross-covariance `S = B_w V D_mᵀ`; it is removed by
/// `Ã = A − S R̃⁻¹ C_m`, `Q̃ = B_w V B_wᵀ − S R̃⁻¹ Sᵀ`, `R̃ = D_m V D_mᵀ` and solved as the
/// regulator-form CARE of `(Ãᵀ, C_mᵀ, Q̃, R̃)`.
pub fn lqg_synthesize(m: &StateSpaceModel64, w: &LqgWeights) -> GwResult<LqgDesign> {
    let n = m.order();
    if w.q.rows() != n || w.v.len() != m.b().cols() {
        return Err(GwError::Config("LQG weight dimensions do not match the model".into()));
    }
    if !(w.r > 0.0) {
        return Err(GwError::Config("R must be positive".into()));
    }
    let (bu, cm, dm) = control_channels(m);
    let a = m.a();
    let (rank_c, rank_o) = ctrb_obsv(a, &bu, &cm);
    if rank_c < n || rank_o < n {
        return Err(GwError::RankDeficient { rank_c, rank_o });
    }

    let r = CMatrix64::from_real(1, 1, &[w.r]);
    let (p_f, regulator) = solve_care_dd(a, &bu, &w.q, &r, "regulator")?;
    let f_dd = (&to_dd(&bu).adjoint() * &p_f).scale(re(DoubleDouble::from(1.0 / w.r)));
    let f_u: CMatrix64 = f_dd.cast();

    let v = w.v_matrix();
    let bw = m.b();
    let r_t = &(&dm * &v) * &dm.adjoint();
    if r_t[(0, 0)].norm() <= 0.0 {
        return Err(GwError::Care { which: "filter", detail: "D_m V D_mᵀ is singular".into() });
    }
    let r_inv = r_t.inverse()?;
    let s = &(bw * &v) * &dm.adjoint();
    let a_t = a - &(&(&s * &r_inv) * &cm);
    let q_t = &(&(bw * &v) * &bw.adjoint()) - &(&(&s * &r_inv) * &s.adjoint());
    let (p_k, filter) = solve_care_dd(&a_t.adjoint(), &cm.adjoint(), &q_t, &r_t, "filter")?;
    let k_dd = &(&(&p_k * &to_dd(&cm).adjoint()) + &to_dd(&s)) * &to_dd(&r_inv);
    let k_u: CMatrix64 = k_dd.cast();

    let (a_tot, b_tot, c_tot, d_tot) = assemble_total(m, &f_u, &k_u);
    let max_re_open = max_real_eig(a)?;
    let max_re_regulator = max_real_eig(&(a - &(&bu * &f_u)))?;
    let max_re_filter = max_real_eig(&(a - &(&k_u * &cm)))?;
    let max_re_total = max_real_eig(&a_tot)?;
    Ok(LqgDesign {
        f_u,
        k_u,
        regulator,
        filter,
        rank_c,
        rank_o,
        a_tot,
        b_tot,
        c_tot,
        d_tot,
        max_re_open,
        max_re_regulator,
        max_re_filter,
        max_re_total,
    })
}

/// Default LQG design for the given parameters.
pub fn synthesize_for(p: &GwParams) -> GwResult<(StateSpaceModel64, LqgDesign)> {
    p.validate()?;
    let m = crate::model::build_full_system(p);
    let d = lqg_synthesize(&m, &LqgWeights::from_params(p))?;
    Ok((m, d))
}
