//! C ABI over the Clarabel interior-point solver, restricted to what the
//! pmjls SDP backend needs: linear objective, zero / nonnegative / PSD
//! triangle cones.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettings, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};
use std::panic;
use std::slice;

#[repr(C)]
pub struct PmjlsClarabelSettings {
    pub max_iter: u32,
    pub verbose: u8,
    pub tol_gap_abs: f64,
    pub tol_gap_rel: f64,
    pub tol_feas: f64,
    pub tol_infeas_abs: f64,
    pub tol_infeas_rel: f64,
}

#[repr(C)]
pub struct PmjlsClarabelInfo {
    pub status: i32,
    pub iterations: u32,
    pub obj_val: f64,
    pub obj_val_dual: f64,
    pub solve_time: f64,
    pub r_prim: f64,
    pub r_dual: f64,
}

pub const CONE_ZERO: u32 = 0;
pub const CONE_NONNEG: u32 = 1;
pub const CONE_PSD_TRIANGLE: u32 = 2;

// Status codes mirrored in clarabel_ffi.h.
fn status_code(s: SolverStatus) -> i32 {
    match s {
        SolverStatus::Unsolved => 0,
        SolverStatus::Solved => 1,
        SolverStatus::PrimalInfeasible => 2,
        SolverStatus::DualInfeasible => 3,
        SolverStatus::AlmostSolved => 4,
        SolverStatus::AlmostPrimalInfeasible => 5,
        SolverStatus::AlmostDualInfeasible => 6,
        SolverStatus::MaxIterations => 7,
        SolverStatus::MaxTime => 8,
        SolverStatus::NumericalError => 9,
        SolverStatus::InsufficientProgress => 10,
        SolverStatus::CallbackTerminated => 11,
    }
}

// from_raw_parts requires a non-null pointer even for empty slices.
unsafe fn view<'a, T>(ptr: *const T, len: usize) -> &'a [T] {
    if len == 0 || ptr.is_null() {
        &[]
    } else {
        slice::from_raw_parts(ptr, len)
    }
}

unsafe fn view_mut<'a, T>(ptr: *mut T, len: usize) -> &'a mut [T] {
    if len == 0 || ptr.is_null() {
        &mut []
    } else {
        slice::from_raw_parts_mut(ptr, len)
    }
}

/// Solves  min q'x  s.t.  A x + s = b,  s in K.
///
/// A is m-by-n in compressed sparse column form. On success x, z and s are
/// written (lengths n, m, m). Returns 0 when the solver ran, -1 on bad input
/// (dimension or cone mismatch), -2 if the solver panicked.
///
/// # Safety
/// All pointers must be valid for the lengths implied by n, m, nnz and
/// n_cones.
#[no_mangle]
pub unsafe extern "C" fn pmjls_clarabel_solve(
    n: usize,
    m: usize,
    q: *const f64,
    colptr: *const usize,
    rowval: *const usize,
    nzval: *const f64,
    b: *const f64,
    n_cones: usize,
    cone_kind: *const u32,
    cone_dim: *const usize,
    settings: *const PmjlsClarabelSettings,
    x_out: *mut f64,
    z_out: *mut f64,
    s_out: *mut f64,
    info: *mut PmjlsClarabelInfo,
) -> i32 {
    let colptr_v = view(colptr, n + 1).to_vec();
    let nnz = colptr_v[n];
    let rowval_v = view(rowval, nnz).to_vec();
    let nzval_v = view(nzval, nnz).to_vec();
    let q_v = view(q, n).to_vec();
    let b_v = view(b, m).to_vec();
    let kinds = view(cone_kind, n_cones);
    let dims = view(cone_dim, n_cones);
    let st = &*settings;

    let mut cones = Vec::with_capacity(n_cones);
    for (k, d) in kinds.iter().zip(dims.iter()) {
        cones.push(match *k {
            CONE_ZERO => SupportedConeT::ZeroConeT(*d),
            CONE_NONNEG => SupportedConeT::NonnegativeConeT(*d),
            CONE_PSD_TRIANGLE => SupportedConeT::PSDTriangleConeT(*d),
            _ => return -1,
        });
    }

    let result = panic::catch_unwind(|| {
        let a = CscMatrix::new(m, n, colptr_v, rowval_v, nzval_v);
        let p = CscMatrix::<f64>::zeros((n, n));
        let mut s = DefaultSettings::<f64>::default();
        s.max_iter = st.max_iter;
        s.verbose = st.verbose != 0;
        s.tol_gap_abs = st.tol_gap_abs;
        s.tol_gap_rel = st.tol_gap_rel;
        s.tol_feas = st.tol_feas;
        s.tol_infeas_abs = st.tol_infeas_abs;
        s.tol_infeas_rel = st.tol_infeas_rel;
        s.max_threads = 1;
        s.chordal_decomposition_enable = false;
        let mut solver = match DefaultSolver::new(&p, &q_v, &a, &b_v, &cones, s) {
            Ok(solver) => solver,
            Err(_) => return None,
        };
        solver.solve();
        Some(solver.solution)
    });

    match result {
        Ok(Some(sol)) => {
            view_mut(x_out, n).copy_from_slice(&sol.x);
            view_mut(z_out, m).copy_from_slice(&sol.z);
            view_mut(s_out, m).copy_from_slice(&sol.s);
            *info = PmjlsClarabelInfo {
                status: status_code(sol.status),
                iterations: sol.iterations,
                obj_val: sol.obj_val,
                obj_val_dual: sol.obj_val_dual,
                solve_time: sol.solve_time,
                r_prim: sol.r_prim,
                r_dual: sol.r_dual,
            };
            0
        }
        Ok(None) => -1,
        Err(_) => -2,
    }
}
