//! C ABI over `isolab`. Objects are opaque handles created by `*_new` or
//! `*_solve` functions and released with the matching `*_free`. Every
//! fallible call returns an [`IsolabStatus`]; the message of the most recent
//! failure on the calling thread is available from
//! [`isolab_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use isolab::bray::{solve_chart, ChartSolution};
use isolab::cmc::grid::SphereGrid;
use isolab::cmc::newton::{continuation_path, solve_from, CmcSolution, ContinuationOptions, NewtonOptions};
use isolab::cmc::spectrum::jacobi_spectrum;
use isolab::geometry::curvature::{curvature_at, CurvatureMethod};
use isolab::geometry::metric::MetricField;
use isolab::geometry::schwarzschild::{horizon_radius_nm, sphere_area_nm, sphere_mean_curvature_nm};
use isolab::geometry::{ManifoldSpec, Parity, PerturbationSpec};
use isolab::Error;

pub const ISOLAB_ABI_VERSION: u32 = 1;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IsolabStatus {
    Ok = 0,
    InvalidArgument = 1,
    NoHorizon = 2,
    Numerical = 3,
    Unsupported = 4,
    NullPointer = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IsolabParity {
    Even = 0,
    Odd = 1,
    Mixed = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IsolabCurvatureMethod {
    ClosedForm = 0,
    FiniteDifference = 1,
    Exact = 2,
}

/// A metric on the asymptotic chart.
pub struct IsolabMetric(MetricField);

/// A volume-preserving chart solution on `s >= c`.
pub struct IsolabChart(ChartSolution);

/// A CMC graph sphere with its solver diagnostics.
pub struct IsolabSurface(CmcSolution);

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct IsolabChartInfo {
    pub m: f64,
    pub n: usize,
    pub r: f64,
    pub alpha: f64,
    pub c: f64,
    pub v0: f64,
    /// Number of tabulated nodes.
    pub len: usize,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct IsolabSurfaceInfo {
    pub radius: f64,
    pub target: f64,
    /// `max |H - target|` over the nodes.
    pub residual: f64,
    pub sup_u: f64,
    pub scaled_norm: f64,
    pub sup_h_ring: f64,
    pub area: f64,
    pub iterations: usize,
    /// Number of spectral coefficients.
    pub len: usize,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct IsolabSpectrumInfo {
    pub mu0: f64,
    pub mu1: f64,
    pub lambda1: f64,
    pub lambda1_predicted: f64,
    pub mu0_predicted: f64,
    pub laplace_first: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> IsolabStatus {
    match e {
        Error::InvalidParameter(_) | Error::Parse(_) | Error::Precondition(_) | Error::OutOfChart(_) | Error::Refused(_) => IsolabStatus::InvalidArgument,
        Error::NoHorizon(_) => IsolabStatus::NoHorizon,
        Error::Unsupported(_) => IsolabStatus::Unsupported,
        _ => IsolabStatus::Numerical,
    }
}

struct Fail(IsolabStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(IsolabStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> IsolabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => IsolabStatus::Ok,
        Ok(Err(Fail(s, msg))) => {
            set_error(msg);
            s
        }
        Err(p) => {
            let msg = p.downcast_ref::<&str>().map(|s| s.to_string()).or_else(|| p.downcast_ref::<String>().cloned()).unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            IsolabStatus::Panic
        }
    }
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a>(p: *mut f64, len: usize, what: &str) -> Result<&'a mut [f64], Fail> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn write<T>(out: *mut T, v: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(v);
    Ok(())
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

#[no_mangle]
pub extern "C" fn isolab_abi_version() -> u32 {
    ISOLAB_ABI_VERSION
}

/// Message of the last failed call on this thread, or null if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn isolab_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn isolab_clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// Creates a metric. `amplitude = 0` disables the perturbation;
/// `translation` may be null or point to `n` doubles.
///
/// # Safety
/// `translation` must be null or valid for `n` reads; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn isolab_metric_new(
    n: usize,
    mass: f64,
    gamma: f64,
    amplitude: f64,
    parity: IsolabParity,
    pattern: usize,
    translation: *const f64,
    out: *mut *mut IsolabMetric,
) -> IsolabStatus {
    guard(|| {
        let mut spec = ManifoldSpec::schwarzschild(n, mass).with_gamma(gamma);
        if !translation.is_null() {
            spec = spec.with_translation(slice(translation, n, "translation")?);
        }
        if amplitude != 0.0 {
            let p = match parity {
                IsolabParity::Even => Parity::Even,
                IsolabParity::Odd => Parity::Odd,
                IsolabParity::Mixed => Parity::Mixed,
            };
            spec = spec.with_perturbation(PerturbationSpec::new(amplitude, p, pattern));
        }
        let m = MetricField::new(spec)?;
        write(out, Box::into_raw(Box::new(IsolabMetric(m))), "out")
    })
}

/// Unperturbed, centered Schwarzschild metric.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn isolab_metric_schwarzschild(n: usize, mass: f64, out: *mut *mut IsolabMetric) -> IsolabStatus {
    isolab_metric_new(n, mass, 1.0, 0.0, IsolabParity::Even, 0, ptr::null(), out)
}

/// # Safety
/// `metric` must be null or a handle from this library that was not freed.
#[no_mangle]
pub unsafe extern "C" fn isolab_metric_free(metric: *mut IsolabMetric) {
    if !metric.is_null() {
        drop(Box::from_raw(metric));
    }
}

/// Dimension of the metric, or 0 for a null handle.
///
/// # Safety
/// `metric` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn isolab_metric_dimension(metric: *const IsolabMetric) -> usize {
    metric.as_ref().map_or(0, |m| m.0.n())
}

/// Metric components `g_ij(x)`, row-major into `g` (`n * n` doubles).
///
/// # Safety
/// `x` must be valid for `n` reads and `g` for `n * n` writes.
#[no_mangle]
pub unsafe extern "C" fn isolab_metric_components(metric: *const IsolabMetric, x: *const f64, n: usize, g: *mut f64) -> IsolabStatus {
    guard(|| {
        let m = handle(metric, "metric")?;
        if n != m.0.n() {
            return Err(Fail(IsolabStatus::InvalidArgument, format!("point has {n} components, metric dimension is {}", m.0.n())));
        }
        let x = slice(x, n, "x")?;
        let c = m.0.components(x)?;
        slice_mut(g, n * n, "g")?.copy_from_slice(&c);
        Ok(())
    })
}

/// Riemann tensor `Rm_ijkl` at `x`, written to `rm` (`n^4` doubles).
///
/// # Safety
/// `x` must be valid for `n` reads and `rm` for `n^4` writes.
#[no_mangle]
pub unsafe extern "C" fn isolab_riemann(metric: *const IsolabMetric, x: *const f64, n: usize, method: IsolabCurvatureMethod, rm: *mut f64) -> IsolabStatus {
    guard(|| {
        let m = handle(metric, "metric")?;
        if n != m.0.n() {
            return Err(Fail(IsolabStatus::InvalidArgument, format!("point has {n} components, metric dimension is {}", m.0.n())));
        }
        let x = slice(x, n, "x")?;
        let method = match method {
            IsolabCurvatureMethod::ClosedForm => CurvatureMethod::ClosedForm,
            IsolabCurvatureMethod::FiniteDifference => CurvatureMethod::FiniteDifference,
            IsolabCurvatureMethod::Exact => CurvatureMethod::Exact,
        };
        let s = curvature_at(&m.0, x, method)?;
        let out = slice_mut(rm, n * n * n * n, "rm")?;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        out[((i * n + j) * n + k) * n + l] = s.riemann.get(i, j, k, l);
                    }
                }
            }
        }
        Ok(())
    })
}

/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn isolab_horizon_radius(n: usize, mass: f64, out: *mut f64) -> IsolabStatus {
    guard(|| write(out, horizon_radius_nm(n, mass)?, "out"))
}

/// Area and mean curvature of the centered sphere `S_r` in Schwarzschild.
///
/// # Safety
/// `area` and `mean_curvature` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn isolab_sphere(n: usize, mass: f64, r: f64, area: *mut f64, mean_curvature: *mut f64) -> IsolabStatus {
    guard(|| {
        if n < 3 || !(mass >= 0.0) || !(r > 0.0) {
            return Err(Fail(IsolabStatus::InvalidArgument, "need n >= 3, m >= 0 and r > 0".into()));
        }
        write(area, sphere_area_nm(n, mass, r), "area")?;
        write(mean_curvature, sphere_mean_curvature_nm(n, mass, r), "mean_curvature")
    })
}

/// Normalized Hawking mass of a surface with the given area and mean curvature.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn isolab_hawking_mass(n: usize, area: f64, mean_curvature: f64, out: *mut f64) -> IsolabStatus {
    guard(|| write(out, isolab::quasilocal::hawking_mass(n, area, mean_curvature, false)?, "out"))
}

/// Solves the chart matched to `S_r` and tabulates it on `nodes` points of
/// `[c, s_max_factor c]`.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn isolab_chart_solve(mass: f64, n: usize, r: f64, s_max_factor: f64, nodes: usize, out: *mut *mut IsolabChart) -> IsolabStatus {
    guard(|| {
        let c = solve_chart(mass, n, r, s_max_factor, nodes, &[])?;
        write(out, Box::into_raw(Box::new(IsolabChart(c))), "out")
    })
}

/// # Safety
/// `chart` must be a live handle and `info` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn isolab_chart_info(chart: *const IsolabChart, info: *mut IsolabChartInfo) -> IsolabStatus {
    guard(|| {
        let c = &handle(chart, "chart")?.0;
        write(info, IsolabChartInfo { m: c.m, n: c.n, r: c.r, alpha: c.alpha, c: c.c, v0: c.v0, len: c.s.len() }, "info")
    })
}

/// Copies the node table; `len` must equal the `len` reported by
/// [`isolab_chart_info`].
///
/// # Safety
/// `s` and `u` must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn isolab_chart_table(chart: *const IsolabChart, s: *mut f64, u: *mut f64, len: usize) -> IsolabStatus {
    guard(|| {
        let c = &handle(chart, "chart")?.0;
        if len != c.s.len() {
            return Err(Fail(IsolabStatus::InvalidArgument, format!("buffer length {len}, chart has {} nodes", c.s.len())));
        }
        slice_mut(s, len, "s")?.copy_from_slice(&c.s);
        slice_mut(u, len, "u")?.copy_from_slice(&c.u);
        Ok(())
    })
}

/// # Safety
/// `chart` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn isolab_chart_free(chart: *mut IsolabChart) {
    if !chart.is_null() {
        drop(Box::from_raw(chart));
    }
}

/// Solves for the CMC graph sphere over `S_radius` with mean curvature
/// `target` (NaN selects the centered Schwarzschild value). `n_phi = 0`
/// selects an axisymmetric grid with `n_theta` nodes; otherwise a full
/// `n_theta x n_phi` grid (n = 3 only).
///
/// # Safety
/// `metric` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn isolab_cmc_solve(
    metric: *const IsolabMetric,
    radius: f64,
    target: f64,
    n_theta: usize,
    n_phi: usize,
    lmax: usize,
    tolerance: f64,
    out: *mut *mut IsolabSurface,
) -> IsolabStatus {
    guard(|| {
        let m = &handle(metric, "metric")?.0;
        let grid = Arc::new(if n_phi == 0 { SphereGrid::axisymmetric(m.n(), n_theta, lmax)? } else { SphereGrid::full(n_theta, n_phi, lmax)? });
        let target = if target.is_nan() { sphere_mean_curvature_nm(m.n(), m.mass(), radius) } else { target };
        let newton = NewtonOptions { tolerance, allow_kernel: m.mass() == 0.0 && m.is_pure_schwarzschild(), ..NewtonOptions::default() };
        let sol = if m.is_pure_schwarzschild() {
            solve_from(grid.clone(), radius, vec![0.0; grid.dim()], m, target, &newton)?
        } else {
            continuation_path(m, grid, radius, target, &ContinuationOptions { newton, ..ContinuationOptions::default() })?.0
        };
        write(out, Box::into_raw(Box::new(IsolabSurface(sol))), "out")
    })
}

/// # Safety
/// `surface` must be a live handle and `info` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn isolab_surface_info(surface: *const IsolabSurface, info: *mut IsolabSurfaceInfo) -> IsolabStatus {
    guard(|| {
        let sol = &handle(surface, "surface")?.0;
        let s = &sol.surface;
        let v = IsolabSurfaceInfo {
            radius: s.radius,
            target: sol.target,
            residual: s.residual(sol.target),
            sup_u: s.sup_u(),
            scaled_norm: s.scaled_norm(),
            sup_h_ring: s.sup_h_ring(),
            area: s.area(),
            iterations: sol.report.iterations,
            len: s.coeffs.len(),
        };
        write(info, v, "info")
    })
}

/// # Safety
/// `coeffs` must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn isolab_surface_coefficients(surface: *const IsolabSurface, coeffs: *mut f64, len: usize) -> IsolabStatus {
    guard(|| {
        let s = &handle(surface, "surface")?.0.surface;
        if len != s.coeffs.len() {
            return Err(Fail(IsolabStatus::InvalidArgument, format!("buffer length {len}, surface has {} coefficients", s.coeffs.len())));
        }
        slice_mut(coeffs, len, "coeffs")?.copy_from_slice(&s.coeffs);
        Ok(())
    })
}

/// Jacobi spectrum of the surface.
///
/// # Safety
/// `surface` must be a live handle and `info` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn isolab_surface_spectrum(surface: *const IsolabSurface, info: *mut IsolabSpectrumInfo) -> IsolabStatus {
    guard(|| {
        let rep = jacobi_spectrum(&handle(surface, "surface")?.0.surface, 3)?;
        let v = IsolabSpectrumInfo {
            mu0: rep.mu0,
            mu1: rep.mu1,
            lambda1: rep.lambda1,
            lambda1_predicted: rep.lambda1_predicted,
            mu0_predicted: rep.mu0_predicted,
            laplace_first: rep.laplace_first,
        };
        write(info, v, "info")
    })
}

/// # Safety
/// `surface` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn isolab_surface_free(surface: *mut IsolabSurface) {
    if !surface.is_null() {
        drop(Box::from_raw(surface));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CStr;

    fn last_error() -> String {
        let p = isolab_last_error_message();
        assert!(!p.is_null());
        unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
    }

    #[test]
    fn metric_lifecycle_and_components() {
        unsafe {
            let mut m = ptr::null_mut();
            assert_eq!(isolab_metric_schwarzschild(3, 2.0, &mut m), IsolabStatus::Ok);
            assert_eq!(isolab_metric_dimension(m), 3);
            let mut g = [0.0; 9];
            assert_eq!(isolab_metric_components(m, [0.0, 0.0, 2.0].as_ptr(), 3, g.as_mut_ptr()), IsolabStatus::Ok);
            // phi = 1 + m/(2r) = 1.5, g = phi^4 delta
            assert!((g[0] - 1.5f64.powi(4)).abs() < 1e-14 && g[1] == 0.0);
            assert_eq!(isolab_metric_components(m, [0.0, 0.0].as_ptr(), 2, g.as_mut_ptr()), IsolabStatus::InvalidArgument);
            let mut rm = vec![0.0; 81];
            assert_eq!(isolab_riemann(m, [1.0, 2.0, 3.0].as_ptr(), 3, IsolabCurvatureMethod::ClosedForm, rm.as_mut_ptr()), IsolabStatus::Ok);
            assert!(rm.iter().any(|v| *v != 0.0));
            isolab_metric_free(m);
        }
    }

    #[test]
    fn error_codes() {
        unsafe {
            let mut m = ptr::null_mut();
            assert_eq!(isolab_metric_schwarzschild(2, 2.0, &mut m), IsolabStatus::InvalidArgument);
            assert!(m.is_null());
            assert!(last_error().contains("n >= 3"));
            let mut r = 0.0;
            assert_eq!(isolab_horizon_radius(3, 0.0, &mut r), IsolabStatus::NoHorizon);
            assert_eq!(isolab_horizon_radius(3, 2.0, ptr::null_mut()), IsolabStatus::NullPointer);
            assert_eq!(isolab_metric_components(ptr::null(), ptr::null(), 3, ptr::null_mut()), IsolabStatus::NullPointer);
            let mut c = ptr::null_mut();
            assert_eq!(isolab_chart_solve(2.0, 3, 0.5, 10.0, 20, &mut c), IsolabStatus::InvalidArgument);
            let mut e = ptr::null_mut();
            isolab_metric_new(3, 2.0, 1.0, 0.3, IsolabParity::Even, 0, [1.0, 0.0, 0.0].as_ptr(), &mut e);
            let mut a = 0.0;
            assert_eq!(isolab_riemann(e, [5.0, 0.0, 0.0].as_ptr(), 3, IsolabCurvatureMethod::ClosedForm, &mut a), IsolabStatus::Unsupported);
            isolab_metric_free(e);
            isolab_clear_error();
            assert!(isolab_last_error_message().is_null());
        }
    }

    #[test]
    fn chart_table() {
        unsafe {
            let mut c = ptr::null_mut();
            assert_eq!(isolab_chart_solve(2.0, 3, 100.0, 10.0, 50, &mut c), IsolabStatus::Ok);
            let mut info = IsolabChartInfo::default();
            assert_eq!(isolab_chart_info(c, &mut info), IsolabStatus::Ok);
            assert!((info.alpha - 0.98674).abs() < 2e-5);
            let mut s = vec![0.0; info.len];
            let mut u = vec![0.0; info.len];
            assert_eq!(isolab_chart_table(c, s.as_mut_ptr(), u.as_mut_ptr(), info.len), IsolabStatus::Ok);
            assert_eq!(s[0], info.c);
            assert_eq!(u[0], info.alpha);
            assert_eq!(isolab_chart_table(c, s.as_mut_ptr(), u.as_mut_ptr(), 3), IsolabStatus::InvalidArgument);
            isolab_chart_free(c);
        }
    }

    #[test]
    fn cmc_surface_and_spectrum() {
        unsafe {
            let mut m = ptr::null_mut();
            isolab_metric_schwarzschild(3, 2.0, &mut m);
            let mut s = ptr::null_mut();
            assert_eq!(isolab_cmc_solve(m, 200.0, f64::NAN, 24, 0, 8, 1e-10, &mut s), IsolabStatus::Ok);
            let mut info = IsolabSurfaceInfo::default();
            isolab_surface_info(s, &mut info);
            assert!(info.sup_u < 1e-10 && info.residual <= 1e-10 * info.target);
            let mut coeffs = vec![1.0; info.len];
            assert_eq!(isolab_surface_coefficients(s, coeffs.as_mut_ptr(), info.len), IsolabStatus::Ok);
            let mut sp = IsolabSpectrumInfo::default();
            assert_eq!(isolab_surface_spectrum(s, &mut sp), IsolabStatus::Ok);
            assert!((sp.lambda1 / sp.lambda1_predicted - 1.0).abs() < 0.05);
            isolab_surface_free(s);
            isolab_metric_free(m);
        }
    }

    #[test]
    fn errors_are_thread_local() {
        unsafe {
            let mut r = 0.0;
            isolab_horizon_radius(3, 0.0, &mut r);
        }
        let other = std::thread::spawn(|| isolab_last_error_message().is_null()).join().unwrap();
        assert!(other);
        assert!(last_error().contains("no horizon"));
    }
}
