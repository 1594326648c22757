//! C ABI over the `lowpoly` pipeline.
//!
//! Images and results are opaque heap handles owned by the caller and
//! released with their `_free` function. Every fallible call returns an
//! [`LpStatus`]; on failure a description is available from
//! [`lp_last_error_message`] on the same thread. Panics never cross the
//! boundary, they come back as [`LpStatus::Internal`].

use std::cell::{OnceCell, RefCell};
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lowpoly::{decode_image, encode_image, run_pipeline, Error, ErrorKind, PipelineConfig, PipelineOutput, RasterImage};

/// Numeric values match the `triangulate` CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Ok = 0,
    /// Null pointer or malformed buffer passed across the boundary.
    InvalidArgument = 1,
    Parameter = 2,
    Degenerate = 3,
    Io = 4,
    Internal = 5,
}

/// `random_points == 0` means vertices come from edge pixels.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct LpConfig {
    pub threshold: u32,
    pub density: u32,
    pub seed: u64,
    pub random_points: u32,
    pub include_frame: bool,
}

pub struct LpImage {
    inner: RasterImage,
}

pub struct LpResult {
    out: PipelineOutput,
    png: OnceCell<Vec<u8>>,
    mesh_json: OnceCell<CString>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = CString::new(text).ok());
}

fn clear_last_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

fn status_of(e: &Error) -> LpStatus {
    match e.kind() {
        ErrorKind::Parameter => LpStatus::Parameter,
        ErrorKind::Degenerate => LpStatus::Degenerate,
        ErrorKind::Io => LpStatus::Io,
    }
}

fn fail(status: LpStatus, msg: impl Into<String>) -> LpStatus {
    set_last_error(msg);
    status
}

fn guard(f: impl FnOnce() -> LpStatus) -> LpStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(LpStatus::Internal, format!("internal error: {msg}"))
        }
    }
}

impl From<&LpConfig> for PipelineConfig {
    fn from(c: &LpConfig) -> Self {
        PipelineConfig {
            threshold: c.threshold,
            density: c.density,
            seed: c.seed,
            random_points: (c.random_points != 0).then_some(c.random_points),
            include_frame: c.include_frame,
            dump_stages: false,
        }
    }
}

#[no_mangle]
pub extern "C" fn lp_config_default() -> LpConfig {
    let d = PipelineConfig::default();
    LpConfig {
        threshold: d.threshold,
        density: d.density,
        seed: d.seed,
        random_points: 0,
        include_frame: d.include_frame,
    }
}

/// Decodes a PNG or JPEG held in `data[0..len]`.
///
/// # Safety
/// `data` must point to `len` readable bytes and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lp_image_decode(data: *const u8, len: usize, out: *mut *mut LpImage) -> LpStatus {
    guard(|| {
        if data.is_null() || out.is_null() {
            return fail(LpStatus::InvalidArgument, "null pointer");
        }
        *out = ptr::null_mut();
        let bytes = std::slice::from_raw_parts(data, len);
        match decode_image(bytes) {
            Ok(img) => {
                *out = Box::into_raw(Box::new(LpImage { inner: img }));
                LpStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// Wraps tightly packed 8-bit RGB rows; `len` must equal `width * height * 3`.
///
/// # Safety
/// `data` must point to `len` readable bytes and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lp_image_from_rgb(
    width: u32,
    height: u32,
    data: *const u8,
    len: usize,
    out: *mut *mut LpImage,
) -> LpStatus {
    guard(|| {
        if data.is_null() || out.is_null() {
            return fail(LpStatus::InvalidArgument, "null pointer");
        }
        *out = ptr::null_mut();
        let bytes = std::slice::from_raw_parts(data, len);
        match RasterImage::from_rgb_bytes(width, height, bytes) {
            Ok(img) => {
                *out = Box::into_raw(Box::new(LpImage { inner: img }));
                LpStatus::Ok
            }
            Err(e) => fail(LpStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// # Safety
/// `img` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn lp_image_width(img: *const LpImage) -> u32 {
    img.as_ref().map_or(0, |i| i.inner.width())
}

/// # Safety
/// `img` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn lp_image_height(img: *const LpImage) -> u32 {
    img.as_ref().map_or(0, |i| i.inner.height())
}

/// # Safety
/// `img` must be null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn lp_image_free(img: *mut LpImage) {
    if !img.is_null() {
        drop(Box::from_raw(img));
    }
}

/// Runs the whole pipeline. `config` may be null for defaults.
///
/// # Safety
/// `img` must be a live image handle, `config` null or readable, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lp_run(img: *const LpImage, config: *const LpConfig, out: *mut *mut LpResult) -> LpStatus {
    guard(|| {
        if img.is_null() || out.is_null() {
            return fail(LpStatus::InvalidArgument, "null pointer");
        }
        *out = ptr::null_mut();
        let cfg = config
            .as_ref()
            .map_or_else(PipelineConfig::default, PipelineConfig::from);
        match run_pipeline(&(*img).inner, &cfg) {
            Ok(result) => {
                *out = Box::into_raw(Box::new(LpResult {
                    out: result,
                    png: OnceCell::new(),
                    mesh_json: OnceCell::new(),
                }));
                LpStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// # Safety
/// `res` must be null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn lp_result_vertex_count(res: *const LpResult) -> usize {
    res.as_ref().map_or(0, |r| r.out.stats.vertex_count)
}

/// # Safety
/// `res` must be null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn lp_result_triangle_count(res: *const LpResult) -> usize {
    res.as_ref().map_or(0, |r| r.out.stats.triangle_count)
}

/// # Safety
/// `res` must be null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn lp_result_edge_pixel_count(res: *const LpResult) -> usize {
    res.as_ref().map_or(0, |r| r.out.stats.edge_pixel_count)
}

/// Copies the rendered image as packed RGB into `buf`, which must hold
/// `width * height * 3` bytes of the input image.
///
/// # Safety
/// `res` must be a live result handle and `buf` must point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn lp_result_copy_rgb(res: *const LpResult, buf: *mut u8, len: usize) -> LpStatus {
    guard(|| {
        let Some(r) = res.as_ref() else {
            return fail(LpStatus::InvalidArgument, "null pointer");
        };
        let bytes = r.out.image.to_rgb_bytes();
        if buf.is_null() || len != bytes.len() {
            return fail(
                LpStatus::InvalidArgument,
                format!("buffer must be {} bytes, got {len}", bytes.len()),
            );
        }
        ptr::copy_nonoverlapping(bytes.as_ptr(), buf, len);
        LpStatus::Ok
    })
}

/// PNG encoding of the rendered image. The bytes stay valid until the
/// result is freed. Returns null on failure.
///
/// # Safety
/// `res` must be a live result handle and `len` writable.
#[no_mangle]
pub unsafe extern "C" fn lp_result_png(res: *const LpResult, len: *mut usize) -> *const u8 {
    let mut data = ptr::null();
    guard(|| {
        let Some(r) = res.as_ref() else {
            return fail(LpStatus::InvalidArgument, "null pointer");
        };
        if len.is_null() {
            return fail(LpStatus::InvalidArgument, "null pointer");
        }
        if r.png.get().is_none() {
            match encode_image(&r.out.image) {
                Ok(bytes) => {
                    let _ = r.png.set(bytes);
                }
                Err(e) => return fail(status_of(&e), e.to_string()),
            }
        }
        let png = r.png.get().expect("set above");
        *len = png.len();
        data = png.as_ptr();
        LpStatus::Ok
    });
    data
}

/// Mesh as NUL-terminated JSON `{"vertices":[[x,y],..],"triangles":[[a,b,c],..]}`,
/// valid until the result is freed.
///
/// # Safety
/// `res` must be null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn lp_result_mesh_json(res: *const LpResult) -> *const c_char {
    match res.as_ref() {
        Some(r) => r
            .mesh_json
            .get_or_init(|| CString::new(r.out.mesh.to_json()).expect("JSON has no NUL"))
            .as_ptr(),
        None => {
            set_last_error("null pointer");
            ptr::null()
        }
    }
}

/// # Safety
/// `res` must be null or a result handle that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn lp_result_free(res: *mut LpResult) {
    if !res.is_null() {
        drop(Box::from_raw(res));
    }
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next library call on the same thread.
#[no_mangle]
pub extern "C" fn lp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

#[no_mangle]
pub extern "C" fn lp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
