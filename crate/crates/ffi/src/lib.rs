//! C interface to the navmine core.
//!
//! Every function returns a [`NavmineStatus`]; on failure a description is
//! available from [`navmine_last_error`] on the same thread. Strings returned
//! through out-pointers are owned by the caller and released with
//! [`navmine_string_free`]. Handles are released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use navmine::action::{parse_action_response, zones_containing, CandidateAction};
use navmine::elements::{hit_test, resolve_label, SomLayout};
use navmine::eval::transition_f1;
use navmine::geometry::BBox;
use navmine::text::levenshtein;
use navmine::transition::{change_ratio, detect_transitions, OcrFrame, OcrToken, TransitionParams};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NavmineStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidJson = 3,
    InvalidArgument = 4,
    UnknownLabel = 5,
    UnparseableReply = 6,
    Internal = 7,
}

/// Axis-aligned box in normalized screen coordinates.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NavmineBox {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NavminePoint {
    pub x: f64,
    pub y: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NavmineF1 {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

/// Opaque list of OCR tokens for one frame.
pub struct NavmineTokenList {
    tokens: Vec<OcrToken>,
}

/// Opaque labeled element layout.
pub struct NavmineLayout {
    layout: SomLayout,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(NavmineStatus, String);

type Result<T> = std::result::Result<T, Failure>;

fn fail<T>(status: NavmineStatus, msg: impl Into<String>) -> Result<T> {
    Err(Failure(status, msg.into()))
}

/// Runs `f`, recording any failure or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<()>) -> NavmineStatus {
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(NavmineStatus::Internal, "internal panic"));
    let (status, msg) = match outcome {
        Ok(()) => (NavmineStatus::Ok, String::new()),
        Err(Failure(s, m)) => (s, m),
    };
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg.replace('\0', " ")).unwrap_or_default());
    status
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str> {
    if p.is_null() {
        return fail(NavmineStatus::NullArgument, format!("{name} is null"));
    }
    CStr::from_ptr(p).to_str().or_else(|_| fail(NavmineStatus::InvalidUtf8, format!("{name} is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T> {
    p.as_ref().map_or_else(|| fail(NavmineStatus::NullArgument, format!("{name} is null")), Ok)
}

unsafe fn out_arg<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T> {
    p.as_mut().map_or_else(|| fail(NavmineStatus::NullArgument, format!("{name} is null")), Ok)
}

fn to_bbox(b: &NavmineBox) -> Result<BBox> {
    BBox::new(b.x0, b.y0, b.x1, b.y1).or_else(|e| fail(NavmineStatus::InvalidArgument, e.to_string()))
}

fn to_c_string(s: String) -> Result<*mut c_char> {
    CString::new(s).map(CString::into_raw).or_else(|_| fail(NavmineStatus::Internal, "output contains NUL"))
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize, name: &str) -> Result<&'a [f64]> {
    match (p.is_null(), len) {
        (_, 0) => Ok(&[]),
        (true, _) => fail(NavmineStatus::NullArgument, format!("{name} is null")),
        (false, n) => Ok(std::slice::from_raw_parts(p, n)),
    }
}

/// Description of the last failure on this thread; empty after a success.
/// Valid until the next navmine call on the same thread.
#[no_mangle]
pub extern "C" fn navmine_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn navmine_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from a navmine out-parameter and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn navmine_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Character-level edit distance between two UTF-8 strings.
///
/// # Safety
/// `a` and `b` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn navmine_levenshtein(a: *const c_char, b: *const c_char, out: *mut usize) -> NavmineStatus {
    guard(|| {
        let (a, b) = (str_arg(a, "a")?, str_arg(b, "b")?);
        *out_arg(out, "out")? = levenshtein(a, b);
        Ok(())
    })
}

/// Intersection over union of two valid boxes.
///
/// # Safety
/// Pointers must be valid for reads (`a`, `b`) and writes (`out`).
#[no_mangle]
pub unsafe extern "C" fn navmine_iou(a: *const NavmineBox, b: *const NavmineBox, out: *mut f64) -> NavmineStatus {
    guard(|| {
        let a = to_bbox(ref_arg(a, "a")?)?;
        let b = to_bbox(ref_arg(b, "b")?)?;
        *out_arg(out, "out")? = a.iou(&b);
        Ok(())
    })
}

/// Bitmask of the refinement zones containing height `y`: bit 0 is zone 1.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn navmine_zones_containing(y: f64, out: *mut u8) -> NavmineStatus {
    guard(|| {
        if !(0.0..=1.0).contains(&y) {
            return fail(NavmineStatus::InvalidArgument, format!("y = {y} is outside [0, 1]"));
        }
        *out_arg(out, "out")? = zones_containing(y).iter().fold(0u8, |m, z| m | 1 << (z.index - 1));
        Ok(())
    })
}

/// New empty token list. Never null.
#[no_mangle]
pub extern "C" fn navmine_tokens_new() -> *mut NavmineTokenList {
    Box::into_raw(Box::new(NavmineTokenList { tokens: Vec::new() }))
}

/// Appends an OCR token.
///
/// # Safety
/// `list` must come from [`navmine_tokens_new`]; `text` must be
/// NUL-terminated; `bbox` must be readable.
#[no_mangle]
pub unsafe extern "C" fn navmine_tokens_push(
    list: *mut NavmineTokenList,
    text: *const c_char,
    bbox: *const NavmineBox,
    confidence: f64,
) -> NavmineStatus {
    guard(|| {
        let list = out_arg(list, "list")?;
        let text = str_arg(text, "text")?.to_string();
        let bbox = to_bbox(ref_arg(bbox, "bbox")?)?;
        if !(0.0..=1.0).contains(&confidence) {
            return fail(NavmineStatus::InvalidArgument, format!("confidence {confidence} is outside [0, 1]"));
        }
        list.tokens.push(OcrToken { text, bbox, confidence });
        Ok(())
    })
}

/// Number of tokens in `list`; 0 for null.
///
/// # Safety
/// `list` must be null or come from [`navmine_tokens_new`].
#[no_mangle]
pub unsafe extern "C" fn navmine_tokens_len(list: *const NavmineTokenList) -> usize {
    list.as_ref().map_or(0, |l| l.tokens.len())
}

/// # Safety
/// `list` must be null or come from [`navmine_tokens_new`], freed once.
#[no_mangle]
pub unsafe extern "C" fn navmine_tokens_free(list: *mut NavmineTokenList) {
    if !list.is_null() {
        drop(Box::from_raw(list));
    }
}

/// Change ratio between two frames' tokens, as used for transition
/// detection. Tokens are compared as given, without confidence filtering.
///
/// # Safety
/// Both lists must come from [`navmine_tokens_new`]; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn navmine_change_ratio(
    prev: *const NavmineTokenList,
    next: *const NavmineTokenList,
    location_tolerance: f64,
    out: *mut f64,
) -> NavmineStatus {
    guard(|| {
        let (prev, next) = (ref_arg(prev, "prev")?, ref_arg(next, "next")?);
        if location_tolerance.is_nan() || location_tolerance < 0.0 {
            return fail(NavmineStatus::InvalidArgument, "location_tolerance must be >= 0");
        }
        *out_arg(out, "out")? = change_ratio(&prev.tokens, &next.tokens, location_tolerance);
        Ok(())
    })
}

/// Runs transition detection on a JSON array of OCR frames. `params_json`
/// may be null for the defaults or hold a partial parameter object. The
/// report is written to `out_json`.
///
/// # Safety
/// Strings must be NUL-terminated; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn navmine_detect_transitions_json(
    frames_json: *const c_char,
    params_json: *const c_char,
    out_json: *mut *mut c_char,
) -> NavmineStatus {
    guard(|| {
        let out = out_arg(out_json, "out_json")?;
        *out = ptr::null_mut();
        let frames: Vec<OcrFrame> = serde_json::from_str(str_arg(frames_json, "frames_json")?)
            .or_else(|e| fail(NavmineStatus::InvalidJson, format!("frames_json: {e}")))?;
        let params: TransitionParams = if params_json.is_null() {
            TransitionParams::default()
        } else {
            serde_json::from_str(str_arg(params_json, "params_json")?)
                .or_else(|e| fail(NavmineStatus::InvalidJson, format!("params_json: {e}")))?
        };
        let report = detect_transitions(&frames, &params).or_else(|e| fail(NavmineStatus::InvalidArgument, e.to_string()))?;
        let text = serde_json::to_string(&report).or_else(|e| fail(NavmineStatus::Internal, e.to_string()))?;
        *out = to_c_string(text)?;
        Ok(())
    })
}

/// Precision, recall and F1 of predicted against true transition times.
///
/// # Safety
/// Arrays must hold the given number of values (null is allowed when the
/// count is 0); `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn navmine_transition_f1(
    predicted: *const f64,
    n_predicted: usize,
    truth: *const f64,
    n_truth: usize,
    tolerance_s: f64,
    out: *mut NavmineF1,
) -> NavmineStatus {
    guard(|| {
        let p = slice_arg(predicted, n_predicted, "predicted")?;
        let t = slice_arg(truth, n_truth, "truth")?;
        if tolerance_s.is_nan() || tolerance_s < 0.0 || p.iter().chain(t).any(|v| !v.is_finite()) {
            return fail(NavmineStatus::InvalidArgument, "times and tolerance must be finite, tolerance >= 0");
        }
        let r = transition_f1(p, t, tolerance_s);
        *out_arg(out, "out")? = NavmineF1 {
            precision: r.precision,
            recall: r.recall,
            f1: r.f1,
            true_positives: r.true_positives,
            false_positives: r.false_positives,
            false_negatives: r.false_negatives,
        };
        Ok(())
    })
}

/// Parses a model reply. The result is JSON: `{"element": {"kind", "label"}}`
/// for an element still to be localized, `{"action": {...}}` otherwise.
///
/// # Safety
/// `reply` must be NUL-terminated; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn navmine_parse_action(reply: *const c_char, out_json: *mut *mut c_char) -> NavmineStatus {
    guard(|| {
        let out = out_arg(out_json, "out_json")?;
        *out = ptr::null_mut();
        let parsed = parse_action_response(str_arg(reply, "reply")?)
            .or_else(|e| fail(NavmineStatus::UnparseableReply, e.to_string()))?;
        let value = match parsed {
            CandidateAction::Element { long_press, label } => serde_json::json!({
                "element": {"kind": if long_press { "long_press" } else { "touch" }, "label": label}
            }),
            CandidateAction::Direct(a) => serde_json::json!({ "action": a }),
        };
        *out = to_c_string(value.to_string())?;
        Ok(())
    })
}

/// Loads a layout from its JSON form, as stored in `layouts.json`.
///
/// # Safety
/// `json` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn navmine_layout_from_json(json: *const c_char, out: *mut *mut NavmineLayout) -> NavmineStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let layout: SomLayout =
            serde_json::from_str(str_arg(json, "json")?).or_else(|e| fail(NavmineStatus::InvalidJson, e.to_string()))?;
        if layout.elements.iter().enumerate().any(|(i, e)| e.label as usize != i + 1) {
            return fail(NavmineStatus::InvalidArgument, "labels must run 1..=N in order");
        }
        *out = Box::into_raw(Box::new(NavmineLayout { layout }));
        Ok(())
    })
}

/// Number of elements; 0 for null.
///
/// # Safety
/// `layout` must be null or come from [`navmine_layout_from_json`].
#[no_mangle]
pub unsafe extern "C" fn navmine_layout_len(layout: *const NavmineLayout) -> usize {
    layout.as_ref().map_or(0, |l| l.layout.elements.len())
}

/// Center of the element carrying `label`.
///
/// # Safety
/// `layout` must come from [`navmine_layout_from_json`]; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn navmine_layout_resolve(layout: *const NavmineLayout, label: u32, out: *mut NavminePoint) -> NavmineStatus {
    guard(|| {
        let layout = ref_arg(layout, "layout")?;
        let p = resolve_label(&layout.layout, label).or_else(|e| fail(NavmineStatus::UnknownLabel, e.to_string()))?;
        *out_arg(out, "out")? = NavminePoint { x: p.x, y: p.y };
        Ok(())
    })
}

/// Whether any element's center lies inside `region`.
///
/// # Safety
/// `layout` must come from [`navmine_layout_from_json`]; `region` readable,
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn navmine_layout_hit_test(layout: *const NavmineLayout, region: *const NavmineBox, out: *mut bool) -> NavmineStatus {
    guard(|| {
        let layout = ref_arg(layout, "layout")?;
        let region = to_bbox(ref_arg(region, "region")?)?;
        *out_arg(out, "out")? = hit_test(&layout.layout, &region);
        Ok(())
    })
}

/// # Safety
/// `layout` must be null or come from [`navmine_layout_from_json`], freed once.
#[no_mangle]
pub unsafe extern "C" fn navmine_layout_free(layout: *mut NavmineLayout) {
    if !layout.is_null() {
        drop(Box::from_raw(layout));
    }
}
