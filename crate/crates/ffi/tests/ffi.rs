use std::ffi::CStr;
use std::ptr;

use invwishart_ffi::*;

const OMEGA: [f64; 4] = [2.0, 0.3, 0.3, 1.0];

fn sampler(iscov: bool, retcholu: bool, algorithm: IwAlgorithm, seed: u64) -> *mut IwSampler {
    let mut s = ptr::null_mut();
    let st = unsafe {
        iw_sampler_new(
            2,
            5.0,
            OMEGA.as_ptr(),
            iscov,
            false,
            retcholu,
            algorithm,
            seed,
            &mut s,
        )
    };
    assert_eq!(st, IwStatus::Ok);
    assert!(!s.is_null());
    s
}

fn draw(s: *mut IwSampler) -> [f64; 4] {
    let mut out = [0.0; 4];
    assert_eq!(
        unsafe { iw_sampler_draw(s, out.as_mut_ptr(), out.len()) },
        IwStatus::Ok
    );
    out
}

#[test]
fn draws_are_reproducible_and_counted() {
    let (a, b) = (
        sampler(false, true, IwAlgorithm::Auto, 9),
        sampler(false, true, IwAlgorithm::Auto, 9),
    );
    let x = draw(a);
    assert_eq!(x, draw(b));
    assert_eq!(x[2], 0.0);
    assert!(x[0] > 0.0 && x[3] > 0.0);

    let mut alg = IwAlgorithm::Auto;
    let mut ops = IwOpCounts::default();
    unsafe {
        assert_eq!(iw_sampler_algorithm(a, &mut alg), IwStatus::Ok);
        assert_eq!(iw_sampler_op_counts(a, &mut ops), IwStatus::Ok);
        iw_sampler_free(a);
        iw_sampler_free(b);
    }
    assert_eq!(alg, IwAlgorithm::Direct);
    assert_eq!(
        ops,
        IwOpCounts {
            trtri: 1,
            trmm: 1,
            potrf: 1
        }
    );
}

#[test]
fn square_draws_are_symmetric() {
    let s = sampler(true, false, IwAlgorithm::Indirect, 3);
    let x = draw(s);
    assert_eq!(x[1], x[2]);
    let mut ops = IwOpCounts::default();
    unsafe {
        iw_sampler_op_counts(s, &mut ops);
        iw_sampler_free(s);
    }
    assert_eq!(
        ops,
        IwOpCounts {
            trtri: 1,
            trmm: 2,
            potrf: 1
        }
    );
}

#[test]
fn invalid_arguments() {
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(
            iw_sampler_new(
                2,
                0.5,
                OMEGA.as_ptr(),
                true,
                false,
                false,
                IwAlgorithm::Auto,
                1,
                &mut s
            ),
            IwStatus::InvalidArgument
        );
        assert!(s.is_null());
        assert_eq!(
            iw_sampler_new(
                2,
                5.0,
                ptr::null(),
                true,
                false,
                false,
                IwAlgorithm::Auto,
                1,
                &mut s
            ),
            IwStatus::NullPointer
        );
        let indefinite = [1.0, 2.0, 2.0, 1.0];
        assert_eq!(
            iw_sampler_new(
                2,
                5.0,
                indefinite.as_ptr(),
                true,
                false,
                false,
                IwAlgorithm::Indirect,
                1,
                &mut s
            ),
            IwStatus::Ok
        );
        let mut out = [0.0; 4];
        assert_eq!(
            iw_sampler_draw(s, out.as_mut_ptr(), 4),
            IwStatus::NotPositiveDefinite
        );
        assert_eq!(out, [0.0; 4]);
        assert_eq!(
            iw_sampler_draw(s, out.as_mut_ptr(), 3),
            IwStatus::BufferTooSmall
        );
        assert_eq!(
            iw_sampler_draw(ptr::null_mut(), out.as_mut_ptr(), 4),
            IwStatus::NullPointer
        );
        iw_sampler_free(s);
        iw_sampler_free(ptr::null_mut());
    }
}

#[test]
fn recommendation_follows_parameterization() {
    assert_eq!(iw_recommend_algorithm(true, false), IwAlgorithm::Indirect);
    assert_eq!(iw_recommend_algorithm(true, true), IwAlgorithm::Indirect);
    assert_eq!(iw_recommend_algorithm(false, false), IwAlgorithm::Direct);
    assert_eq!(iw_recommend_algorithm(false, true), IwAlgorithm::Direct);
}

#[test]
fn logkernel_matches_scalar_inverse_gamma() {
    // m = 1: log p(b) = -(n + 2)/2 log b - omega / (2 b) up to a constant
    let (n, omega, b) = (4.0, 3.0, 0.7);
    let mut v = 0.0;
    let st = unsafe { iw_logkernel(IwKernel::InvWishart, 1, &b, n, &omega, false, false, &mut v) };
    assert_eq!(st, IwStatus::Ok);
    let expected = -(n + 2.0) / 2.0 * f64::ln(b) - omega / (2.0 * b);
    let sigma = 1.0 / omega;
    let mut w = 0.0;
    unsafe { iw_logkernel(IwKernel::InvWishart, 1, &b, n, &sigma, true, false, &mut w) };
    assert!(
        (v - expected).abs() < 1e-12 && (w - expected).abs() < 1e-12,
        "{v} {w} {expected}"
    );

    let lower = [1.0, 0.0, 0.5, 1.0];
    let st = unsafe {
        iw_logkernel(
            IwKernel::CholWishart,
            2,
            lower.as_ptr(),
            5.0,
            OMEGA.as_ptr(),
            true,
            false,
            &mut v,
        )
    };
    assert_eq!(st, IwStatus::InvalidArgument);
}

#[test]
fn status_messages() {
    for s in [
        IwStatus::Ok,
        IwStatus::NullPointer,
        IwStatus::InvalidArgument,
        IwStatus::NotPositiveDefinite,
        IwStatus::NumericalFailure,
        IwStatus::BufferTooSmall,
        IwStatus::Panic,
    ] {
        let msg = unsafe { CStr::from_ptr(iw_status_message(s)) };
        assert!(!msg.to_bytes().is_empty());
    }
}

#[test]
fn header_declares_the_interface() {
    let header =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/invwishart.h"))
            .unwrap();
    for needle in [
        "typedef struct IwSampler IwSampler;",
        "IW_STATUS_NOT_POSITIVE_DEFINITE = 3",
        "IW_ALGORITHM_AUTO = 2",
        "IwStatus iw_sampler_new(",
        "IwStatus iw_sampler_draw(",
        "void iw_sampler_free(",
        "IwAlgorithm iw_recommend_algorithm(",
        "IwStatus iw_logkernel(",
        "const char *iw_status_message(",
    ] {
        assert!(header.contains(needle), "missing {needle:?}");
    }
}

#[test]
fn header_compiles_as_c() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("probe.c");
    std::fs::write(&src, "#include \"invwishart.h\"\nint main(void) { return iw_recommend_algorithm(true, false); }\n").unwrap();
    let status = std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/include"))
        .arg(&src)
        .status();
    match status {
        Ok(s) => assert!(s.success(), "header failed to compile"),
        Err(e) => eprintln!("skipping: no C compiler ({e})"),
    }
}
