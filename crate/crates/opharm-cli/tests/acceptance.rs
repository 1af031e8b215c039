//! Acceptance suite: one pass/fail line per criterion, with the tolerances
//! pinned inside the check implementations. Run with
//! `cargo test -p opharm-cli --test acceptance -- --nocapture` to see the
//! per-criterion lines.

use std::time::Instant;

use opharm_cli::checks::run_all_checks;

#[test]
fn acceptance_criteria() {
    let start = Instant::now();
    let results = run_all_checks(false);
    let total = start.elapsed().as_secs_f64();

    let criteria: [(&str, &str); 9] = [
        (
            "fft_plancherel",
            "FFT roundtrip and Plancherel pairing at 1e-10 over the size matrix",
        ),
        (
            "reproducing_pairs",
            "companion residuals: discrete 1e-10, continuous 1e-6",
        ),
        (
            "p2_half_identity",
            "||s(f)||_2 = 1/2 ||f||_2 within 1e-3 on 50 zero-mean fields",
        ),
        (
            "cone_factorization",
            "single-mode conic = sqrt(c_d) radial within 2%",
        ),
        (
            "deriv_identity",
            "Poisson derivative identity k=1,2 within 1e-4",
        ),
        (
            "kernel_decay",
            "weighted Riesz-of-Poisson kernel bounded up to r = 1e3",
        ),
        (
            "carleson_bmo_band",
            "Carleson/BMO^2 log-ratio band <= 3, seed-stable within 10%",
        ),
        (
            "equivalence_bands",
            "norm-equivalence bands finite, seed-stable, scaling-invariant",
        ),
        (
            "quantum_torus",
            "commutation, product oracle, transference, expectation, semigroup, limits",
        ),
    ];

    let mut all_pass = true;
    for (i, (name, blurb)) in criteria.iter().enumerate() {
        let r = results
            .iter()
            .find(|r| r.name == *name)
            .unwrap_or_else(|| panic!("check {name} missing"));
        println!(
            "criterion {:02} [{}] {}: {} ({:.2}s)",
            i + 1,
            if r.passed { "PASS" } else { "FAIL" },
            blurb,
            r.detail,
            r.seconds
        );
        all_pass &= r.passed;
    }

    // criterion 10: the whole suite at desk scale in under five minutes
    let timing_ok = total < 300.0;
    println!(
        "criterion 10 [{}] full invariant suite end-to-end: {total:.1}s (< 300s)",
        if timing_ok { "PASS" } else { "FAIL" }
    );
    assert!(
        all_pass,
        "at least one acceptance criterion failed; see lines above"
    );
    assert!(
        timing_ok,
        "invariant suite took {total:.1}s, budget is 300s"
    );
}
