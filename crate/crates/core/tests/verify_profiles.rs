use std::time::{Duration, Instant};

use phylotw::verify::{claim_ids, format_table, verify_all, Profile, VerifyOptions};

#[test]
fn desk_profile_passes_every_claim() {
    let reports = verify_all(&VerifyOptions {
        profile: Profile::Desk,
        ..VerifyOptions::default()
    })
    .unwrap();
    assert_eq!(reports.len(), claim_ids().len());
    assert!(
        reports.iter().all(|r| r.ok()),
        "\n{}",
        format_table(&reports)
    );
    assert!(reports.iter().all(|r| r.instances > 0));
}

#[test]
fn smoke_profile_is_quick_and_deterministic() {
    let opts = VerifyOptions {
        seed: 99,
        ..VerifyOptions::default()
    };
    let start = Instant::now();
    let a = verify_all(&opts).unwrap();
    assert!(start.elapsed() < Duration::from_secs(60));
    let b = verify_all(&opts).unwrap();
    let key =
        |r: &phylotw::verify::ClaimReport| (r.id, r.passed, r.failed, r.skipped, r.findings.len());
    assert_eq!(
        a.iter().map(key).collect::<Vec<_>>(),
        b.iter().map(key).collect::<Vec<_>>()
    );
    assert!(a.iter().all(|r| r.ok()), "\n{}", format_table(&a));
}
