use wlra::comm::{build_lb_instance, encode_css, recover_secret, EncodedSolution, OffSupport};
use wlra::solvers::{css_wlra, plain_svd_baseline, svd_w, weighted_loss, CssSelection, LraMethod};

use crate::{usage, CliResult, CommDemoArgs};

/// Seeds searched for an instance on which the unweighted SVD fails.
const ADVERSARIAL_SEARCH: u64 = 64;

fn off_support(amplitude: i64) -> OffSupport {
    if amplitude == 0 {
        OffSupport::Copies
    } else {
        OffSupport::Random { amplitude }
    }
}

fn protocol_bits(
    n: usize,
    r: usize,
    s: usize,
    k: usize,
    seed: u64,
    eps: f64,
    off: OffSupport,
) -> anyhow::Result<(u64, bool)> {
    let inst = build_lb_instance(n, r, s, k, seed, off)?;
    let sol = css_wlra(&inst.a, &inst.w, r, k, eps, CssSelection::PivotedQr)?;
    let enc = encode_css(&inst.a, &sol, n, n)?;
    let bob = EncodedSolution::from_bytes(&enc.to_bytes()?)?.reconstruct(&inst.w)?;
    let recovered = recover_secret(&bob, &inst).is_ok_and(|m| m == inst.a_dense);
    Ok((enc.total_bits, recovered))
}

pub fn cmd_comm_demo(args: &CommDemoArgs) -> CliResult<()> {
    let CommDemoArgs {
        n,
        r,
        s,
        k,
        seed,
        eps,
        amplitude,
    } = *args;
    if amplitude < 0 {
        return usage("--amplitude must be non-negative");
    }
    if !(eps > 0.0) {
        return usage("--eps must be positive");
    }
    let off = off_support(amplitude);
    let inst = match build_lb_instance(n, r, s, k, seed, off) {
        Ok(inst) => inst,
        Err(e) => return usage(e.to_string()),
    };
    println!("instance: n={n} r={r} s={s} k={k} seed={seed} off-support={off:?}");

    let direct = svd_w(&inst.a, &inst.w, r, k, LraMethod::Exact)?;
    let loss = weighted_loss(&inst.a, &inst.w, &direct)?;
    let ok = recover_secret(&direct, &inst).is_ok_and(|m| m == inst.a_dense);
    println!(
        "svd_w: loss {loss:.3e}, recovery {}",
        if ok { "success" } else { "FAILED" }
    );

    let (bits, bob_ok) = protocol_bits(n, r, s, k, seed, eps, off)?;
    let reference = (s * r * k) as u64;
    println!(
        "css message: {bits} bits (s*r*k = {reference}, ratio {:.2}), recovery from decoded message {}",
        bits as f64 / reference as f64,
        if bob_ok { "success" } else { "FAILED" }
    );
    if 2 * s <= n / r {
        let (doubled, _) = protocol_bits(n, r, 2 * s, k, seed, eps, off)?;
        println!(
            "doubling s to {}: {doubled} bits, ratio {:.3}",
            2 * s,
            doubled as f64 / bits as f64
        );
    } else {
        println!("doubling s: skipped, 2s exceeds n/r = {}", n / r);
    }

    let plain_fails = |seed: u64| -> anyhow::Result<bool> {
        let inst = build_lb_instance(n, r, s, k, seed, off)?;
        let plain = plain_svd_baseline(&inst.a, k)?;
        Ok(recover_secret(&plain, &inst).map_or(true, |m| m != inst.a_dense))
    };
    let mut found = None;
    for cand in seed..seed + ADVERSARIAL_SEARCH {
        if plain_fails(cand)? {
            found = Some(cand);
            break;
        }
    }
    match found {
        Some(cand) => println!("plain svd: recovery fails at seed {cand}"),
        None => println!(
            "plain svd: recovery succeeded on seeds {seed}..{}",
            seed + ADVERSARIAL_SEARCH - 1
        ),
    }
    Ok(())
}
