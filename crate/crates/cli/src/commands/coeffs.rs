use rydmag::effective::{anisotropies_from, EffectiveCoefficients};
use rydmag::units::angular_to_mhz;

use crate::error::CliResult;
use crate::output::Table;
use crate::Context;

/// Pair, site and three-body coefficient tables in both unit conventions,
/// plus the anisotropy ratios for uniform chains of five or more atoms.
pub fn run(ctx: &mut Context) -> CliResult<()> {
    let r = ctx.require()?.clone();
    let g = &r.spec.geometry;
    let c = EffectiveCoefficients::new(g, &r.spec.drive)?;
    let n = c.len();

    let mut pairs = Table::new(&[
        "i", "j", "distance_um", "v_mhz", "j_rad_per_us", "j_mhz", "u_rad_per_us", "u_mhz", "u_two_body_mhz",
    ]);
    for a in 0..n {
        for b in (a + 1)..n {
            pairs.push(vec![
                a.into(),
                b.into(),
                g.distance(a, b).into(),
                angular_to_mhz(c.v(a, b)).into(),
                c.j(a, b).into(),
                angular_to_mhz(c.j(a, b)).into(),
                c.u(a, b).into(),
                angular_to_mhz(c.u(a, b)).into(),
                angular_to_mhz(c.u_two_body(a, b)).into(),
            ]);
        }
    }
    ctx.out.table("coeffs_pairs", &pairs)?;

    let mut sites = Table::new(&["i", "mu_rad_per_us", "mu_mhz"]);
    for a in 0..n {
        sites.push(vec![a.into(), c.mu(a).into(), angular_to_mhz(c.mu(a)).into()]);
    }
    ctx.out.table("coeffs_sites", &sites)?;

    // Q_{i,j,k}: hop i → j with a spectator at k
    let mut triples = Table::new(&["i", "j", "k", "q_rad_per_us", "q_mhz"]);
    for a in 0..n {
        for b in 0..n {
            for s in 0..n {
                if a != b && b != s && a != s {
                    let q = c.q(a, b, s);
                    triples.push(vec![a.into(), b.into(), s.into(), q.into(), angular_to_mhz(q).into()]);
                }
            }
        }
    }
    ctx.out.table("coeffs_pair_hops", &triples)?;

    ctx.summary.push(format!(
        "δ/2π = {:.6} MHz, J_01/2π = {:.6} MHz (angular {:.6} rad/μs)",
        angular_to_mhz(c.delta_ls()),
        angular_to_mhz(c.j(0, 1.min(n - 1))),
        c.j(0, 1.min(n - 1))
    ));
    if n >= 5 && g.uniform_spacing().is_some() {
        let a = anisotropies_from(&c)?;
        ctx.summary.push(format!("ξ₁ = {:.4}", a.xi1));
        ctx.summary.push(format!("ξ₂ = {:.4} (two-body only: {:.4})", a.xi2, a.xi2_two_body));
        ctx.summary.push(format!(
            "|Q_(i,i+2,i+1)|/2π = {:.6} MHz (angular {:.6} rad/μs)",
            angular_to_mhz(a.q_nnn.abs()),
            a.q_nnn.abs()
        ));
        ctx.out.json("anisotropy.json", "summary", &a)?;
    }
    Ok(())
}
