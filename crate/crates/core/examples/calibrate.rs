//! Calibration runs for the heavy spectral experiments: prints tail fits,
//! residues and timings at several grid sizes so defaults can be pinned.

use moyal_lab::algebra::{build_basis, MatrixElement, ThetaMatrix};
use moyal_lab::assembly::{
    assemble_approximant, assemble_conv_product, assemble_multiplier,
    assemble_quantized_derivative, FullSymbol,
};
use moyal_lab::numerics::{make_grid, make_pauli, GridScheme, SphereGrid};
use moyal_lab::spectral::{singular_values, tail_coefficient};
use moyal_lab::zeta::{hz_closed_form, kappa, residue_at_d, ZetaPair, ZetaSamples, DEFAULT_STENCIL};
use moyal_lab::{algebra, zeta};
use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

fn main() {
    moyal_lab::set_threads(1);
    let which = std::env::args().nth(1).unwrap_or_else(|| "all".into());
    let theta = ThetaMatrix::new(2, 2.0).unwrap();

    if which == "headline" || which == "all" {
        headline(&theta);
    }
    if which == "qd" || which == "all" {
        qd(&theta);
    }
    if which == "residue" || which == "all" {
        residue(&theta);
    }
    if which == "slopes" || which == "all" {
        slopes(&theta);
    }
}

fn window_from_box(theta0: f64, l: f64, lo_frac: f64, hi_frac: f64) -> (usize, usize) {
    let n_box = theta0 * (1.0 + l * l) / 2.0;
    let lo = ((lo_frac * n_box).round() as usize).max(12);
    let hi = (hi_frac * n_box).round() as usize;
    (lo, hi)
}

fn headline(theta: &ThetaMatrix) {
    println!("== headline: n^(1/2) mu_n of pi1(x)(1-Delta)^(-1/2), target 1.0 ==");
    for &(l, n) in &[(6.75f64, 40usize), (8.0, 52), (9.0, 64)] {
        let t0 = Instant::now();
        let grid = Arc::new(make_grid(2, l, n, GridScheme::MidpointOffset).unwrap());
        let table = build_basis(2, theta, Arc::clone(&grid)).unwrap();
        let x = MatrixElement::matrix_unit(2, 0, 0, theta);
        let f = x.to_symbol(&table).unwrap();
        let op = assemble_conv_product(&f, &FullSymbol::bessel_weight(1.0), &grid, theta).unwrap();
        let t_asm = t0.elapsed().as_secs_f64();
        let spec = singular_values(&op).unwrap();
        let t_svd = t0.elapsed().as_secs_f64() - t_asm;
        for (lo_f, hi_f) in [(0.15, 0.6), (0.15, 0.7), (0.2, 0.8)] {
            let w = window_from_box(theta.theta0, l, lo_f, hi_f);
            if w.1 <= w.0 + 20 {
                continue;
            }
            match tail_coefficient(&spec, 2, w) {
                Ok(fit) => println!(
                    "(L={l}, n={n}) window=({},{}) coeff={:.4} exp={:.3} resid={:.3} [asm {t_asm:.1}s svd {t_svd:.1}s]",
                    w.0, w.1, fit.coefficient, fit.exponent, fit.residual
                ),
                Err(e) => println!("(L={l}, n={n}) window=({},{}) fit error: {e}", w.0, w.1),
            }
        }
        // print the raw scaled sequence coarsely
        let scaled: Vec<f64> = (0..spec.len().min(140))
            .map(|k| ((k + 1) as f64).sqrt() * spec.values[k])
            .collect();
        let show: Vec<String> = scaled
            .iter()
            .enumerate()
            .step_by(8)
            .map(|(i, v)| format!("{i}:{v:.3}"))
            .collect();
        println!("  scaled head: {}", show.join(" "));
    }
}

fn qd(theta: &ThetaMatrix) {
    println!("== quantized derivative vs kappa2 |||x||| ==");
    let spin = make_pauli(2).unwrap();
    let sphere = SphereGrid::circle(256).unwrap();
    // |||x||| for x = e00 (cheap, any decent grid)
    let small = Arc::new(make_grid(2, 8.0, 48, GridScheme::MidpointOffset).unwrap());
    let table = build_basis(4, theta, Arc::clone(&small)).unwrap();
    let x = MatrixElement::matrix_unit(4, 0, 0, theta);
    let triple = algebra::triple_seminorm(&x, &table, &sphere, &spin).unwrap();
    let sobolev = algebra::sobolev_seminorm(&x, &table).unwrap();
    let k2 = kappa(2).unwrap();
    println!("|||x||| = {triple:.6}, sobolev = {sobolev:.6}, target kappa2*||| = {:.6}", k2 * triple);

    let f = x.to_symbol(&table).unwrap();
    for &(l, n) in &[(6.0f64, 36usize), (7.0, 44)] {
        let grid = Arc::new(make_grid(2, l, n, GridScheme::MidpointOffset).unwrap());
        let t0 = Instant::now();
        let qd = assemble_quantized_derivative(&f, &grid, &spin, theta).unwrap();
        let t_asm = t0.elapsed().as_secs_f64();
        let spec = singular_values(&qd).unwrap();
        let t_svd = t0.elapsed().as_secs_f64() - t_asm;
        for (lo_f, hi_f) in [(0.15, 0.6), (0.15, 0.8), (0.3, 1.0)] {
            let w = window_from_box(theta.theta0, l, lo_f, hi_f);
            match tail_coefficient(&spec, 2, w) {
                Ok(fit) => println!(
                    "qd (L={l},n={n}) window=({},{}) coeff={:.4} (target {:.4}) exp={:.3} resid={:.3} [asm {t_asm:.0}s svd {t_svd:.0}s]",
                    w.0, w.1, fit.coefficient, k2 * triple, fit.exponent, fit.residual
                ),
                Err(e) => println!("qd (L={l},n={n}) fit error: {e}"),
            }
        }
        let scaled: Vec<String> = (0..spec.len().min(160))
            .map(|k| ((k + 1) as f64).sqrt() * spec.values[k])
            .enumerate()
            .step_by(10)
            .map(|(i, v)| format!("{i}:{v:.3}"))
            .collect();
        println!("  qd scaled head: {}", scaled.join(" "));

        let t0 = Instant::now();
        let ap = assemble_approximant(&f, &grid, &spin, theta).unwrap();
        let spec_a = singular_values(&ap).unwrap();
        let w = window_from_box(theta.theta0, l, 0.15, 0.6);
        match tail_coefficient(&spec_a, 2, w) {
            Ok(fit) => println!(
                "approximant (L={l},n={n}) coeff={:.4} resid={:.3} [{:.0}s]",
                fit.coefficient,
                fit.residual,
                t0.elapsed().as_secs_f64()
            ),
            Err(e) => println!("approximant fit error: {e}"),
        }
    }
}

fn residue(theta: &ThetaMatrix) {
    println!("== residue of Tr(A^z B^z) at z=2, target 2.0 ==");
    for &(l, n) in &[(5.0f64, 24usize), (6.0, 32), (7.5, 48)] {
        let grid = Arc::new(make_grid(2, l, n, GridScheme::MidpointOffset).unwrap());
        let table = build_basis(2, theta, Arc::clone(&grid)).unwrap();
        let x = MatrixElement::matrix_unit(2, 0, 0, theta);
        // B = Y†Y with Y the kernel of the square-root factor (exact PSD)
        let root = x.positive_root(0.5).unwrap();
        let fr = root.to_symbol(&table).unwrap();
        let y = assemble_conv_product(&fr, &FullSymbol::one(), &grid, theta).unwrap();
        let b = y.adjoint().compose(&y).unwrap();
        let a = assemble_multiplier(&FullSymbol::bessel_weight(1.0), &grid).unwrap();
        let t0 = Instant::now();
        let pair = ZetaPair::new(&a, &b).unwrap();
        let zs: Vec<f64> = DEFAULT_STENCIL.iter().map(|e| 2.0 + e).collect();
        let mut raw = Vec::new();
        let mut corrected = Vec::new();
        // tau(B^z) from the matrix picture: projection, so tau for all z
        let tau_bz = |_z: f64| theta.trace_scale();
        for &z in &zs {
            let t = pair.trace(z).unwrap();
            raw.push(t);
            // complement correction: (1/(2pi)^2) tau(B^z) * int_{R^2 \ box} h_z
            let m = 2048;
            let dphi = 2.0 * PI / m as f64;
            let mut tail = 0.0;
            for k in 0..m {
                let phi = (k as f64 + 0.5) * dphi;
                let (c, s) = (phi.cos(), phi.sin());
                let r_box = l / c.abs().max(s.abs());
                tail += (1.0 + r_box * r_box).powf(1.0 - z / 2.0) / (z - 2.0) * dphi;
            }
            corrected.push(t + tau_bz(z) / (2.0 * PI).powi(2) * tail);
        }
        let craw = residue_at_d(&ZetaSamples::new(zs.clone(), raw.clone(), "raw").unwrap(), 2).unwrap();
        let ccor =
            residue_at_d(&ZetaSamples::new(zs.clone(), corrected.clone(), "corr").unwrap(), 2).unwrap();
        // profile fit: raw(z) = λ · (1/(2π)²) τ(B^z) ∫_box h_z + a0 + a1 ε
        let mut profile = Vec::new();
        for &z in &zs {
            let m = 1024usize;
            let dphi = 2.0 * PI / m as f64;
            let mut boxint = 0.0;
            // radial in-box integral per angle: ∫_0^{r_box} (1+r²)^{-z/2} r dr
            //   = [1 − (1+r_box²)^{1−z/2}]/(z−2)
            for k in 0..m {
                let phi = (k as f64 + 0.5) * dphi;
                let (c, s) = (phi.cos(), phi.sin());
                let r_box = l / c.abs().max(s.abs());
                boxint += (1.0 - (1.0 + r_box * r_box).powf(1.0 - z / 2.0)) / (z - 2.0) * dphi;
            }
            profile.push(tau_bz(z) / (2.0 * PI).powi(2) * boxint);
        }
        // weighted LSQ for λ with nuisance a0 + a1 ε
        let lam = {
            let mut ata = [[0.0f64; 3]; 3];
            let mut atb = [0.0f64; 3];
            for i in 0..zs.len() {
                let eps = zs[i] - 2.0;
                let row = [profile[i], 1.0, eps];
                for r in 0..3 {
                    for c in 0..3 {
                        ata[r][c] += row[r] * row[c];
                    }
                    atb[r] += row[r] * raw[i];
                }
            }
            // Cramer into c-slot
            let det3 = |m: &[[f64; 3]; 3]| {
                m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                    - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                    + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
            };
            let d0 = det3(&ata);
            let mut num = ata;
            for r in 0..3 {
                num[r][0] = atb[r];
            }
            det3(&num) / d0
        };
        println!(
            "(L={l},n={n}) raw c={:.4}  corrected c={:.6}  profile λ={:.5} → c={:.4}  clip={:.2e}  [{:.1}s]",
            craw.0,
            ccor.0,
            lam,
            lam * 2.0,
            pair.clip_mass,
            t0.elapsed().as_secs_f64(),
        );
        // sanity: factorized formula at z = 3, 4, 6
        for z in [3.0, 4.0, 6.0] {
            let t = pair.trace(z).unwrap();
            let pred = theta.trace_scale() / (2.0 * PI).powi(2) * hz_closed_form(2, z, 2.0 * PI).unwrap();
            println!("   z={z}: Tr={t:.6} factorized={pred:.6} rel={:.2e}", (t - pred).abs() / pred);
        }
    }
    let _ = zeta::CLIP_MASS_LIMIT;
}

fn slopes(theta: &ThetaMatrix) {
    println!("== commutator decay slopes ==");
    let grid = Arc::new(make_grid(2, 6.0, 32, GridScheme::MidpointOffset).unwrap());
    let table = build_basis(2, theta, Arc::clone(&grid)).unwrap();
    let x = MatrixElement::matrix_unit(2, 0, 0, theta);
    let f = x.to_symbol(&table).unwrap();
    let xop = assemble_conv_product(&f, &FullSymbol::one(), &grid, theta).unwrap();
    let g_ang = std::sync::Arc::new(|s: &[f64]| 1.0 + 0.5 * s[0] + 0.25 * s[1]);
    // Bessel cases: pi1(x)(1-Delta)^(-beta/2), slope target -beta/2
    for beta in [1.0, 2.0] {
        let mb = assemble_multiplier(&FullSymbol::bessel_weight(beta), &grid).unwrap();
        let op = xop.compose(&mb).unwrap();
        let spec = singular_values(&op).unwrap();
        let w = (12usize, 33usize);
        let fit = tail_coefficient(&spec, 2, w).unwrap();
        println!("bessel beta={beta}: slope {:.3} target {:.3}", fit.exponent, -beta / 2.0);
    }
    // commutator cases
    for (alpha, beta) in [(0.0, 1.0), (-1.0, 0.0), (-1.0, 1.0)] {
        let ga = FullSymbol::new(
            g_ang.clone(),
            std::sync::Arc::new(move |r: f64| (1.0 + r * r).powf(alpha / 2.0)),
            "g(1-D)^{a/2}",
        );
        let mga = assemble_multiplier(&ga, &grid).unwrap();
        let mb = assemble_multiplier(&FullSymbol::bessel_weight(beta), &grid).unwrap();
        let op = xop.commutator(&mga).unwrap().compose(&mb).unwrap();
        let spec = singular_values(&op).unwrap();
        let w = (12usize, 66usize);
        let fit = tail_coefficient(&spec, 2, w).unwrap();
        let target = -(beta - alpha + 1.0) / 2.0;
        println!("commutator (a={alpha},b={beta}): slope {:.3} target {target:.3}", fit.exponent);
    }
}
