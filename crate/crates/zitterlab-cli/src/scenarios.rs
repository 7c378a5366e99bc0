//! The six scenario runners.
//!
//! Each runner turns a validated config into one CSV table plus a list of
//! tolerance gates, and every gate value is recomputable from the CSV it
//! ships with: the summary only repeats what the table already shows.

use nalgebra::Vector3;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use zitterlab::fock::FockSpace;
use zitterlab::grid::MomentumGrid;
use zitterlab::noether::{continuity_residual, SpacetimeSlab};
use zitterlab::spectrum::{dominant_frequency, FrequencyEstimate};
use zitterlab::spinor::{circular_triad, helicity_matrix, linear_triad};
use zitterlab::wavepacket::{trajectory, trajectory_csv, ModeAmplitudes, SpatialGrid};

use crate::config::{Scenario, ScenarioConfig};
use crate::report::{GateResult, ScenarioOutput};

type C64 = Complex64;

/// Failures while executing a validated config (bad derived geometry,
/// engine errors); callers treat these as configuration problems.
#[derive(Debug, Error)]
pub enum RunError {
    /// A derived quantity contradicts a field.
    #[error("invalid field `{field}`: {message}")]
    Field { field: &'static str, message: String },
    /// An engine call failed.
    #[error("{0}")]
    Engine(String),
}

fn engine<E: std::fmt::Display>(e: E) -> RunError {
    RunError::Engine(e.to_string())
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

/// Uniform samples of [0, t_span].
fn time_samples(t_span: f64, n_times: usize) -> Vec<f64> {
    (0..n_times)
        .map(|k| t_span * k as f64 / (n_times - 1) as f64)
        .collect()
}

/// Dispatches to the scenario runner.
pub fn run(cfg: &ScenarioConfig) -> Result<ScenarioOutput, RunError> {
    match cfg.scenario {
        Scenario::ZbQmTrajectory => run_trajectory(cfg),
        Scenario::ZbSpectrumSweep => run_spectrum_sweep(cfg),
        Scenario::FockIdentities => run_fock_identities(cfg),
        Scenario::PairZb => run_pair(cfg),
        Scenario::NoetherConvergence => run_noether_convergence(cfg),
        Scenario::SpinorBasisAudit => run_spinor_audit(cfg),
    }
}

/// Builds the box for wavepacket scenarios: auto-sized when `box_L` is 0,
/// otherwise the configured length checked for plane-wave commensuration
/// and aliasing headroom.
fn build_box(cfg: &ScenarioConfig, grid: &MomentumGrid) -> Result<SpatialGrid, RunError> {
    let n = &cfg.numerics;
    let p = &cfg.physics;
    if n.box_l == 0.0 {
        return SpatialGrid::auto_box(grid, p.p0_vec(), p.sigma, n.t_span, n.spatial_n)
            .map_err(engine);
    }
    let sgrid =
        SpatialGrid::new(n.dim, n.spatial_n, n.box_l, Vector3::zeros()).map_err(engine)?;
    let Some(k) = sgrid.commensuration_factor(grid) else {
        return Err(RunError::Field {
            field: "numerics.box_L",
            message: format!(
                "length {} is not a multiple of the mode period {:.12e}; use 0 for an auto-sized box",
                n.box_l,
                std::f64::consts::TAU / grid.dp()
            ),
        });
    };
    if n.spatial_n < n.n_per_axis * k as usize {
        return Err(RunError::Field {
            field: "numerics.spatial_N",
            message: format!(
                "{} points per axis alias the {}-node grid on {} periods; need at least {}",
                n.spatial_n,
                n.n_per_axis,
                k,
                n.n_per_axis * k as usize
            ),
        });
    }
    Ok(sgrid)
}

/// Trajectory of a mixed packet with the velocity split into classic +
/// trembling parts. Gates the split identity, and the trembling norm when
/// the antiparticle branch is empty.
fn run_trajectory(cfg: &ScenarioConfig) -> Result<ScenarioOutput, RunError> {
    let n = &cfg.numerics;
    let p = &cfg.physics;
    let grid =
        MomentumGrid::build_symmetric(n.dim, n.p_max, n.n_per_axis, p.m).map_err(engine)?;
    let amps = ModeAmplitudes::gaussian(&grid, p.p0_vec(), p.sigma, p.mix(), p.weights())
        .map_err(engine)?;
    let sgrid = build_box(cfg, &grid)?;
    let times = time_samples(n.t_span, n.n_times);
    let points = trajectory(&amps, &sgrid, &times).map_err(engine)?;
    let csv = trajectory_csv(&points);
    let split_residual = points
        .iter()
        .map(|pt| (pt.v - pt.v_classic - pt.v_zb).amax())
        .fold(0.0, f64::max);
    let zb_norm_max = points.iter().map(|pt| pt.v_zb.norm()).fold(0.0, f64::max);
    let mut gates = vec![GateResult::new(
        "split_residual_max",
        split_residual,
        1e-9,
    )];
    if p.pair_mix == [0.0, 0.0] {
        gates.push(GateResult::new("zb_norm_max", zb_norm_max, 1e-12));
    }
    Ok(ScenarioOutput { csv, gates })
}

/// Dominant trembling frequency against twice the energy for
/// |p| in {0.1, 1, 10} at the configured mass. Each sweep point uses a
/// two-node grid carrying one particle mode and one antiparticle mode on
/// opposite nodes, so the interference line survives the mirror symmetry.
fn run_spectrum_sweep(cfg: &ScenarioConfig) -> Result<ScenarioOutput, RunError> {
    let m = cfg.physics.m;
    let n_samples = cfg.numerics.n_times;
    let mut csv = String::from("p_abs,energy,freq_measured,freq_expected,rel_err\n");
    let mut worst = 0.0f64;
    for &p_abs in &[0.1, 1.0, 10.0] {
        let grid = MomentumGrid::build_symmetric(1, 2.0 * p_abs, 2, m).map_err(engine)?;
        let energy = (p_abs * p_abs + m * m).sqrt();
        let omega = 2.0 * energy;
        let mut amps = ModeAmplitudes::zeros(&grid);
        amps.set_c(0, 2, C64::new(0.8, 0.1));
        amps.set_d(1, 1, C64::new(0.5, -0.3));
        amps.normalize().map_err(engine)?;
        let dt = 16.0 * std::f64::consts::TAU / omega / n_samples as f64;
        let samples = (0..n_samples)
            .map(|k| Ok(zitterlab::wavepacket::velocity_zb(&amps, k as f64 * dt)?.x))
            .collect::<Result<Vec<f64>, zitterlab::wavepacket::WavepacketError>>()
            .map_err(engine)?;
        let measured = match dominant_frequency(&samples, dt).map_err(engine)? {
            FrequencyEstimate::Oscillation { angular_frequency } => angular_frequency,
            FrequencyEstimate::NoOscillation => 0.0,
        };
        let rel_err = (measured - omega).abs() / omega;
        worst = worst.max(rel_err);
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt(p_abs),
            fmt(energy),
            fmt(measured),
            fmt(omega),
            fmt(rel_err)
        ));
    }
    Ok(ScenarioOutput {
        csv,
        gates: vec![GateResult::new("frequency_rel_err_max", worst, 1e-2)],
    })
}

/// Ladder-operator identity battery on a line grid: canonical
/// anticommutators, Hermiticity of the constructed families, entrywise
/// agreement with the brute-force decomposition oracle, and the termwise
/// derivative identities.
fn run_fock_identities(cfg: &ScenarioConfig) -> Result<ScenarioOutput, RunError> {
    let n = &cfg.numerics;
    let grid =
        MomentumGrid::build_symmetric(1, n.p_max, n.n_per_axis, cfg.physics.m).map_err(engine)?;
    let space = FockSpace::with_cap(&grid, 16).map_err(engine)?;
    let e_max = grid.energy_max();
    let t_ref = 0.37 / e_max;

    let car = space.car_residual();

    let mut herm = 0.0f64;
    let mut oracle = [0.0f64; 2];
    for (k, t) in [0.0, t_ref].into_iter().enumerate() {
        let pos = space.position_operator_parts(t);
        let cur = space.current_operator_parts(t);
        for fam in [
            &pos.x0,
            &pos.xz_perp,
            &pos.xz_par,
            &cur.v_classic,
            &cur.z_perp,
            &cur.z_par,
        ] {
            for op in fam {
                herm = herm.max(op.max_abs_diff(&op.adjoint()));
            }
        }
        oracle[k] = space
            .brute_force_decomposition_oracle(t)
            .map_err(engine)?
            .max_abs_deviation;
    }

    let tight = space.derivative_identity_check(0.23, 1e-4 / e_max);
    let order = space.derivative_identity_check(0.23, 0.04 / e_max);
    let perp_ratio = order.perp_residual_coarse / order.perp_residual_fine;
    let par_ratio = order.par_residual_coarse / order.par_residual_fine;

    let mut csv = String::from("check,value\n");
    let mut push = |name: &str, v: f64| csv.push_str(&format!("{name},{}\n", fmt(v)));
    push("car_residual", car);
    push("hermiticity_max", herm);
    push("oracle_gap_t0", oracle[0]);
    push("oracle_gap_t1", oracle[1]);
    push("drift_derivative_residual", tight.x0_residual);
    push("perp_step_ratio", perp_ratio);
    push("par_step_ratio", par_ratio);

    let mut gates = vec![
        GateResult::new("car_residual", car, 1e-14),
        GateResult::new("hermiticity_max", herm, 1e-14),
        GateResult::new("oracle_gap_max", oracle[0].max(oracle[1]), 1e-10),
        GateResult::new("drift_derivative_residual", tight.x0_residual, 1e-10),
        GateResult::new("perp_step_ratio_dev_from_4", (perp_ratio - 4.0).abs(), 0.5),
        GateResult::new("par_step_ratio_dev_from_4", (par_ratio - 4.0).abs(), 0.5),
    ];
    // The momentum-derivative term exists only with an interior stencil
    // (4 nodes); it is built once and carries no time dependence at all.
    if let (Some(a), Some(b)) = (
        space.position_operator_parts(0.1).x1,
        space.position_operator_parts(0.9).x1,
    ) {
        let drift = (0..3)
            .map(|j| a[j].max_abs_diff(&b[j]))
            .fold(0.0, f64::max);
        csv.push_str(&format!("derivative_term_time_drift,{}\n", fmt(drift)));
        gates.push(GateResult::new("derivative_term_time_drift", drift, 0.0));
    }
    Ok(ScenarioOutput { csv, gates })
}

/// Transverse circle of the equal-weight pair superposition at
/// p0 = (0, 0, z): current on the unit circle, position on the 1/(2E)
/// circle, both orthogonal to the momentum.
fn run_pair(cfg: &ScenarioConfig) -> Result<ScenarioOutput, RunError> {
    let p = &cfg.physics;
    let z = p.p0[2];
    let grid = MomentumGrid::build_symmetric(1, 2.0 * z, 2, p.m).map_err(engine)?;
    let space = FockSpace::new(&grid).map_err(engine)?;
    let node = 1; // (0, 0, +z) on the two-node line grid
    let energy = grid.energy(node);
    let frame = linear_triad(grid.node(node)).map_err(engine)?;
    let pair = space
        .pair_superposition_state(node, 2, 1, C64::new(1.0, 0.0))
        .map_err(engine)?;

    let mut csv =
        String::from("t,Zx,Zy,Zz,Xzx,Xzy,Xzz,track_gap,radius_dev,long_leak,pos_radius_dev\n");
    let mut track = 0.0f64;
    let mut radius = 0.0f64;
    let mut leak = 0.0f64;
    let mut pos_radius = 0.0f64;
    for t in time_samples(cfg.numerics.t_span, cfg.numerics.n_times) {
        let cur = space.current_operator_parts(t);
        let pos = space.position_operator_parts(t);
        let mut zv = Vector3::zeros();
        let mut xv = Vector3::zeros();
        let mut imag = 0.0f64;
        for j in 0..3 {
            let zj = space.expectation(&cur.z_perp[j], &pair);
            let xj = space.expectation(&pos.xz_perp[j], &pair);
            imag = imag.max(zj.im.abs()).max(xj.im.abs());
            zv[j] = zj.re;
            xv[j] = xj.re;
        }
        let ph = 2.0 * energy * t;
        let expected = frame.e1 * ph.cos() - frame.e2 * ph.sin();
        let row_track = (zv - expected).amax().max(imag);
        let row_radius = (zv.norm() - 1.0).abs();
        let row_leak = zv.dot(&frame.e3).abs();
        let row_pos = (xv.norm() - 1.0 / (2.0 * energy)).abs();
        track = track.max(row_track);
        radius = radius.max(row_radius);
        leak = leak.max(row_leak);
        pos_radius = pos_radius.max(row_pos);
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            fmt(t),
            fmt(zv[0]),
            fmt(zv[1]),
            fmt(zv[2]),
            fmt(xv[0]),
            fmt(xv[1]),
            fmt(xv[2]),
            fmt(row_track),
            fmt(row_radius),
            fmt(row_leak),
            fmt(row_pos)
        ));
    }
    Ok(ScenarioOutput {
        csv,
        gates: vec![
            GateResult::new("track_gap_max", track, 1e-10),
            GateResult::new("radius_dev_max", radius, 1e-10),
            GateResult::new("longitudinal_leak_max", leak, 1e-12),
            GateResult::new("position_radius_dev_max", pos_radius, 1e-10),
        ],
    })
}

/// Second-order convergence of the moment-current continuity residual
/// under simultaneous halving of the space and time steps, plus charge
/// constancy. Rows with `nu` 0..3 carry the residual max-norms; the row
/// with `nu` 4 carries the charge drift of the same slab.
fn run_noether_convergence(cfg: &ScenarioConfig) -> Result<ScenarioOutput, RunError> {
    let n = &cfg.numerics;
    let p = &cfg.physics;
    let grid =
        MomentumGrid::build_symmetric(n.dim, n.p_max, n.n_per_axis, p.m).map_err(engine)?;
    let amps = ModeAmplitudes::gaussian(&grid, p.p0_vec(), p.sigma, p.mix(), p.weights())
        .map_err(engine)?;
    let length = if n.box_l == 0.0 {
        std::f64::consts::TAU / grid.dp()
    } else {
        n.box_l
    };
    let t_center = 0.5 * n.t_span;

    let mut csv = String::from("nu,dx,dt,max_residual\n");
    let mut residuals = Vec::new();
    let mut drift_max = 0.0f64;
    for level in 0..3u32 {
        let points = n.spatial_n * (1usize << level);
        let sgrid = SpatialGrid::new(n.dim, points, length, Vector3::zeros()).map_err(engine)?;
        if sgrid.commensuration_factor(&grid).is_none() {
            return Err(RunError::Field {
                field: "numerics.box_L",
                message: format!(
                    "length {length} is not a multiple of the mode period {:.12e}",
                    std::f64::consts::TAU / grid.dp()
                ),
            });
        }
        let dt = sgrid.dx() / 4.0;
        let times = [t_center - dt, t_center, t_center + dt];
        let slab = SpacetimeSlab::synthesize(&amps, &sgrid, &times).map_err(engine)?;
        let drift = slab.charge_drift();
        drift_max = drift_max.max(drift);
        let report = continuity_residual(&slab, 1).map_err(engine)?;
        for (nu, r) in report.max_residual.iter().enumerate() {
            csv.push_str(&format!(
                "{nu},{},{},{}\n",
                fmt(report.dx),
                fmt(report.dt),
                fmt(*r)
            ));
        }
        csv.push_str(&format!(
            "4,{},{},{}\n",
            fmt(report.dx),
            fmt(report.dt),
            fmt(drift)
        ));
        residuals.push(report.max_residual);
    }
    let mut ratio_dev = 0.0f64;
    for step in 0..2 {
        for nu in 0..4 {
            let ratio = residuals[step][nu] / residuals[step + 1][nu];
            ratio_dev = ratio_dev.max((ratio - 4.0).abs());
        }
    }
    Ok(ScenarioOutput {
        csv,
        gates: vec![
            GateResult::new("ratio_dev_from_4_max", ratio_dev, 0.5),
            GateResult::new("charge_drift_max", drift_max, 1e-8),
        ],
    })
}

/// Randomized audit of the polarization triads over 10^4 seeded momenta:
/// orthonormality, handedness, the conjugate circular pair, helicity
/// eigenvector residuals, and transverse continuity at the spin axis.
fn run_spinor_audit(cfg: &ScenarioConfig) -> Result<ScenarioOutput, RunError> {
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let mut orth = 0.0f64;
    let mut handed = 0.0f64;
    let mut longitudinal = 0.0f64;
    let mut conjugate = 0.0f64;
    let mut hel = [0.0f64; 3];
    for _ in 0..10_000 {
        let p = loop {
            let cand = Vector3::new(
                rng.gen_range(-2.0f64..2.0),
                rng.gen_range(-2.0f64..2.0),
                rng.gen_range(-2.0f64..2.0),
            );
            if cand.norm() > 1e-3 {
                break cand;
            }
        };
        let t = linear_triad(p).map_err(engine)?;
        let es = [t.e1, t.e2, t.e3];
        for a in 0..3 {
            for b in 0..3 {
                let want = if a == b { 1.0 } else { 0.0 };
                orth = orth.max((es[a].dot(&es[b]) - want).abs());
            }
        }
        handed = handed.max((t.e1.cross(&t.e2) - t.e3).amax());
        longitudinal = longitudinal.max((t.e3 - p / p.norm()).amax());
        let circ = circular_triad(p).map_err(engine)?;
        for k in 0..3 {
            conjugate = conjugate.max((circ.eta_minus[k] - circ.eta_plus[k].conj()).norm());
        }
        let h = helicity_matrix(p).map_err(engine)?;
        hel[0] = hel[0].max((h * circ.eta_plus - circ.eta_plus).norm());
        hel[1] = hel[1].max((h * circ.eta_minus + circ.eta_minus).norm());
        hel[2] = hel[2].max((h * circ.eta_par).norm());
    }
    let mut axis = 0.0f64;
    for &z in &[0.4, 1.7, 3.0] {
        for &sign in &[1.0, -1.0] {
            let on = linear_triad(Vector3::new(0.0, 0.0, sign * z)).map_err(engine)?;
            let near = linear_triad(Vector3::new(1e-8, 0.0, sign * z)).map_err(engine)?;
            for (a, b) in [(on.e1, near.e1), (on.e2, near.e2), (on.e3, near.e3)] {
                axis = axis.max((a - b).amax());
            }
        }
    }
    let basis_max = orth
        .max(handed)
        .max(longitudinal)
        .max(conjugate)
        .max(hel[0])
        .max(hel[1])
        .max(hel[2]);

    let mut csv = String::from("check,value\n");
    for (name, v) in [
        ("orthonormality", orth),
        ("handedness", handed),
        ("longitudinal_alignment", longitudinal),
        ("conjugate_pair", conjugate),
        ("helicity_plus", hel[0]),
        ("helicity_minus", hel[1]),
        ("helicity_zero", hel[2]),
        ("axis_continuity", axis),
    ] {
        csv.push_str(&format!("{name},{}\n", fmt(v)));
    }
    Ok(ScenarioOutput {
        csv,
        gates: vec![
            GateResult::new("basis_residual_max", basis_max, 1e-10),
            GateResult::new("axis_continuity_max", axis, 1e-6),
        ],
    })
}
