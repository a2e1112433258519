// SPDX-License-Identifier: Apache-2.0

use std::io::Write;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use tnslab::geometry::{geometry_report, mu_ring, GeometryState};
use tnslab::linalg::random_complex;
use tnslab::mera::{random_mera, validate_isometries};
use tnslab::mps_obc::{self, random_mps_obc, right_isometry_residual};
use tnslab::mps_pbc::{injectivity_length, is_primitive, ti_canonical_blocks, wielandt_bound};
use tnslab::optimize::{psi_w_family_curve, run_experiment, CurvePoint, DEFAULT_DIVERGENCE_THRESHOLD};
use tnslab::peps::psi_t_peps;
use tnslab::report::{self, CURVE_HEADER, GEOMETRY_HEADER, TRACE_HEADER};
use tnslab::ttns::{orthonormality_residual, TreeNetwork, Ttns};
use tnslab::zoo::{
    aklt_tensor, blbq_hamiltonian, max_element_norm, psi_tau_tensors, psi_w, psi_w_timps_tensor, two_domain_state, w_obc_mps,
    w_state,
};
use tnslab::{
    Artifact, DenseTensor, MpsObc, MpsPbc, Network, Objective, Params, Regularization, TnsError,
};

use crate::{
    CertifyArgs, CliError, ConstructArgs, GeometryArgs, InjectivityArgs, OptimizeArgs, SchmidtArgs, SweepArgs,
};

type Res = Result<(), CliError>;

fn required<T>(v: Option<T>, name: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Invalid(format!("missing required option --{}", name)))
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Invalid(msg.into())
}

/// Writes to `out`, or to stdout when no path is given.
fn emit(out: Option<&Path>, text: &str) -> Res {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {}", p.display(), e))),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> Res {
    let s = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    emit(out, &(s + "\n"))
}

fn emit_csv(out: Option<&Path>, header: &[&str], rows: &[Vec<String>]) -> Res {
    emit(out, &report::csv_string(header, rows)?)
}

fn read_artifact(path: Option<PathBuf>) -> Result<Artifact, CliError> {
    let p = required(path, "input")?;
    if !p.exists() {
        return Err(CliError::Io(format!("{}: no such file", p.display())));
    }
    Ok(Artifact::read(&p)?)
}

pub fn construct(a: ConstructArgs) -> Res {
    let family = required(a.family.clone(), "family")?;
    let n = || required(a.n, "n");
    let m = a.m.unwrap_or(2);
    let d = a.d.unwrap_or(2);
    let eps = a.eps.unwrap_or(0.1);
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed.unwrap_or(0));
    let art = match family.as_str() {
        "w" => Artifact::State { amplitudes: w_state(n()?, d)? },
        "psi_w" => Artifact::State { amplitudes: psi_w(n()?, eps)? },
        "tau" => Artifact::State { amplitudes: two_domain_state(n()?, m)? },
        "w_obc" => Artifact::MpsObc(w_obc_mps(n()?)?),
        "psi_w_timps" => {
            let n = n()?;
            Artifact::MpsPbc(MpsPbc::uniform(&psi_w_timps_tensor(n, eps)?, n)?)
        }
        "psi_tau" => Artifact::MpsPbc(psi_tau_tensors(n()?, m, eps)?),
        "mu" => Artifact::MpsPbc(mu_ring(n()?, m)?),
        "aklt" => Artifact::MpsPbc(MpsPbc::uniform(&aklt_tensor(), n()?)?),
        "random_obc" => {
            let n = n()?;
            let mps: MpsObc = random_mps_obc(&vec![d; n], &vec![m; n.saturating_sub(1)], &mut rng)?;
            Artifact::MpsObc(mps)
        }
        "ttns" => {
            let tree = TreeNetwork::random(&vec![d; n()?], m, &mut rng)?;
            Artifact::Ttns(Ttns::random(tree, &mut rng)?)
        }
        "mera" => Artifact::Mera(random_mera(n()?, m, d, a.seed.unwrap_or(0))?),
        "peps_loop" => {
            let (rows, cols) = (a.rows.unwrap_or(2), a.cols.unwrap_or(3));
            if rows < 2 || cols < 2 {
                return Err(invalid("peps_loop needs at least a 2x2 grid"));
            }
            let net = Network::grid(rows, cols, 1, m)?.with_pair_dims()?;
            let cycle = [0, 1, cols + 1, cols];
            Artifact::Peps(psi_t_peps(&net, &cycle, eps)?)
        }
        other => return Err(invalid(format!("unknown family '{}'", other))),
    };
    // Reject anything whose dense state would not fit before writing it.
    art.state()?;
    let text = art.to_json()? + "\n";
    emit(a.out.as_deref(), &text)
}

#[derive(Serialize)]
struct CheckResult {
    name: String,
    pass: bool,
    value: f64,
    tolerance: f64,
}

/// Structural checks that hold for every well-formed artifact of the kind;
/// property checks such as injectivity must be requested.
fn default_checks(art: &Artifact) -> Vec<&'static str> {
    match art {
        Artifact::Mera(_) => vec!["finite", "norm", "isometry"],
        _ => vec!["finite"],
    }
}

fn run_check(name: &str, art: &Artifact, psi: &DenseTensor, tol: f64) -> Result<CheckResult, CliError> {
    let not_applicable = || invalid(format!("check '{}' does not apply to {}", name, art.kind()));
    let (pass, value) = match name {
        "finite" => {
            let ok = psi.data().iter().all(|z| z.re.is_finite() && z.im.is_finite()) && psi.norm() > 0.0;
            (ok, psi.norm())
        }
        "norm" => {
            let dev = (psi.norm() - 1.0).abs();
            (dev <= tol, dev)
        }
        "canonical" => match art {
            Artifact::MpsObc(m) => {
                let worst = m.tensors()[1..]
                    .iter()
                    .map(right_isometry_residual)
                    .collect::<tnslab::Result<Vec<_>>>()?
                    .into_iter()
                    .fold(0.0, f64::max);
                (worst <= tol, worst)
            }
            _ => return Err(not_applicable()),
        },
        "schmidt_ranks" => match art {
            Artifact::MpsObc(m) => {
                let dims = m.phys_dims();
                let mut mismatches = 0.0;
                for (k, &b) in m.bond_dims().iter().enumerate() {
                    if mps_obc::schmidt(psi, &dims, k + 1)?.rank != b {
                        mismatches += 1.0;
                    }
                }
                (mismatches == 0.0, mismatches)
            }
            _ => return Err(not_applicable()),
        },
        "isometry" => match art {
            Artifact::Mera(m) => {
                let r = validate_isometries(m, tol)?;
                (r.pass, r.max_residual())
            }
            _ => return Err(not_applicable()),
        },
        "orthonormal" => match art {
            Artifact::Ttns(t) => {
                let root = t.network().first_leaf();
                let r = orthonormality_residual(t, root)?;
                (r <= tol, r)
            }
            _ => return Err(not_applicable()),
        },
        "injectivity" => match art {
            Artifact::MpsPbc(m) if m.translation_invariant() => {
                let bound = wielandt_bound(m.bond_dim());
                match injectivity_length(&m.tensors()[0], bound)? {
                    Some(l) => (true, l as f64),
                    None => (false, f64::NAN),
                }
            }
            _ => return Err(not_applicable()),
        },
        other => return Err(invalid(format!("unknown check '{}'", other))),
    };
    Ok(CheckResult {
        name: name.to_string(),
        pass,
        value,
        tolerance: tol,
    })
}

/// Fails with exit code 2 when any check fails; the report is written first.
pub fn certify(a: CertifyArgs) -> Res {
    let art = read_artifact(a.input)?;
    let tol = a.tol.unwrap_or(1e-10);
    let psi = art.state()?;
    let names: Vec<String> = match a.checks {
        Some(c) if !c.is_empty() => c,
        _ => default_checks(&art).into_iter().map(String::from).collect(),
    };
    let results = names
        .iter()
        .map(|n| run_check(n.trim(), &art, &psi, tol))
        .collect::<Result<Vec<_>, _>>()?;
    let pass = results.iter().all(|r| r.pass);
    let report = json!({ "kind": art.kind(), "pass": pass, "checks": results });
    emit_json(a.out.as_deref(), &report)?;
    if pass {
        Ok(())
    } else {
        let failed: Vec<&str> = results.iter().filter(|r| !r.pass).map(|r| r.name.as_str()).collect();
        Err(invalid(format!("checks failed: {}", failed.join(", "))))
    }
}

pub fn schmidt(a: SchmidtArgs) -> Res {
    let art = read_artifact(a.input)?;
    let psi = art.state()?.normalized()?;
    let dims = psi.shape().to_vec();
    if dims.len() < 2 {
        return Err(invalid("a single site has no cuts"));
    }
    let cuts: Vec<usize> = match a.cut {
        Some(c) => vec![c],
        None => (1..dims.len()).collect(),
    };
    let mut rows = Vec::new();
    for c in cuts {
        let s = mps_obc::schmidt(&psi, &dims, c)?;
        let coeffs: Vec<String> = s.coefficients.iter().map(|&x| report::fmt_f64(x)).collect();
        rows.push(vec![c.to_string(), s.rank.to_string(), format!("[{}]", coeffs.join(","))]);
    }
    emit_csv(a.out.as_deref(), &["cut", "rank", "coefficients"], &rows)
}

pub fn injectivity(a: InjectivityArgs) -> Res {
    let tensor = match (&a.input, a.family.as_deref()) {
        (Some(_), Some(_)) => return Err(invalid("give either --input or --family")),
        (Some(_), None) => match read_artifact(a.input.clone())? {
            Artifact::MpsPbc(m) if m.translation_invariant() => m.tensors()[0].clone(),
            other => return Err(invalid(format!("{} is not a translation-invariant chain", other.kind()))),
        },
        (None, Some("aklt")) => aklt_tensor(),
        (None, Some("psi_w")) => psi_w_timps_tensor(required(a.n, "n")?, a.eps.unwrap_or(0.1))?,
        (None, Some(other)) => return Err(invalid(format!("unknown family '{}'", other))),
        (None, None) => return Err(invalid("missing --input or --family")),
    };
    let m = tensor.shape()[1];
    let bound = wielandt_bound(m);
    let ell_max = a.ell_max.unwrap_or(bound);
    let length = injectivity_length(&tensor, ell_max)?;
    // Primitivity is decided on the isometric canonical form; several blocks
    // mean several fixed points.
    let blocks = ti_canonical_blocks(&tensor)?;
    let primitive = match blocks.blocks.as_slice() {
        [single] => is_primitive(&single.tensor, 1e-10)?,
        _ => false,
    };
    let report = json!({
        "bond_dim": m,
        "phys_dim": tensor.shape()[0],
        "wielandt_bound": bound,
        "ell_max": ell_max,
        "injectivity_length": length,
        "within_bound": length.map(|l| l <= bound),
        "primitive": primitive,
    });
    emit_json(a.out.as_deref(), &report)
}

pub fn geometry(a: GeometryArgs) -> Res {
    let state = GeometryState::parse(&required(a.state.clone(), "state")?)?;
    let n = required(a.n, "n")?;
    let m = a.m.unwrap_or(2);
    let tol = a.tol.unwrap_or(1e-10);
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed.unwrap_or(0));
    let rep = geometry_report(state, n, m, tol, &mut rng)?;
    emit_csv(a.out.as_deref(), &GEOMETRY_HEADER, &[report::geometry_row(state.name(), n, m, &rep)])
}

pub fn optimize(a: OptimizeArgs) -> Res {
    let n = required(a.n, "n")?;
    let m = a.m.unwrap_or(2);
    let lambda = a.lambda.unwrap_or(0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed.unwrap_or(0));
    let reg = match a.regularization.as_deref() {
        None if lambda > 0.0 => Regularization::TensorNorm(vec![lambda]),
        None | Some("none") => Regularization::None,
        Some("tensor_norm") => Regularization::TensorNorm(vec![lambda]),
        Some("transfer_product") => Regularization::TransferProduct(lambda),
        Some(other) => return Err(invalid(format!("unknown regularization '{}'", other))),
    };
    let (obj, d) = match a.objective.as_deref().unwrap_or("distance") {
        "distance" => {
            let d = a.d.unwrap_or(2);
            let target = match a.target.as_deref().unwrap_or("w") {
                "w" => w_state(n, d)?,
                "random" => random_complex(&vec![d; n], &mut rng).normalized()?,
                other => return Err(invalid(format!("unknown target '{}'", other))),
            };
            (Objective::distance(target, reg)?, d)
        }
        "energy" => {
            if a.d.is_some_and(|d| d != 3) {
                return Err(invalid("energy runs use spin-1 sites (d = 3)"));
            }
            let theta = a.theta.unwrap_or((1.0f64 / 3.0).atan());
            let pbc = a.set.as_deref() != Some("obc");
            (Objective::energy(blbq_hamiltonian(n, theta, pbc)?, reg)?, 3)
        }
        other => return Err(invalid(format!("unknown objective '{}'", other))),
    };
    let init = match a.set.as_deref().unwrap_or("obc") {
        "obc" => Params::Obc(random_mps_obc(&vec![d; n], &vec![m; n.saturating_sub(1)], &mut rng)?),
        "pbc" => Params::Pbc(MpsPbc::new(
            (0..n).map(|_| random_complex(&[d, m, m], &mut rng)).collect(),
            false,
        )?),
        "ti" => {
            let t = match a.init_eps {
                Some(eps) if d == 2 && m == 2 => psi_w_timps_tensor(n, eps)?,
                Some(_) => return Err(invalid("--init-eps needs d = 2 and m = 2")),
                None => random_complex(&[d, m, m], &mut rng),
            };
            Params::Pbc(MpsPbc::uniform(&t, n)?)
        }
        other => return Err(invalid(format!("unknown parameter set '{}'", other))),
    };
    let budget = a.budget.unwrap_or(200);
    if budget == 0 {
        return Err(invalid("budget must be at least 1"));
    }
    let threshold = a.divergence_threshold.unwrap_or(DEFAULT_DIVERGENCE_THRESHOLD);
    let trace = run_experiment(&obj, &init, budget, threshold)?;
    let rows = report::trace_rows(&trace.records);
    emit_csv(a.out.as_deref(), &TRACE_HEADER, &rows)
}

/// `a..b` spans decades with the mantissa of `a`; otherwise a comma list.
pub fn parse_eps_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = || invalid(format!("bad eps grid '{}'", spec));
    let values: Vec<f64> = if let Some((a, b)) = spec.split_once("..") {
        let (a, b) = (a.trim(), b.trim());
        let av: f64 = a.parse().map_err(|_| bad())?;
        let bv: f64 = b.parse().map_err(|_| bad())?;
        if !(av > 0.0 && bv > 0.0) {
            return Err(bad());
        }
        let sci = format!("{:e}", av);
        let (mant, exp) = sci.split_once('e').ok_or_else(bad)?;
        let exp: i32 = exp.parse().map_err(|_| bad())?;
        let steps = (bv / av).log10();
        if (steps - steps.round()).abs() > 1e-9 {
            return Err(invalid(format!("'{}' is not a whole number of decades", spec)));
        }
        let k = steps.round() as i32;
        let dir = k.signum();
        (0..=k.abs())
            .map(|j| format!("{}e{}", mant, exp + dir * j).parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_, _>>()?
    } else {
        spec.split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_, _>>()?
    };
    if values.is_empty() || values.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(bad());
    }
    Ok(values)
}

fn psi_tau_point(n: usize, m: usize, eps: f64) -> tnslab::Result<CurvePoint> {
    let mps = psi_tau_tensors(n, m, eps)?;
    let psi = tnslab::mps_pbc::eval_pbc(&mps)?;
    let tau = two_domain_state(n, m)?;
    let overlap = tau.inner(&psi)?.norm() / (tau.norm() * psi.norm());
    Ok(CurvePoint {
        eps,
        f: 2.0 - 2.0 * overlap,
        overlap,
        max_abs_entry: mps.tensors().iter().map(max_element_norm).fold(0.0, f64::max),
    })
}

pub fn sweep(a: SweepArgs) -> Res {
    let family = a.family.clone().unwrap_or_else(|| "psi_w".into());
    let ns = required(a.n.clone(), "n")?;
    let grid = parse_eps_grid(&required(a.eps.clone(), "eps")?)?;
    let m = a.m.unwrap_or(2);
    let jobs: Vec<(usize, f64)> = ns.iter().flat_map(|&n| grid.iter().map(move |&e| (n, e))).collect();
    let mut points = jobs
        .par_iter()
        .map(|&(n, eps)| -> tnslab::Result<(usize, CurvePoint)> {
            let p = match family.as_str() {
                "psi_w" => psi_w_family_curve(n, &[eps])?.remove(0),
                "psi_tau" => psi_tau_point(n, m, eps)?,
                other => return Err(TnsError::Argument(format!("unknown family '{}'", other))),
            };
            Ok((n, p))
        })
        .collect::<tnslab::Result<Vec<_>>>()?;
    // Grid key: chain length, then eps from large to small.
    points.sort_by(|x, y| x.0.cmp(&y.0).then(y.1.eps.total_cmp(&x.1.eps)));
    let rows: Vec<Vec<String>> = points.iter().map(|(n, p)| report::curve_row(*n, p)).collect();
    emit_csv(a.out.as_deref(), &CURVE_HEADER, &rows)
}
