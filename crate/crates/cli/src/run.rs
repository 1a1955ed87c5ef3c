//! Subcommand implementations. Each function validates its inputs, runs
//! the corresponding library operations, and returns a JSON document with
//! a pass/fail verdict for the verification-style emissions.

use fermat_weights::WeightSystem;
use jacobi_ring::{parse_poly, residue_q_series, JacobiRing, Poly};
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use serde_json::{json, Value};
use std::path::Path;

use crate::emit::{self, with_header};
use crate::input;
use crate::{CliError, Outcome};

fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn weight_system(exponents: &[u64]) -> Result<WeightSystem, CliError> {
    WeightSystem::new(exponents).map_err(|e| config(format!("bad exponents: {e}")))
}

fn calabi_yau(exponents: &[u64]) -> Result<WeightSystem, CliError> {
    let ws = weight_system(exponents)?;
    if !ws.is_calabi_yau() {
        return Err(config(format!(
            "exponents {exponents:?} are not Calabi-Yau (the reciprocals must sum to 1); \
             this subcommand needs a Calabi-Yau weight system"
        )));
    }
    Ok(ws)
}

pub fn weights(exponents: &[u64], what: &str) -> Result<Outcome, CliError> {
    let ws = weight_system(exponents)?;
    let payload = match what {
        "milnor" => {
            let n = ws.milnor_number();
            json!({ "milnor": u64::try_from(n).map_err(|_| {
                config("Milnor number exceeds the JSON integer range")
            })? })
        }
        "box" => json!({ "ghost_box": ws.ghost_box() }),
        "narrow" => {
            let narrows = ws.narrow_set();
            let involution: Vec<usize> = narrows
                .iter()
                .map(|g| {
                    let dual = ws.narrow_involution(g);
                    narrows.iter().position(|h| *h == dual).expect("closed involution")
                })
                .collect();
            json!({
                "narrow": narrows.iter().map(|g| g.nums.clone()).collect::<Vec<_>>(),
                "involution": involution,
            })
        }
        "sectors" => {
            let sectors = ws
                .sectors()
                .map_err(|e| config(format!("cannot enumerate sectors: {e}")))?;
            json!({
                "sectors": sectors
                    .iter()
                    .map(|s| json!({
                        "nums": s.nums,
                        "dim": s.dim(),
                        "age": emit::rational(&s.age(&ws)),
                        "stabilizer_order": s.stabilizer_order(&ws),
                    }))
                    .collect::<Vec<_>>(),
            })
        }
        other => return Err(config(format!("unknown weights emission \"{other}\""))),
    };
    Ok(Outcome::report(with_header("weights", payload)))
}

pub fn state(side: &str, exponents: &[u64], what: &str) -> Result<Outcome, CliError> {
    let ws = calabi_yau(exponents)?;
    let payload = match side {
        "gw" => {
            let basis = state_spaces::cr_basis(&ws)
                .map_err(|e| config(format!("cannot build the basis: {e}")))?;
            match what {
                "basis" => json!({
                    "basis": basis
                        .iter()
                        .map(|(c, k)| json!({ "sector": c.nums, "power": k }))
                        .collect::<Vec<_>>(),
                }),
                "gram" => json!({
                    "gram": emit::matrix(&state_spaces::cr_gram(&ws)
                        .map_err(|e| config(format!("cannot build the pairing: {e}")))?),
                }),
                "degrees" => json!({
                    "degrees": basis
                        .iter()
                        .map(|(c, k)| emit::rational(
                            &state_spaces::cr_degree_formula(&ws, &c.nums, *k),
                        ))
                        .collect::<Vec<_>>(),
                }),
                other => return Err(config(format!("unknown state emission \"{other}\""))),
            }
        }
        "lg" => {
            let narrows = ws.narrow_set();
            match what {
                "basis" => json!({
                    "basis": narrows.iter().map(|g| g.nums.clone()).collect::<Vec<_>>(),
                }),
                "gram" => json!({ "gram": emit::matrix(&state_spaces::fjrw_gram(&ws)) }),
                "degrees" => json!({
                    "degrees": narrows
                        .iter()
                        .map(|g| emit::rational(&g.degree(&ws)))
                        .collect::<Vec<_>>(),
                }),
                other => return Err(config(format!("unknown state emission \"{other}\""))),
            }
        }
        other => return Err(config(format!("unknown side \"{other}\"; use gw or lg"))),
    };
    Ok(Outcome::report(with_header("state", payload)))
}

fn poly_to_json(p: &Poly) -> Value {
    Value::Array(
        p.iter()
            .map(|(exp, c)| json!({ "exp": exp, "value": emit::rational(c) }))
            .collect(),
    )
}

pub fn jacobi(exponents: &[u64], q: Option<&str>, what: &str) -> Result<Outcome, CliError> {
    let ws = weight_system(exponents)?;
    let q = q.map(input::rational_str).transpose()?;
    let ring = JacobiRing::new(&ws, q)
        .map_err(|e| config(format!("cannot build the Jacobi ring: {e}")))?;
    let payload = if what == "gram" {
        json!({
            "gram": emit::matrix(&ring.good_basis_gram()
                .map_err(|e| config(format!("cannot compute the Gram matrix: {e}")))?),
        })
    } else if let Some(text) = what.strip_prefix("normal-form:") {
        let p = parse_poly(text, ws.n())
            .map_err(|e| config(format!("cannot parse the polynomial: {e}")))?;
        let nf = ring
            .normal_form(&p)
            .map_err(|e| config(format!("normal form failed: {e}")))?;
        json!({ "input": poly_to_json(&p), "normal_form": poly_to_json(&nf) })
    } else {
        return Err(config(format!("unknown jacobi emission \"{what}\"")));
    };
    Ok(Outcome::report(with_header("jacobi", payload)))
}

pub fn ifunc_gw(
    exponents: &[u64],
    q_order: u32,
    t_order: u32,
    beta: Option<Vec<u64>>,
    what: &str,
) -> Result<Outcome, CliError> {
    let ws = calabi_yau(exponents)?;
    let beta = beta.unwrap_or_else(|| vec![0; ws.n()]);
    match what {
        "series" => {
            let f = gw_ifunction::i_function(&ws, &beta, t_order, q_order)
                .map_err(|e| config(format!("cannot assemble the series: {e}")))?;
            let payload = json!({
                "beta": beta,
                "basis": f.basis()
                    .iter()
                    .map(|(c, k)| json!({ "sector": c.nums, "power": k }))
                    .collect::<Vec<_>>(),
                "components": f.components()
                    .iter()
                    .map(emit::laurent_series)
                    .collect::<Vec<_>>(),
            });
            Ok(Outcome::report(with_header("ifunc-gw", payload)))
        }
        "mirror-map" => {
            if beta.iter().any(|&b| b != 0) {
                return Err(config("the mirror map reads the underived function; drop --beta"));
            }
            let f = gw_ifunction::i_function(&ws, &beta, t_order, q_order)
                .map_err(|e| config(format!("cannot assemble the series: {e}")))?;
            let tau = gw_ifunction::mirror_map_gw(&f)
                .map_err(|e| config(format!("cannot compute the mirror map: {e}")))?;
            let payload = json!({
                "components": tau.iter().map(emit::scalar_series).collect::<Vec<_>>(),
            });
            Ok(Outcome::report(with_header("ifunc-gw", payload)))
        }
        "pairing-check" => {
            let betas = gw_ifunction::spanning_betas(&ws)
                .map_err(|e| config(format!("cannot enumerate the basis: {e}")))?;
            let ifuncs: Vec<_> = betas
                .iter()
                .map(|b| gw_ifunction::i_function(&ws, b, 0, q_order))
                .collect::<Result<_, _>>()
                .map_err(|e| config(format!("cannot assemble the series: {e}")))?;
            let mut mismatches = Vec::new();
            let mut pairs = 0usize;
            for (ai, ba) in betas.iter().enumerate() {
                for (bi, bb) in betas.iter().enumerate() {
                    pairs += 1;
                    let gw = gw_ifunction::ktilde_pairing(&ifuncs[ai], &ifuncs[bi])
                        .map_err(|e| config(format!("pairing failed: {e}")))?;
                    let constant = gw
                        .iter()
                        .all(|(_, zl)| zl.min_exp() >= Some(0) && zl.max_exp() <= Some(0));
                    let pa = Poly::monomial(
                        ba.iter().map(|&x| x as u32).collect(),
                        BigRational::from_integer(1.into()),
                    );
                    let pb = Poly::monomial(
                        bb.iter().map(|&x| x as u32).collect(),
                        BigRational::from_integer(1.into()),
                    );
                    let saito = residue_q_series(&ws, &pa, &pb, -2, q_order as usize)
                        .map_err(|e| config(format!("residue expansion failed: {e}")))?;
                    let mut exp = vec![0u32; ws.n() + 1];
                    let matches = constant
                        && saito.iter().enumerate().all(|(d, expected)| {
                            exp[ws.n()] = d as u32;
                            gw.coeff(&exp).coeff(0) == *expected
                        });
                    if !matches {
                        mismatches.push(json!({ "beta1": ba, "beta2": bb }));
                    }
                }
            }
            let passed = mismatches.is_empty();
            let payload = json!({
                "pairs_checked": pairs,
                "q_order": q_order,
                "mismatches": mismatches,
                "matches_residue_pairing": passed,
            });
            Ok(Outcome::checked(with_header("ifunc-gw", payload), passed))
        }
        other => Err(config(format!("unknown ifunc gw emission \"{other}\""))),
    }
}

pub fn ifunc_lg(
    exponents: &[u64],
    order: u32,
    e: Option<Vec<u64>>,
    epsilon: Option<&str>,
    what: &str,
) -> Result<Outcome, CliError> {
    let ws = calabi_yau(exponents)?;
    let e = e.unwrap_or_else(|| vec![0; ws.n()]);
    let assemble = |e: &[u64]| -> Result<fjrw_ifunction::LGIFunction, CliError> {
        match epsilon {
            Some(eps) => {
                let cap = input::rational_str(eps)?;
                fjrw_ifunction::i_lg_weighted(&ws, e, order, &cap)
            }
            None => fjrw_ifunction::i_lg(&ws, e, order),
        }
        .map_err(|err| config(format!("cannot assemble the series: {err}")))
    };
    match what {
        "series" => {
            let f = assemble(&e)?;
            let payload = json!({
                "e": e,
                "ghosts": f.ghosts(),
                "narrows": f.narrows().iter().map(|g| g.nums.clone()).collect::<Vec<_>>(),
                "components": f.components()
                    .iter()
                    .map(emit::laurent_series)
                    .collect::<Vec<_>>(),
            });
            Ok(Outcome::report(with_header("ifunc-lg", payload)))
        }
        "gkz" => {
            let ghosts = ws.ghost_box();
            let f = assemble(&e)?;
            let shifted: Vec<_> = ghosts
                .iter()
                .map(|b| {
                    let eb: Vec<u64> = e.iter().zip(b).map(|(&x, &y)| x + y).collect();
                    assemble(&eb)
                })
                .collect::<Result<_, _>>()?;
            let mut nonzero = Vec::new();
            for slot in 0..ghosts.len() {
                let res = fjrw_ifunction::gkz_shift_residual(&f, &shifted[slot], slot);
                if res.iter().any(|r| !r.is_zero()) {
                    nonzero.push(json!({ "relation": "shift", "ghost": ghosts[slot] }));
                }
            }
            for axis in 0..ws.n() {
                let mut ea = e.clone();
                ea[axis] += ws.exponents()[axis];
                let axis_shifted = assemble(&ea)?;
                let res = fjrw_ifunction::gkz_euler_residual(&f, &shifted, &axis_shifted, axis);
                if res.iter().any(|r| !r.is_zero()) {
                    nonzero.push(json!({ "relation": "euler", "axis": axis }));
                }
            }
            let passed = nonzero.is_empty();
            let payload = json!({
                "e": e,
                "order": order,
                "relations_checked": ghosts.len() + ws.n(),
                "nonzero_residuals": nonzero,
                "all_residuals_zero": passed,
            });
            Ok(Outcome::checked(with_header("ifunc-lg", payload), passed))
        }
        "mirror-map" => {
            let active: Vec<usize> = (0..ws.ghost_box().len()).collect();
            let mir = fjrw_ifunction::mirror_map_lg(&ws, order, &active)
                .map_err(|err| config(format!("cannot factorize the column family: {err}")))?;
            let payload = json!({
                "ghosts": mir.ghosts,
                "tau": mir.tau.iter().map(emit::scalar_series).collect::<Vec<_>>(),
            });
            Ok(Outcome::report(with_header("ifunc-lg", payload)))
        }
        "pairing" => {
            let gram = fjrw_ifunction::pairing_check(&ws, order)
                .map_err(|err| config(format!("pairing expansion failed: {err}")))?;
            let expected = state_spaces::fjrw_gram(&ws);
            let passed = gram == expected;
            let payload = json!({
                "gram": emit::matrix(&gram),
                "matches_state_space_gram": passed,
            });
            Ok(Outcome::checked(with_header("ifunc-lg", payload), passed))
        }
        other => Err(config(format!("unknown ifunc lg emission \"{other}\""))),
    }
}

pub fn quantize(
    rank: usize,
    r_matrix: &Path,
    potential: &Path,
    genus_cap: u32,
) -> Result<Outcome, CliError> {
    let r = input::upper_triangular_r(&input::read_json(r_matrix)?)?;
    let f = input::potential(&input::read_json(potential)?)?;
    if r.rank() != rank || f.rank() != rank {
        return Err(config(format!(
            "--rank {rank} disagrees with the inputs (series rank {}, potential rank {})",
            r.rank(),
            f.rank()
        )));
    }
    if f.genus_cap() > genus_cap {
        return Err(config(format!(
            "potential genus cap {} exceeds --genus-cap {genus_cap}",
            f.genus_cap()
        )));
    }
    let g = givental_fock::quantized_r_apply(&r, &f)
        .map_err(|e| config(format!("quantized action failed: {e}")))?;
    let payload = json!({ "potential": input::potential_to_json(&g) });
    Ok(Outcome::report(with_header("quantize", payload)))
}

pub fn ancestor_assembly(data: &Path, genus_cap: u32, jet_cap: u32) -> Result<Outcome, CliError> {
    let d = input::semisimple_data(&input::read_json(data)?)?;
    let f = ancestor::assemble_ancestor(&d, genus_cap, jet_cap)
        .map_err(|e| config(format!("assembly failed: {e}")))?;
    let payload = json!({ "potential": input::potential_to_json(&f) });
    Ok(Outcome::report(with_header("ancestor", payload)))
}

pub fn filtration(exponents: &[u64], what: &str) -> Result<Outcome, CliError> {
    let ws = calabi_yau(exponents)?;
    let payload = match what {
        "weights" => {
            let opp = hodge_filtration::a_model_opposite(&ws)
                .map_err(|e| config(format!("cannot build the filtrations: {e}")))?;
            json!({
                "sectors": opp.sectors
                    .iter()
                    .map(|s| json!({
                        "nums": s.sector.nums,
                        "weight": s.weight,
                        "graded_dims": s.filtration.graded_dims(),
                    }))
                    .collect::<Vec<_>>(),
            })
        }
        "u-filtration" => {
            let opp = hodge_filtration::a_model_opposite(&ws)
                .map_err(|e| config(format!("cannot build the filtrations: {e}")))?;
            json!({
                "basis": opp.basis
                    .iter()
                    .map(|(c, k)| json!({ "sector": c.nums, "power": k }))
                    .collect::<Vec<_>>(),
                "step_dims": opp.u.iter().map(|s| s.dim()).collect::<Vec<_>>(),
                "steps": opp.u
                    .iter()
                    .map(|s| Value::Array(
                        s.basis().iter().map(|v| emit::rational_vec(v)).collect(),
                    ))
                    .collect::<Vec<_>>(),
            })
        }
        "spectrum" => {
            let table = hodge_filtration::spectrum_table(&ws);
            json!({
                "rows": table.rows
                    .iter()
                    .map(|r| json!({
                        "monomial": r.monomial,
                        "degree": emit::rational(&r.degree),
                        "hodge_index": r.hodge_index,
                        "phase": emit::rational(&r.phase),
                    }))
                    .collect::<Vec<_>>(),
                "degree_symmetry": table.degree_symmetry_holds(),
            })
        }
        other => return Err(config(format!("unknown filtration emission \"{other}\""))),
    };
    Ok(Outcome::report(with_header("filtration", payload)))
}

fn parse_caps(spec: &str) -> Result<j_reconstruction::Caps, CliError> {
    let mut m = None;
    let mut n = None;
    let mut j = None;
    for part in spec.split(',') {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| config(format!("bad caps entry \"{part}\"; use m=2,n=2,j=3")))?;
        let parsed: u32 = value
            .trim()
            .parse()
            .map_err(|_| config(format!("bad caps value \"{value}\"")))?;
        match key.trim() {
            "m" => m = Some(parsed),
            "n" => n = Some(parsed),
            "j" => j = Some(parsed),
            other => return Err(config(format!("unknown caps key \"{other}\""))),
        }
    }
    match (m, n, j) {
        (Some(m), Some(n), Some(z)) => Ok(j_reconstruction::Caps { m, n, z }),
        _ => Err(config("caps need all of m=, n=, j=")),
    }
}

pub fn reconstruct(
    exponents: &[u64],
    caps_spec: &str,
    b_seed: Option<&Path>,
    what: &str,
) -> Result<Outcome, CliError> {
    let ws = calabi_yau(exponents)?;
    let caps = parse_caps(caps_spec)?;
    let seed = match b_seed {
        Some(path) => input::b_seed(&input::read_json(path)?)?,
        None => Vec::new(),
    };
    let ifun = fjrw_ifunction::i_lg(&ws, &vec![0; ws.n()], caps.n + 1)
        .map_err(|e| config(format!("cannot assemble the base series: {e}")))?;
    let table = j_reconstruction::seed_table(&ifun, &seed)
        .map_err(|e| config(format!("bad seed: {e}")))?;
    let mut done = j_reconstruction::reconstruct(table, caps)
        .map_err(|e| config(format!("completion failed: {e}")))?;
    match what {
        "table" => {
            let slot = |(jet, label, mult): &(u32, fermat_weights::Narrow, u32)| {
                json!({ "jet": jet, "label": label.nums, "mult": mult })
            };
            let entries: Vec<Value> = done
                .completed_entries()
                .iter()
                .map(|(t, y, z, gamma, value)| {
                    json!({
                        "t": t.iter().map(slot).collect::<Vec<_>>(),
                        "y": y.iter()
                            .map(|(g, c)| json!({ "label": g.nums, "mult": c }))
                            .collect::<Vec<_>>(),
                        "z": z,
                        "sector": gamma.nums,
                        "value": emit::rational(value),
                    })
                })
                .collect();
            let payload = json!({
                "caps": { "m": caps.m, "n": caps.n, "j": caps.z },
                "entries": entries,
            });
            Ok(Outcome::report(with_header("reconstruct", payload)))
        }
        "residual" => {
            let narrows = ws.narrow_set();
            let mut nonzero = Vec::new();
            for alpha in &narrows {
                for beta in &narrows {
                    let res =
                        j_reconstruction::regularity_residual(&mut done, alpha, beta, &caps)
                            .map_err(|e| config(format!("residual failed: {e}")))?;
                    if !res.is_zero() {
                        nonzero.push(json!({
                            "alpha": alpha.nums,
                            "beta": beta.nums,
                            "entries": res.entries.len(),
                        }));
                    }
                }
            }
            let passed = nonzero.is_empty();
            let payload = json!({
                "pairs_checked": narrows.len() * narrows.len(),
                "nonzero_pairs": nonzero,
                "residual_zero": passed,
            });
            Ok(Outcome::checked(with_header("reconstruct", payload), passed))
        }
        other => Err(config(format!("unknown reconstruct emission \"{other}\""))),
    }
}

pub fn e6(order: u32, what: &str) -> Result<Outcome, CliError> {
    if order == 0 {
        return Err(config("--order must be at least 1"));
    }
    let data = elliptic_e6::picard_fuchs_solutions(order);
    if what == "series" {
        let payload = json!({
            "order": order,
            "f0": emit::rational_vec(data.f0_coefficients()),
            "f1_regular": emit::rational_vec(data.f1_regular_coefficients()),
        });
        return Ok(Outcome::report(with_header("e6", payload)));
    }
    if what == "wronskian" {
        let w = data.wronskian_determinant();
        let holds = (0..w.len()).all(|i| {
            let mut p = w[i].clone();
            if i >= 3 {
                p -= BigRational::from_integer(27.into()) * &w[i - 3];
            }
            if i == 0 {
                p -= BigRational::from_integer(1.into());
            }
            p.is_zero()
        });
        let payload = json!({
            "wronskian": emit::rational_vec(&w),
            "inverts_one_minus_27_q_cubed": holds,
        });
        return Ok(Outcome::checked(with_header("e6", payload), holds));
    }
    if what == "tau-grid" {
        let mut points = Vec::new();
        for ir in 1..=4 {
            for ia in 0..25 {
                let r = 0.05 * ir as f64;
                let angle = 2.0 * std::f64::consts::PI * ia as f64 / 25.0;
                points.push(num_complex::Complex64::from_polar(r, angle));
            }
        }
        let rows: Vec<Result<Value, String>> = points
            .par_iter()
            .map(|&q| match data.tau(q) {
                Ok(tau) => Ok(json!({
                    "q": emit::complex(q),
                    "tau": emit::complex(tau),
                    "im_positive": tau.im > 0.0,
                })),
                Err(e) => Err(format!("tau failed at Q = {q}: {e}")),
            })
            .collect();
        let mut grid = Vec::with_capacity(rows.len());
        for row in rows {
            grid.push(row.map_err(config)?);
        }
        let passed = grid.iter().all(|r| r["im_positive"] == json!(true));
        let payload = json!({ "grid": grid, "all_upper_half_plane": passed });
        return Ok(Outcome::checked(with_header("e6", payload), passed));
    }
    if let Some(path) = what.strip_prefix("monodromy:") {
        let waypoints = input::waypoints(&input::read_json(Path::new(path))?)?;
        let m = elliptic_e6::monodromy(&data, &waypoints)
            .map_err(|e| config(format!("continuation failed: {e}")))?;
        let action = m.tau_action();
        let snapped = m.snapped_tau_action(1e-4);
        let payload = json!({
            "on_solutions": m.on_solutions
                .iter()
                .map(|row| row.iter().copied().map(emit::complex).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
            "tau_action": action
                .iter()
                .map(|row| row.iter().copied().map(emit::complex).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
            "snapped": snapped,
            "level_three": snapped.map(elliptic_e6::is_level_three),
        });
        return Ok(Outcome::report(with_header("e6", payload)));
    }
    Err(config(format!("unknown e6 emission \"{what}\"")))
}
