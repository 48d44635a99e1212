//! Subcommand implementations.

use qcas_core::casci::casci_ground;
use qcas_core::circuit::Circuit;
use qcas_core::circuit_opt::{optimize, GateCounts};
use qcas_core::hamiltonian::{
    oniom_total, parse_fcidump, serialize_fcidump, ActiveSpaceSpec, EnergyLedger,
    FermionHamiltonian,
};
use qcas_core::neb::{
    interpolate_linear, newton_refine, optimize_path, Harmonic, MuellerBrown, NebConfig,
    Potential,
};
use qcas_core::orbitals::{
    assignment_weights, fno_density, fragment_orbital_count, full_orbital_rotation,
    mp2_amplitudes, orbital_home_atoms, select_fno_virtuals, select_fragment_orbitals,
    MoCoefficients,
};
use qcas_core::slater::reference_determinant;
use qcas_core::solver::{fast_vqe_run, FastConfig, OptimizerOptions, Selector};
use qcas_core::HARTREE_TO_KCAL;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::{to_json_pretty, write_file};

#[derive(Debug)]
pub enum CliError {
    /// Bad inputs or configuration (exit code 2).
    Input(String),
    /// The computation itself failed (exit code 3).
    Compute(String),
}

fn read_input(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn load_hamiltonian(path: &Path) -> Result<FermionHamiltonian, CliError> {
    parse_fcidump(&read_input(path)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn ensure_dir(path: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(path)
        .map_err(|e| CliError::Input(format!("cannot create {}: {e}", path.display())))
}

// ---------------------------------------------------------------------------
// fastvqe
// ---------------------------------------------------------------------------

/// On-disk run configuration; every field except the two paths is optional
/// and falls back to the defaults mirrored from the target regime
/// (1024 shots, 40 iterations, 950 one-qubit gates).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub fcidump: String,
    pub output_dir: String,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_shots")]
    pub shots: usize,
    #[serde(default = "default_iterations")]
    pub max_iterations: usize,
    #[serde(default)]
    pub selector: Selector,
    #[serde(default = "default_budget")]
    pub gate_budget_1q: usize,
    #[serde(default = "default_true")]
    pub casci_reference: bool,
    #[serde(default = "default_score_threshold")]
    pub score_threshold: f64,
    #[serde(default)]
    pub anti_hermitian_kappa: bool,
    #[serde(default)]
    pub optimizer: OptimizerOptions,
}

fn default_seed() -> u64 {
    1
}
fn default_shots() -> usize {
    1024
}
fn default_iterations() -> usize {
    40
}
fn default_budget() -> usize {
    950
}
fn default_true() -> bool {
    true
}
fn default_score_threshold() -> f64 {
    1e-8
}

pub struct FastvqeOverrides {
    pub seed: Option<u64>,
    pub shots: Option<usize>,
    pub iterations: Option<usize>,
    pub selector: Option<String>,
    pub budget_1q: Option<usize>,
}

#[derive(Debug, Serialize)]
struct RunSummary {
    fcidump: String,
    seed: u64,
    shots: usize,
    selector: Selector,
    iterations_run: usize,
    stop_reason: String,
    hf_energy_ha: f64,
    final_energy_ha: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    casci_energy_ha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error_ha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error_kcal: Option<f64>,
    gates_1q: usize,
    gates_2q: usize,
    optimizer_warnings: usize,
}

pub fn cmd_fastvqe(config_path: &Path, overrides: FastvqeOverrides) -> Result<(), CliError> {
    let text = read_input(config_path)?;
    let mut config: RunConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("{}: {e}", config_path.display())))?;
    if let Some(seed) = overrides.seed {
        config.seed = seed;
    }
    if let Some(shots) = overrides.shots {
        config.shots = shots;
    }
    if let Some(iterations) = overrides.iterations {
        config.max_iterations = iterations;
    }
    if let Some(budget) = overrides.budget_1q {
        config.gate_budget_1q = budget;
    }
    if let Some(selector) = overrides.selector {
        config.selector = match selector.as_str() {
            "fast" => Selector::Fast,
            "adapt" => Selector::Adapt,
            other => return Err(CliError::Input(format!("unknown selector '{other}'"))),
        };
    }
    if config.shots == 0 || config.max_iterations == 0 {
        return Err(CliError::Input("shots and iterations must be positive".into()));
    }
    // resolve the fcidump path relative to the config file
    let base = config_path.parent().unwrap_or(Path::new("."));
    let fcidump_path = base.join(&config.fcidump);
    let fcidump_path = if Path::new(&config.fcidump).is_absolute() {
        Path::new(&config.fcidump).to_path_buf()
    } else {
        fcidump_path
    };
    let h = load_hamiltonian(&fcidump_path)?;

    let out_dir = Path::new(&config.output_dir).to_path_buf();
    let out_dir = if out_dir.is_absolute() { out_dir } else { base.join(&config.output_dir) };
    ensure_dir(&out_dir)?;
    write_file(&out_dir.join("resolved_config.json"), &to_json_pretty(&config))?;

    let solver_config = FastConfig {
        max_iterations: config.max_iterations,
        shots: config.shots,
        selector: config.selector,
        seed: config.seed,
        gate_budget_1q: config.gate_budget_1q,
        score_threshold: config.score_threshold,
        anti_hermitian_kappa: config.anti_hermitian_kappa,
        optimizer: config.optimizer.clone(),
    };
    let trace = fast_vqe_run(&h, &solver_config).map_err(|e| CliError::Compute(e.to_string()))?;

    let casci_energy = if config.casci_reference {
        let (e, _) = casci_ground(&h).map_err(|e| CliError::Compute(e.to_string()))?;
        Some(e)
    } else {
        None
    };
    let error_ha = casci_energy.map(|e| trace.final_energy_ha - e);
    let reference = reference_determinant(h.n_orbitals, h.n_alpha, h.n_beta);
    let circuit = trace
        .ansatz
        .circuit(h.n_spin_orbitals(), reference)
        .map_err(|e| CliError::Compute(e.to_string()))?;
    let (g1, g2) = circuit.gate_counts();

    let summary = RunSummary {
        fcidump: config.fcidump.clone(),
        seed: config.seed,
        shots: config.shots,
        selector: config.selector,
        iterations_run: trace.records.len(),
        stop_reason: trace.stop_reason.clone(),
        hf_energy_ha: trace.hf_energy_ha,
        final_energy_ha: trace.final_energy_ha,
        casci_energy_ha: casci_energy,
        error_ha,
        error_kcal: error_ha.map(|e| e * HARTREE_TO_KCAL),
        gates_1q: g1,
        gates_2q: g2,
        optimizer_warnings: trace.optimizer_warnings,
    };

    write_file(&out_dir.join("trace.jsonl"), &trace.to_jsonl())?;
    write_file(&out_dir.join("summary.json"), &to_json_pretty(&summary))?;
    write_file(&out_dir.join("ansatz_circuit.txt"), &circuit.to_lines())?;
    println!(
        "final energy {:.9} Ha after {} iterations (stop: {})",
        trace.final_energy_ha,
        trace.records.len(),
        trace.stop_reason
    );
    if let (Some(err), Some(err_kcal)) = (error_ha, summary.error_kcal) {
        println!("error vs exact reference: {err:.3e} Ha ({err_kcal:.3} kcal/mol)");
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// casci
// ---------------------------------------------------------------------------

pub fn cmd_casci(fcidump: &Path) -> Result<(), CliError> {
    let h = load_hamiltonian(fcidump)?;
    let (energy, _) = casci_ground(&h).map_err(|e| CliError::Compute(e.to_string()))?;
    println!("{energy:.12}");
    Ok(())
}

// ---------------------------------------------------------------------------
// activespace
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
struct ActiveSpaceReport {
    weights: Vec<f64>,
    home_atoms: Vec<usize>,
    n_fragment_orbitals: usize,
    selected_occupied: Vec<usize>,
    fno_eigenvalues: Vec<f64>,
    selected_virtuals: Vec<usize>,
    frozen_core: Vec<usize>,
    active_orbitals: Vec<usize>,
    n_active_electrons: usize,
}

pub fn cmd_activespace(
    fcidump: &Path,
    mo_path: &Path,
    fragment: &str,
    n_virtuals: usize,
    occ_window: usize,
    output_dir: &Path,
) -> Result<(), CliError> {
    let h = load_hamiltonian(fcidump)?;
    let mo = MoCoefficients::from_json(&read_input(mo_path)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", mo_path.display())))?;
    let fragment_atoms: Vec<usize> = fragment
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Input(format!("bad fragment atom '{s}'")))
        })
        .collect::<Result<_, _>>()?;
    if h.n_alpha != h.n_beta {
        return Err(CliError::Input("active-space preparation expects a closed shell".into()));
    }
    let n_occ = h.n_alpha;
    if mo.occupied_count != n_occ {
        return Err(CliError::Input(format!(
            "MO file has {} occupied orbitals, FCIDUMP reference has {}",
            mo.occupied_count, n_occ
        )));
    }

    let weights = assignment_weights(&mo, &fragment_atoms)
        .map_err(|e| CliError::Input(e.to_string()))?;
    let home_atoms = orbital_home_atoms(&mo);
    let n = fragment_orbital_count(&mo, &fragment_atoms)
        .map_err(|e| CliError::Input(e.to_string()))?;
    let selected_occupied =
        select_fragment_orbitals(&weights, n).map_err(|e| CliError::Input(e.to_string()))?;

    let virtuals: Vec<usize> = (n_occ..h.n_orbitals).collect();
    if n_virtuals > virtuals.len() {
        return Err(CliError::Input(format!(
            "requested {n_virtuals} virtuals, only {} exist",
            virtuals.len()
        )));
    }
    // occupied window right below the Fermi level
    let window: Vec<usize> = (n_occ.saturating_sub(occ_window)..n_occ).collect();
    let amplitudes = mp2_amplitudes(&h, &window, &virtuals)
        .map_err(|e| CliError::Compute(e.to_string()))?;
    let selection = fno_density(&amplitudes);
    let kept =
        select_fno_virtuals(&selection, n_virtuals).map_err(|e| CliError::Input(e.to_string()))?;

    let rotation = full_orbital_rotation(h.n_orbitals, n_occ, &kept);
    let rotated = h.rotate_orbitals(&rotation).map_err(|e| CliError::Compute(e.to_string()))?;

    let mut selected_occ_sorted = selected_occupied.clone();
    selected_occ_sorted.sort_unstable();
    let frozen_core: Vec<usize> =
        (0..n_occ).filter(|p| !selected_occ_sorted.contains(p)).collect();
    // natural virtuals sit contiguously above the occupied block, ordered by
    // eigenvalue rank
    let selected_virtuals: Vec<usize> = (n_occ..n_occ + n_virtuals).collect();
    let active: Vec<usize> =
        selected_occ_sorted.iter().copied().chain(selected_virtuals.iter().copied()).collect();
    let n_active_electrons = 2 * selected_occ_sorted.len();

    let spec = ActiveSpaceSpec {
        frozen_core: frozen_core.clone(),
        active: active.clone(),
        n_active_electrons,
    };
    let folded = rotated.fold_core(&spec).map_err(|e| CliError::Compute(e.to_string()))?;

    ensure_dir(output_dir)?;
    write_file(&output_dir.join("active_space.fcidump"), &serialize_fcidump(&folded))?;
    let report = ActiveSpaceReport {
        weights,
        home_atoms,
        n_fragment_orbitals: n,
        selected_occupied,
        fno_eigenvalues: kept.eigenvalues.clone(),
        selected_virtuals,
        frozen_core,
        active_orbitals: active,
        n_active_electrons,
    };
    write_file(&output_dir.join("report.json"), &to_json_pretty(&report))?;
    println!(
        "active space: {} electrons in {} orbitals ({} frozen)",
        n_active_electrons,
        folded.n_orbitals,
        report.frozen_core.len()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// circopt
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
struct CircoptReport {
    before: GateCounts,
    after: GateCounts,
    budget_met: bool,
}

pub fn cmd_circopt(circuit_path: &Path, budget_1q: usize, output_dir: &Path) -> Result<(), CliError> {
    let circuit = Circuit::from_lines(&read_input(circuit_path)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", circuit_path.display())))?;
    let (optimized, report) = optimize(&circuit, budget_1q);
    ensure_dir(output_dir)?;
    write_file(&output_dir.join("optimized_circuit.txt"), &optimized.to_lines())?;
    let file_report =
        CircoptReport { before: report.before, after: report.after, budget_met: report.budget_met };
    write_file(&output_dir.join("report.json"), &to_json_pretty(&file_report))?;
    println!(
        "one-qubit gates {} -> {}, two-qubit gates {} -> {} (budget {} {})",
        report.before.g1,
        report.after.g1,
        report.before.g2,
        report.after.g2,
        budget_1q,
        if report.budget_met { "met" } else { "missed" }
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// neb
// ---------------------------------------------------------------------------

fn parse_point(text: &str) -> Result<Vec<f64>, CliError> {
    serde_json::from_str(text)
        .map_err(|e| CliError::Input(format!("bad endpoint coordinates '{text}': {e}")))
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_neb(
    potential_name: &str,
    reactant: Option<&str>,
    product: Option<&str>,
    images: usize,
    k_spring: f64,
    max_force: f64,
    max_steps: usize,
    climbing: bool,
    output: Option<&Path>,
) -> Result<(), CliError> {
    let potential: Box<dyn Potential> = match potential_name {
        "mueller-brown" => Box::new(MuellerBrown),
        "harmonic" => Box::new(Harmonic { k: 1.0 }),
        other => return Err(CliError::Input(format!("unknown potential '{other}'"))),
    };
    let (reactant, product) = match (reactant, product) {
        (Some(r), Some(p)) => (parse_point(r)?, parse_point(p)?),
        (None, None) if potential_name == "mueller-brown" => {
            let (a, c) = MuellerBrown::minima_guesses();
            (newton_refine(potential.as_ref(), &a), newton_refine(potential.as_ref(), &c))
        }
        _ => {
            return Err(CliError::Input(
                "endpoints required (give both --reactant and --product)".into(),
            ))
        }
    };
    if reactant.len() != product.len() {
        return Err(CliError::Input("endpoint dimensions differ".into()));
    }

    let path = interpolate_linear(&reactant, &product, images)
        .map_err(|e| CliError::Input(e.to_string()))?;
    let config = NebConfig { max_force, k_spring, max_steps, climbing, ..NebConfig::default() };
    let outcome =
        optimize_path(&path, potential.as_ref(), &config).map_err(|e| CliError::Compute(e.to_string()))?;
    if !outcome.converged {
        eprintln!(
            "warning: step limit reached at max force {:.3e}; profile is best-so-far",
            outcome.max_force
        );
    }
    let mut csv = String::from("image,energy\n");
    for (i, e) in outcome.energies.iter().enumerate() {
        csv.push_str(&format!("{i},{e}\n"));
    }
    match output {
        Some(path) => write_file(path, &csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// combine
// ---------------------------------------------------------------------------

pub fn cmd_combine(ledger_path: &Path) -> Result<(), CliError> {
    let ledger = EnergyLedger::from_json(&read_input(ledger_path)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", ledger_path.display())))?;
    let total = oniom_total(&ledger).map_err(|e| CliError::Input(e.to_string()))?;
    println!("{total}");
    Ok(())
}
