use clap::{Parser, Subcommand};
use lfi::experiment::{self, ExperimentConfig, RunManifest, MANIFEST_FILE, WORKERS_ENV};
use lfi::LfiError;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

/// Likelihood-free inference experiments.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[arg(long, global = true, help = format!("Worker threads (default: ${WORKERS_ENV}, else all cores)"))]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML configuration.
    Run { config: PathBuf },
    /// Check a configuration without simulating anything.
    Validate { config: PathBuf },
    /// Compare simulator calls and wall-clock time across run manifests.
    Compare {
        #[arg(required = true, num_args = 2..)]
        manifests: Vec<PathBuf>,
        /// Write the CSV here instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

const INVALID_CONFIG: u8 = 2;
const RUNTIME: u8 = 1;

fn fail(err_out: &mut impl Write, kind: &str, err: &LfiError, code: u8) -> u8 {
    let body = serde_json::json!({ "error": kind, "message": err.to_string() });
    let _ = writeln!(err_out, "{body}");
    code
}

/// Execute a parsed command line and return the process exit code.
fn execute(cli: Cli, out: &mut impl Write, err_out: &mut impl Write) -> u8 {
    let workers = match experiment::worker_count(cli.workers) {
        Ok(w) => w,
        Err(e) => return fail(err_out, "invalid_config", &e, INVALID_CONFIG),
    };
    match cli.command {
        Command::Validate { config } => match ExperimentConfig::load(&config) {
            Ok(cfg) => {
                let body = serde_json::json!({ "valid": true, "study": cfg.study.name(), "method": cfg.method.name() });
                let _ = writeln!(out, "{body}");
                0
            }
            Err(e) => fail(err_out, "invalid_config", &e, INVALID_CONFIG),
        },
        Command::Run { config } => {
            let cfg = match ExperimentConfig::load(&config) {
                Ok(c) => c,
                Err(e) => return fail(err_out, "invalid_config", &e, INVALID_CONFIG),
            };
            match experiment::with_workers(workers, || experiment::run(&cfg)).and_then(|r| r) {
                Ok(m) => {
                    let _ = writeln!(out, "{}", cfg.output_dir.join(MANIFEST_FILE).display());
                    let _ = writeln!(err_out, "{} simulator calls in {:.1}s", m.sim_calls, m.wall_clock_seconds);
                    0
                }
                Err(e) => fail(err_out, "runtime", &e, RUNTIME),
            }
        }
        Command::Compare { manifests, output } => {
            let loaded: Result<Vec<(String, RunManifest)>, LfiError> = manifests
                .iter()
                .map(|p| Ok((p.display().to_string(), RunManifest::read(p)?)))
                .collect();
            let table = loaded.and_then(|m| experiment::compare(&m));
            let written = table.and_then(|csv| match output {
                Some(path) => std::fs::write(path, csv).map_err(LfiError::from),
                None => out.write_all(csv.as_bytes()).map_err(LfiError::from),
            });
            match written {
                Ok(()) => 0,
                Err(e) => fail(err_out, "runtime", &e, RUNTIME),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    ExitCode::from(execute(cli, &mut std::io::stdout(), &mut std::io::stderr()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;
    use std::path::Path;

    struct Outcome {
        code: u8,
        stdout: String,
        stderr: String,
    }

    fn lfi(args: &[&str]) -> Outcome {
        let cli = Cli::try_parse_from(std::iter::once("lfi").chain(args.iter().copied())).expect("arguments parse");
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = execute(cli, &mut out, &mut err);
        Outcome { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
    }

    fn write_config(dir: &Path, name: &str, body: &str) -> String {
        let path = dir.join(name);
        fs::write(&path, body).unwrap();
        path.to_str().unwrap().to_string()
    }

    fn error_kind(o: &Outcome) -> String {
        let v: serde_json::Value = serde_json::from_str(o.stderr.trim()).expect("structured error");
        v["error"].as_str().unwrap().to_string()
    }

    const TOY_PMC: &str = r#"
seed = 4
output_dir = "out"

[study]
name = "toy"

[method]
name = "pmc"
n_particles = 200
schedule = { kind = "adaptive", epsilon_1 = 5.0, quantile = 0.5, iterations = 3 }
"#;

    #[test]
    fn bundled_configs_validate() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
        let mut n = 0;
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            let o = lfi(&["validate", path.to_str().unwrap()]);
            assert_eq!(o.code, 0, "{}: {}", path.display(), o.stderr);
            let v: serde_json::Value = serde_json::from_str(o.stdout.trim()).unwrap();
            assert_eq!(v["valid"], true);
            n += 1;
        }
        assert!(n >= 5);
    }

    #[test]
    fn missing_key_exits_2_without_output() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = write_config(tmp.path(), "bad.toml", &TOY_PMC.replace("n_particles = 200\n", ""));
        let o = lfi(&["run", &cfg]);
        assert_eq!(o.code, 2);
        assert_eq!(error_kind(&o), "invalid_config");
        assert!(o.stdout.is_empty());
        assert!(!tmp.path().join("out").exists());
        assert_eq!(lfi(&["validate", &cfg]).code, 2);
    }

    #[test]
    fn unknown_key_and_bad_bounds_rejected() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = write_config(tmp.path(), "typo.toml", &TOY_PMC.replace("n_particles", "n_particle"));
        assert_eq!(lfi(&["validate", &cfg]).code, 2);

        let bolfi = TOY_PMC.replace(
            "name = \"pmc\"\nn_particles = 200\nschedule = { kind = \"adaptive\", epsilon_1 = 5.0, quantile = 0.5, iterations = 3 }",
            "name = \"bolfi\"\nn_init = 5\nn_evidence = 10\nupdate_interval = 5\nacq_noise_variance = 1.0\nn_sample = 50\nspace = { lower = [4.0], upper = [-4.0] }",
        );
        let cfg = write_config(tmp.path(), "bounds.toml", &bolfi);
        let o = lfi(&["validate", &cfg]);
        assert_eq!(o.code, 2);
        assert!(o.stderr.contains("bound"), "{}", o.stderr);
    }

    #[test]
    fn zero_workers_rejected() {
        let o = lfi(&["--workers", "0", "validate", "nonexistent.toml"]);
        assert_eq!(o.code, 2);
        assert_eq!(error_kind(&o), "invalid_config");
    }

    #[test]
    fn missing_manifest_is_a_runtime_error() {
        let o = lfi(&["compare", "nope-a.json", "nope-b.json"]);
        assert_eq!(o.code, 1);
        assert_eq!(error_kind(&o), "runtime");
    }

    #[test]
    fn compare_needs_two_manifests() {
        assert!(Cli::try_parse_from(["lfi", "compare", "one.json"]).is_err());
    }

    #[test]
    fn run_writes_artifacts_and_is_worker_invariant() {
        let tmp = tempfile::tempdir().unwrap();
        let mut manifests = Vec::new();
        let mut samples = Vec::new();
        for (k, workers) in ["1", "2"].into_iter().enumerate() {
            let sub = tmp.path().join(format!("w{k}"));
            fs::create_dir(&sub).unwrap();
            let cfg = write_config(&sub, "toy.toml", TOY_PMC);
            let o = lfi(&["--workers", workers, "run", &cfg]);
            assert_eq!(o.code, 0, "{}", o.stderr);
            let manifest = o.stdout.trim().to_string();
            assert!(manifest.ends_with(MANIFEST_FILE));
            for f in ["posterior_samples.csv", "summary.json", "diagnostics.json", MANIFEST_FILE] {
                assert!(sub.join("out").join(f).exists(), "{f} missing");
            }
            samples.push(fs::read(sub.join("out/posterior_samples.csv")).unwrap());
            manifests.push(manifest);
        }
        assert_eq!(samples[0], samples[1]);

        let o = lfi(&["compare", &manifests[0], &manifests[1]]);
        assert_eq!(o.code, 0, "{}", o.stderr);
        assert_eq!(o.stdout.lines().count(), 3);
        assert!(o.stdout.lines().next().unwrap().contains("sim_calls"));

        let csv = tmp.path().join("cmp.csv");
        let o = lfi(&["compare", &manifests[0], &manifests[1], "--output", csv.to_str().unwrap()]);
        assert_eq!(o.code, 0);
        assert!(o.stdout.is_empty());
        assert_eq!(fs::read_to_string(csv).unwrap().lines().count(), 3);
    }
}
