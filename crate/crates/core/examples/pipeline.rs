//! The full pipeline on the bundled demo data, driven through the same
//! entry point as the binary. Output goes to the directory given as the
//! first argument (default `pipeline-out`).

fn main() {
    let out = std::env::args().nth(1).unwrap_or_else(|| "pipeline-out".into());
    let code = qpack_lab::cli::run(["qpack-lab", "pipeline", "--seed", "2024", "--out", &out]);
    std::process::exit(code);
}
