//! Drive the command-line interface in-process from a config file.

use bistable::config::{spectrum_from_block, RunConfig};

const CONFIG: &str = "\
seed = 5
spectrum = {kind: harmonic, n: 6, mirror: true}
nonlinearity = {kind: bilinear, lip: 0.2}
solver = {T: 12, tol: 1e-10,
          gamma: 0.25}
";

fn main() {
    let cfg = RunConfig::parse(CONFIG).expect("valid config");
    let spec = spectrum_from_block(cfg.require_block("spectrum").unwrap(), 5).unwrap();
    println!("alphas {:?}", spec.alphas());
    println!("hash {}", cfg.hash(""));

    let dir = std::env::temp_dir().join("bistable-run-config");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("run.cfg");
    std::fs::write(&path, CONFIG).unwrap();
    let out = dir.join("out");
    for cmd in [&["simulate"][..], &["verify", "quadform"], &["verify", "decay", "--k", "2"]] {
        let mut args = vec!["bistable", "--config", path.to_str().unwrap(), "--out", out.to_str().unwrap()];
        args.extend(cmd);
        println!("{} -> exit {}", cmd.join(" "), bistable::cli::run(args));
    }
    println!("outputs in {}", out.display());
}
