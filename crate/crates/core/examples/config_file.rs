//! Building a problem from TOML and estimating on it.
//!
//! `cargo run --example config_file -- [path.toml]`

use unequal_support::config::{Config, CvChoice};
use unequal_support::estimators::estimate_all;
use unequal_support::prelude::*;

const INLINE: &str = r#"
[problem]
kind = "explicit"

[problem.target]
kind = "truncated_normal"
lower = 0.5
upper = 1.5
mean = 1.5
sd = 0.5

[problem.sampling]
kind = "uniform"
lo = 0.0
hi = 2.0

[problem.evaluation]
edges = [0.0, 1.0, 2.0]
values = [1.0, 3.0]

[problem.pruning]
intervals = [[0.5, 1.5]]

[run]
seed = 5
n = 200
cv = "value:2.0"
"#;

fn main() -> Result<()> {
    let cfg: Config = match std::env::args().nth(1) {
        Some(path) => Config::load(path.as_ref())?,
        None => INLINE.parse()?,
    };
    let problem = cfg
        .problem
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("config has no [problem]".into()))?
        .build()?;
    let t = match cfg.run.cv.unwrap_or(CvChoice::None) {
        CvChoice::Value(t) => t,
        _ => 0.0,
    };
    let n = cfg.run.n.unwrap_or(100);
    let mut stream = RandomStream::new(cfg.run.seed.unwrap_or(0));
    let batch = draw(&problem.sampling, &mut stream, n);
    let e = estimate_all(&problem, &batch, ControlVariate::new(t)?)?;
    println!("c = {:.4}, n = {n}, k = {}, c_hat = {:.4}", problem.c(), e.is.k, e.c_hat);
    println!("IS {:.4}  US {:.4}  WIS {:.4}", e.is.value, e.us.value, e.wis.value);
    Ok(())
}
