//! Sweep the latent-skill count and the Q coupling weight and print the
//! reconstruction quality of each fit.
//!
//! ```bash
//! cargo run --release --example sweep
//! ```

use cogdiag::mcf::sweep::sweep_csv;
use cogdiag::mcf::{sweep, McfConfig, Observations};
use cogdiag::sim::{simulate, SimConfig};

fn main() -> cogdiag::Result<()> {
    let data = simulate(&SimConfig { items: 120, models: 16, concepts: 24, ..SimConfig::default() })?;
    let w = ndarray::Array2::ones(data.x.dim());
    let obs = Observations::new(data.x.view(), w.view(), data.q.view())?;
    let base = McfConfig { max_iters: 500, ..McfConfig::default() };
    let rows = sweep(&obs, &base, &[2, 5, 10], &[0.1, 1.0], 1, 0.5)?;
    print!("{}", sweep_csv(&rows));
    Ok(())
}
