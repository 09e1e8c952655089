//! The library side of the command-line tool: parse a configuration, run the
//! sweep, write `sweep.csv` and `report.json`, then run the invariant suites.

use perforated_bem::cli::{self, Format, RunConfig};

const CONFIG: &str = r#"
outer = { kind = "unit-sphere" }
inner = { kind = "unit-sphere" }
quad_order = 12
g_o = 1.0
g_i = 1.0
nonlinearity = { form = "linear" }
delta = { coefficient = 1.0, exponent = -1.0 }
rho = { coefficient = 1.0, exponent = 2.0 }
probes = [[0.5, 0.0, 0.0], [0.0, 0.7, 0.0]]

[sweep]
eps_start = 0.1
eps_end = 0.0125
points_per_decade = 4
"#;

fn main() -> perforated_bem::Result<()> {
    let cfg = RunConfig::parse(CONFIG)?;
    let report = cli::run(&cfg, false)?;
    print!("{}", report.to_csv());
    println!("limit {:?}", report.limit);
    println!("fits {:?}", report.fits);
    println!("oracle {:?}", report.oracle);

    let dir = std::env::temp_dir().join("perforated-bem-example");
    for path in report.write(&dir, &[Format::Csv, Format::Json])? {
        println!("wrote {}", path.display());
    }

    let checks = cli::verify(&cfg, 0)?;
    print!("{}", checks.summary());
    println!("verify passed: {}", checks.passed());
    Ok(())
}
