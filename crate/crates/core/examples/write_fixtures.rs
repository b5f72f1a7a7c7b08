//! Writes the analytic test fields as `.isog` files into a directory.
//!
//! `cargo run --release --example write_fixtures -- <dir> [n]`

use isograph::fixtures;
use isograph::mesh_io::{write_field, FieldEncoding};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let dir = std::path::PathBuf::from(args.next().unwrap_or_else(|| ".".into()));
    let n: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(32);
    std::fs::create_dir_all(&dir)?;
    let sets = [
        ("sphere", fixtures::unit_sphere(n)?),
        ("two_spheres", fixtures::two_spheres(n)?),
        ("slab", fixtures::slab(n, 0.3, 0.7)?),
        ("cylinder", fixtures::cylinder(n, 0.3)?),
    ];
    for (name, (part, field)) in sets {
        let path = dir.join(format!("{name}.isog"));
        write_field(&path, &field, &part, FieldEncoding::Binary)?;
        println!("{}", path.display());
    }
    Ok(())
}
