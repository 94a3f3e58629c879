//! Regenerates the map and witness fixtures under `corpus/` from their
//! symbolic constructions. The manifest is maintained by hand.
//!
//! cargo run -p jacprobe --release --example write_corpus

use std::path::Path;

use jacprobe::collide::{find_collision, verify_collision};
use jacprobe::corpus::constructions::*;
use jacprobe::polymap::{serialize_complex, serialize_real};
use jacprobe::sampling::BoxDomain;

fn main() -> jacprobe::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus");
    let write = |name: &str, text: String| std::fs::write(dir.join(name), text + "\n");

    write("identity2.json", serialize_real(&identity(2)))?;
    write("identity3.json", serialize_real(&identity(3)))?;
    write("keller_cubic.json", serialize_real(&keller_cubic()))?;
    write("monotone_cubic.json", serialize_real(&monotone_cubic()))?;
    write("fold.json", serialize_real(&fold()))?;
    write("cubic_fold3.json", serialize_real(&cubic_fold3()))?;
    write("non_nilpotent.json", serialize_real(&non_nilpotent()))?;
    write("complex_square.json", serialize_complex(&complex_square()))?;
    write("complex_keller.json", serialize_complex(&complex_keller()))?;

    let pinchuk = pinchuk();
    write("pinchuk.json", serialize_real(&pinchuk))?;
    let domain = BoxDomain::cube(2, 3.0);
    let witness = find_collision(&pinchuk, &domain, 20_000, 42)?.expect("no collision found");
    let check = verify_collision(&pinchuk, &witness, 1e-8)?;
    assert!(check.passed, "{check:?}");
    println!("pinchuk witness {witness:?}");
    write("pinchuk_collision.json", serde_json::to_string_pretty(&witness).expect("serializable"))?;
    Ok(())
}
