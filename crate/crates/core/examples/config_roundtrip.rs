//! Loads a partial TOML config, shows the derived solver settings and
//! prints the full file.

use spine_rectify::config::RunConfig;

fn main() {
    let text = r#"
mode = "order"
anchor_weight = 3.0
step_schedule = [2, 1]
expansion = "literal"
"#;
    let cfg = RunConfig::from_toml_str(text).unwrap();
    let energy = cfg.energy(26);
    println!("mode {:?}, anchors {:?}", cfg.mode, cfg.anchors().unwrap());
    println!("lambda {:?}", energy.lambda);
    println!("solver {:?}", cfg.solve());
    println!("--- full config ---\n{}", cfg.to_toml());
    if let Err(e) = RunConfig::from_toml_str("delta = -1.0") {
        println!("rejected: {e}");
    }
}
