//! Parse names, place segments into chunks and build repair prefixes.

use said_sim::naming::{chunk_of, parse_name, parse_name_with, NamingConfig};

fn main() -> anyhow::Result<()> {
    let flow = parse_name("/news/video/_v3")?;
    println!("flow {flow} version {:?}", flow.version());

    let seg = flow.with_segment(1234, 100)?;
    println!("segment name {seg}");
    println!("chunk of 1234 with n=100: {}", chunk_of(1234, 100)?);
    println!("flow prefix back: {}", seg.flow_prefix());

    for p in seg.prefixes() {
        println!("  prefix {p}");
    }

    // chunk markers must agree with the segment under the configured size
    let cfg = NamingConfig::new(50)?;
    match parse_name_with("/news/video/_v3/_c2/_s130", &cfg) {
        Ok(n) => println!("accepted {n}"),
        Err(e) => println!("rejected: {e}"),
    }
    match parse_name_with("/news/video/_v3/_c1/_s130", &cfg) {
        Ok(n) => println!("accepted {n}"),
        Err(e) => println!("rejected: {e}"),
    }
    Ok(())
}
