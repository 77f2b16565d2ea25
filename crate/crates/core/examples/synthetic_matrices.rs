//! Builds every synthetic win-matrix family, checks its transitivity and
//! prints one small instance as CSV.

use ratelab::synthetic::{gen_bt_matrix, gen_sst, gen_wst, Variant};

fn main() -> ratelab::Result<()> {
    let n = 30;
    let (bt, theta) = gen_bt_matrix(n, 0)?;
    // BT strengths are unsorted; check transitivity in strength order
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| theta[b].total_cmp(&theta[a]));
    println!("bt: SST {} WST {}", bt.is_sst_for(&order), bt.is_wst_for(&order));
    for variant in [Variant::ByRow, Variant::ByDiagonal, Variant::ByEntry] {
        let s = gen_sst(n, variant, 0)?;
        let w = gen_wst(n, variant, 0)?;
        println!(
            "{variant:?}: sst(SST {}, WST {})  wst(SST {}, WST {})",
            s.is_sst(),
            s.is_wst(),
            w.is_sst(),
            w.is_wst()
        );
    }

    println!("\n4-player WST by entry:");
    gen_wst(4, Variant::ByEntry, 5)?.write_csv(std::io::stdout())?;
    Ok(())
}
