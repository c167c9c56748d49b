//! Class numbers of the family in a window, by both methods, with L(1, χ).

use murmur_core::quadfield::{
    class_number_dirichlet, class_number_forms, compute_family, l1_partial_sum, DiscriminantWindow,
};

fn main() -> anyhow::Result<()> {
    let window = DiscriminantWindow::new(1000, 100)?;
    let records = compute_family(&window, None)?;
    println!("{} discriminants in [{}, {}]", records.len(), window.x, window.hi());
    println!("{:>6} {:>4} {:>10} {:>12}", "D", "h", "L(1,χ)", "Σ_{n≤100}");
    for r in &records {
        assert_eq!(class_number_forms(r.d)?, class_number_dirichlet(r.d)?.0);
        println!("{:>6} {:>4} {:>10.6} {:>12.6}", r.d, r.h, r.l1, l1_partial_sum(r.d, 100));
    }
    Ok(())
}
