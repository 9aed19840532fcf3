use super::{FactoryError, Gadgets};
use crate::model::{Instance, Matching};

/// Three agents and `2p + 3` items where the slowest nomination order needs
/// `2p - 1` steps and a short sequence needs four.
pub fn gen_exponential_gap(p: usize) -> Result<(Instance, Matching), FactoryError> {
    if p < 2 {
        return Err(FactoryError::InvalidParameter(format!("p must be at least 2, got {p}")));
    }
    let a = |l: usize| format!("a{l}");
    let b = |l: usize| format!("b{l}");
    let mut g = Gadgets::new();

    let mut first = Vec::new();
    for l in (2..=p).rev() {
        first.push(a(l));
        first.push(b(l));
    }
    first.push(a(1));

    let mut second = vec![b(p), "z".to_string()];
    for l in (2..p).rev() {
        second.push(b(l));
        second.push(a(l + 1));
    }
    second.push(b(1));

    // Fix item ids before the lists refer to them.
    let mut order: Vec<String> = (1..=p).map(a).chain((1..=p).map(b)).collect();
    order.extend(["r", "s", "z"].map(String::from));
    g.items(&order);

    g.plain_agent("1", &first);
    g.plain_agent("2", &second);
    g.plain_agent("3", &["r", "z", "s"].map(String::from));
    Ok(g.finish())
}
