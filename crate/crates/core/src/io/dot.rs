use std::fmt::Write as _;

use crate::model::{build_item_graph, Instance, Matching};

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Renders the item graph in DOT. Vertices follow item order; arcs are sorted by
/// agent, then by position in her list. With a matching, each held item is drawn
/// filled and labelled with its holder.
pub fn item_graph_dot(inst: &Instance, tokens: Option<&Matching>) -> String {
    let graph = build_item_graph(inst);
    let mut holder = vec![None; inst.num_items()];
    if let Some(mu) = tokens {
        for i in 0..inst.num_agents() {
            holder[mu.item(i)] = Some(i);
        }
    }
    let mut out = String::from("digraph items {\n");
    for (x, held) in holder.iter().enumerate() {
        let name = inst.item_name(x);
        match *held {
            Some(i) => {
                let label = format!("{name} [{}]", inst.agent_name(i));
                let _ = writeln!(out, "  {} [label={}, style=filled];", quote(name), quote(&label));
            }
            None => {
                let _ = writeln!(out, "  {};", quote(name));
            }
        }
    }
    let mut arcs = graph.arcs;
    arcs.sort_by_key(|a| (a.agent, inst.rank(a.agent, a.tail)));
    for a in arcs {
        let _ = writeln!(
            out,
            "  {} -> {} [label={}];",
            quote(inst.item_name(a.tail)),
            quote(inst.item_name(a.head)),
            quote(inst.agent_name(a.agent))
        );
    }
    out.push_str("}\n");
    out
}
