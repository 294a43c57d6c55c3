use std::fmt::Write as _;

use super::{DegreeRow, FilteredGraph, ScatterRow};

fn manifest_comment(out: &mut String, prefix: &str, manifest: Option<&str>) {
    if let Some(d) = manifest {
        let _ = writeln!(out, "{prefix} manifest {d}");
    }
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn dot_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn to_graphml(g: &FilteredGraph, manifest: Option<&str>) -> String {
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    if let Some(d) = manifest {
        let _ = writeln!(out, "<!-- manifest {d} -->");
    }
    out.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
    for (id, domain, name, ty) in [
        ("sector", "node", "sector", "string"),
        ("subsector", "node", "subsector", "string"),
        ("s", "edge", "s", "double"),
        ("theta", "edge", "theta", "double"),
        ("bin", "edge", "bin", "string"),
        ("bidirectional", "edge", "bidirectional", "boolean"),
    ] {
        let _ = writeln!(out, "  <key id=\"{id}\" for=\"{domain}\" attr.name=\"{name}\" attr.type=\"{ty}\"/>");
    }
    let _ = writeln!(out, "  <graph id=\"{}\" edgedefault=\"directed\">", g.kind);
    for node in &g.nodes {
        let _ = writeln!(out, "    <node id=\"{}\">", xml_escape(&node.id));
        if let Some(s) = &node.sector {
            let _ = writeln!(out, "      <data key=\"sector\">{}</data>", xml_escape(s));
        }
        if let Some(s) = &node.subsector {
            let _ = writeln!(out, "      <data key=\"subsector\">{}</data>", xml_escape(s));
        }
        out.push_str("    </node>\n");
    }
    for (k, e) in g.edges.iter().enumerate() {
        let _ = writeln!(
            out,
            "    <edge id=\"e{k}\" source=\"{}\" target=\"{}\">",
            xml_escape(&g.nodes[e.from].id),
            xml_escape(&g.nodes[e.to].id)
        );
        let _ = writeln!(out, "      <data key=\"s\">{}</data>", e.magnitude);
        let _ = writeln!(out, "      <data key=\"theta\">{}</data>", e.theta);
        let _ = writeln!(out, "      <data key=\"bin\">{}</data>", e.bin);
        let _ = writeln!(out, "      <data key=\"bidirectional\">{}</data>", e.bidirectional);
        out.push_str("    </edge>\n");
    }
    out.push_str("  </graph>\n</graphml>\n");
    out
}

pub fn to_dot(g: &FilteredGraph, manifest: Option<&str>) -> String {
    let mut out = String::new();
    manifest_comment(&mut out, "//", manifest);
    let _ = writeln!(out, "digraph {} {{", g.kind);
    for node in &g.nodes {
        let _ = write!(out, "  {}", dot_quote(&node.id));
        if let Some(s) = &node.sector {
            let _ = write!(out, " [sector={}]", dot_quote(s));
        }
        out.push_str(";\n");
    }
    for e in &g.edges {
        let _ = writeln!(
            out,
            "  {} -> {} [color={}, dir={}, s={}, theta={}];",
            dot_quote(&g.nodes[e.from].id),
            dot_quote(&g.nodes[e.to].id),
            e.bin.color(),
            if e.bidirectional { "both" } else { "forward" },
            dot_quote(&e.magnitude.to_string()),
            dot_quote(&e.theta.to_string()),
        );
    }
    out.push_str("}\n");
    out
}

pub fn edges_to_csv(g: &FilteredGraph, manifest: Option<&str>) -> String {
    let mut out = String::new();
    manifest_comment(&mut out, "#", manifest);
    out.push_str("from,to,s,theta,bin,bidirectional,from_sector,to_sector\n");
    for e in &g.edges {
        let (a, b) = (&g.nodes[e.from], &g.nodes[e.to]);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            csv_field(&a.id),
            csv_field(&b.id),
            e.magnitude,
            e.theta,
            e.bin,
            e.bidirectional,
            csv_field(a.sector.as_deref().unwrap_or("")),
            csv_field(b.sector.as_deref().unwrap_or("")),
        );
    }
    out
}

pub fn degrees_to_csv(rows: &[DegreeRow], manifest: Option<&str>) -> String {
    let mut out = String::new();
    manifest_comment(&mut out, "#", manifest);
    out.push_str("node,in_degree,out_degree,total,sector\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            csv_field(&r.node),
            r.in_degree,
            r.out_degree,
            r.total,
            csv_field(r.sector.as_deref().unwrap_or(""))
        );
    }
    out
}

pub fn scatter_to_csv(rows: &[ScatterRow], manifest: Option<&str>) -> String {
    let mut out = String::new();
    manifest_comment(&mut out, "#", manifest);
    out.push_str("a,b,s,theta,same_sector\n");
    for r in rows {
        let same = r.same_sector.map_or(String::new(), |b| b.to_string());
        let _ = writeln!(out, "{},{},{},{},{}", csv_field(&r.a), csv_field(&r.b), r.magnitude, r.theta, same);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Edge, GraphKind, Node, PhaseBin};

    fn sample() -> FilteredGraph {
        FilteredGraph {
            kind: GraphKind::Mst,
            nodes: vec![
                Node { id: "A&B".into(), sector: Some("Tech".into()), subsector: Some("Chips".into()) },
                Node { id: "C".into(), sector: None, subsector: None },
            ],
            edges: vec![Edge {
                from: 0,
                to: 1,
                magnitude: 0.5,
                theta: -1.0,
                bin: PhaseBin::Quarter,
                bidirectional: false,
            }],
        }
    }

    #[test]
    fn graphml_escapes_and_types() {
        let x = to_graphml(&sample(), Some("abc"));
        assert!(x.contains("<!-- manifest abc -->"));
        assert!(x.contains("source=\"A&amp;B\" target=\"C\""));
        assert!(x.contains("attr.name=\"theta\" attr.type=\"double\""));
        assert!(x.contains("<data key=\"bin\">quarter</data>"));
    }

    #[test]
    fn dot_uses_bin_colours() {
        let d = to_dot(&sample(), None);
        assert!(d.starts_with("digraph mst {"));
        assert!(d.contains("\"A&B\" -> \"C\" [color=red, dir=forward"));
    }

    #[test]
    fn csv_edge_list() {
        let c = edges_to_csv(&sample(), Some("d1"));
        let lines: Vec<&str> = c.lines().collect();
        assert_eq!(lines[0], "# manifest d1");
        assert_eq!(lines[2], "A&B,C,0.5,-1,quarter,false,Tech,");
    }
}
