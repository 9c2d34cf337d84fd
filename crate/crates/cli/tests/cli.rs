use std::path::PathBuf;
use std::process::{Command, Output};

const GOLDEN: &str = "graph\nedge a a\nedge a b\nedge b a\n";
const FULL2: &str = "graph\nedge a a\nedge a b\nedge b a\nedge b b\n";

const TWO_TO_ONE: &str = "graph
vertex x0; vertex x1; vertex y0; vertex y1; vertex z1; vertex z2
edge x0 x0; edge x0 x1; edge x1 x0; edge x1 x1
edge y0 y0; edge y0 y1; edge y1 y0; edge y1 y1
edge x0 z1; edge z1 y0; edge y0 z2; edge z2 x0
label x0 0; label x1 1; label y0 0; label y1 1; label z1 2; label z2 3
";

struct Dir(PathBuf);

impl Dir {
    fn new(tag: &str) -> Dir {
        let p = std::env::temp_dir().join(format!("shiftclass-cli-{tag}-{}", std::process::id()));
        std::fs::create_dir_all(&p).unwrap();
        Dir(p)
    }

    fn file(&self, name: &str, body: &str) -> String {
        let p = self.0.join(name);
        std::fs::write(&p, body).unwrap();
        p.to_string_lossy().into_owned()
    }
}

impl Drop for Dir {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

fn run(args: &[&str]) -> (i32, String, String) {
    let Output { status, stdout, stderr } =
        Command::new(env!("CARGO_BIN_EXE_shiftclass")).args(args).output().expect("binary runs");
    (status.code().unwrap(), String::from_utf8(stdout).unwrap(), String::from_utf8(stderr).unwrap())
}

fn field<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    line.split_whitespace().find_map(|kv| kv.strip_prefix(key)?.strip_prefix('='))
}

#[test]
fn analyze_golden_mean() {
    let d = Dir::new("analyze");
    let f = d.file("golden.txt", GOLDEN);
    let (code, out, _) = run(&["analyze", &f]);
    assert_eq!(code, 0);
    let row = out.lines().find(|l| l.starts_with("component ")).unwrap();
    let golden = ((1.0 + 5f64.sqrt()) / 2.0).ln();
    let h: f64 = field(row, "h").unwrap().parse().unwrap();
    assert!((h - golden).abs() < 1e-9, "{h}");
    assert_eq!(field(row, "p"), Some("1"));
    assert_eq!(field(row, "mme"), Some("yes"));
}

#[test]
fn compare_golden_with_full_shift() {
    let d = Dir::new("cmp");
    let a = d.file("golden.txt", GOLDEN);
    let b = d.file("full2.txt", FULL2);
    let (code, out, _) = run(&["compare", &a, &b]);
    assert_eq!(code, 1);
    assert!(out.starts_with("not isomorphic, witness p=1"), "{out}");
    let (code, out, _) = run(&["compare", &a, &b, "--kv"]);
    assert_eq!(code, 1);
    assert!(out.contains("witness_p=1\n"));
}

#[test]
fn compare_with_itself() {
    let d = Dir::new("self");
    let a = d.file("golden.txt", GOLDEN);
    let (code, out, _) = run(&["compare", &a, &a]);
    assert_eq!(code, 0);
    assert_eq!(out, "isomorphic\n");
}

#[test]
fn invariants_file_compares_with_presentation() {
    let d = Dir::new("inv");
    let a = d.file("full2.txt", FULL2);
    let b = d.file("inv.txt", "invariants\ngen 1 log 2 1\n");
    let (code, out, _) = run(&["compare", &a, &b]);
    assert_eq!((code, out.as_str()), (0, "isomorphic\n"));
}

#[test]
fn realized_documents_reparse_and_match() {
    let d = Dir::new("realize");
    let inv = d.file("inv.txt", "gen 1 log 2 1\ngen 2 log 3 unattained\n");
    let (code, out, _) = run(&["realize", &inv]);
    assert_eq!(code, 0, "{out}");
    let parsed = shiftclass_core::doc::parse_presentations(&out).unwrap();
    assert_eq!(shiftclass_core::doc::write_presentations(&parsed), out.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect::<String>());
    let real = d.file("real.txt", &out);
    let (code, out, _) = run(&["compare", &real, &inv]);
    assert_eq!((code, out.as_str()), (0, "isomorphic\n"));
}

#[test]
fn output_is_deterministic() {
    let d = Dir::new("det");
    let f = d.file("two.txt", TWO_TO_ONE);
    let r = d.file("rel.txt", "rel x0 y0\nrel x1 y1\n");
    let first = run(&["fiberprod", &f, &r, "2"]);
    let second = run(&["fiberprod", &f, &r, "2"]);
    assert_eq!(first, second);
}

#[test]
fn bowen_verdicts() {
    let d = Dir::new("bowen");
    let f = d.file("two.txt", TWO_TO_ONE);
    let (code, out, _) = run(&["bowen", &f]);
    assert_eq!(code, 0);
    assert!(out.contains("rel=x0,y0\n") && out.contains("rel=x1,y1\n"));
    let r = d.file("rel.txt", "rel x0 y0\n");
    let (code, out, _) = run(&["bowen", &f, &r]);
    assert_eq!(code, 1);
    assert!(out.contains("failure=unrelated-pair"));
    let r = d.file("bad.txt", "rel x0 y1\nrel x0 y0\nrel x1 y1\n");
    let (code, out, _) = run(&["bowen", &f, &r]);
    assert_eq!(code, 1);
    assert!(out.contains("failure=unequal-labels"));
}

#[test]
fn fiberprod_quotient_reparses() {
    let d = Dir::new("fp");
    let f = d.file("two.txt", TWO_TO_ONE);
    let r = d.file("rel.txt", "rel x0 y0\nrel x1 y1\n");
    let (code, out, _) = run(&["fiberprod", &f, &r, "2"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("# verdict=pass"));
    let q = shiftclass_core::doc::parse_presentation(&out).unwrap();
    match q {
        shiftclass_core::ShiftPresentation::FiniteGraph(g) => {
            assert_eq!(g.vertex_count(), 2);
            assert_eq!(g.edge_count(), 4);
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn pathology_report_only() {
    let d = Dir::new("path");
    let y = d.file("y.txt", "words\nword 0\nword 1\n");
    let (code, out, _) = run(&["pathology", &y, "--epsilon", "0.3", "--depth", "3", "--no-graph"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("# verdict=pass"));
    assert!(out.lines().all(|l| l.starts_with('#')));
    let (code, _, err) = run(&["pathology", &y, "--epsilon", "0.3", "--depth", "3", "--m", "5,6,8"]);
    assert_eq!(code, 64, "{err}");
}

#[test]
fn exit_codes_for_errors() {
    let d = Dir::new("err");
    let bad = d.file("bad.txt", "graph\nedge a\n");
    let (code, _, err) = run(&["analyze", &bad]);
    assert_eq!(code, 65);
    assert!(err.contains("line 2"), "{err}");
    let (code, _, _) = run(&["analyze", "/nonexistent/shiftclass.txt"]);
    assert_eq!(code, 66);
    let (code, _, _) = run(&["frobnicate"]);
    assert_eq!(code, 64);
    let (code, _, _) = run(&["--help"]);
    assert_eq!(code, 0);
    // A target above the image entropy violates the embedding precondition.
    let f = d.file("full2.txt", "graph\nedge a a\nedge a b\nedge b a\nedge b b\nlabel a 0\nlabel b 1\n");
    let (code, _, _) = run(&["embed", &f, "--entropy", "log 3"]);
    assert_eq!(code, 65);
    // Overlapping wide intervals cannot be ordered.
    let a = d.file("a.txt", "gen 1 0.5 0.7 1\n");
    let b = d.file("b.txt", "gen 1 0.6 0.8 1\n");
    let (code, _, _) = run(&["compare", &a, &b]);
    assert_eq!(code, 2);
}
