//! Label coercion sequences: normalization, composition, stamping and precision.

use gradual_ifc::coercion::{enumerate, Seq};
use gradual_ifc::lattice::Level;
use gradual_ifc::pc::{LabelExpr, Pc};

fn seq(s: &str) -> Seq {
    s.parse().expect("sequence")
}

fn main() {
    for s in ["id(low);low!;high?p1", "id(low);up;high!;low?p2", "id(high);high!;high?p3;high!"] {
        let c = seq(s);
        let (nf, steps) = c.normalize_counted();
        println!("{c}  ~>  {nf}  ({steps} steps)");
        for (rule, next) in c.steps() {
            println!("    {rule:?}: {next}");
        }
    }

    let c = seq("id(low);low!");
    let d = seq("id(*);high?p7");
    let cd = c.compose(&d).normalize_counted().0;
    println!("\n{c} ; {d} = {cd}, security {}", cd.security());

    let up = seq("id(low);up");
    println!("stamp  {up} by high = {}", up.stamp(Level::High));
    println!("stamp! {up} by high = {}", up.stamp_bang(Level::High));

    let lo = seq("id(low);low!");
    let fail = seq("bot(p1,low,low)");
    println!("\n{lo} ⊑ {fail}: {}", lo.precise_leq(&fail));
    println!("{fail} ⊑ {lo}: {}", fail.precise_leq(&lo));

    let pc = LabelExpr::Cast(Box::new(Pc::lit(Level::High).stamp_bang(Level::High).to_expr()), seq("id(*);low?p9"));
    match pc.normalize() {
        Ok(v) => println!("\npc {pc} normalizes to {v}"),
        Err(p) => println!("\npc {pc} fails with blame {p}"),
    }

    let all = enumerate(4);
    let normal = all.iter().filter(|s| s.is_normal()).count();
    println!("\n{} sequences with up to 4 coercions, {normal} in normal form", all.len());
}
