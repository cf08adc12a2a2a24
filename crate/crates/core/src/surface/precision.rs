use super::{Expr, ExprKind};
use crate::lattice::Label;

/// Term precision `M ⊑ M'`: same shape, with each annotation of `M` no more precise than in `M'`.
pub fn precise_leq(m: &Expr, n: &Expr) -> bool {
    use ExprKind as K;
    let kids = || m.children().iter().zip(n.children()).all(|(a, b)| precise_leq(a, b));
    match (&m.kind, &n.kind) {
        (K::Var(x), K::Var(y)) => x == y,
        (K::Const(k1, l1), K::Const(k2, l2)) => k1 == k2 && l1 == l2,
        (K::Lam { pc: g1, var: x, ann: a1, level: l1, .. }, K::Lam { pc: g2, var: y, ann: a2, level: l2, .. }) => {
            x == y && l1 == l2 && g1.precise_leq(*g2) && a1.precise_leq(a2) && kids()
        }
        (K::Let { var: x, .. }, K::Let { var: y, .. }) => x == y && kids(),
        (K::Ref { level: l1, .. }, K::Ref { level: l2, .. }) => l1 == l2 && kids(),
        (K::Ann { ty: a, .. }, K::Ann { ty: b, .. }) => a.precise_leq(b) && kids(),
        (K::App { .. }, K::App { .. })
        | (K::If { .. }, K::If { .. })
        | (K::Deref { .. }, K::Deref { .. })
        | (K::Assign { .. }, K::Assign { .. }) => kids(),
        _ => false,
    }
}

/// Number of label positions in type annotations and function PC labels.
pub fn label_sites(e: &Expr) -> usize {
    let mut n = 0;
    e.visit(&mut |x| match &x.kind {
        ExprKind::Lam { ann, .. } => n += 1 + ann.label_count(),
        ExprKind::Ann { ty, .. } => n += ty.label_count(),
        _ => {}
    });
    n
}

/// Replaces the label at annotation site `site` (pre-order, as counted by [`label_sites`]) by `*`.
pub fn erode_site(e: &Expr, site: usize) -> Expr {
    let mut out = e.clone();
    let mut i = site;
    erode_in_place(&mut out, &mut i);
    out
}

fn erode_in_place(e: &mut Expr, i: &mut usize) -> bool {
    match &mut e.kind {
        ExprKind::Lam { pc, ann, .. } => {
            if *i == 0 {
                *pc = Label::Star;
                return true;
            }
            *i -= 1;
            let n = ann.label_count();
            if *i < n {
                *ann = ann.replace_label(*i, Label::Star);
                return true;
            }
            *i -= n;
        }
        ExprKind::Ann { ty, .. } => {
            let n = ty.label_count();
            if *i < n {
                *ty = ty.replace_label(*i, Label::Star);
                return true;
            }
            *i -= n;
        }
        _ => {}
    }
    e.children_mut().into_iter().any(|c| erode_in_place(c, i))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{parse_program, ParseOptions};

    fn p(s: &str) -> Expr {
        parse_program(s, ParseOptions::default()).unwrap()
    }

    #[test]
    fn erosion_is_less_precise() {
        let e = p("let f = lam [low] (x : Bool@high) . x in (f true : Bool@high)");
        assert_eq!(label_sites(&e), 3);
        for s in 0..3 {
            let d = erode_site(&e, s);
            assert_ne!(d, e);
            assert!(precise_leq(&d, &e));
            assert!(!precise_leq(&e, &d));
        }
        assert_eq!(
            erode_site(&e, 0).to_string(),
            "let f = lam [*] (x : Bool@high) . x @low in (f true@low : Bool@high)"
        );
    }
}
