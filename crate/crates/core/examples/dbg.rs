use linear_bohm::syntax::{elaborate, parse_program, apply_terms};
use linear_bohm::{rewrite, types};

fn main() {
    let src = "fun True x y z = z x y;\
               fun False x y z = z y x;\
               fun I x = x;\
               fun u_2 x1 x2 = x1 (x2 I);\
               fun proj_1 x1 x2 = x2 I I u_2 x1;\
               fun Not_HM x = x False True proj_1;";
    let prog = elaborate(&parse_program(src).unwrap()).unwrap();
    let term = apply_terms(prog.get("Not_HM").unwrap(), &[prog.get("True").unwrap().clone()]);
    let ty = types::principal_type_closed(&term).unwrap();
    println!("PT(term) = {ty}");
    let (_, steps) = rewrite::normalize_traced(&term).unwrap();
    let mut cur = term.clone();
    for s in &steps {
        cur = rewrite::replay(&cur, std::slice::from_ref(s)).unwrap();
        let pt = types::principal_type_closed(&cur);
        match pt {
            Ok(pt) => {
                let inst = types::instance_of(&ty, &pt).is_some();
                println!("{} -> PT {} ; orig-is-instance: {}", s.rule, pt, inst);
                if !inst { break; }
            }
            Err(e) => { println!("{} -> UNTYPABLE {e}", s.rule); break; }
        }
    }
}
