use warpcheck::pipeline::{decide_str, DecideOptions, Verdict};

fn check(src: &str, expect_valid: bool) {
    let opts = DecideOptions::default();
    let t0 = std::time::Instant::now();
    match decide_str(src, &opts) {
        Ok(d) => {
            let ok = d.verdict.is_valid() == expect_valid;
            let tag = if ok { "OK  " } else { "FAIL" };
            match &d.verdict {
                Verdict::Valid => println!("{tag} {src} -> Valid ({} goals, {:?})", d.goals, t0.elapsed()),
                Verdict::Invalid(ce) => println!("{tag} {src} -> Invalid at ({ce}) ({} goals, {:?})", d.goals, t0.elapsed()),
            }
            if !ok { std::process::exit(1); }
        }
        Err(e) => { println!("ERR  {src}: {e}"); std::process::exit(1); }
    }
}

fn main() {
    // Lemma 2, all eight
    check("x \\ (y & z) == (x \\ y) & (x \\ z)", true);
    check("(y & z) \\ x == (y \\ x) | (z \\ x)", true);
    check("x \\ (y | z) == (x \\ y) | (x \\ z)", true);
    check("(y | z) \\ x == (y \\ x) & (z \\ x)", true);
    check("(y & z) / x == (y / x) & (z / x)", true);
    check("x / (y & z) == (x / y) | (x / z)", true);
    check("(y | z) / x == (y / x) | (z / x)", true);
    check("x / (y | z) == (x / y) & (x / z)", true);
    // Lemma 4
    check("x \\ y == x^r y | (top x)^r | y^o", true);
    check("y / x == y x^l | (x^l)^o", true);
    // quasi-operator laws
    check("x (y | z) w == x y w | x z w", true);
    check("x (y & z) w == x y w & x z w", true);
    // monoid laws
    check("(x y) z == x (y z)", true);
    check("x id == x", true);
    check("id x == x", true);
}
