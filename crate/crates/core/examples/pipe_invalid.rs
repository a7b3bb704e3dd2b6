use warpcheck::pipeline::{decide_str, DecideOptions, Verdict};

fn main() {
    let cases = [
        ("id <= x", false), ("id <= bot", false), ("x y == y x", false),
        ("x & y == x | y", false), ("id <= x y x^l | y^l", false),
        ("id <= x \\ x", true), ("id <= x / x", true), ("top == id / bot", true),
        ("x <= x y | y x", false), ("x y z == z y x", false),
        ("x^l^r == x", true), ("x^o <= x^o^o", true),
    ];
    for (src, expect_valid) in cases {
        let t0 = std::time::Instant::now();
        match decide_str(src, &DecideOptions::default()) {
            Ok(d) => {
                let ok = d.verdict.is_valid() == expect_valid;
                let tag = if ok { "OK  " } else { "FAIL" };
                match &d.verdict {
                    Verdict::Valid => println!("{tag} {src} -> Valid ({:?})", t0.elapsed()),
                    Verdict::Invalid(ce) => println!("{tag} {src} -> Invalid at ({ce}) ({:?})", t0.elapsed()),
                }
                if !ok { std::process::exit(1) }
            }
            Err(e) => { println!("ERR  {src}: {e}"); std::process::exit(1) }
        }
    }
}
