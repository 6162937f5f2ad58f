use rand::Rng;
use teichlab::*;

fn main() {
    let mut rng = rng::stream(101, 0);
    for case in 0..=105u64 {
        let len = rng.gen_range(2..=100usize);
        let factors: Vec<(GeneratorKind, f64)> = (0..len)
            .map(|_| {
                let kind = match rng.gen_range(0..3u8) {
                    0 => GeneratorKind::Rotation,
                    1 => GeneratorKind::Translation,
                    _ => GeneratorKind::Woffset,
                };
                (kind, rng.gen_range(-50.0..50.0))
            })
            .collect();
        let mats: Vec<Mat2> = factors.iter().map(|&(k, p)| make_generator(k, p).unwrap()).collect();
        let m = compose(&mats).unwrap();
        let k = rng.gen_range(1..len);
        let rotated: Vec<Mat2> = mats[k..].iter().chain(&mats[..k]).cloned().collect();
        let m_rot = compose(&rotated).unwrap();
        let _split = rng.gen_range(1..len);
        if case == 105 {
            println!("k = {k}");
            for (kind, p) in &factors {
                let tag = match kind { GeneratorKind::Rotation => "R", GeneratorKind::Translation => "T", GeneratorKind::Woffset => "W" };
                println!("{tag} {p:.17e}");
            }
            let t1 = m.trace_signed();
            let t2 = m_rot.trace_signed();
            println!("LOGABS1 {:.17e}", t1.log_abs);
            println!("LOGABS2 {:.17e}", t2.log_abs);
        }
    }
}
