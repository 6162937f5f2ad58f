use rand::Rng;
use teichlab::*;

fn main() {
    let mut rng = rng::stream(101, 0);
    for case in 0..=105u64 {
        let len = rng.gen_range(2..=100usize);
        let mats: Vec<Mat2> = (0..len)
            .map(|_| {
                let kind = match rng.gen_range(0..3u8) {
                    0 => GeneratorKind::Rotation,
                    1 => GeneratorKind::Translation,
                    _ => GeneratorKind::Woffset,
                };
                make_generator(kind, rng.gen_range(-50.0..50.0)).unwrap()
            })
            .collect();
        let m = compose(&mats).unwrap();
        let k = rng.gen_range(1..len);
        let rotated: Vec<Mat2> = mats[k..].iter().chain(&mats[..k]).cloned().collect();
        let m_rot = compose(&rotated).unwrap();
        let _split = rng.gen_range(1..len);
        if case == 105 {
            println!("k = {k}");
            for f in &mats {
                // hex-exact f64 entries + log scale
                println!(
                    "M {} {} {} {} {}",
                    f.e11.to_bits(), f.e12.to_bits(), f.e21.to_bits(), f.e22.to_bits(),
                    f.log_scale.to_bits()
                );
            }
            println!("LOGABS1 {}", m.trace_signed().log_abs.to_bits());
            println!("LOGABS2 {}", m_rot.trace_signed().log_abs.to_bits());
        }
    }
}
