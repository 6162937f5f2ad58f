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
        let _k = rng.gen_range(1..len);
        let _split = rng.gen_range(1..len);
        if case == 105 {
            for f in &mats {
                let lo = f.lo_parts();
                println!(
                    "F {} {} {} {} {} {} {} {} {}",
                    f.e11.to_bits(), f.e12.to_bits(), f.e21.to_bits(), f.e22.to_bits(),
                    lo[0].to_bits(), lo[1].to_bits(), lo[2].to_bits(), lo[3].to_bits(),
                    f.log_scale.to_bits()
                );
            }
            let mut acc = mats[0];
            for f in mats.iter().skip(1) {
                acc = acc.mul(f);
                let lo = acc.lo_parts();
                println!(
                    "P {} {} {} {} {} {} {} {} {}",
                    acc.e11.to_bits(), acc.e12.to_bits(), acc.e21.to_bits(), acc.e22.to_bits(),
                    lo[0].to_bits(), lo[1].to_bits(), lo[2].to_bits(), lo[3].to_bits(),
                    acc.log_scale.to_bits()
                );
            }
        }
    }
}
