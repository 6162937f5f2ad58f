use rand::Rng;
use teichlab::*;

fn tree(mats: &[Mat2]) -> Mat2 {
    if mats.len() == 1 {
        return mats[0];
    }
    let mid = mats.len() / 2;
    tree(&mats[..mid]).mul(&tree(&mats[mid..]))
}

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
        let _rot: Vec<Mat2> = mats[k..].iter().chain(&mats[..k]).cloned().collect();
        let _split = rng.gen_range(1..len);
        if case == 105 {
            let t = tree(&mats);
            let (t1, t2) = (m.trace_signed(), t.trace_signed());
            println!("linear   log_abs {:.17e}", t1.log_abs);
            println!("tree     log_abs {:.17e}", t2.log_abs);
            println!("diff {:.3e}", (t1.log_abs - t2.log_abs).abs());
            // per-step: track unimodular residual and min |entry| along the fold
            let mut acc = mats[0];
            let mut worst = (0usize, 0.0f64);
            for (i, f) in mats.iter().enumerate().skip(1) {
                let prev = acc;
                acc = acc.mul(f);
                let mx = acc.e11.abs().max(acc.e12.abs()).max(acc.e21.abs()).max(acc.e22.abs());
                // cancellation depth: product magnitudes vs result magnitude
                let pm = prev.e11.abs().max(prev.e12.abs()).max(prev.e21.abs()).max(prev.e22.abs());
                let fm = f.e11.abs().max(f.e12.abs()).max(f.e21.abs()).max(f.e22.abs());
                let depth = mx / (pm * fm);
                if depth < worst.1 || i == 1 {
                    worst = (i, depth);
                }
            }
            println!("deepest block cancellation at step {} depth {:.3e}", worst.0, worst.1);
        }
    }
}
