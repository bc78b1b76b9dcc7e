use osteon_core::envelope::*;
use osteon_core::skelmodel::*;
fn main() {
    let envelope = build_envelope(&EnvelopeConfig::default()).unwrap();
    for (ns, nf) in [(2usize, 40usize), (3, 80), (3, 200)] {
        let data = generate_dataset(&envelope, ns, nf, 71, 0.0);
        let (model, stats) = learn_from_dataset(&envelope, &data).unwrap();
        let beta = vec![0.0; model.shape_dims()];
        let placement = model.placement(&beta).unwrap();
        let scales = bone_scale_factors(&placement.fk.joints, &placement.segment_ends,
            &model.skeleton.rest_joints, &model.skeleton.rest_ends).unwrap();
        let worst = scales.iter().enumerate().map(|(g, s)| {
            let ax = osteon_core::plan::PARTS[g].long_axis;
            (g, s[ax])
        }).max_by(|a, b| (a.1 - 1.0).abs().partial_cmp(&(b.1 - 1.0).abs()).unwrap()).unwrap();
        let rms_max = stats.regressor_rms.iter().cloned().fold(0.0, f64::max);
        println!("{ns}x{nf}: worst scale bone {} = {:.4}, max train rms {:.2e}", worst.0, worst.1, rms_max);
    }
}
