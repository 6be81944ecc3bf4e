mod common;

use omp_core::eval::score;
use omp_core::ingest::{
    fill_missing, parse, split, synthesize, test_start, AmplitudeProfile, AnomalySpec, Format, Shape, SplitProtocol,
    SuiteFamily, SynthSpec,
};
use omp_core::{DecidedBy, Detector, EngineConfig, Mode};

fn alarms(mode: Mode, values: &[f64]) -> Vec<usize> {
    Detector::run(mode.configure(EngineConfig::hourly()), values)
        .unwrap()
        .iter()
        .filter(|o| o.decision)
        .map(|o| o.timestamp as usize)
        .collect()
}

/// Harmonic daily pattern with one anomaly repeated exactly three days later.
fn repeated_fixture() -> (SynthSpec, usize, usize) {
    let mut spec = SynthSpec::sine(600, 24.0, 2.0);
    spec.shape = Shape::Harmonic;
    spec.offset = 40.0;
    spec.noise_sigma = 0.04;
    spec.seed = 17;
    let (first, second) = (300, 372);
    spec.anomalies.push(AnomalySpec::spike(first, -1.6));
    spec.anomalies.push(AnomalySpec::spike(second, -1.6));
    (spec, first, second)
}

#[test]
fn repeated_anomaly_needs_the_spectral_fallback() {
    let (spec, first, second) = repeated_fixture();
    let s = synthesize(&spec).unwrap();

    let ds_only = alarms(Mode::MpStarCacheDs, &s.values);
    assert!(ds_only.contains(&first));
    assert!(!ds_only.contains(&second), "DS alone sees the copy as normal");

    let outs = Detector::run(EngineConfig::hourly(), &s.values).unwrap();
    assert!(outs[first].decision);
    let o = outs[second];
    assert!(o.decision);
    assert_eq!(o.decided_by, DecidedBy::Sr);
    assert_eq!(o.mp_index, Some((first + 1 - 48) as u64));
}

/// Two low days, then one day ten times larger; spikes only in low days.
fn stepped_amplitude_fixture() -> (Vec<f64>, Vec<bool>) {
    let mut spec = SynthSpec::sine(720, 24.0, 1.0);
    spec.amplitude = AmplitudeProfile::Alternating {
        low: 1.0,
        high: 10.0,
        low_span: 48,
        high_span: 24,
        phase: 0,
    };
    spec.noise_sigma = 0.02;
    spec.seed = 3;
    for (p, m) in [(250, 0.8), (395, -0.7), (610, 0.9)] {
        assert!(p % 72 < 48, "spike must sit in a low day");
        spec.anomalies.push(AnomalySpec::spike(p, m));
    }
    let s = synthesize(&spec).unwrap();
    (s.values, s.labels)
}

#[test]
fn significance_finds_small_anomalies_next_to_large_amplitude() {
    let (values, labels) = stepped_amplitude_fixture();
    let truth: Vec<usize> = (0..labels.len()).filter(|&i| labels[i]).collect();
    assert_eq!(alarms(Mode::MpStarCacheDs, &values), truth);
    assert_eq!(alarms(Mode::Omp, &values), truth);

    // The raw profile is dominated by the large days, so its first
    // difference misses the small spikes.
    let f1 = |mode| {
        let outs = Detector::run(Mode::configure(mode, EngineConfig::hourly()), &values).unwrap();
        let preds: Vec<bool> = outs.iter().map(|o| o.decision).collect();
        score(&labels, &preds, 3).unwrap().f1
    };
    assert_eq!(f1(Mode::MpStarCacheDs), 1.0);
    assert!(f1(Mode::MpStarCache) < 1.0);
}

#[test]
fn profile_step_localizes_a_spike() {
    let mut spec = SynthSpec::sine(480, 24.0, 1.0);
    spec.noise_sigma = 0.05;
    spec.seed = 8;
    spec.anomalies.push(AnomalySpec::spike(330, 4.0));
    let series = synthesize(&spec).unwrap().values;
    let outs = Detector::run(Mode::MpStar.configure(EngineConfig::hourly()), &series).unwrap();
    let profile: Vec<f64> = outs.iter().filter_map(|o| o.mp).collect();
    let first = outs.iter().position(|o| o.mp.is_some()).unwrap();
    let diffs = omp_core::engine::mp_diff_score(&profile);
    let (argmax, _) = diffs
        .iter()
        .enumerate()
        .fold((0, f64::MIN), |best, (i, &d)| if d > best.1 { (i, d) } else { best });
    assert_eq!(argmax + first, 330);
    assert!(alarms(Mode::MpStar, &series).contains(&330));
}

#[test]
fn suite_families_are_detected() {
    for family in SuiteFamily::ALL {
        let s = synthesize(&family.spec(2024)).unwrap();
        let outs = Detector::run(EngineConfig::hourly(), &s.values).unwrap();
        let preds: Vec<bool> = outs.iter().map(|o| o.decision).collect();
        let r = score(&s.labels, &preds, 3).unwrap();
        assert!(r.recall > 0.6 && r.precision > 0.6, "{}: {r:?}", family.name());
    }
}

#[test]
fn snapshot_file_resumes_a_stream() {
    let s = synthesize(&SuiteFamily::Periodic.spec(9)).unwrap();
    let straight = Detector::run(EngineConfig::hourly(), &s.values).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("detector.json");
    let mut det = Detector::new(EngineConfig::hourly()).unwrap();
    for &x in &s.values[..400] {
        det.ingest(x).unwrap();
    }
    det.write_snapshot(std::fs::File::create(&path).unwrap()).unwrap();
    drop(det);

    let mut det = Detector::read_snapshot(std::fs::File::open(&path).unwrap()).unwrap();
    for (i, &x) in s.values.iter().enumerate().skip(400) {
        assert_eq!(det.ingest(x).unwrap(), straight[i]);
    }
}

#[test]
fn file_with_gaps_runs_end_to_end() {
    let mut spec = SynthSpec::sine(500, 24.0, 3.0);
    spec.anomalies.push(AnomalySpec::spike(420, 5.0));
    let s = synthesize(&spec).unwrap();

    // Drop a few rows and blank a few values before writing.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("series.csv");
    let mut text = String::from("timestamp,value,label\n");
    for i in 0..s.len() {
        if i % 53 == 7 {
            continue;
        }
        let value = if i % 71 == 5 {
            String::new()
        } else {
            s.values[i].to_string()
        };
        text += &format!("{},{},{}\n", s.timestamps[i], value, u8::from(s.labels[i]));
    }
    std::fs::write(&path, text).unwrap();

    let parsed = parse(&path, Format::Csv).unwrap();
    assert!(parsed.len() < s.len());
    let filled = fill_missing(&parsed, 24).unwrap();
    assert_eq!(filled.timestamps, s.timestamps);
    for i in 0..s.len() {
        // Interpolating a sine between neighbours is close but not exact.
        assert!((filled.values[i] - s.values[i]).abs() < 0.2, "slot {i}");
    }

    let outs = Detector::run(EngineConfig::hourly(), &filled.values).unwrap();
    let start = test_start(filled.len(), SplitProtocol::Halves);
    let (_, test) = split(&filled, SplitProtocol::Halves);
    let preds: Vec<bool> = outs[start..].iter().map(|o| o.decision).collect();
    let r = score(&test.labels, &preds, 3).unwrap();
    assert_eq!((r.tp, r.fn_), (1, 0));
}
