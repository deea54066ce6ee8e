//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

mod oracles;

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config as PropConfig, TestCaseError, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use vlc_core::document::SceneDocument;
use vlc_core::fixtures::{self, Fixture};
use vlc_core::geometry::{CorridorSegment, NavPath, Obstacle, Point2, Polygon, Polyline, Rect, RigidTransform, Scene};
use vlc_core::manipulation::{manipulate, manipulate_segment, replay, ChangeStep, ConstraintSet, ManipulationRequest, Morphology};
use vlc_core::metrics::{
    compute_profile, path_axes, path_band, segment_axes, segment_bands, vantage_points, visibility_metric, AttributeProfile,
    MetricParams, VisibilityMode,
};
use vlc_core::scale::{aggregate, classify, identify, preference_score, Attribute, ComplexityClass, ScaleConfig};

type Outcome = Result<String, String>;

fn nav(f: &Fixture, cfg: &ScaleConfig) -> NavPath {
    NavPath::new(f.path.clone(), &f.scene, cfg.turn_threshold, None).unwrap()
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

// Metric oracle equivalence.

fn oracle_equivalence() -> Outcome {
    let t0 = Instant::now();
    let cfg = ScaleConfig::default();
    let params = cfg.metric_params();
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    for f in fixtures::all() {
        let path = nav(&f, &cfg);
        let profile = compute_profile(&f.scene, &path, &params).map_err(|e| e.to_string())?;

        let grid = oracles::Grid::new(&f.scene, 0.05);
        let end = path.line.last();
        let samples = vantage_points(&path, params.sample_spacing);
        let seen = samples.iter().filter(|&&(_, p)| grid.clear(p, end)).count();
        let vis = seen as f64 / samples.len() as f64;
        let dv = (vis - profile.visibility.visible_fraction).abs();
        check(dv <= 0.02, || format!("{}: visibility {} vs grid {vis}", f.name, profile.visibility.visible_fraction))?;
        worst.0 = worst.0.max(dv);
        if samples.len() <= 40 {
            let remaining = visibility_metric(&f.scene, &path, params.sample_spacing, VisibilityMode::RemainingPath)
                .map_err(|e| e.to_string())?;
            let (mut clear, mut total) = (0, 0);
            for (i, &(_, p)) in samples.iter().enumerate() {
                for &(_, q) in &samples[i + 1..] {
                    total += 1;
                    clear += usize::from(grid.clear(p, q));
                }
            }
            let frac = if total == 0 { 1.0 } else { clear as f64 / total as f64 };
            let d = (frac - remaining.visible_fraction).abs();
            check(d <= 0.02, || format!("{}: remaining-path visibility {} vs grid {frac}", f.name, remaining.visible_fraction))?;
            worst.0 = worst.0.max(d);
        }

        let bands = segment_bands(&f.scene, &path).map_err(|e| e.to_string())?;
        let (mut cov, mut tot) = (0usize, 0usize);
        for (k, band) in bands.iter().enumerate() {
            let (c, t) = oracles::raster_coverage(&f.scene, band, 0.02);
            let d = (c as f64 / t as f64 - profile.clutter.per_segment_fractions[k]).abs();
            check(d <= 0.01, || format!("{} segment {k}: clutter off by {d}", f.name))?;
            worst.1 = worst.1.max(d);
            cov += c;
            tot += t;
        }
        let dc = (cov as f64 / tot as f64 - profile.clutter.coverage_fraction).abs();
        check(dc <= 0.01, || format!("{}: clutter off by {dc}", f.name))?;
        worst.1 = worst.1.max(dc);

        let whole = path_band(&bands);
        let axes = path_axes(&f.scene, &path, &bands, &whole);
        let sym = oracles::raster_symmetry(&f.scene, &whole, &axes, 0.02);
        let ds = (sym - profile.symmetry.best_score).abs();
        check(ds <= 0.01, || format!("{}: symmetry {} vs raster {sym}", f.name, profile.symmetry.best_score))?;
        worst.2 = worst.2.max(ds);
        for (k, band) in bands.iter().enumerate() {
            let axes = segment_axes(&f.scene, &path, k, band);
            let s = oracles::raster_symmetry(&f.scene, band, &axes, 0.02);
            let d = (s - profile.symmetry.per_segment_scores[k]).abs();
            check(d <= 0.01, || format!("{} segment {k}: symmetry {} vs raster {s}", f.name, profile.symmetry.per_segment_scores[k]))?;
            worst.2 = worst.2.max(d);
        }
    }
    let elapsed = t0.elapsed();
    check(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "max |diff| visibility {:.4} (tol 0.02), clutter {:.4} (tol 0.01), symmetry {:.4} (tol 0.01) in {:.1}s",
        worst.0,
        worst.1,
        worst.2,
        elapsed.as_secs_f64()
    ))
}

// Invariance and monotonicity.

fn metric_values(p: &AttributeProfile) -> Vec<f64> {
    let mut v = vec![
        p.rotation.accumulated_degrees,
        p.size.mean_width,
        p.size.mean_height,
        p.visibility.visible_fraction,
        p.symmetry.best_score,
        p.clutter.coverage_fraction,
        p.order.ordered_fraction,
    ];
    v.extend(&p.rotation.per_segment_degrees);
    v.extend(&p.visibility.per_segment_fractions);
    v.extend(&p.symmetry.per_segment_scores);
    v.extend(&p.clutter.per_segment_fractions);
    v.extend(&p.order.per_segment_fractions);
    v
}

fn invariance() -> Outcome {
    let cfg = ScaleConfig::default();
    let params = cfg.metric_params();
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut worst = 0.0f64;
    for f in fixtures::all() {
        let base = metric_values(&compute_profile(&f.scene, &nav(&f, &cfg), &params).map_err(|e| e.to_string())?);
        for k in 0..20 {
            let t = RigidTransform::new(
                rng.gen_range(0.0..std::f64::consts::TAU),
                Point2::new(rng.gen_range(-100.0..100.0), rng.gen_range(-100.0..100.0)),
                false,
            );
            let scene = t.apply_scene(&f.scene);
            let line = t.apply_polyline(&f.path).map_err(|e| e.to_string())?;
            let path = NavPath::new(line, &scene, cfg.turn_threshold, None).map_err(|e| e.to_string())?;
            let moved = metric_values(&compute_profile(&scene, &path, &params).map_err(|e| e.to_string())?);
            check(moved.len() == base.len(), || format!("{} transform {k}: segmentation changed", f.name))?;
            for (i, (a, b)) in base.iter().zip(&moved).enumerate() {
                let d = (a - b).abs();
                worst = worst.max(d);
                check(d <= 1e-6, || format!("{} transform {k}: value {i} {a} -> {b}", f.name))?;
            }
        }
    }

    let cases = monotonicity()?;
    Ok(format!("5 fixtures x 20 transforms, max drift {worst:.2e} (tol 1e-6); monotonicity held on {cases} random scenes"))
}

type ObstacleSpec = (f64, f64, f64, f64, f64);

fn obstacle_spec() -> impl Strategy<Value = ObstacleSpec> {
    // (chainage fraction, lateral fraction, length, depth, rotation)
    (0.0..1.0f64, -1.2..1.2f64, 0.2..1.6f64, 0.2..1.2f64, 0.0..std::f64::consts::PI)
}

fn random_scene(bend: f64, legs: (f64, f64), width: f64, obstacles: &[ObstacleSpec]) -> (Scene, NavPath) {
    let a = Point2::new(0.0, 0.0);
    let b = Point2::new(legs.0, 0.0);
    let c = Point2::new(legs.0 + legs.1 * bend.cos(), legs.1 * bend.sin());
    let line = Polyline::new(vec![a, b, c]).unwrap();
    let pad = width + 4.0;
    let bounds = Rect::new(
        Point2::new(a.x.min(c.x) - pad, a.y.min(c.y).min(0.0) - pad),
        Point2::new(b.x.max(c.x) + pad, a.y.max(c.y).max(0.0) + pad),
    )
    .unwrap();
    let mut scene = Scene::new(bounds)
        .with_corridor(CorridorSegment::new("c0", a, b, width, 3.0).unwrap())
        .with_corridor(CorridorSegment::new("c1", b, c, width, 3.0).unwrap());
    for (i, o) in obstacles.iter().enumerate() {
        scene.obstacles.push(place(&line, width, o, &format!("o{i}")));
    }
    let path = NavPath::new(line, &scene, 15.0, None).unwrap();
    (scene, path)
}

fn place(line: &Polyline, width: f64, &(s, lat, len, depth, rot): &ObstacleSpec, id: &str) -> Obstacle {
    let at = s * line.length();
    let here = line.point_at(at);
    let ahead = line.point_at((at + 0.05).min(line.length()));
    let behind = line.point_at((at - 0.05).max(0.0));
    let t = Point2::new(ahead.x - behind.x, ahead.y - behind.y);
    let n = t.norm();
    let (tx, ty) = (t.x / n, t.y / n);
    let c = Point2::new(here.x - ty * lat * 0.5 * width, here.y + tx * lat * 0.5 * width);
    let (cr, sr) = (rot.cos(), rot.sin());
    let ring = [(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)]
        .iter()
        .map(|&(u, v)| {
            let (x, y) = (u * len, v * depth);
            Point2::new(c.x + cr * x - sr * y, c.y + sr * x + cr * y)
        })
        .collect();
    Obstacle::new(id, Polygon::new(ring).unwrap(), 1.0).unwrap()
}

fn monotonicity() -> Result<u32, String> {
    let cases = 200;
    let mut runner = TestRunner::new(PropConfig { cases, failure_persistence: None, ..PropConfig::default() });
    let strategy = (
        -1.2..1.2f64,
        (4.0..14.0f64, 4.0..14.0f64),
        1.5..5.0f64,
        prop::collection::vec(obstacle_spec(), 0..10),
        obstacle_spec(),
    );
    let params = MetricParams::default();
    runner
        .run(&strategy, |(bend, legs, width, obstacles, extra)| {
            let (scene, path) = random_scene(bend, legs, width, &obstacles);
            let before = compute_profile(&scene, &path, &params).map_err(|e| TestCaseError::fail(e.to_string()))?;
            let mut more = scene.clone();
            more.obstacles.push(place(&path.line, width, &extra, "extra"));
            let after = compute_profile(&more, &path, &params).map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert!(after.clutter.coverage_fraction >= before.clutter.coverage_fraction - 1e-9);
            prop_assert!(after.visibility.visible_fraction <= before.visibility.visible_fraction + 1e-9);
            let rem = |s: &Scene| visibility_metric(s, &path, 1.0, VisibilityMode::RemainingPath).map(|m| m.visible_fraction);
            let (r0, r1) = (rem(&scene).unwrap(), rem(&more).unwrap());
            prop_assert!(r1 <= r0 + 1e-9);
            Ok(())
        })
        .map_err(|e| format!("monotonicity: {e}"))?;
    Ok(cases)
}

// Scale.

fn scale_correctness() -> Outcome {
    let cfg = ScaleConfig::default();
    let mut prev = 1u8;
    for i in 0..=1000 {
        let s = f64::from(i) * 0.001;
        let c = classify(s, &cfg).map_err(|e| e.to_string())?.value();
        check(c >= prev, || format!("class drops at score {s}"))?;
        prev = c;
    }
    check(prev == 5, || "sweep never reaches class 5".into())?;
    for k in 1..=5u8 {
        let classes = vec![ComplexityClass::new(k).unwrap(); 6];
        let (mean, class) = aggregate(&classes).map_err(|e| e.to_string())?;
        check(mean == f64::from(k) && class.value() == k, || format!("aggregate of six {k}s gave {mean}/{}", class.value()))?;
    }
    let mut best = (f64::NEG_INFINITY, 0.0);
    for i in 0..=400 {
        let m = 1.0 + f64::from(i) * 0.01;
        let p = preference_score(m).map_err(|e| e.to_string())?;
        if p > best.0 {
            best = (p, m);
        }
    }
    check((best.1 - 3.0).abs() < 1e-9, || format!("preference peaks at {}", best.1))?;
    Ok("monotone over 1001 scores; aggregate(k x 6) = k for k = 1..5; preference argmax 3.00".into())
}

// Scenarios.

fn hard_constraints_hold(f: &Fixture, scene: &Scene, line: &Polyline, cs: &ConstraintSet) -> Result<(), String> {
    let n = vlc_core::manipulation::violations(&Morphology::new(f.scene.clone(), f.path.clone()), &Morphology::new(scene.clone(), line.clone()), cs);
    check(n == 0, || format!("{n} constraint violations"))?;
    check(line.first() == f.path.first() && line.last() == f.path.last(), || "endpoints moved".into())?;
    check(scene.corridors.iter().all(|c| c.width >= cs.min_width && c.width <= cs.max_width), || "width out of range".into())?;
    check(line.vertices().iter().all(|&v| scene.bounds.contains(v)), || "path leaves the bounds".into())?;
    scene.validate().map_err(|e| e.to_string())
}

fn scenario_a() -> Outcome {
    let cfg = ScaleConfig::default();
    let f = fixtures::old_parkland();
    let path = nav(&f, &cfg);
    let before = identify(&f.scene, &path, &cfg).map_err(|e| e.to_string())?;
    check(before.overall_class.value() == 4, || format!("fixture is class {}", before.overall_class.value()))?;
    let req = ManipulationRequest { target_class: 3.0, seed: 42, budget: 5000, ..Default::default() };
    let t0 = Instant::now();
    let r = manipulate(&f.scene, &path, &req, &cfg).map_err(|e| e.to_string())?;
    let elapsed = t0.elapsed();
    let gap = (r.after.aggregate_mean - 3.0).abs();
    check(gap <= 0.25, || format!("aggregate {} after {} evaluations", r.after.aggregate_mean, r.evaluations))?;
    check(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    hard_constraints_hold(&f, &r.scene, &r.path, &req.constraints)?;
    let fresh = identify(&r.scene, &NavPath::new(r.path.clone(), &r.scene, cfg.turn_threshold, None).unwrap(), &cfg)
        .map_err(|e| e.to_string())?;
    check(fresh == r.after, || "embedded report is stale".into())?;
    Ok(format!(
        "class 4 (mean {:.3}) -> mean {:.3}, |diff| {gap:.3} <= 0.25, {} evaluations, {} steps, {:.2}s < 30s, constraints hold",
        before.aggregate_mean,
        r.after.aggregate_mean,
        r.evaluations,
        r.change_log.len(),
        elapsed.as_secs_f64()
    ))
}

fn scenario_b() -> Outcome {
    let cfg = ScaleConfig::default();
    let f = fixtures::new_parkland();
    let path = nav(&f, &cfg);
    let before = identify(&f.scene, &path, &cfg).map_err(|e| e.to_string())?;
    check(before.overall_class.value() == 2, || format!("fixture is class {}", before.overall_class.value()))?;
    let lobby_before = before.segments[1].class_of(Attribute::Clutter).value();
    let r = manipulate_segment(&f.scene, &path, 1, Attribute::Clutter, 4.0, 3.0, 7, 5000, ConstraintSet::default(), &cfg)
        .map_err(|e| e.to_string())?;
    let lobby = r.after.segments[1].class_of(Attribute::Clutter).value();
    check(lobby == 4, || format!("lobby clutter class {lobby}"))?;
    let mean = r.after.aggregate_mean;
    check((2.75..=3.25).contains(&mean), || format!("overall aggregate {mean}"))?;
    hard_constraints_hold(&f, &r.scene, &r.path, &ConstraintSet::default())?;
    Ok(format!(
        "lobby clutter class {lobby_before} -> {lobby}, overall class {} (mean {:.3}) -> class {} (mean {mean:.3}) in [2.75, 3.25]",
        before.overall_class.value(),
        before.aggregate_mean,
        r.after.overall_class.value()
    ))
}

// Determinism through the CLI.

fn cli(args: &[&str]) -> Result<(), String> {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let mut argv = vec!["vlc"];
    argv.extend_from_slice(args);
    match vlc_cli::run(argv, &mut out, &mut err) {
        0 => Ok(()),
        code => Err(format!("vlc {} exited {code}: {}", args.join(" "), String::from_utf8_lossy(&err))),
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = dir.path();
    let scene_file = root.join("old_parkland.json");
    std::fs::write(&scene_file, fixtures::old_parkland().document().to_bytes()).map_err(|e| e.to_string())?;
    let cfg = root.join("config.json");
    cli(&["config", "init", "--out", s(&cfg)])?;
    let runs: Vec<PathBuf> = (0..2).map(|i| root.join(format!("run{i}"))).collect();
    for out in &runs {
        cli(&["manipulate", s(&scene_file), "--config", s(&cfg), "--target", "3", "--seed", "42", "--out", s(out)])?;
        cli(&["identify", s(&out.join("scene.json")), "--config", s(&cfg), "--out", s(&out.join("report.json"))])?;
    }
    let files = ["scene.json", "result.json", "report.json", "before.svg", "after.svg"];
    for name in files {
        let a = std::fs::read(runs[0].join(name)).map_err(|e| e.to_string())?;
        let b = std::fs::read(runs[1].join(name)).map_err(|e| e.to_string())?;
        check(a == b, || format!("{name} differs between runs"))?;
    }

    let result: Value = serde_json::from_slice(&std::fs::read(runs[0].join("result.json")).unwrap()).unwrap();
    let log: Vec<ChangeStep> = serde_json::from_value(result["result"]["change_log"].clone()).map_err(|e| e.to_string())?;
    let input = SceneDocument::from_slice(&std::fs::read(&scene_file).unwrap()).map_err(|e| e.to_string())?;
    let original = input.path("main").unwrap();
    let (scene, line) = replay(&input.scene, &original.line, &log).map_err(|e| e.to_string())?;
    let replayed = input.with_morphology("main", scene, line).map_err(|e| e.to_string())?;
    let written = std::fs::read(runs[0].join("scene.json")).unwrap();
    check(replayed.to_bytes() == written, || "replayed scene differs from the written scene".into())?;
    Ok(format!(
        "two seeded runs byte-identical across {} files; replay of {} logged steps reproduces scene.json bytewise",
        files.len(),
        log.len()
    ))
}

// Service contract.

async fn call(app: &axum::Router, method: &str, uri: &str, body: Option<Value>) -> (u16, Value) {
    use http_body_util::BodyExt;
    use tower::ServiceExt;
    let req = axum::http::Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or_else(axum::body::Body::empty, |b| axum::body::Body::from(serde_json::to_vec(&b).unwrap())))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status().as_u16();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() })
}

async fn service_contract() -> Outcome {
    let app = vlc_service::router(vlc_service::AppState::new(ScaleConfig::default()));
    let mut passed = 0;
    macro_rules! expect {
        ($cond:expr, $($msg:tt)*) => {{
            check($cond, || format!($($msg)*))?;
            passed += 1;
        }};
    }
    let scene = fixtures::old_parkland().document().to_value();
    let (st, created) = call(&app, "POST", "/api/sessions", Some(json!({ "scene": scene, "path": "main" }))).await;
    expect!(st == 201, "create gave {st}");
    let id = created["session_id"].as_str().unwrap_or_default().to_string();
    let base = format!("/api/sessions/{id}");
    let (st, _) = call(&app, "POST", "/api/sessions", Some(json!({ "scene": "{", "path": "main" }))).await;
    expect!(st == 400, "bad scene gave {st}");
    let (st, _) = call(&app, "POST", "/api/sessions", Some(json!({ "scene": scene, "path": "other" }))).await;
    expect!(st == 422, "unknown path gave {st}");

    let (st, report) = call(&app, "GET", &format!("{base}/report"), None).await;
    expect!(st == 200 && report == created["report"], "report {st} differs from creation");
    let (st, _) = call(&app, "GET", "/api/sessions/missing/report", None).await;
    expect!(st == 404, "bad id gave {st}");
    let (st, _) = call(&app, "POST", &format!("{base}/undo"), None).await;
    expect!(st == 409, "undo at initial state gave {st}");

    let slow = {
        let (app, uri) = (app.clone(), format!("{base}/manipulate"));
        tokio::spawn(async move { call(&app, "POST", &uri, Some(json!({ "target_class": 1, "seed": 3, "budget": 3000 }))).await })
    };
    let deadline = Instant::now() + Duration::from_secs(30);
    while call(&app, "GET", &base, None).await.1["busy"] != true {
        check(Instant::now() < deadline, || "manipulation never started".into())?;
        tokio::time::sleep(Duration::from_millis(5)).await;
    }
    let (st, _) = call(&app, "POST", &format!("{base}/manipulate"), Some(json!({ "target_class": 3 }))).await;
    expect!(st == 409, "concurrent manipulate gave {st}");
    let (_, during) = call(&app, "GET", &format!("{base}/report"), None).await;
    expect!(during == created["report"], "report changed while a run was in flight");
    let (st, _) = slow.await.map_err(|e| e.to_string())?;
    expect!(st == 200, "first manipulate gave {st}");
    let (st, _) = call(&app, "POST", &format!("{base}/undo"), None).await;
    expect!(st == 200, "undo gave {st}");

    let (st, r) = call(&app, "POST", &format!("{base}/manipulate"), Some(json!({ "target_class": 3, "seed": 42 }))).await;
    let mean = r["after"]["aggregate_mean"].as_f64().unwrap_or(f64::NAN);
    expect!(st == 200 && (2.75..=3.25).contains(&mean), "manipulate gave {st}, aggregate {mean}");
    let (_, report) = call(&app, "GET", &format!("{base}/report"), None).await;
    expect!(report["report"] == r["after"], "report after manipulation is stale");
    let (st, scene_now) = call(&app, "GET", &format!("{base}/scene"), None).await;
    let hash = SceneDocument::from_slice(&serde_json::to_vec(&scene_now).unwrap()).map(|d| d.hash()).unwrap_or_default();
    expect!(st == 200 && hash == report["provenance"]["scene_hash"], "scene and report hashes disagree");
    let (st, _) = call(&app, "POST", &format!("{base}/undo"), None).await;
    let (_, scene_back) = call(&app, "GET", &format!("{base}/scene"), None).await;
    expect!(st == 200 && scene_back == scene, "undo did not restore the original scene");

    let lobby = fixtures::new_parkland().document().to_value();
    let (_, other) = call(&app, "POST", "/api/sessions", Some(json!({ "scene": lobby, "path": "main" }))).await;
    let other = other["session_id"].as_str().unwrap_or_default().to_string();
    let (st, r) = call(
        &app,
        "POST",
        &format!("/api/sessions/{other}/manipulate"),
        Some(json!({ "target_class": 3, "segments": [1], "segment_target": 4, "attributes": ["clutter"], "seed": 7 })),
    )
    .await;
    let clutter = r["after"]["segments"][1]["attributes"]
        .as_array()
        .and_then(|a| a.iter().find(|x| x["attribute"] == "clutter"))
        .map(|x| x["class"].clone());
    let mean = r["after"]["aggregate_mean"].as_f64().unwrap_or(f64::NAN);
    expect!(st == 200 && clutter == Some(json!(4)) && (2.75..=3.25).contains(&mean), "segment request gave {st}, {clutter:?}, {mean}");
    let (_, untouched) = call(&app, "GET", &format!("{base}/scene"), None).await;
    expect!(untouched == scene, "sessions are not isolated");
    Ok(format!("{passed} contract checks: create/report/manipulate/undo/scene, 400/404/409/422 paths"))
}

fn main() {
    let rt = tokio::runtime::Builder::new_multi_thread().worker_threads(2).enable_all().build().unwrap();
    let criteria: Vec<(&str, Box<dyn FnOnce() -> Outcome>)> = vec![
        ("metric oracle equivalence", Box::new(oracle_equivalence)),
        ("invariance suite", Box::new(invariance)),
        ("scale correctness", Box::new(scale_correctness)),
        ("scenario A: old parkland to class 3", Box::new(scenario_a)),
        ("scenario B: lobby clutter raised, overall held at 3", Box::new(scenario_b)),
        ("determinism and replay", Box::new(determinism)),
        ("service contract", Box::new(move || rt.block_on(service_contract()))),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let t0 = Instant::now();
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(run))
            .unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why} ({:.1}s)", t0.elapsed().as_secs_f64());
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 7 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
