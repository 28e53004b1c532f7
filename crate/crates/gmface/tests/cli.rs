use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gmface::core::{render, CholFactor, GaussianComponent, GmModel, ImageGrid, Vec2};
use gmface::{read_image, read_model, write_image, write_model};
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_gmface");

fn gmface(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn sample_model() -> GmModel {
    let comps = vec![
        GaussianComponent::new(
            0.6,
            Vec2::new(0.4, 0.5),
            CholFactor::new(4.0, 1.0, 5.0).unwrap(),
        ),
        GaussianComponent::new(
            -0.2,
            Vec2::new(0.7, 0.3),
            CholFactor::new(8.0, -2.0, 6.0).unwrap(),
        ),
        GaussianComponent::new(
            0.3,
            Vec2::new(0.2, 0.8),
            CholFactor::new(6.0, 0.0, 9.0).unwrap(),
        ),
    ];
    GmModel::new(comps, 12, 10).unwrap()
}

struct Fixture {
    dir: TempDir,
    model: PathBuf,
}

impl Fixture {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let model = dir.path().join("m.gmf");
        write_model(&sample_model(), &model).unwrap();
        Self { dir, model }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&gmface(&["--help"])), 0);
    assert_eq!(code(&gmface(&["--version"])), 0);
}

#[test]
fn usage_errors_exit_one() {
    let f = Fixture::new();
    let out = p(&f.path("o.gmf")).to_string();
    let m = p(&f.model).to_string();
    for args in [
        vec![],
        vec!["frobnicate"],
        vec!["transform", "--model", &m, "--out", &out],
        vec![
            "transform",
            "--model",
            &m,
            "--scale",
            "2",
            "--rotate",
            "30",
            "--out",
            &out,
        ],
        vec!["transform", "--model", &m, "--scale", "0", "--out", &out],
        vec!["transform", "--model", &m, "--scale", "NaN", "--out", &out],
        vec!["transform", "--model", &m, "--scale", "-1", "--out", &out],
        vec![
            "transform",
            "--model",
            &m,
            "--translate",
            "0.1",
            "--center",
            "1",
            "1",
            "--out",
            &out,
        ],
        vec!["topk", "--model", &m, "--k", "0", "--out", &out],
        vec!["topk", "--model", &m, "--k", "4", "--out", &out],
        vec!["surface", "--out", &out],
        vec!["surface", "--model", &m, "--image", &m, "--out", &out],
        vec!["fit", "--input", &m, "--epochs", "0", "--out", &out],
        vec!["fit", "--input", &m, "--components", "0", "--out", &out],
    ] {
        let res = gmface(&args);
        assert_eq!(code(&res), 1, "{args:?}: {}", stderr(&res));
        assert!(!stderr(&res).is_empty());
    }
    assert!(!f.path("o.gmf").exists());
}

#[test]
fn error_messages_name_the_problem() {
    let f = Fixture::new();
    let out = p(&f.path("o.gmf")).to_string();
    let m = p(&f.model).to_string();
    let res = gmface(&["transform", "--model", &m, "--scale", "0", "--out", &out]);
    assert_eq!(
        stderr(&res),
        "error: --scale must be finite and positive, got 0\n"
    );
    let res = gmface(&["topk", "--model", &m, "--k", "4", "--out", &out]);
    assert_eq!(stderr(&res), "error: --k must lie in 1..=3, got 4\n");
}

#[test]
fn data_errors_exit_two() {
    let f = Fixture::new();
    let bad = f.path("bad.gmf");
    std::fs::write(&bad, "GMFACE 1\n1 4 4\n0.5 0.5 0.5 -1 0 1\n").unwrap();
    let img = f.path("img.pgm");
    write_image(&ImageGrid::filled(5, 5, 0.5).unwrap(), &img, 255).unwrap();
    let out = p(&f.path("o.pgm")).to_string();

    let res = gmface(&["render", "--model", p(&bad), "--out", &out]);
    assert_eq!(code(&res), 2);
    assert!(stderr(&res).contains("line 3"), "{}", stderr(&res));

    let res = gmface(&[
        "render",
        "--model",
        p(&f.path("missing.gmf")),
        "--out",
        &out,
    ]);
    assert_eq!(code(&res), 2);
    assert!(stderr(&res).contains("missing.gmf"));

    let res = gmface(&["eval", "--model", p(&f.model), "--image", p(&img)]);
    assert_eq!(code(&res), 2);
    assert!(stderr(&res).contains("img.pgm"), "{}", stderr(&res));

    let garbage = f.path("garbage.pgm");
    std::fs::write(&garbage, b"P7\n").unwrap();
    let res = gmface(&["eval", "--model", p(&f.model), "--image", p(&garbage)]);
    assert_eq!(code(&res), 2);
    assert!(stderr(&res).contains("byte 0"), "{}", stderr(&res));
}

#[test]
fn mixed_dataset_exits_two_naming_the_file() {
    let f = Fixture::new();
    let data = f.path("faces");
    std::fs::create_dir(&data).unwrap();
    write_image(
        &ImageGrid::filled(4, 4, 0.2).unwrap(),
        data.join("a.pgm"),
        255,
    )
    .unwrap();
    write_image(
        &ImageGrid::filled(4, 5, 0.2).unwrap(),
        data.join("b.pgm"),
        255,
    )
    .unwrap();
    let res = gmface(&[
        "fit",
        "--input",
        p(&data),
        "--epochs",
        "2",
        "--out",
        p(&f.path("o.gmf")),
    ]);
    assert_eq!(code(&res), 2);
    assert!(stderr(&res).contains("b.pgm"));
}

#[test]
fn render_matches_in_memory_render() {
    let f = Fixture::new();
    let out = f.path("r.pgm");
    let res = gmface(&["render", "--model", p(&f.model), "--out", p(&out)]);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let back = read_image(&out).unwrap();
    let expected = render(&sample_model()).clamped();
    assert_eq!(back.dims(), (12, 10));
    for (a, b) in back.pixels().iter().zip(expected.pixels()) {
        assert!((a - b).abs() <= 0.5 / 255.0 + 1e-12);
    }
}

#[test]
fn eval_against_own_render_is_within_quantization() {
    let f = Fixture::new();
    // positive weights summing below 1 keep the render inside [0, 1], so
    // only rounding is lost
    let positive: Vec<GaussianComponent> = sample_model()
        .components()
        .iter()
        .copied()
        .filter(|c| c.w > 0.0)
        .collect();
    let model = f.path("pos.gmf");
    write_model(&GmModel::new(positive, 12, 10).unwrap(), &model).unwrap();
    let img = f.path("r.pgm");
    assert_eq!(
        code(&gmface(&["render", "--model", p(&model), "--out", p(&img)])),
        0
    );
    let res = gmface(&[
        "eval",
        "--model",
        p(&model),
        "--image",
        p(&img),
        "--alpha",
        "0",
    ]);
    assert_eq!(code(&res), 0);
    let line = stdout(&res);
    let fields: Vec<(&str, f64)> = line
        .trim()
        .split(' ')
        .map(|kv| {
            let (k, v) = kv.split_once('=').unwrap();
            (k, v.parse().unwrap())
        })
        .collect();
    assert_eq!(
        fields.iter().map(|f| f.0).collect::<Vec<_>>(),
        ["mse", "pae", "total"]
    );
    assert!(fields[0].1 <= (0.5f64 / 255.0).powi(2));
    assert_eq!(fields[2].1, fields[0].1);
}

#[test]
fn translate_zero_is_identity_on_file() {
    let f = Fixture::new();
    let out = f.path("t.gmf");
    let res = gmface(&[
        "transform",
        "--model",
        p(&f.model),
        "--translate",
        "0",
        "0",
        "--out",
        p(&out),
    ]);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    assert_eq!(
        std::fs::read(&out).unwrap(),
        std::fs::read(&f.model).unwrap()
    );
}

#[test]
fn rotation_then_inverse_restores_parameters() {
    let f = Fixture::new();
    let a = f.path("a.gmf");
    let b = f.path("b.gmf");
    let res = gmface(&[
        "transform",
        "--model",
        p(&f.model),
        "--rotate",
        "90",
        "--center",
        "0.5",
        "0.5",
        "--out",
        p(&a),
    ]);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let res = gmface(&[
        "transform",
        "--model",
        p(&a),
        "--rotate",
        "-90",
        "--out",
        p(&b),
    ]);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let orig = sample_model().to_params();
    let back = read_model(&b).unwrap().to_params();
    for (x, y) in orig.iter().zip(&back) {
        assert!((x - y).abs() < 1e-9, "{x} vs {y}");
    }
}

#[test]
fn negative_translation_and_scale_round_trip() {
    let f = Fixture::new();
    let a = f.path("a.gmf");
    let b = f.path("b.gmf");
    assert_eq!(
        code(&gmface(&[
            "transform",
            "--model",
            p(&f.model),
            "--translate",
            "-0.25",
            "0.125",
            "--out",
            p(&a)
        ])),
        0
    );
    assert_eq!(
        code(&gmface(&[
            "transform",
            "--model",
            p(&a),
            "--translate",
            "0.25",
            "-0.125",
            "--out",
            p(&b)
        ])),
        0
    );
    let back = read_model(&b).unwrap().to_params();
    for (x, y) in sample_model().to_params().iter().zip(&back) {
        assert!((x - y).abs() < 1e-12);
    }
    assert_eq!(
        code(&gmface(&[
            "transform",
            "--model",
            p(&f.model),
            "--scale",
            "2",
            "--out",
            p(&a)
        ])),
        0
    );
    assert_eq!(
        code(&gmface(&[
            "transform",
            "--model",
            p(&a),
            "--scale",
            "0.5",
            "--out",
            p(&b)
        ])),
        0
    );
    let back = read_model(&b).unwrap().to_params();
    for (x, y) in sample_model().to_params().iter().zip(&back) {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn topk_full_keeps_the_file() {
    let f = Fixture::new();
    let out = f.path("k.gmf");
    assert_eq!(
        code(&gmface(&[
            "topk",
            "--model",
            p(&f.model),
            "--k",
            "3",
            "--out",
            p(&out)
        ])),
        0
    );
    assert_eq!(
        std::fs::read(&out).unwrap(),
        std::fs::read(&f.model).unwrap()
    );
    assert_eq!(
        code(&gmface(&[
            "topk",
            "--model",
            p(&f.model),
            "--k",
            "2",
            "--out",
            p(&out)
        ])),
        0
    );
    let k = read_model(&out).unwrap();
    let ws: Vec<f64> = k.components().iter().map(|c| c.w).collect();
    assert_eq!(ws, vec![0.6, 0.3]);
}

fn csv_values(path: &Path) -> Vec<f64> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect()
}

#[test]
fn surface_invert_and_sections() {
    let f = Fixture::new();
    let plain = f.path("s.csv");
    let inv = f.path("i.csv");
    assert_eq!(
        code(&gmface(&[
            "surface",
            "--model",
            p(&f.model),
            "--out",
            p(&plain)
        ])),
        0
    );
    assert_eq!(
        code(&gmface(&[
            "surface",
            "--model",
            p(&f.model),
            "--out",
            p(&inv),
            "--invert"
        ])),
        0
    );
    let a = csv_values(&plain);
    let b = csv_values(&inv);
    assert_eq!(a.len(), 120);
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(1.0 - y, 1.0 - (1.0 - x));
    }

    let sec = f.path("sec.csv");
    let res = gmface(&[
        "surface",
        "--model",
        p(&f.model),
        "--out",
        p(&sec),
        "--rows",
        "2,6,11",
        "--cols",
        "1,5,10",
    ]);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let text = std::fs::read_to_string(&sec).unwrap();
    assert_eq!(text.lines().next(), Some("section,r,c,x1,x2,value"));
    assert_eq!(text.lines().count(), 1 + 3 * 10 + 3 * 12);
    let res = gmface(&[
        "surface",
        "--model",
        p(&f.model),
        "--out",
        p(&sec),
        "--rows",
        "13",
    ]);
    assert_eq!(code(&res), 2);
}

#[test]
fn single_pixel_surface_has_one_row() {
    let f = Fixture::new();
    let model = GmModel::new(
        vec![GaussianComponent::new(
            0.5,
            Vec2::new(1.0, 1.0),
            CholFactor::identity(),
        )],
        1,
        1,
    )
    .unwrap();
    let path = f.path("one.gmf");
    write_model(&model, &path).unwrap();
    let out = f.path("one.csv");
    assert_eq!(
        code(&gmface(&["surface", "--model", p(&path), "--out", p(&out)])),
        0
    );
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("1,1,"));
    assert_eq!(csv_values(&out), vec![0.5]);
}

#[test]
fn fit_writes_model_history_and_summary() {
    let f = Fixture::new();
    let img = f.path("target.pgm");
    write_image(&render(&sample_model()).clamped(), &img, 255).unwrap();
    let out = f.path("fit.gmf");
    let hist = f.path("h.csv");
    let res = gmface(&[
        "fit",
        "--input",
        p(&img),
        "--components",
        "3",
        "--epochs",
        "30",
        "--lr",
        "0.01",
        "--seed",
        "4",
        "--out",
        p(&out),
        "--history",
        p(&hist),
    ]);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let model = read_model(&out).unwrap();
    assert_eq!((model.len(), model.height(), model.width()), (3, 12, 10));
    let text = std::fs::read_to_string(&hist).unwrap();
    assert_eq!(text.lines().next(), Some("epoch,l2,l_inf,total"));
    assert_eq!(text.lines().count(), 31);

    let summary = stdout(&res);
    assert!(
        summary.starts_with("l2=") && summary.contains(" l_inf=") && summary.contains(" total=")
    );
    assert_eq!(summary.lines().count(), 1);
    // the summary is the last history row
    let last: Vec<&str> = text.lines().last().unwrap().split(',').collect();
    assert_eq!(
        summary.trim(),
        format!("l2={} l_inf={} total={}", last[1], last[2], last[3])
    );
}

#[test]
fn fit_warm_start_keeps_top_components() {
    let f = Fixture::new();
    let img = f.path("target.pgm");
    write_image(&render(&sample_model()).clamped(), &img, 255).unwrap();
    let out = f.path("fit.gmf");
    let res = gmface(&[
        "fit",
        "--input",
        p(&img),
        "--components",
        "2",
        "--epochs",
        "1",
        "--init",
        p(&f.model),
        "--out",
        p(&out),
    ]);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    assert_eq!(read_model(&out).unwrap().len(), 2);
    let res = gmface(&[
        "fit",
        "--input",
        p(&img),
        "--components",
        "5",
        "--epochs",
        "1",
        "--init",
        p(&f.model),
        "--out",
        p(&out),
    ]);
    assert_eq!(code(&res), 1);

    let wrong = f.path("wrong.pgm");
    write_image(&ImageGrid::filled(10, 12, 0.1).unwrap(), &wrong, 255).unwrap();
    let res = gmface(&[
        "fit",
        "--input",
        p(&wrong),
        "--epochs",
        "1",
        "--init",
        p(&f.model),
        "--out",
        p(&out),
    ]);
    assert_eq!(code(&res), 2);
}

#[test]
fn fit_is_independent_of_thread_count() {
    let f = Fixture::new();
    let data = f.path("faces");
    std::fs::create_dir(&data).unwrap();
    for (i, v) in [0.2, 0.5, 0.7].iter().enumerate() {
        let g = ImageGrid::from_fn(12, 10, |r, c| {
            (v + 0.01 * (r as f64 - c as f64)).clamp(0.0, 1.0)
        })
        .unwrap();
        write_image(&g, data.join(format!("{i}.pgm")), 255).unwrap();
    }
    let mut models = Vec::new();
    for threads in ["1", "3"] {
        let out = f.path(&format!("fit{threads}.gmf"));
        let res = Command::new(BIN)
            .args([
                "fit",
                "--input",
                p(&data),
                "--components",
                "4",
                "--epochs",
                "20",
                "--batch-size",
                "2",
            ])
            .args(["--seed", "9", "--out", p(&out)])
            .env("GMFACE_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(code(&res), 0, "{}", stderr(&res));
        models.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(models[0], models[1]);
}

#[test]
fn import_table_writes_common_face() {
    let f = Fixture::new();
    let out = f.path("cf.gmf");
    assert_eq!(code(&gmface(&["import-table", "--out", p(&out)])), 0);
    let m = read_model(&out).unwrap();
    assert_eq!((m.len(), m.parameter_count()), (80, 480));

    let table = f.path("t.txt");
    std::fs::write(&table, "4 4\n0.5 0.5 0.5 2 1 2\n").unwrap();
    assert_eq!(
        code(&gmface(&[
            "import-table",
            "--table",
            p(&table),
            "--out",
            p(&out)
        ])),
        0
    );
    assert_eq!(read_model(&out).unwrap().len(), 1);
    std::fs::write(&table, "4 4\n0.5 0.5 0.5 1 2 1\n").unwrap();
    assert_eq!(
        code(&gmface(&[
            "import-table",
            "--table",
            p(&table),
            "--out",
            p(&out)
        ])),
        2
    );
}
