//! Produces the same JSON run report as `walkport run`, twice, and confirms
//! the two renderings are byte-identical for a fixed seed.

use walkport::cli::main_with_args;

fn main() {
    let dir = std::env::temp_dir().join(format!("walkport-report-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("temp dir");
    let mut outputs = Vec::new();
    for attempt in 0..2 {
        let path = dir.join(format!("run{attempt}.json"));
        let code = main_with_args([
            "walkport",
            "run",
            "twostep2q",
            "--seed",
            "42",
            "--count",
            "1",
            "--format",
            "json",
            "--out",
            path.to_str().expect("utf-8 path"),
        ]);
        assert_eq!(code, 0, "run should verify");
        outputs.push(std::fs::read(&path).expect("report written"));
    }
    println!("report size {} bytes, identical: {}", outputs[0].len(), outputs[0] == outputs[1]);
    std::fs::remove_dir_all(&dir).ok();
}
