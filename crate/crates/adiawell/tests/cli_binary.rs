//! Runs the installed binary the way a user would.

use std::process::Command;

fn adiawell(args: &[&str], threads: Option<&str>) -> (i32, String) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_adiawell"));
    cmd.args(args);
    if let Some(t) = threads {
        cmd.env("ADIA_THREADS", t);
    }
    let out = cmd.output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

#[test]
fn eigen_prints_one_row() {
    let (code, out) = adiawell(&["eigen", "--n", "1", "--tau", "-2"], None);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "p_n,E_n,dlnpn_dtau");
    let p: f64 = lines[1].split(',').next().unwrap().parse().unwrap();
    // (1 - tau) p + asin p = pi
    assert!((3.0 * p + p.asin() - std::f64::consts::PI).abs() < 1e-14);
}

#[test]
fn output_does_not_depend_on_thread_count() {
    let args = ["compare", "--eps", "0.2", "--n", "1", "--t", "-10", "--x-steps", "25", "--x-max", "6"];
    let (c1, one) = adiawell(&args, Some("1"));
    let (c4, four) = adiawell(&args, Some("4"));
    assert_eq!((c1, c4), (0, 0));
    assert_eq!(one, four);
    assert_eq!(one.lines().next(), Some("x,re_exact,im_exact,re_asym,im_asym,abs_err,regime"));
}

#[test]
fn sweep_recovers_first_order() {
    let (code, out) = adiawell(&["sweep", "--eps", "0.1,0.05,0.025", "--n", "1", "--tau", "-2", "--check", "adiabatic"], None);
    assert_eq!(code, 0);
    let rows: Vec<Vec<f64>> =
        out.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 3);
    assert!((rows[0][2] - 1.0).abs() < 0.3, "{out}");
}

#[test]
fn invalid_input_exits_with_two() {
    assert_eq!(adiawell(&["eigen", "--n", "1"], None).0, 2);
    assert_eq!(adiawell(&["field", "--eps", "0", "--n", "1", "--t", "0", "--x-steps", "5"], None).0, 2);
    assert_eq!(adiawell(&["eigen", "--n", "1", "--tau", "-2"], Some("zero")).0, 2);
    assert_eq!(adiawell(&["sweep", "--eps", "0.1,0.05", "--n", "1", "--tau", "-2", "--check", "nothing"], None).0, 2);
}
