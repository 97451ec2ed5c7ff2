use std::fmt::Write as _;

use memcool::analysis::BudgetRow;
use memcool::engine::ProtocolTrace;

pub const SIG_DIGITS: usize = 12;

/// `printf("%.12g")`: fixed or scientific, whichever is shorter for the
/// exponent, with trailing zeros removed.
pub fn fmt_g(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let p = SIG_DIGITS;
    let sci = format!("{:.*e}", p - 1, x);
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if exp < -4 || exp >= p as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        let decimals = (p as i32 - 1 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Steps `1..=n`; the thermal starting point is not a row.
pub fn trace_csv(trace: &ProtocolTrace, dump_sl: bool) -> String {
    let mut out = String::from("step,m,s_ground,mutual_info");
    if dump_sl {
        for i in 0..trace.d_s * trace.d_l {
            write!(out, ",sl_{i}").unwrap();
        }
    }
    out.push('\n');
    for r in &trace.steps {
        write!(out, "{},{},{},{}", r.n, r.m, fmt_g(r.s_ground), fmt_g(r.mutual_info)).unwrap();
        if dump_sl {
            for p in &r.sl_probs {
                write!(out, ",{}", fmt_g(*p)).unwrap();
            }
        }
        out.push('\n');
    }
    out
}

pub fn grid_csv(rows: &[BudgetRow]) -> String {
    let mut out = String::from("k,l,m,s_ground\n");
    for r in rows {
        writeln!(out, "{},{},{},{}", r.k, r.l, r.m, fmt_g(r.s_ground)).unwrap();
    }
    out
}

pub fn fmt_vec(v: &[f64]) -> String {
    v.iter().map(|x| fmt_g(*x)).collect::<Vec<_>>().join(", ")
}
