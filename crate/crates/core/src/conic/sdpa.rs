//! SDPA sparse text export for third-party solvers.
//!
//! SDPA's primal is `min cᵀx` subject to `Σ x_i F_i - F_0 ⪰ 0`, so `F_0 = -C`.
//! Complex blocks are written through the real embedding and each equality
//! becomes a pair of 1x1 diagonal entries `aᵀx - f ≥ 0`, `-aᵀx + f ≥ 0`.

use std::fmt::Write;

use super::ConicProgram;

pub fn to_sdpa(program: &ConicProgram) -> String {
    let real = if program.blocks().iter().any(has_imaginary) { program.real_embedding() } else { program.clone() };
    let m = real.n_vars();
    let k = real.equalities().len();
    let mut out = String::new();
    let _ = writeln!(out, "{m}");
    let n_blocks = real.blocks().len() + usize::from(k > 0);
    let _ = writeln!(out, "{n_blocks}");
    let mut sizes: Vec<String> = real.blocks().iter().map(|b| b.side().to_string()).collect();
    if k > 0 {
        sizes.push(format!("-{}", 2 * k));
    }
    let _ = writeln!(out, "{}", sizes.join(" "));
    let _ = writeln!(out, "{}", real.objective().iter().map(|c| format!("{c:e}")).collect::<Vec<_>>().join(" "));
    for (bi, b) in real.blocks().iter().enumerate() {
        let n = b.side();
        for i in 0..n {
            for j in i..n {
                let v = -b.constant()[(i, j)].re;
                if v != 0.0 {
                    let _ = writeln!(out, "0 {} {} {} {v:e}", bi + 1, i + 1, j + 1);
                }
            }
        }
        for (&var, a) in b.terms() {
            for &(i, j, v) in a.entries() {
                if i <= j {
                    let _ = writeln!(out, "{} {} {} {} {:e}", var + 1, bi + 1, i + 1, j + 1, v.re);
                }
            }
        }
    }
    if k > 0 {
        let lp = real.blocks().len() + 1;
        for (r, e) in real.equalities().iter().enumerate() {
            let (pos, neg) = (2 * r + 1, 2 * r + 2);
            if e.rhs != 0.0 {
                let _ = writeln!(out, "0 {lp} {pos} {pos} {:e}", e.rhs);
                let _ = writeln!(out, "0 {lp} {neg} {neg} {:e}", -e.rhs);
            }
            for (var, &a) in e.row.iter().enumerate() {
                if a != 0.0 {
                    let _ = writeln!(out, "{} {lp} {pos} {pos} {a:e}", var + 1);
                    let _ = writeln!(out, "{} {lp} {neg} {neg} {:e}", var + 1, -a);
                }
            }
        }
    }
    out
}

fn has_imaginary(b: &super::PsdBlock) -> bool {
    b.constant().iter().any(|z| z.im != 0.0) || b.terms().values().any(|a| a.entries().iter().any(|(_, _, v)| v.im != 0.0))
}

#[cfg(test)]
mod tests {
    use super::super::{PsdBlock, SparseHermitian};
    use super::*;
    use crate::tensor::{CMat, C64};

    #[test]
    fn header_and_entries() {
        let mut p = ConicProgram::new(1);
        p.set_objective(vec![1.0]).unwrap();
        let mut b = PsdBlock::new(2);
        b.set_constant(CMat::from_diagonal_element(2, 2, C64::new(-1.0, 0.0))).unwrap();
        b.add_term(0, SparseHermitian::identity(2)).unwrap();
        p.add_block(b).unwrap();
        p.add_equality(vec![2.0], 3.0).unwrap();
        let text = to_sdpa(&p);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "1");
        assert_eq!(lines[1], "2");
        assert_eq!(lines[2], "2 -2");
        assert!(lines.contains(&"0 1 1 1 1e0"));
        assert!(lines.contains(&"1 2 2 2 -2e0"));
    }
}
