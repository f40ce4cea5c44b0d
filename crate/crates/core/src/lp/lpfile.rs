//! CPLEX-style LP file writer, readable by HiGHS, GLPK, CBC and friends.

use std::io::{self, Write};

use super::{LinearProgram, Relation};

const LINE_WIDTH: usize = 250;

fn sanitize(name: &str, j: usize) -> String {
    let ok = !name.is_empty()
        && !name.starts_with(|c: char| c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E')
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || "_!\"#$%&()/,.;?@'`{}|~".contains(c));
    if ok {
        name.to_string()
    } else {
        format!("x{j}")
    }
}

fn write_terms<W: Write>(w: &mut W, head: &str, terms: &[(usize, f64)], names: &[String]) -> io::Result<()> {
    let mut line = String::from(head);
    if terms.is_empty() {
        line.push_str(" 0 ");
        line.push_str(&names.first().cloned().unwrap_or_else(|| "x0".into()));
    }
    for (n, &(j, a)) in terms.iter().enumerate() {
        let sign = if a < 0.0 { "-" } else if n == 0 { "" } else { "+" };
        let term = if sign.is_empty() {
            format!(" {} {}", a.abs(), names[j])
        } else {
            format!(" {sign} {} {}", a.abs(), names[j])
        };
        if line.len() + term.len() > LINE_WIDTH {
            writeln!(w, "{line}")?;
            line = String::from("   ");
        }
        line.push_str(&term);
    }
    write!(w, "{line}")
}

pub fn write_lp_file<W: Write>(lp: &LinearProgram, mut w: W) -> io::Result<()> {
    let names: Vec<String> = lp.names().iter().enumerate().map(|(j, n)| sanitize(n, j)).collect();
    writeln!(w, "\\ {} variables, {} constraints", lp.num_vars(), lp.num_constraints())?;
    writeln!(w, "Minimize")?;
    let obj: Vec<(usize, f64)> = lp
        .objective()
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0.0)
        .map(|(j, &c)| (j, c))
        .collect();
    write_terms(&mut w, " obj:", &obj, &names)?;
    writeln!(w)?;
    writeln!(w, "Subject To")?;
    for (r, c) in lp.constraints().iter().enumerate() {
        write_terms(&mut w, &format!(" c{r}:"), &c.coeffs, &names)?;
        let op = match c.relation {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        };
        writeln!(w, " {op} {}", c.rhs)?;
    }
    writeln!(w, "Bounds")?;
    for n in &names {
        writeln!(w, " {n} >= 0")?;
    }
    writeln!(w, "End")?;
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_all_sections() {
        let mut lp = LinearProgram::new();
        let z = lp.add_var("z", 1.0);
        let y = lp.add_var("y[0]", 0.0);
        lp.add_constraint(vec![(z, 1.0), (y, -2.5)], Relation::Ge, 3.0);
        lp.add_constraint(vec![(y, 1.0)], Relation::Eq, 1.0);
        let mut buf = Vec::new();
        write_lp_file(&lp, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("Minimize\n obj: 1 z\n"));
        assert!(text.contains(" c0: 1 z - 2.5 x1 >= 3\n"));
        assert!(text.contains(" c1: 1 x1 = 1\n"));
        assert!(text.trim_end().ends_with("End"));
    }

    #[test]
    fn long_rows_are_wrapped() {
        let mut lp = LinearProgram::new();
        let vars: Vec<_> = (0..200).map(|j| lp.add_var(format!("v{j}"), 1.0)).collect();
        lp.add_constraint(vars.iter().map(|&v| (v, 1.0)).collect(), Relation::Le, 5.0);
        let mut buf = Vec::new();
        write_lp_file(&lp, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().all(|l| l.len() <= LINE_WIDTH + 32));
    }
}
