//! The line-oriented instance format.
//!
//! ```text
//! n 2
//! m 1: 1 | 2      # singleton groups, best first
//! m 2: 1 2        # a tie
//! w 1: 2 | 1
//! w 2: 2 | 1
//! regret_le 2 1
//! ```
//!
//! Ids and ranks are 1-based. Constraint lines are `regret_le a b`,
//! `forbid man woman`, `floor v1 .. vn` and `edge i r j s` (proposal `r` of
//! man `i` precedes proposal `s` of man `j`).

use std::fmt::Write;

use llp_match_core::{compile_constraints, Constraint, Event, ModelError, PreferenceProfile};

/// A parsed instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub profile: PreferenceProfile,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing `n <count>` line")]
    MissingCount,
    #[error("no preference list for {side} {id}")]
    MissingList { side: &'static str, id: usize },
    #[error("invalid instance: {0}")]
    Invalid(#[from] ModelError),
}

fn syntax(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Syntax {
        line,
        message: message.into(),
    }
}

fn number(line: usize, token: &str) -> Result<usize, FormatError> {
    token
        .parse()
        .map_err(|_| syntax(line, format!("expected a number, found `{token}`")))
}

/// A 1-based id or rank, returned 0-based.
fn id(line: usize, token: &str) -> Result<usize, FormatError> {
    match number(line, token)? {
        0 => Err(syntax(line, "ids and ranks start at 1")),
        k => Ok(k - 1),
    }
}

fn groups(line: usize, text: &str) -> Result<Vec<Vec<usize>>, FormatError> {
    text.split('|')
        .map(|group| {
            let ids = group.split_whitespace().map(|t| id(line, t)).collect::<Result<Vec<_>, _>>()?;
            if ids.is_empty() {
                Err(syntax(line, "empty tie-group"))
            } else {
                Ok(ids)
            }
        })
        .collect()
}

fn arguments(line: usize, keyword: &str, args: &[&str], count: usize) -> Result<(), FormatError> {
    if args.len() == count {
        Ok(())
    } else {
        Err(syntax(line, format!("`{keyword}` takes {count} arguments, found {}", args.len())))
    }
}

/// Parses and validates an instance. Constraint ids, ranks and acyclicity
/// are checked here; whether a solver accepts a constraint kind on a tied
/// profile is left to the solver.
pub fn parse_instance(text: &str) -> Result<Instance, FormatError> {
    let mut n = None;
    let mut men: Vec<Option<Vec<Vec<usize>>>> = Vec::new();
    let mut women: Vec<Option<Vec<Vec<usize>>>> = Vec::new();
    let mut constraints = Vec::new();

    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (keyword, rest) = content.split_once(char::is_whitespace).unwrap_or((content, ""));
        if keyword == "n" {
            if n.is_some() {
                return Err(syntax(line, "`n` given twice"));
            }
            let count = number(line, rest.trim())?;
            if count == 0 {
                return Err(ModelError::Empty.into());
            }
            n = Some(count);
            men = vec![None; count];
            women = vec![None; count];
            continue;
        }
        let Some(n) = n else {
            return Err(syntax(line, "the first line must be `n <count>`"));
        };
        let args: Vec<&str> = rest.split_whitespace().collect();
        match keyword {
            "m" | "w" => {
                let (who, list) = rest
                    .split_once(':')
                    .ok_or_else(|| syntax(line, "expected `<id>: <groups>`"))?;
                let who = id(line, who.trim())?;
                let side = if keyword == "m" { &mut men } else { &mut women };
                let slot = side
                    .get_mut(who)
                    .ok_or_else(|| syntax(line, format!("{keyword} {} is out of range 1..={n}", who + 1)))?;
                if slot.is_some() {
                    return Err(syntax(line, format!("{keyword} {} listed twice", who + 1)));
                }
                *slot = Some(groups(line, list)?);
            }
            "regret_le" => {
                arguments(line, keyword, &args, 2)?;
                constraints.push(Constraint::RegretLe {
                    a: id(line, args[0])?,
                    b: id(line, args[1])?,
                });
            }
            "forbid" => {
                arguments(line, keyword, &args, 2)?;
                constraints.push(Constraint::Forbid {
                    man: id(line, args[0])?,
                    woman: id(line, args[1])?,
                });
            }
            "floor" => {
                let floor = args.iter().map(|t| id(line, t).map(|r| r + 1)).collect::<Result<_, _>>()?;
                constraints.push(Constraint::Floor(floor));
            }
            "edge" => {
                arguments(line, keyword, &args, 4)?;
                constraints.push(Constraint::Edge {
                    from: Event::new(id(line, args[0])?, id(line, args[1])? + 1),
                    to: Event::new(id(line, args[2])?, id(line, args[3])? + 1),
                });
            }
            other => return Err(syntax(line, format!("unknown keyword `{other}`"))),
        }
    }

    let n = n.ok_or(FormatError::MissingCount)?;
    let collect = |side: Vec<Option<Vec<Vec<usize>>>>, keyword: &'static str| {
        side.into_iter()
            .enumerate()
            .map(|(i, list)| list.ok_or(FormatError::MissingList { side: keyword, id: i + 1 }))
            .collect::<Result<Vec<_>, _>>()
    };
    let profile = PreferenceProfile::new(collect(men, "m")?, collect(women, "w")?)?;
    debug_assert_eq!(profile.n(), n);
    // Ranks, ids and cycles do not depend on how ties are broken.
    compile_constraints(&profile.break_ties_by_id(), &constraints)?;
    Ok(Instance { profile, constraints })
}

fn write_groups(out: &mut String, groups: &[Vec<usize>]) {
    for (k, group) in groups.iter().enumerate() {
        if k > 0 {
            out.push_str(" |");
        }
        for &x in group {
            let _ = write!(out, " {}", x + 1);
        }
    }
}

/// Serializes in the canonical form: `n`, men, women, then constraints in
/// their original order.
pub fn write_instance(instance: &Instance) -> String {
    let profile = &instance.profile;
    let mut out = format!("n {}\n", profile.n());
    for (keyword, side) in [("m", profile.men_prefs()), ("w", profile.women_prefs())] {
        for (i, groups) in side.iter().enumerate() {
            let _ = write!(out, "{keyword} {}:", i + 1);
            write_groups(&mut out, groups);
            out.push('\n');
        }
    }
    for constraint in &instance.constraints {
        let _ = match constraint {
            Constraint::RegretLe { a, b } => writeln!(out, "regret_le {} {}", a + 1, b + 1),
            Constraint::Forbid { man, woman } => writeln!(out, "forbid {} {}", man + 1, woman + 1),
            Constraint::Floor(floor) => {
                out.push_str("floor");
                for r in floor {
                    let _ = write!(out, " {r}");
                }
                writeln!(out)
            }
            Constraint::Edge { from, to } => {
                writeln!(out, "edge {} {} {} {}", from.man + 1, from.rank, to.man + 1, to.rank)
            }
        };
    }
    out
}
