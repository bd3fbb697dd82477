//! The line-oriented `.ssg` game format.
//!
//! ```text
//! # comment
//! states 4
//! initial 0
//! targets 2
//! owner 0 min
//! owner 1 max
//! ...
//! action 1 c (1:1/3)(2:1/3)(3:1/3)
//! ```
//!
//! Probabilities are decimals or fractions `n/d`. Action lines for a state
//! define its action indices in order of appearance. The canonical form
//! written by [`serialize_game`] lists directives in the order above with
//! states ascending and probabilities as reduced fractions.

use std::fmt::Write as _;

use num_rational::BigRational;

use crate::error::{Error, ParseError};
use crate::game::{GameBuilder, Player, StochasticGame};
use crate::numeric::{format_rational, parse_rational};

struct Cursor<'a> {
    line: usize,
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(line: usize, text: &'a str) -> Self {
        Cursor { line, text, pos: 0 }
    }

    fn column(&self) -> usize {
        self.pos + 1
    }

    fn err(&self, message: impl Into<String>) -> ParseError {
        ParseError::new(self.line, self.column(), message)
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.text[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.text.len()
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.text[self.pos..].chars().next()
    }

    /// Next run of characters not in `stop` and not whitespace.
    fn word(&mut self, what: &str, stop: &[char]) -> Result<(&'a str, usize), ParseError> {
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.text[self.pos..].chars().next() {
            if c.is_whitespace() || stop.contains(&c) {
                break;
            }
            self.pos += c.len_utf8();
        }
        if start == self.pos {
            return Err(ParseError::new(self.line, start + 1, format!("expected {what}")));
        }
        Ok((&self.text[start..self.pos], start + 1))
    }

    fn index(&mut self, what: &str, stop: &[char]) -> Result<(usize, usize), ParseError> {
        let (w, col) = self.word(what, stop)?;
        w.parse::<usize>()
            .map(|v| (v, col))
            .map_err(|_| ParseError::new(self.line, col, format!("expected {what}, found `{w}`")))
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        match self.peek() {
            Some(found) if found == c => {
                self.pos += c.len_utf8();
                Ok(())
            }
            Some(found) => Err(self.err(format!("expected `{c}`, found `{found}`"))),
            None => Err(self.err(format!("expected `{c}`, found end of line"))),
        }
    }

    fn finish(&mut self) -> Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.err("unexpected trailing input"))
        }
    }
}

/// Parses and validates `.ssg` text.
pub fn parse_game(text: &str) -> Result<StochasticGame, Error> {
    let mut builder: Option<GameBuilder> = None;
    let mut initial_seen = false;
    let mut targets_seen = false;
    let mut owner_seen: Vec<bool> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut cur = Cursor::new(lineno, content);
        if cur.at_end() {
            continue;
        }
        let (keyword, kw_col) = cur.word("directive", &[])?;
        if keyword != "states" && builder.is_none() {
            return Err(ParseError::new(lineno, kw_col, "`states` must come first").into());
        }
        match keyword {
            "states" => {
                if builder.is_some() {
                    return Err(ParseError::new(lineno, kw_col, "duplicate `states`").into());
                }
                let (n, col) = cur.index("state count", &[])?;
                if n == 0 {
                    return Err(ParseError::new(lineno, col, "state count must be positive").into());
                }
                cur.finish()?;
                builder = Some(GameBuilder::new(n));
                owner_seen = vec![false; n];
            }
            "initial" => {
                let b = builder.as_mut().unwrap();
                if initial_seen {
                    return Err(ParseError::new(lineno, kw_col, "duplicate `initial`").into());
                }
                let s = state_index(&mut cur, b.num_states())?;
                cur.finish()?;
                b.initial(s);
                initial_seen = true;
            }
            "targets" => {
                let b = builder.as_mut().unwrap();
                targets_seen = true;
                while !cur.at_end() {
                    let s = state_index(&mut cur, b.num_states())?;
                    b.target(s);
                }
            }
            "owner" => {
                let b = builder.as_mut().unwrap();
                let col = cur.column();
                let s = state_index(&mut cur, b.num_states())?;
                if owner_seen[s] {
                    return Err(ParseError::new(lineno, col, format!("duplicate owner for state {s}")).into());
                }
                let (who, col) = cur.word("`max` or `min`", &[])?;
                let player = match who {
                    "max" => Player::Maximizer,
                    "min" => Player::Minimizer,
                    other => {
                        return Err(
                            ParseError::new(lineno, col, format!("expected `max` or `min`, found `{other}`")).into()
                        )
                    }
                };
                cur.finish()?;
                b.owner(s, player);
                owner_seen[s] = true;
            }
            "action" => {
                let b = builder.as_mut().unwrap();
                let s = state_index(&mut cur, b.num_states())?;
                let (name, _) = cur.word("action name", &['('])?;
                let name = name.to_string();
                let mut dist: Vec<(usize, BigRational)> = Vec::new();
                while !cur.at_end() {
                    cur.expect('(')?;
                    let t = state_index_until(&mut cur, b.num_states(), &[':'])?;
                    cur.expect(':')?;
                    let (p, col) = cur.word("probability", &[')'])?;
                    let p = parse_rational(p)
                        .ok_or_else(|| ParseError::new(lineno, col, format!("invalid probability `{p}`")))?;
                    cur.expect(')')?;
                    dist.push((t, p));
                }
                if dist.is_empty() {
                    return Err(cur.err("action without successors").into());
                }
                b.action(s, name, dist);
            }
            other => {
                return Err(ParseError::new(lineno, kw_col, format!("unknown directive `{other}`")).into());
            }
        }
    }

    let builder = builder.ok_or_else(|| ParseError::new(1, 1, "missing `states`"))?;
    if !targets_seen {
        return Err(crate::error::GameError::NoTarget.into());
    }
    Ok(builder.build()?)
}

fn state_index(cur: &mut Cursor<'_>, n: usize) -> Result<usize, ParseError> {
    state_index_until(cur, n, &[])
}

fn state_index_until(cur: &mut Cursor<'_>, n: usize, stop: &[char]) -> Result<usize, ParseError> {
    let (s, col) = cur.index("state index", stop)?;
    if s >= n {
        return Err(ParseError::new(cur.line, col, format!("unknown state {s} (game has {n} states)")));
    }
    Ok(s)
}

/// Canonical `.ssg` text for a game.
pub fn serialize_game(game: &StochasticGame) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "states {}", game.num_states());
    let _ = writeln!(out, "initial {}", game.initial());
    let targets: Vec<String> = game.targets().map(|t| t.to_string()).collect();
    let _ = writeln!(out, "targets {}", targets.join(" "));
    for s in game.states() {
        let _ = writeln!(out, "owner {s} {}", game.owner(s).keyword());
    }
    for s in game.states() {
        for a in game.actions(s) {
            let _ = write!(out, "action {s} {} ", a.name);
            for b in &a.branches {
                let _ = write!(out, "({}:{})", b.state, format_rational(&b.exact));
            }
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::GameError;
    use crate::game::tests::fig1;

    const FIG1: &str = "\
# p q t o
states 4
initial 0
targets 2
owner 0 min
owner 1 max
owner 2 max
owner 3 min
action 0 a (1:1)
action 1 b (0:1)
action 1 c (1:1/3)(2:1/3) (3:1/3)
action 2 d (2:1)
action 3 e (3:1)
";

    #[test]
    fn parses_fig1() {
        let g = parse_game(FIG1).unwrap();
        assert_eq!(g.num_states(), 4);
        assert_eq!(g.num_actions(1), 2);
        assert_eq!(g, fig1());
    }

    #[test]
    fn canonical_round_trip() {
        let g = parse_game(FIG1).unwrap();
        let text = serialize_game(&g);
        let again = parse_game(&text).unwrap();
        assert_eq!(g, again);
        assert_eq!(serialize_game(&again), text);
    }

    #[test]
    fn target_actions_replaced_by_self_loop() {
        let text = "states 2\ninitial 0\ntargets 1\nowner 0 max\nowner 1 max\n\
                    action 0 go (1:1)\naction 1 back (0:0.5)(1:0.5)\naction 1 other (0:1)\n";
        let g = parse_game(text).unwrap();
        assert_eq!(g.num_actions(1), 1);
        assert_eq!(g.action(1, 0).branches.len(), 1);
        assert_eq!(g.action(1, 0).branches[0].state, 1);
        assert_eq!(g.action(1, 0).branches[0].prob, 1.0);
    }

    #[test]
    fn reports_sum_violation() {
        let text = "states 2\ninitial 0\ntargets 1\nowner 0 max\nowner 1 max\naction 0 go (1:0.9)\n";
        assert!(matches!(parse_game(text), Err(Error::Game(GameError::DistributionSum { .. }))));
    }

    #[test]
    fn reports_positions() {
        let text = "states 2\ninitial 0\ntargets 1\nowner 0 max\nowner 1 max\naction 0 go (7:1)\n";
        match parse_game(text) {
            Err(Error::Parse(e)) => assert_eq!((e.line, e.column), (6, 14)),
            other => panic!("unexpected {other:?}"),
        }
        let text = "states 2\ninitial 0\ntargets 1\nowner 0 maybe\n";
        match parse_game(text) {
            Err(Error::Parse(e)) => assert_eq!((e.line, e.column), (4, 9)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn reports_empty_actions_and_missing_target() {
        let text = "states 2\ninitial 0\ntargets 1\nowner 0 max\nowner 1 max\n";
        assert!(matches!(parse_game(text), Err(Error::Game(GameError::EmptyActionSet { state: 0 }))));
        let text = "states 1\ninitial 0\nowner 0 max\naction 0 x (0:1)\n";
        assert!(matches!(parse_game(text), Err(Error::Game(GameError::NoTarget))));
    }

    #[test]
    fn rejects_tiny_probabilities() {
        let text = "states 2\ninitial 0\ntargets 1\nowner 0 max\nowner 1 max\n\
                    action 0 go (1:0.9999999999999999999)(0:1e-19)\n";
        assert!(matches!(parse_game(text), Err(Error::Game(GameError::InvalidProbability { .. }))));
    }
}
