//! Text expressions describing states, e.g.
//! `mix(0.8: dicke(N=6,m=3), 0.2: white(N=6,d=2))`.
//!
//! ```text
//! spec  := leaf | mix
//! leaf  := name "(" [ key "=" value { "," key "=" value } ] ")"
//! mix   := "mix" "(" weight ":" spec { "," weight ":" spec } ")"
//! ```
//!
//! Leaves: `dicke(N, m)`, `ghz(N)`, `ghzphase(N)`, `white(N, d=2)`,
//! `product(state=<labels>)` with one qubit label per site from `01+-rl`.
//! Whitespace between tokens is ignored.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::matrix::QuantumState;
use crate::states;

const WEIGHT_SUM_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum StateSpec {
    Dicke { n: usize, m: usize },
    Ghz { n: usize },
    GhzPhase { n: usize },
    White { n: usize, d: usize },
    Product { labels: String },
    Mix(Vec<(f64, StateSpec)>),
}

impl StateSpec {
    /// Site dimensions of the described register.
    pub fn dims(&self) -> Vec<usize> {
        match self {
            StateSpec::Dicke { n, .. } | StateSpec::Ghz { n } | StateSpec::GhzPhase { n } => vec![2; *n],
            StateSpec::White { n, d } => vec![*d; *n],
            StateSpec::Product { labels } => vec![2; labels.chars().count()],
            StateSpec::Mix(parts) => parts.first().map(|(_, s)| s.dims()).unwrap_or_default(),
        }
    }

    /// Builds and validates the state.
    pub fn build(&self) -> Result<QuantumState> {
        match self {
            StateSpec::Dicke { n, m } => states::dicke(*n, *m),
            StateSpec::Ghz { n } => states::ghz(*n),
            StateSpec::GhzPhase { n } => states::ghz_phase(*n),
            StateSpec::White { n, d } => {
                if *n == 0 || *d < 2 {
                    return Err(Error::InvalidArgument(format!("white(N={n}, d={d}) needs N >= 1, d >= 2")));
                }
                states::white(vec![*d; *n])
            }
            StateSpec::Product { labels } => states::product(labels),
            StateSpec::Mix(parts) => noisy_mix(parts),
        }
    }
}

/// Convex combination of component specs; weights positive and summing to one.
pub fn noisy_mix(parts: &[(f64, StateSpec)]) -> Result<QuantumState> {
    if parts.is_empty() {
        return Err(Error::InvalidArgument("mix() needs at least one component".into()));
    }
    if let Some((w, _)) = parts.iter().find(|(w, _)| !(*w > 0.0) || !w.is_finite()) {
        return Err(Error::InvalidArgument(format!("mixture weight {w} must be positive")));
    }
    let total: f64 = parts.iter().map(|(w, _)| w).sum();
    if (total - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(Error::InvalidArgument(format!("mixture weights sum to {total}, expected 1")));
    }
    let dims = parts[0].1.dims();
    if let Some((_, s)) = parts.iter().find(|(_, s)| s.dims() != dims) {
        return Err(Error::InvalidArgument(format!(
            "mixture components have different dims: {dims:?} vs {:?}",
            s.dims()
        )));
    }
    let built = parts.iter().map(|(_, s)| s.build()).collect::<Result<Vec<_>>>()?;
    let weighted: Vec<(f64, &QuantumState)> = parts.iter().map(|(w, _)| *w).zip(built.iter()).collect();
    QuantumState::mixture(&weighted)
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateSpec::Dicke { n, m } => write!(f, "dicke(N={n},m={m})"),
            StateSpec::Ghz { n } => write!(f, "ghz(N={n})"),
            StateSpec::GhzPhase { n } => write!(f, "ghzphase(N={n})"),
            StateSpec::White { n, d } => write!(f, "white(N={n},d={d})"),
            StateSpec::Product { labels } => write!(f, "product(state={labels})"),
            StateSpec::Mix(parts) => {
                f.write_str("mix(")?;
                for (i, (w, s)) in parts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{w}: {s}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl FromStr for StateSpec {
    type Err = Error;
    fn from_str(text: &str) -> Result<Self> {
        let mut p = Parser { src: text.as_bytes(), pos: 0 };
        let spec = p.spec()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("trailing input after state spec"));
        }
        Ok(spec)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: impl Into<String>) -> Error {
        Error::Parse { pos: self.pos, msg: msg.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected '{}'", c as char)))
        }
    }

    /// A run of `[A-Za-z0-9_.+-]`.
    fn token(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || b"_.+-".contains(&self.src[self.pos]))
        {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected a name or value"));
        }
        Ok(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn spec(&mut self) -> Result<StateSpec> {
        let name_pos = {
            self.skip_ws();
            self.pos
        };
        let name = self.token()?.to_ascii_lowercase();
        self.expect(b'(')?;
        if name == "mix" {
            return self.mix_body();
        }
        let mut args: Vec<(String, String)> = Vec::new();
        if self.peek() != Some(b')') {
            loop {
                let key = self.token()?;
                self.expect(b'=')?;
                let value = self.token()?;
                if args.iter().any(|(k, _)| *k == key) {
                    return Err(self.error(format!("duplicate argument '{key}'")));
                }
                args.push((key, value));
                if self.peek() == Some(b',') {
                    self.pos += 1;
                } else {
                    break;
                }
            }
        }
        self.expect(b')')?;
        let leaf = Leaf { name: &name, args, pos: name_pos };
        leaf.into_spec()
    }

    fn mix_body(&mut self) -> Result<StateSpec> {
        let mut parts = Vec::new();
        loop {
            let wpos = {
                self.skip_ws();
                self.pos
            };
            let w_text = self.token()?;
            let w: f64 = w_text
                .parse()
                .map_err(|_| Error::Parse { pos: wpos, msg: format!("bad weight '{w_text}'") })?;
            self.expect(b':')?;
            parts.push((w, self.spec()?));
            if self.peek() == Some(b',') {
                self.pos += 1;
            } else {
                break;
            }
        }
        self.expect(b')')?;
        Ok(StateSpec::Mix(parts))
    }
}

struct Leaf<'a> {
    name: &'a str,
    args: Vec<(String, String)>,
    pos: usize,
}

impl Leaf<'_> {
    fn err(&self, msg: String) -> Error {
        Error::Parse { pos: self.pos, msg }
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.args.iter().find(|(k, _)| k.eq_ignore_ascii_case(key)).map(|(_, v)| v.as_str())
    }

    fn int(&self, key: &str, default: Option<usize>) -> Result<usize> {
        match (self.raw(key), default) {
            (Some(v), _) => v
                .parse()
                .map_err(|_| self.err(format!("{}: '{key}' must be a non-negative integer, got '{v}'", self.name))),
            (None, Some(d)) => Ok(d),
            (None, None) => Err(self.err(format!("{}: missing argument '{key}'", self.name))),
        }
    }

    fn allow_only(&self, keys: &[&str]) -> Result<()> {
        for (k, _) in &self.args {
            if !keys.iter().any(|a| a.eq_ignore_ascii_case(k)) {
                return Err(self.err(format!("{}: unknown argument '{k}'", self.name)));
            }
        }
        Ok(())
    }

    fn into_spec(self) -> Result<StateSpec> {
        match self.name {
            "dicke" => {
                self.allow_only(&["N", "m"])?;
                Ok(StateSpec::Dicke { n: self.int("N", None)?, m: self.int("m", None)? })
            }
            "ghz" => {
                self.allow_only(&["N"])?;
                Ok(StateSpec::Ghz { n: self.int("N", None)? })
            }
            "ghzphase" | "ghz_phase" => {
                self.allow_only(&["N"])?;
                Ok(StateSpec::GhzPhase { n: self.int("N", None)? })
            }
            "white" => {
                self.allow_only(&["N", "d"])?;
                Ok(StateSpec::White { n: self.int("N", None)?, d: self.int("d", Some(2))? })
            }
            "product" => {
                self.allow_only(&["state"])?;
                let labels = self
                    .raw("state")
                    .ok_or_else(|| self.err("product: missing argument 'state'".into()))?;
                if let Some(c) = labels.chars().find(|c| !"01+-rl".contains(*c)) {
                    return Err(self.err(format!("product: unknown qubit label '{c}'")));
                }
                Ok(StateSpec::Product { labels: labels.to_string() })
            }
            other => Err(self.err(format!("unknown state '{other}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_nested_mixture() {
        let spec: StateSpec = " mix( 0.8 : dicke(N=6, m=3) ,0.2:white( N = 6 , d = 2 ) ) ".parse().unwrap();
        assert_eq!(
            spec,
            StateSpec::Mix(vec![
                (0.8, StateSpec::Dicke { n: 6, m: 3 }),
                (0.2, StateSpec::White { n: 6, d: 2 }),
            ])
        );
        assert_eq!(spec.to_string(), "mix(0.8: dicke(N=6,m=3), 0.2: white(N=6,d=2))");
    }

    #[test]
    fn display_round_trips() {
        for text in [
            "ghz(N=4)",
            "ghzphase(N=3)",
            "product(state=0+-1)",
            "mix(0.5: ghz(N=6), 0.25: ghzphase(N=6), 0.25: white(N=6,d=2))",
        ] {
            let spec: StateSpec = text.parse().unwrap();
            assert_eq!(spec.to_string().parse::<StateSpec>().unwrap(), spec);
        }
    }

    #[test]
    fn rejects_malformed_input() {
        for bad in [
            "dicke(N=6)",
            "dicke(N=6,m=3",
            "foo(N=2)",
            "ghz(N=x)",
            "ghz(N=3) extra",
            "mix(0.5 dicke(N=2,m=1))",
            "ghz(N=3,N=4)",
            "product(state=0a)",
            "white(N=2,q=3)",
        ] {
            assert!(matches!(bad.parse::<StateSpec>(), Err(Error::Parse { .. })), "{bad}");
        }
    }

    #[test]
    fn mixture_weight_validation() {
        let bad_sum: StateSpec = "mix(0.5: ghz(N=2), 0.4: white(N=2,d=2))".parse().unwrap();
        assert!(bad_sum.build().is_err());
        let negative: StateSpec = "mix(1.5: ghz(N=2), -0.5: white(N=2,d=2))".parse().unwrap();
        assert!(negative.build().is_err());
        let dims: StateSpec = "mix(0.5: ghz(N=2), 0.5: white(N=3,d=2))".parse().unwrap();
        assert!(dims.build().is_err());
    }

    #[test]
    fn endpoint_mixtures() {
        let white: StateSpec = "mix(1: white(N=6,d=2))".parse().unwrap();
        let st = white.build().unwrap();
        assert!(st.rho().max_abs_diff(&crate::matrix::Operator::identity(64).scale(1.0 / 64.0)) < 1e-15);
        let pure: StateSpec = "mix(1.0: dicke(N=6,m=3))".parse().unwrap();
        assert!((pure.build().unwrap().eigenvalues()[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn equal_ghz_mixture_spectrum() {
        // Gram matrix [[1, c], [c*, 1]] with |c| = 1/sqrt(2) gives eigenvalues (1 +- 1/sqrt(2)) / 2
        let spec: StateSpec = "mix(0.5: ghz(N=6), 0.5: ghzphase(N=6))".parse().unwrap();
        let st = spec.build().unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let ev = st.eigenvalues();
        assert!((ev[0] - (1.0 + h) / 2.0).abs() < 1e-12);
        assert!((ev[1] - (1.0 - h) / 2.0).abs() < 1e-12);
        assert!(ev[2..].iter().all(|&x| x == 0.0));
    }
}
