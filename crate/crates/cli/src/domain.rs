//! Domain selection by name: `interval`, `constants`, `sign`, or a product
//! `product:a+b` of two of them.

use aicat::domains::{AbstractDomain, Constants, Interval, NonRelational, Product, Sign};
use aicat::lang::VarSet;
use aicat::monads::Universe;

use crate::failure::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Base {
    Interval,
    Constants,
    Sign,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainSpec {
    Single(Base),
    Product(Base, Base),
}

impl Base {
    fn parse(s: &str) -> Result<Base, Failure> {
        match s {
            "interval" => Ok(Base::Interval),
            "constants" => Ok(Base::Constants),
            "sign" => Ok(Base::Sign),
            _ => Err(Failure::usage(
                "--domain",
                format!("unknown domain `{s}` (expected interval, constants, sign or product:a+b)"),
            )),
        }
    }
}

impl DomainSpec {
    pub fn parse(s: &str) -> Result<DomainSpec, Failure> {
        match s.strip_prefix("product:") {
            Some(rest) => {
                let (a, b) = rest.split_once('+').ok_or_else(|| {
                    Failure::usage("--domain", format!("`{s}` should look like product:a+b"))
                })?;
                Ok(DomainSpec::Product(Base::parse(a)?, Base::parse(b)?))
            }
            None => Ok(DomainSpec::Single(Base::parse(s)?)),
        }
    }
}

/// Code that works for any domain.
pub trait WithDomain {
    type Out;
    fn run<D: AbstractDomain + Clone + 'static>(self, d: D) -> Self::Out;
}

macro_rules! with_base {
    ($b:expr, $vars:expr, $u:expr, |$d:ident| $body:expr) => {
        match $b {
            Base::Interval => {
                let $d = NonRelational::new(Interval::new($u), $vars);
                $body
            }
            Base::Constants => {
                let $d = NonRelational::new(Constants::new($u), $vars);
                $body
            }
            Base::Sign => {
                let $d = NonRelational::new(Sign::new($u), $vars);
                $body
            }
        }
    };
}

pub fn dispatch<W: WithDomain>(
    spec: DomainSpec,
    vars: &VarSet,
    u: Universe,
    w: W,
) -> Result<W::Out, Failure> {
    Ok(match spec {
        DomainSpec::Single(b) => with_base!(b, vars, u, |d| w.run(d)),
        DomainSpec::Product(a, b) => with_base!(a, vars, u, |d1| with_base!(b, vars, u, |d2| {
            w.run(Product::new(d1, d2)?)
        })),
    })
}
