use crate::monads::{Carrier, MonadKind, MonadValue};
use crate::{Error, Result};

/// A Kleisli arrow `dom → T cod` between finite carriers, tabulated by
/// carrier index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KleisliTable {
    pub kind: MonadKind,
    pub dom: Carrier,
    pub cod: Carrier,
    pub rows: Vec<MonadValue<usize>>,
}

impl KleisliTable {
    pub fn new(
        kind: MonadKind,
        dom: Carrier,
        cod: Carrier,
        rows: Vec<MonadValue<usize>>,
    ) -> Result<Self> {
        if rows.len() != dom.len() {
            return Err(Error::CarrierMismatch(format!(
                "{} rows for a domain of {} memories",
                rows.len(),
                dom.len()
            )));
        }
        for r in &rows {
            if r.kind() != kind {
                return Err(Error::MonadMismatch {
                    expected: kind.to_string(),
                    found: r.kind().to_string(),
                });
            }
            if r.support().into_iter().any(|i| *i >= cod.len()) || !r.is_well_formed() {
                return Err(Error::Invalid("row outside the codomain carrier".into()));
            }
        }
        Ok(KleisliTable {
            kind,
            dom,
            cod,
            rows,
        })
    }

    pub fn unit(kind: MonadKind, c: &Carrier) -> Self {
        KleisliTable {
            kind,
            dom: c.clone(),
            cod: c.clone(),
            rows: (0..c.len()).map(|i| kind.unit(i)).collect(),
        }
    }

    pub fn bottom(kind: MonadKind, dom: &Carrier, cod: &Carrier) -> Self {
        KleisliTable {
            kind,
            dom: dom.clone(),
            cod: cod.clone(),
            rows: vec![kind.bottom(); dom.len()],
        }
    }

    /// `g • self`.
    pub fn then(&self, g: &KleisliTable) -> Result<KleisliTable> {
        if self.kind != g.kind {
            return Err(Error::MonadMismatch {
                expected: self.kind.to_string(),
                found: g.kind.to_string(),
            });
        }
        if !self.cod.same_as(&g.dom) {
            return Err(Error::CarrierMismatch(
                "composite of unaligned arrows".into(),
            ));
        }
        let rows = self
            .rows
            .iter()
            .map(|r| self.kind.ext(|j| Ok(g.rows[*j].clone()), r))
            .collect::<Result<Vec<_>>>()?;
        Ok(KleisliTable {
            kind: self.kind,
            dom: self.dom.clone(),
            cod: g.cod.clone(),
            rows,
        })
    }

    /// Pointwise order on arrows.
    pub fn leq(&self, other: &KleisliTable) -> Result<bool> {
        for (a, b) in self.rows.iter().zip(&other.rows) {
            if !self.kind.leq(a, b)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Pointwise least upper bound of a finite ascending chain.
    pub fn lub(chain: &[KleisliTable]) -> Result<KleisliTable> {
        let first = chain
            .first()
            .ok_or_else(|| Error::Invalid("empty chain".into()))?;
        let mut rows = Vec::with_capacity(first.rows.len());
        for i in 0..first.rows.len() {
            let column: Vec<MonadValue<usize>> = chain.iter().map(|t| t.rows[i].clone()).collect();
            rows.push(first.kind.chain_lub(column, usize::MAX)?.value);
        }
        Ok(KleisliTable {
            rows,
            ..first.clone()
        })
    }
}
