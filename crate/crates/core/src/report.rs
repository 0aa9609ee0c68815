//! Check reports and residual bookkeeping.

use serde::Serialize;

use crate::scalar::Scalar;
use crate::series::Series;

/// Outcome of one check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
    #[serde(rename = "EXPECTED-FAIL")]
    ExpectedFail,
    #[serde(rename = "SKIPPED")]
    Skipped,
    #[serde(rename = "UNDETERMINED")]
    Undetermined,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::ExpectedFail => "EXPECTED-FAIL",
            Status::Skipped => "SKIPPED",
            Status::Undetermined => "UNDETERMINED",
        }
    }
}

/// The lowest nonzero term of a residual, and where it was found.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    /// Which instance of the identity failed (indices, arguments).
    pub at: String,
    pub monomial: String,
    pub coefficient: Scalar,
}

/// One verification record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub anchor: String,
    /// Weighted order through which the residual was verified.
    pub order: Option<u32>,
    pub status: Status,
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckReport {
    pub fn skipped(name: impl Into<String>, anchor: impl Into<String>, why: impl Into<String>) -> Self {
        CheckReport {
            name: name.into(),
            anchor: anchor.into(),
            order: None,
            status: Status::Skipped,
            witness: None,
            note: Some(why.into()),
        }
    }

    pub fn undetermined(name: impl Into<String>, anchor: impl Into<String>, why: impl Into<String>) -> Self {
        CheckReport {
            name: name.into(),
            anchor: anchor.into(),
            order: None,
            status: Status::Undetermined,
            witness: None,
            note: Some(why.into()),
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// Accumulates residual series (and scalar residuals) for one check and
/// turns them into a [`CheckReport`].
#[derive(Debug, Default)]
pub struct Residuals {
    order: Option<u32>,
    worst: Option<(u32, Witness)>,
    count: usize,
}

impl Residuals {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records a residual series that should vanish through its valid order.
    pub fn push(&mut self, at: impl FnOnce() -> String, r: &Series) {
        self.count += 1;
        let o = r.valid_order();
        self.order = Some(self.order.map_or(o, |x| x.min(o)));
        if let Some((m, c)) = r.lowest_term() {
            let deg = m.degree(r.table());
            let replace = match &self.worst {
                None => true,
                Some((d, _)) => deg < *d,
            };
            if replace {
                self.worst = Some((
                    deg,
                    Witness {
                        at: at(),
                        monomial: m.render(r.table()),
                        coefficient: c,
                    },
                ));
            }
        }
    }

    /// Records an exact scalar residual.
    pub fn push_scalar(&mut self, at: impl FnOnce() -> String, r: &Scalar) {
        self.count += 1;
        if !r.is_zero() && self.worst.as_ref().map_or(true, |(d, _)| *d > 0) {
            self.worst = Some((
                0,
                Witness {
                    at: at(),
                    monomial: "1".into(),
                    coefficient: r.clone(),
                },
            ));
        }
    }

    pub fn is_clean(&self) -> bool {
        self.worst.is_none()
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn order(&self) -> Option<u32> {
        self.order
    }

    pub fn finish(self, name: impl Into<String>, anchor: impl Into<String>) -> CheckReport {
        let (status, witness) = match self.worst {
            None => (Status::Pass, None),
            Some((_, w)) => (Status::Fail, Some(w)),
        };
        CheckReport {
            name: name.into(),
            anchor: anchor.into(),
            order: self.order,
            status,
            witness,
            note: None,
        }
    }
}
