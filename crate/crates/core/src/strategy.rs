use std::fmt;
use std::str::FromStr;

/// Selling regime of the platform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Full coverage: risky arm for everyone, bonus for low-cost reporters.
    FC,
    /// Partial coverage: safe arm by default, risky arm only for reporters.
    PC,
    /// Safe arm only.
    SA,
    /// Risky arm only, no bonus.
    NB,
    /// Immediate revelation: bonus at the cost cap.
    IR,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [Strategy::FC, Strategy::PC, Strategy::SA, Strategy::NB, Strategy::IR];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::FC => "FC",
            Strategy::PC => "PC",
            Strategy::SA => "SA",
            Strategy::NB => "NB",
            Strategy::IR => "IR",
        }
    }

    /// Whether the risky arm is sold to agents who do not report.
    pub fn risky_default(self) -> bool {
        matches!(self, Strategy::FC | Strategy::NB | Strategy::IR)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "FC" => Ok(Strategy::FC),
            "PC" => Ok(Strategy::PC),
            "SA" => Ok(Strategy::SA),
            "NB" => Ok(Strategy::NB),
            "IR" => Ok(Strategy::IR),
            other => Err(format!("unknown strategy '{other}'")),
        }
    }
}
