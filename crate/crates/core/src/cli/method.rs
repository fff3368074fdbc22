use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::icll::Variant;
use crate::resampling::ResampleMethod;

/// Every method the benchmark can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    NoResampleRf,
    NoResampleLr,
    Resample(ResampleMethod),
    BalancedRf,
    Icll(Variant),
}

impl Method {
    pub const ALL: [Method; 15] = [
        Method::NoResampleRf,
        Method::NoResampleLr,
        Method::Resample(ResampleMethod::RandomOver),
        Method::Resample(ResampleMethod::RandomUnder),
        Method::Resample(ResampleMethod::Smote),
        Method::Resample(ResampleMethod::Adasyn),
        Method::Resample(ResampleMethod::NearMiss),
        Method::Resample(ResampleMethod::Oss),
        Method::BalancedRf,
        Method::Icll(Variant::Icll),
        Method::Icll(Variant::IcllSmote),
        Method::Icll(Variant::IcllSmoteL1),
        Method::Icll(Variant::IcllSmoteL2),
        Method::Icll(Variant::IcllL1Only),
        Method::Icll(Variant::IcllL2Only),
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::NoResampleRf => "NoResample-RF",
            Method::NoResampleLr => "NoResample-LR",
            Method::Resample(ResampleMethod::RandomOver) => "RO",
            Method::Resample(ResampleMethod::RandomUnder) => "RU",
            Method::Resample(ResampleMethod::Smote) => "SMOTE",
            Method::Resample(ResampleMethod::Adasyn) => "ADASYN",
            Method::Resample(ResampleMethod::NearMiss) => "NearMiss",
            Method::Resample(ResampleMethod::Oss) => "OSS",
            Method::BalancedRf => "BalancedRF",
            Method::Icll(Variant::Icll) => "ICLL",
            Method::Icll(Variant::IcllSmote) => "ICLL+SMOTE",
            Method::Icll(Variant::IcllSmoteL1) => "ICLL+SMOTE(L1)",
            Method::Icll(Variant::IcllSmoteL2) => "ICLL+SMOTE(L2)",
            Method::Icll(Variant::IcllL1Only) => "ICLL(L1)",
            Method::Icll(Variant::IcllL2Only) => "ICLL(L2)",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownMethod(s.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert_eq!("icll+smote(l2)".parse::<Method>().unwrap(), Method::Icll(Variant::IcllSmoteL2));
        assert!("SVM".parse::<Method>().is_err());
    }
}
