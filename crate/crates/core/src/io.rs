//! JSON persistence of trivectors:
//! `{ "p": 7, "n": 10, "coeffs": [[i, j, k, c], ...] }` with strictly
//! increasing triples `i < j < k`, `0 <= c < p`, zeros omitted on output.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::trivector::{triple_index, triples, Trivector};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrivectorFile {
    p: u64,
    n: usize,
    coeffs: Vec<[u64; 4]>,
}

pub fn trivector_to_json(sigma: &Trivector) -> String {
    let coeffs = triples(sigma.n())
        .into_iter()
        .zip(sigma.coeffs())
        .filter(|(_, &c)| c != 0)
        .map(|((i, j, k), &c)| [i as u64, j as u64, k as u64, c as u64])
        .collect();
    let file = TrivectorFile {
        p: sigma.field().p() as u64,
        n: sigma.n(),
        coeffs,
    };
    serde_json::to_string(&file).expect("plain data serializes")
}

pub fn trivector_from_json(text: &str) -> Result<Trivector> {
    let file: TrivectorFile = serde_json::from_str(text)?;
    let p = u32::try_from(file.p).map_err(|_| Error::InvalidPrime(file.p))?;
    let field = PrimeField::new(p)?;
    let n = file.n;
    let mut sigma = Trivector::zero(field, n)?;
    let mut last: Option<(u64, u64, u64)> = None;
    for &[i, j, k, c] in &file.coeffs {
        if !(i < j && j < k && k < n as u64) {
            return Err(Error::Format(format!(
                "triple ({i}, {j}, {k}) is not increasing inside 0..{n}"
            )));
        }
        if last.is_some_and(|prev| prev >= (i, j, k)) {
            return Err(Error::Format(format!(
                "triple ({i}, {j}, {k}) is duplicated or out of order"
            )));
        }
        if c >= file.p {
            return Err(Error::Format(format!(
                "coefficient {c} is not below p = {}",
                file.p
            )));
        }
        last = Some((i, j, k));
        debug_assert!(triple_index(n, i as usize, j as usize, k as usize) < sigma.coeffs().len());
        sigma.set(i as usize, j as usize, k as usize, c as u32);
    }
    Ok(sigma)
}

pub fn store_trivector(sigma: &Trivector, path: &Path) -> Result<()> {
    fs::write(path, trivector_to_json(sigma) + "\n")?;
    Ok(())
}

pub fn load_trivector(path: &Path) -> Result<Trivector> {
    trivector_from_json(&fs::read_to_string(path)?)
}
