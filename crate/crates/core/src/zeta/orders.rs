//! Finite regularized products and the constant c(X, w).

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::GroupDatum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderEntry {
    pub re: f64,
    pub im: f64,
    pub order: i64,
}

impl OrderEntry {
    pub fn point(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// Vanishing orders m(s) at finitely many points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderList {
    pub entries: Vec<OrderEntry>,
}

impl OrderList {
    pub fn new(entries: Vec<(Complex64, i64)>) -> Result<Self> {
        let list = OrderList {
            entries: entries.into_iter().map(|(z, order)| OrderEntry { re: z.re, im: z.im, order }).collect(),
        };
        list.validate()?;
        Ok(list)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, a) in self.entries.iter().enumerate() {
            if !(a.re.is_finite() && a.im.is_finite()) {
                return Err(Error::Validation(format!("order entry {i} has a non-finite point")));
            }
            if self.entries[..i].iter().any(|b| b.point() == a.point()) {
                return Err(Error::Validation(format!("point {} listed twice", a.point())));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let list: OrderList = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        list.validate()?;
        Ok(list)
    }
}

/// prod (s - point)^order over the list.
pub fn regularized_product(orders: &OrderList, s: Complex64) -> Result<Complex64> {
    let mut value = Complex64::new(1.0, 0.0);
    for e in &orders.entries {
        let d = s - e.point();
        if d == Complex64::new(0.0, 0.0) {
            if e.order < 0 {
                return Err(Error::Pole { point: format!("{}", e.point()), order: e.order });
            }
            if e.order > 0 {
                return Ok(Complex64::new(0.0, 0.0));
            }
            continue;
        }
        value *= d.powi(e.order as i32);
    }
    Ok(value)
}

/// prod over shift entries (c, i) of (2 sqrt(s_i^c))^{sign * order}.
/// Entries missing from `orders` have order zero.
pub fn assemble_c_constant(datum: &GroupDatum, orders: &BTreeMap<(u32, u32), i64>) -> Result<f64> {
    for &(c, i) in orders.keys() {
        if datum.shift(c, i).is_none() {
            return Err(Error::Precondition(format!(
                "datum {} has no shift entry (c={c}, i={i})",
                datum.name
            )));
        }
    }
    let mut log_value = 0.0;
    for e in &datum.shift_table {
        let order = orders.get(&(e.c, e.i)).copied().unwrap_or(0);
        if order == 0 {
            continue;
        }
        if !(e.s > 0.0) {
            return Err(Error::ZeroShift { c: e.c, i: e.i, s: e.s, order });
        }
        log_value += (e.sign as i64 * order) as f64 * (2.0 * e.s.sqrt()).ln();
    }
    Ok(log_value.exp())
}
