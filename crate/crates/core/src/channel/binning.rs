//! Virtual delay-Doppler representation of a discrete path set.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path as FsPath;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ChannelParams, SignalingParams};
use crate::numerics::ExactSum;
use crate::{Error, Result};

/// One physical propagation path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub gain: Complex64,
    pub delay_s: f64,
    pub doppler_hz: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PathSet {
    pub paths: Vec<Path>,
}

#[derive(Debug, Deserialize)]
struct PathRecord {
    beta_re: f64,
    beta_im: f64,
    tau_s: f64,
    nu_hz: f64,
}

impl PathSet {
    pub fn new(paths: Vec<Path>) -> Self {
        Self { paths }
    }

    /// Every delay in `[0, Tm]`, every Doppler shift in `[-Wd/2, Wd/2]`.
    pub fn validate(&self, params: &ChannelParams) -> Result<()> {
        let half_doppler = 0.5 * params.doppler_spread_hz;
        for (index, p) in self.paths.iter().enumerate() {
            if !(p.gain.re.is_finite() && p.gain.im.is_finite()) {
                return Err(Error::PathOutOfRange { index, reason: "non-finite gain".into() });
            }
            if !(0.0..=params.delay_spread_s).contains(&p.delay_s) {
                return Err(Error::PathOutOfRange {
                    index,
                    reason: format!("delay {} s not in [0, {}]", p.delay_s, params.delay_spread_s),
                });
            }
            if !(-half_doppler..=half_doppler).contains(&p.doppler_hz) {
                return Err(Error::PathOutOfRange {
                    index,
                    reason: format!("Doppler {} Hz not in [-{half_doppler}, {half_doppler}]", p.doppler_hz),
                });
            }
        }
        Ok(())
    }

    /// Reads `beta_re,beta_im,tau_s,nu_hz` rows; lines starting with `#` are
    /// skipped.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        let expected = ["beta_re", "beta_im", "tau_s", "nu_hz"];
        if headers.iter().ne(expected.iter().copied()) {
            return Err(Error::InvalidArgument(format!(
                "path csv header must be {}, got {}",
                expected.join(","),
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let paths = rdr
            .deserialize::<PathRecord>()
            .map(|rec| {
                rec.map(|r| Path {
                    gain: Complex64::new(r.beta_re, r.beta_im),
                    delay_s: r.tau_s,
                    doppler_hz: r.nu_hz,
                })
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Self { paths })
    }

    pub fn from_csv_path(path: impl AsRef<FsPath>) -> Result<Self> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }
}

/// Sampled delay-Doppler channel: only occupied bins are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct VirtualChannel {
    /// `h_{ℓ,m}`: sum of the gains of the paths in bin `(ℓ, m)`.
    pub coefficients: BTreeMap<(i64, i64), Complex64>,
    /// `Ψ(ℓ,m)`: sum of the path powers `|β|²` in bin `(ℓ, m)`.
    pub powers: BTreeMap<(i64, i64), f64>,
    /// `L = ⌈Tm·W⌉`; delay indices run over `0..=L`.
    pub max_delay_index: i64,
    /// `M = ⌈T·Wd/2⌉`; Doppler indices run over `-M..=M`.
    pub max_doppler_index: i64,
    power_sums: BTreeMap<(i64, i64), ExactSum>,
}

impl VirtualChannel {
    /// Σ Ψ(ℓ,m), exactly rounded from the per-bin partial sums.
    pub fn total_power(&self) -> f64 {
        let mut total = ExactSum::new();
        for s in self.power_sums.values() {
            total.absorb(s);
        }
        total.value()
    }
}

/// Index `i` with `i - 1/2 < x <= i + 1/2`.
fn half_open_bin(x: f64) -> i64 {
    let mut i = (x - 0.5).ceil() as i64;
    // `i ± 0.5` is exact, so these comparisons are the definition itself
    while !((i as f64) - 0.5 < x) {
        i -= 1;
    }
    while !(x <= (i as f64) + 0.5) {
        i += 1;
    }
    i
}

/// Delay bin ℓ with `ℓ/W - 1/(2W) < τ <= ℓ/W + 1/(2W)`, evaluated on `τ·W`.
pub fn delay_bin_index(delay_s: f64, bandwidth_hz: f64) -> i64 {
    half_open_bin(delay_s * bandwidth_hz)
}

/// Doppler bin m with `m/T - 1/(2T) < ν <= m/T + 1/(2T)`, evaluated on `ν·T`.
pub fn doppler_bin_index(doppler_hz: f64, duration_s: f64) -> i64 {
    half_open_bin(doppler_hz * duration_s)
}

pub fn bin_paths(params: &ChannelParams, sig: &SignalingParams, paths: &PathSet) -> Result<VirtualChannel> {
    params.validate()?;
    sig.validate()?;
    paths.validate(params)?;
    let max_delay_index = (params.delay_spread_s * sig.bandwidth_hz).ceil() as i64;
    let max_doppler_index = (sig.duration_s * params.doppler_spread_hz / 2.0).ceil() as i64;

    let mut coefficients = BTreeMap::new();
    let mut power_sums: BTreeMap<(i64, i64), ExactSum> = BTreeMap::new();
    for p in &paths.paths {
        let l = delay_bin_index(p.delay_s, sig.bandwidth_hz);
        let m = doppler_bin_index(p.doppler_hz, sig.duration_s);
        debug_assert!((0..=max_delay_index).contains(&l));
        debug_assert!((-max_doppler_index..=max_doppler_index).contains(&m));
        *coefficients.entry((l, m)).or_insert(Complex64::new(0.0, 0.0)) += p.gain;
        power_sums.entry((l, m)).or_default().add(p.gain.norm_sqr());
    }
    let powers = power_sums.iter().map(|(&k, s)| (k, s.value())).collect();
    Ok(VirtualChannel {
        coefficients,
        powers,
        max_delay_index,
        max_doppler_index,
        power_sums,
    })
}

/// Number of dominant bins, `|{(ℓ,m) : Ψ(ℓ,m) > γ}|`.
pub fn count_dof(vc: &VirtualChannel, gamma: f64) -> Result<usize> {
    if !(gamma >= 0.0) {
        return Err(Error::InvalidArgument(format!("threshold must be >= 0, got {gamma}")));
    }
    Ok(vc.powers.values().filter(|&&psi| psi > gamma).count())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (ChannelParams, SignalingParams) {
        (
            ChannelParams::new(1e-5, 50.0, 0.5, 0.5).unwrap(),
            SignalingParams::new(1e-3, 1e6, 1e3).unwrap(),
        )
    }

    fn path(re: f64, tau: f64, nu: f64) -> Path {
        Path { gain: Complex64::new(re, 0.0), delay_s: tau, doppler_hz: nu }
    }

    #[test]
    fn single_path() {
        let (p, s) = setup();
        let vc = bin_paths(&p, &s, &PathSet::new(vec![path(1.0, 0.0, 0.0)])).unwrap();
        assert_eq!(vc.coefficients.len(), 1);
        assert_eq!(vc.coefficients[&(0, 0)], Complex64::new(1.0, 0.0));
        assert_eq!(vc.total_power(), 1.0);
        assert_eq!(count_dof(&vc, 0.0).unwrap(), 1);
        assert_eq!(count_dof(&vc, 1.0).unwrap(), 0);
        assert_eq!(vc.max_delay_index, 10);
        assert_eq!(vc.max_doppler_index, 1);
    }

    #[test]
    fn coherent_cancellation() {
        let (p, s) = setup();
        let ps = PathSet::new(vec![path(1.0, 3e-6, 10.0), path(-1.0, 3e-6, 10.0)]);
        let vc = bin_paths(&p, &s, &ps).unwrap();
        assert_eq!(vc.coefficients[&(3, 0)], Complex64::new(0.0, 0.0));
        assert_eq!(vc.powers[&(3, 0)], 2.0);
    }

    #[test]
    fn boundary_goes_to_lower_bin() {
        // τ·W = 2.5 sits on the upper edge of bin 2
        assert_eq!(half_open_bin(2.5), 2);
        assert_eq!(half_open_bin(2.5 + 1e-12), 3);
        assert_eq!(half_open_bin(-0.5), -1);
        assert_eq!(half_open_bin(0.0), 0);
        assert_eq!(delay_bin_index(2.5e-6, 1e6), 2);
    }

    #[test]
    fn out_of_support_rejected() {
        let (p, s) = setup();
        let bad_delay = PathSet::new(vec![path(1.0, 2e-5, 0.0)]);
        assert!(matches!(bin_paths(&p, &s, &bad_delay), Err(Error::PathOutOfRange { index: 0, .. })));
        let bad_doppler = PathSet::new(vec![path(1.0, 0.0, 0.0), path(1.0, 0.0, 30.0)]);
        assert!(matches!(bin_paths(&p, &s, &bad_doppler), Err(Error::PathOutOfRange { index: 1, .. })));
        let vc = bin_paths(&p, &s, &PathSet::default()).unwrap();
        assert!(count_dof(&vc, -1.0).is_err());
    }

    #[test]
    fn csv_ingestion() {
        let text = "# two paths\nbeta_re,beta_im,tau_s,nu_hz\n0.5,-0.5,1e-6,3.0\n# mid comment\n1.0,0.0,0.0,-25.0\n";
        let ps = PathSet::from_csv_reader(text.as_bytes()).unwrap();
        assert_eq!(ps.paths.len(), 2);
        assert_eq!(ps.paths[0].gain, Complex64::new(0.5, -0.5));
        assert_eq!(ps.paths[1].doppler_hz, -25.0);
        assert!(PathSet::from_csv_reader("a,b,c,d\n1,2,3,4\n".as_bytes()).is_err());
        assert!(PathSet::from_csv_reader("beta_re,beta_im,tau_s,nu_hz\n1,x,3,4\n".as_bytes()).is_err());
    }
}
