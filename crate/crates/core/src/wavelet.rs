//! Periodized orthonormal discrete wavelet transforms.
//!
//! Samples `x_0..x_{n-1}` are taken on the grid `i/n` of `[0, 1)`. The
//! transform is orthonormal for the inner product `(1/n) sum x_i y_i`, so
//! `squared_norm(analyze(x)) == (1/n) sum x_i^2` and distances between
//! coefficient fields approximate integral L2 distances.
//!
//! Convolutions wrap circularly. When a level is shorter than the filter the
//! filter folds onto itself, which keeps the transform orthonormal all the
//! way down to the single scaling coefficient.

use std::fmt;
use std::str::FromStr;

use crate::coefficients::CoefficientField;
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveletFamily {
    Haar,
    DaubechiesPeriodized,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveletBasis {
    family: WaveletFamily,
    vanishing_moments: usize,
    filter: Vec<f64>,
}

// Daubechies low-pass (scaling) filters, sum h = sqrt(2).
const DB2: [f64; 4] = [
    0.48296291314453416,
    0.8365163037378079,
    0.2241438680420134,
    -0.12940952255126037,
];
const DB3: [f64; 6] = [
    0.33267055295008263,
    0.8068915093110925,
    0.45987750211849154,
    -0.13501102001025458,
    -0.08544127388202666,
    0.03522629188570953,
];
const DB4: [f64; 8] = [
    0.2303778133088965,
    0.7148465705529157,
    0.6308807679298589,
    -0.027983769416859854,
    -0.18703481171909309,
    0.030841381835560764,
    0.0328830116668852,
    -0.010597401785069032,
];
const DB5: [f64; 10] = [
    0.16010239797419293,
    0.6038292697971896,
    0.7243085284377729,
    0.13842814590132074,
    -0.24229488706638203,
    -0.032244869584638375,
    0.07757149384004572,
    -0.006241490212798274,
    -0.012580751999081999,
    0.0033357252854737712,
];
const DB6: [f64; 12] = [
    0.11154074335010947,
    0.49462389039845306,
    0.7511339080210954,
    0.31525035170919763,
    -0.22626469396543983,
    -0.12976686756726194,
    0.09750160558732304,
    0.027522865530305727,
    -0.03158203931748603,
    0.0005538422011614961,
    0.004777257510945511,
    -0.0010773010853084796,
];
const DB7: [f64; 14] = [
    0.07785205408500918,
    0.3965393194819173,
    0.7291320908462351,
    0.4697822874051931,
    -0.14390600392856498,
    -0.22403618499387498,
    0.07130921926683026,
    0.08061260915108308,
    -0.03802993693501441,
    -0.01657454163066688,
    0.01255099855609984,
    0.0004295779729213665,
    -0.0018016407040474908,
    0.00035371379997452024,
];
const DB8: [f64; 16] = [
    0.05441584224310401,
    0.31287159091429995,
    0.6756307362972898,
    0.5853546836542067,
    -0.015829105256349306,
    -0.2840155429615469,
    0.0004724845739132828,
    0.12874742662047847,
    -0.017369301001807547,
    -0.044088253930794755,
    0.013981027917398282,
    0.008746094047405777,
    -0.004870352993451574,
    -0.00039174037337694705,
    0.0006754494064505693,
    -0.00011747678412476953,
];
const DB9: [f64; 18] = [
    0.038077947363878345,
    0.24383467461259034,
    0.6048231236901112,
    0.6572880780513005,
    0.13319738582500756,
    -0.2932737832791749,
    -0.09684078322297646,
    0.14854074933810638,
    0.03072568147933338,
    -0.06763282906132997,
    0.00025094711483145197,
    0.022361662123679096,
    -0.004723204757751397,
    -0.00428150368246343,
    0.0018476468830562265,
    0.00023038576352319597,
    -0.0002519631889427101,
    3.93473203162716e-05,
];
const DB10: [f64; 20] = [
    0.026670057900555554,
    0.1881768000776915,
    0.5272011889317256,
    0.6884590394536035,
    0.2811723436605775,
    -0.24984642432731538,
    -0.19594627437737705,
    0.12736934033579325,
    0.09305736460357235,
    -0.07139414716639708,
    -0.029457536821875813,
    0.033212674059341,
    0.0036065535669561697,
    -0.010733175483330575,
    0.001395351747052901,
    0.001992405295185056,
    -0.0006858566949597116,
    -0.00011646685512928545,
    9.358867032006959e-05,
    -1.3264202894521244e-05,
];

impl WaveletBasis {
    pub fn haar() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            family: WaveletFamily::Haar,
            vanishing_moments: 1,
            filter: vec![h, h],
        }
    }

    /// Periodized Daubechies basis with `n` vanishing moments, `1 <= n <= 10`.
    pub fn daubechies(n: usize) -> Result<Self> {
        let filter: Vec<f64> = match n {
            1 => Self::haar().filter,
            2 => DB2.to_vec(),
            3 => DB3.to_vec(),
            4 => DB4.to_vec(),
            5 => DB5.to_vec(),
            6 => DB6.to_vec(),
            7 => DB7.to_vec(),
            8 => DB8.to_vec(),
            9 => DB9.to_vec(),
            10 => DB10.to_vec(),
            _ => return invalid(format!("Daubechies order must be in 1..=10, got {n}")),
        };
        Ok(Self {
            family: WaveletFamily::DaubechiesPeriodized,
            vanishing_moments: n,
            filter,
        })
    }

    pub fn family(&self) -> WaveletFamily {
        self.family
    }

    pub fn vanishing_moments(&self) -> usize {
        self.vanishing_moments
    }

    pub fn filter(&self) -> &[f64] {
        &self.filter
    }

    /// True when the basis functions are the Haar system (`haar` or `db1`).
    pub fn is_haar(&self) -> bool {
        self.vanishing_moments == 1
    }

    /// High-pass filter `g_i = (-1)^i h_{L-1-i}`.
    fn high_pass(&self) -> Vec<f64> {
        let len = self.filter.len();
        (0..len)
            .map(|i| {
                let h = self.filter[len - 1 - i];
                if i % 2 == 0 {
                    h
                } else {
                    -h
                }
            })
            .collect()
    }
}

impl fmt::Display for WaveletBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            WaveletFamily::Haar => write!(f, "haar"),
            WaveletFamily::DaubechiesPeriodized => write!(f, "db{}", self.vanishing_moments),
        }
    }
}

impl FromStr for WaveletBasis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        if lower == "haar" {
            return Ok(Self::haar());
        }
        match lower.strip_prefix("db").map(str::parse::<usize>) {
            Some(Ok(n)) => Self::daubechies(n),
            _ => invalid(format!("unknown basis '{s}' (expected haar or dbN)")),
        }
    }
}

/// Forward transform of `2^J` equispaced samples into a field with `max_level = J`.
pub fn analyze(samples: &[f64], basis: &WaveletBasis) -> Result<CoefficientField> {
    let n = samples.len();
    if n == 0 || !n.is_power_of_two() {
        return invalid(format!("sample length {n} is not a power of two"));
    }
    if basis.family == WaveletFamily::DaubechiesPeriodized && n < basis.filter.len() {
        return invalid(format!(
            "sample length {n} shorter than the {}-tap filter",
            basis.filter.len()
        ));
    }
    let levels = n.trailing_zeros();
    let h = basis.filter();
    let g = basis.high_pass();
    let norm = 1.0 / (n as f64).sqrt();

    let mut approx: Vec<f64> = samples.to_vec();
    let mut details = vec![Vec::new(); levels as usize];
    for j in (0..levels as usize).rev() {
        let len = approx.len();
        let half = len / 2;
        let mut a = vec![0.0; half];
        let mut d = vec![0.0; half];
        for k in 0..half {
            let (mut sa, mut sd) = (0.0, 0.0);
            for (i, (hi, gi)) in h.iter().zip(&g).enumerate() {
                let x = approx[(2 * k + i) % len];
                sa += hi * x;
                sd += gi * x;
            }
            a[k] = sa;
            d[k] = sd;
        }
        details[j] = d.into_iter().map(|v| v * norm).collect();
        approx = a;
    }
    let scaling = approx.into_iter().map(|v| v * norm).collect();
    CoefficientField::from_levels(scaling, details)
}

/// Inverse of [`analyze`]: returns `2^max_level` samples.
pub fn synthesize(field: &CoefficientField, basis: &WaveletBasis) -> Vec<f64> {
    let levels = field.max_level();
    let n = 1usize << levels;
    let h = basis.filter();
    let g = basis.high_pass();
    let scale = (n as f64).sqrt();

    let mut approx: Vec<f64> = field.scaling().iter().map(|v| v * scale).collect();
    for j in 0..levels {
        let detail = field.level(j);
        let len = approx.len() * 2;
        let mut next = vec![0.0; len];
        for k in 0..approx.len() {
            let (a, d) = (approx[k], detail[k] * scale);
            for (i, (hi, gi)) in h.iter().zip(&g).enumerate() {
                next[(2 * k + i) % len] += hi * a + gi * d;
            }
        }
        approx = next;
    }
    approx
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn all_bases() -> Vec<WaveletBasis> {
        let mut v = vec![WaveletBasis::haar()];
        v.extend((1..=10).map(|n| WaveletBasis::daubechies(n).unwrap()));
        v
    }

    #[test]
    fn filters_are_orthonormal() {
        for basis in all_bases() {
            let h = basis.filter();
            assert_eq!(h.len(), 2 * basis.vanishing_moments());
            for shift in (0..h.len()).step_by(2) {
                let dot: f64 = (0..h.len() - shift).map(|i| h[i] * h[i + shift]).sum();
                let expected = if shift == 0 { 1.0 } else { 0.0 };
                assert!((dot - expected).abs() < 1e-12, "{basis} shift {shift}: {dot}");
            }
            let sum: f64 = h.iter().sum();
            assert!((sum - std::f64::consts::SQRT_2).abs() < 1e-12);
        }
    }

    #[test]
    fn haar_filter_is_exact() {
        let b = WaveletBasis::haar();
        assert_eq!(b.vanishing_moments(), 1);
        assert_eq!(b.filter(), &[std::f64::consts::FRAC_1_SQRT_2; 2]);
    }

    #[test]
    fn constant_signal_has_no_detail() {
        for basis in [WaveletBasis::haar(), WaveletBasis::daubechies(2).unwrap()] {
            let f = analyze(&[3.5; 64], &basis).unwrap();
            assert!((f.scaling()[0] - 3.5).abs() < 1e-12);
            for j in 0..f.max_level() {
                assert!(f.level(j).iter().all(|v| v.abs() < 1e-12), "{basis} level {j}");
            }
        }
    }

    #[test]
    fn two_point_haar() {
        // (1/n) sum x_i psi(t_i) with psi = +1 on [0,1/2), -1 on [1/2,1)
        let f = analyze(&[1.0, -1.0], &WaveletBasis::haar()).unwrap();
        assert!(f.scaling()[0].abs() < 1e-15);
        assert!((f.level(0)[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_lengths() {
        assert!(analyze(&[1.0; 6], &WaveletBasis::haar()).is_err());
        assert!(analyze(&[], &WaveletBasis::haar()).is_err());
        assert!(analyze(&[1.0; 2], &WaveletBasis::daubechies(2).unwrap()).is_err());
    }

    #[test]
    fn synthesize_trivial_fields() {
        let basis = WaveletBasis::daubechies(3).unwrap();
        assert!(synthesize(&CoefficientField::zeros(5), &basis)
            .iter()
            .all(|&v| v == 0.0));
        let mut f = CoefficientField::zeros(5);
        f.scaling_mut()[0] = 2.0;
        for v in synthesize(&f, &basis) {
            assert!((v - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn round_trip_and_parseval() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for basis in all_bases() {
            for _ in 0..20 {
                let x: Vec<f64> = (0..1024).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let f = analyze(&x, &basis).unwrap();
                let energy = x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
                assert!((f.squared_norm() - energy).abs() <= 1e-10 * energy);
                let back = synthesize(&f, &basis);
                let err = x.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                assert!(err <= 1e-10, "{basis}: {err}");
            }
        }
    }

    #[test]
    fn vanishing_moments_kill_polynomials() {
        for n in 1..=3usize {
            let basis = WaveletBasis::daubechies(n).unwrap();
            let len = 256usize;
            // degree n-1 polynomial
            let x: Vec<f64> = (0..len)
                .map(|i| {
                    let t = i as f64 / len as f64;
                    (0..n).map(|p| (p as f64 + 1.0) * t.powi(p as i32)).sum()
                })
                .collect();
            let f = analyze(&x, &basis).unwrap();
            let finest = f.level(f.max_level() - 1);
            let taps = basis.filter().len();
            // coefficients whose filter window does not wrap around the period
            for (k, d) in finest.iter().enumerate().filter(|(k, _)| 2 * k + taps <= len) {
                assert!(d.abs() <= 1e-6, "db{n} k={k}: {d}");
            }
        }
    }

    #[test]
    fn basis_names() {
        assert!("haar".parse::<WaveletBasis>().unwrap().is_haar());
        let db4: WaveletBasis = "db4".parse().unwrap();
        assert_eq!(db4.vanishing_moments(), 4);
        assert_eq!(db4.to_string(), "db4");
        assert!("db11".parse::<WaveletBasis>().is_err());
        assert!("sym2".parse::<WaveletBasis>().is_err());
    }
}
