//! Butterworth IIR design (bilinear transform, second-order sections) and
//! zero-phase forward-backward application.

use ndarray::{Array2, Axis, Zip};
use rustfft::num_complex::Complex64;

use super::recording::{FrequencyBand, MultiChannelRecording};
use crate::error::{Error, Result};

/// One second-order section, `a[0] == 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

impl Biquad {
    fn dc_gain(&self) -> f64 {
        (self.b[0] + self.b[1] + self.b[2]) / (self.a[0] + self.a[1] + self.a[2])
    }

    /// Transposed direct-form II state after a unit step has settled.
    fn step_state(&self) -> [f64; 2] {
        let g = self.dc_gain();
        let z2 = self.b[2] - self.a[2] * g;
        let z1 = self.b[1] - self.a[1] * g + z2;
        [z1, z2]
    }
}

/// Cascade of second-order sections.
#[derive(Clone, Debug, PartialEq)]
pub struct SosFilter {
    sections: Vec<Biquad>,
    order: usize,
}

#[derive(Clone, Copy)]
enum Shape {
    Lowpass(f64),
    Highpass(f64),
    Bandpass(f64, f64),
}

impl SosFilter {
    pub fn butter_lowpass(order: usize, cutoff_hz: f64, sample_rate_hz: f64) -> Result<Self> {
        check_edge(cutoff_hz, sample_rate_hz)?;
        Self::design(order, Shape::Lowpass(cutoff_hz), sample_rate_hz)
    }

    pub fn butter_highpass(order: usize, cutoff_hz: f64, sample_rate_hz: f64) -> Result<Self> {
        check_edge(cutoff_hz, sample_rate_hz)?;
        Self::design(order, Shape::Highpass(cutoff_hz), sample_rate_hz)
    }

    /// Band-pass of `order` (the filter has `2 * order` poles).
    pub fn butter_bandpass(order: usize, band: FrequencyBand, sample_rate_hz: f64) -> Result<Self> {
        if !(band.low_hz > 0.0 && band.high_hz < sample_rate_hz / 2.0 && band.low_hz < band.high_hz) {
            return Err(Error::BandOutOfRange {
                low_hz: band.low_hz,
                high_hz: band.high_hz,
                sample_rate_hz,
            });
        }
        Self::design(order, Shape::Bandpass(band.low_hz, band.high_hz), sample_rate_hz)
    }

    pub fn sections(&self) -> &[Biquad] {
        &self.sections
    }

    pub fn order(&self) -> usize {
        self.order
    }

    fn design(order: usize, shape: Shape, fs: f64) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidArgument("filter order must be at least 1".into()));
        }
        let fs2 = 2.0 * fs;
        let warp = |f: f64| fs2 * (std::f64::consts::PI * f / fs).tan();

        // Analog prototype with unit cutoff, poles on the left half circle.
        let proto: Vec<Complex64> = (0..order)
            .map(|k| {
                let m = -(order as f64) + 1.0 + 2.0 * k as f64;
                -Complex64::from_polar(1.0, std::f64::consts::PI * m / (2.0 * order as f64))
            })
            .collect();

        let (zeros, poles, gain) = match shape {
            Shape::Lowpass(fc) => {
                let wc = warp(fc);
                let poles: Vec<_> = proto.iter().map(|p| p * wc).collect();
                (Vec::new(), poles, wc.powi(order as i32))
            }
            Shape::Highpass(fc) => {
                let wc = warp(fc);
                let poles: Vec<_> = proto.iter().map(|p| wc / p).collect();
                (vec![Complex64::new(0.0, 0.0); order], poles, 1.0)
            }
            Shape::Bandpass(lo, hi) => {
                let (w1, w2) = (warp(lo), warp(hi));
                let bw = w2 - w1;
                let w0 = (w1 * w2).sqrt();
                let mut poles = Vec::with_capacity(2 * order);
                for p in &proto {
                    let half = p * (bw / 2.0);
                    let disc = (half * half - w0 * w0).sqrt();
                    poles.push(half + disc);
                    poles.push(half - disc);
                }
                (vec![Complex64::new(0.0, 0.0); order], poles, bw.powi(order as i32))
            }
        };

        // Bilinear transform; surplus analog zeros at infinity land on z = -1.
        let fs2c = Complex64::new(fs2, 0.0);
        let mut zd: Vec<Complex64> = zeros.iter().map(|z| (fs2c + z) / (fs2c - z)).collect();
        let pd: Vec<Complex64> = poles.iter().map(|p| (fs2c + p) / (fs2c - p)).collect();
        while zd.len() < pd.len() {
            zd.push(Complex64::new(-1.0, 0.0));
        }
        let num: Complex64 = zeros.iter().map(|z| fs2c - z).product();
        let den: Complex64 = poles.iter().map(|p| fs2c - p).product();
        let kd = gain * (num / den).re;

        Ok(Self {
            sections: to_sections(&zd, &pd, kd),
            order,
        })
    }

    /// Complex response at `f_hz`.
    pub fn response(&self, f_hz: f64, sample_rate_hz: f64) -> Complex64 {
        let w = 2.0 * std::f64::consts::PI * f_hz / sample_rate_hz;
        let z1 = Complex64::from_polar(1.0, -w);
        let z2 = z1 * z1;
        self.sections
            .iter()
            .map(|s| (s.b[0] + s.b[1] * z1 + s.b[2] * z2) / (s.a[0] + s.a[1] * z1 + s.a[2] * z2))
            .product()
    }

    /// Causal single pass. `initial` scales the settled step state of each
    /// section, so a constant input equal to `initial` produces no transient.
    pub fn filter_in_place(&self, x: &mut [f64], initial: f64) {
        let mut scale = initial;
        for s in &self.sections {
            let [mut z1, mut z2] = s.step_state();
            z1 *= scale;
            z2 *= scale;
            for v in x.iter_mut() {
                let xin = *v;
                let y = s.b[0] * xin + z1;
                z1 = s.b[1] * xin - s.a[1] * y + z2;
                z2 = s.b[2] * xin - s.a[2] * y;
                *v = y;
            }
            scale *= s.dc_gain();
        }
    }

    /// Forward-backward application with odd reflective padding of `pad`
    /// samples at each end. Net phase is zero and the magnitude response is
    /// squared.
    pub fn filtfilt(&self, x: &[f64], pad: usize) -> Result<Vec<f64>> {
        let n = x.len();
        if n <= pad || n < 2 {
            return Err(Error::TooShort {
                needed: pad + 1,
                got: n,
            });
        }
        let mut ext = Vec::with_capacity(n + 2 * pad);
        let (first, last) = (x[0], x[n - 1]);
        ext.extend((1..=pad).rev().map(|i| 2.0 * first - x[i]));
        ext.extend_from_slice(x);
        ext.extend((1..=pad).map(|i| 2.0 * last - x[n - 1 - i]));

        let x0 = ext[0];
        self.filter_in_place(&mut ext, x0);
        ext.reverse();
        let y0 = ext[0];
        self.filter_in_place(&mut ext, y0);
        ext.reverse();
        Ok(ext[pad..pad + n].to_vec())
    }

    /// Row-wise [`filtfilt`](Self::filtfilt) on a channels x samples matrix.
    pub fn filtfilt_rows(&self, data: &Array2<f64>, pad: usize) -> Result<Array2<f64>> {
        let mut out = Array2::zeros(data.raw_dim());
        for (src, mut dst) in data.axis_iter(Axis(0)).zip(out.axis_iter_mut(Axis(0))) {
            let row = src.to_vec();
            let filtered = self.filtfilt(&row, pad)?;
            Zip::from(&mut dst).and(&filtered[..]).for_each(|d, &f| *d = f);
        }
        Ok(out)
    }
}

fn check_edge(f: f64, fs: f64) -> Result<()> {
    if !(f > 0.0 && f < fs / 2.0) {
        return Err(Error::BandOutOfRange {
            low_hz: f,
            high_hz: f,
            sample_rate_hz: fs,
        });
    }
    Ok(())
}

/// Groups digital zeros and poles into second-order sections. Complex poles
/// are kept with their conjugates; zeros (always real here) are paired
/// outermost-first so band-pass sections each get one zero at +1 and one at -1.
fn to_sections(zeros: &[Complex64], poles: &[Complex64], gain: f64) -> Vec<Biquad> {
    const IMAG_EPS: f64 = 1e-12;

    let mut pole_groups: Vec<Vec<f64>> = Vec::new(); // polynomial coefficients [1, a1, a2]
    let mut real_poles = Vec::new();
    for p in poles {
        if p.im > IMAG_EPS {
            pole_groups.push(vec![1.0, -2.0 * p.re, p.norm_sqr()]);
        } else if p.im.abs() <= IMAG_EPS {
            real_poles.push(p.re);
        }
    }
    real_poles.sort_by(|a, b| a.total_cmp(b));
    for pair in real_poles.chunks(2) {
        match pair {
            [a, b] => pole_groups.push(vec![1.0, -(a + b), a * b]),
            [a] => pole_groups.push(vec![1.0, -a, 0.0]),
            _ => unreachable!(),
        }
    }

    let mut zr: Vec<f64> = zeros.iter().map(|z| z.re).collect();
    zr.sort_by(|a, b| a.total_cmp(b));
    let mut zero_groups = Vec::new();
    let (mut lo, mut hi) = (0usize, zr.len());
    while lo < hi {
        if hi - lo >= 2 {
            let (a, b) = (zr[lo], zr[hi - 1]);
            zero_groups.push([1.0, -(a + b), a * b]);
            lo += 1;
            hi -= 1;
        } else {
            zero_groups.push([1.0, -zr[lo], 0.0]);
            lo += 1;
        }
    }

    let mut sections: Vec<Biquad> = pole_groups
        .iter()
        .enumerate()
        .map(|(i, a)| Biquad {
            b: zero_groups.get(i).copied().unwrap_or([1.0, 0.0, 0.0]),
            a: [a[0], a[1], a[2]],
        })
        .collect();
    if let Some(first) = sections.first_mut() {
        for c in first.b.iter_mut() {
            *c *= gain;
        }
    }
    sections
}

/// Padding applied at each end by [`bandpass_filter`].
pub fn edge_padding(order: usize) -> usize {
    3 * (order + 1)
}

/// Zero-phase Butterworth band-pass of every channel.
pub fn bandpass_filter(rec: &MultiChannelRecording, band: FrequencyBand, order: usize) -> Result<MultiChannelRecording> {
    if order == 0 {
        return Err(Error::InvalidArgument("filter order must be at least 1".into()));
    }
    let fs = rec.sample_rate_hz();
    let needed = 2 * (3 * order + 1);
    if rec.n_samples() < needed {
        return Err(Error::TooShort {
            needed,
            got: rec.n_samples(),
        });
    }
    let filter = SosFilter::butter_bandpass(order, band, fs)?;
    let out = filter.filtfilt_rows(&rec.data().to_owned(), edge_padding(order))?;
    rec.with_data(out)
}

const RESAMPLE_LOWPASS_ORDER: usize = 4;

/// Anti-alias low-pass at 0.45 x the lower of the two rates, then linear
/// interpolation onto the target grid.
pub fn resample(rec: &MultiChannelRecording, target_rate_hz: f64) -> Result<MultiChannelRecording> {
    if !(target_rate_hz.is_finite() && target_rate_hz > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "target rate must be positive, got {target_rate_hz}"
        )));
    }
    let fs = rec.sample_rate_hz();
    let n_in = rec.n_samples();
    let n_out = (n_in as f64 * target_rate_hz / fs).round() as usize;

    let cutoff = 0.45 * fs.min(target_rate_hz);
    let lowpass = SosFilter::butter_lowpass(RESAMPLE_LOWPASS_ORDER, cutoff, fs)?;
    let smoothed = if n_in > edge_padding(RESAMPLE_LOWPASS_ORDER) {
        lowpass.filtfilt_rows(&rec.data().to_owned(), edge_padding(RESAMPLE_LOWPASS_ORDER))?
    } else {
        rec.data().to_owned()
    };

    let mut out = Array2::zeros((rec.n_channels(), n_out));
    for (src, mut dst) in smoothed.axis_iter(Axis(0)).zip(out.axis_iter_mut(Axis(0))) {
        for (j, d) in dst.iter_mut().enumerate() {
            let pos = j as f64 * fs / target_rate_hz;
            let i = pos.floor() as usize;
            *d = if i + 1 >= n_in {
                src[n_in - 1]
            } else {
                let frac = pos - i as f64;
                src[i] * (1.0 - frac) + src[i + 1] * frac
            };
        }
    }
    MultiChannelRecording::new(rec.labels().to_vec(), rec.kinds().to_vec(), target_rate_hz, out)
}
