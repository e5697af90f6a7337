//! Binary spike rasters: the matrix X ∈ {0,1}^{N×T} every encoder produces and
//! every spiking component consumes.

use crate::error::{Error, Result};

/// Dense binary spike matrix; rows are channels, columns are time steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpikeRaster {
    channels: usize,
    steps: usize,
    bits: Vec<bool>, // row-major
}

impl SpikeRaster {
    /// An all-zero raster with `channels` rows and `steps` columns.
    pub fn zeros(channels: usize, steps: usize) -> Result<Self> {
        if channels == 0 || steps == 0 {
            return Err(Error::Config(format!(
                "raster dimensions must be positive, got {channels}x{steps}"
            )));
        }
        Ok(Self { channels, steps, bits: vec![false; channels * steps] })
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    #[inline]
    pub fn get(&self, channel: usize, step: usize) -> bool {
        self.bits[channel * self.steps + step]
    }

    #[inline]
    pub fn set(&mut self, channel: usize, step: usize, value: bool) {
        self.bits[channel * self.steps + step] = value;
    }

    /// One time column as a slice of rows.
    pub fn column(&self, step: usize) -> impl Iterator<Item = bool> + '_ {
        (0..self.channels).map(move |c| self.get(c, step))
    }

    pub fn row_count(&self, channel: usize) -> usize {
        (0..self.steps).filter(|&t| self.get(channel, t)).count()
    }

    pub fn total_spikes(&self) -> u64 {
        self.bits.iter().filter(|&&b| b).count() as u64
    }

    /// Spike step indices of one row.
    pub fn row_steps(&self, channel: usize) -> Vec<usize> {
        (0..self.steps).filter(|&t| self.get(channel, t)).collect()
    }

    /// Serialize to the SPKR container: magic "SPKR", little-endian u32 N and T,
    /// then the row-major bit stream packed most-significant bit first.
    pub fn to_spkr(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(12 + self.bits.len() / 8 + 1);
        out.extend_from_slice(b"SPKR");
        out.extend_from_slice(&(self.channels as u32).to_le_bytes());
        out.extend_from_slice(&(self.steps as u32).to_le_bytes());
        let mut byte = 0u8;
        for (i, &bit) in self.bits.iter().enumerate() {
            if bit {
                byte |= 128 >> (i % 8);
            }
            if i % 8 == 7 {
                out.push(byte);
                byte = 0;
            }
        }
        if self.bits.len() % 8 != 0 {
            out.push(byte);
        }
        out
    }

    /// Parse the SPKR container written by [`SpikeRaster::to_spkr`].
    pub fn from_spkr(data: &[u8]) -> Result<Self> {
        if data.len() < 12 || &data[..4] != b"SPKR" {
            return Err(Error::Format("missing SPKR magic".into()));
        }
        let channels = u32::from_le_bytes(data[4..8].try_into().unwrap()) as usize;
        let steps = u32::from_le_bytes(data[8..12].try_into().unwrap()) as usize;
        let nbits = channels
            .checked_mul(steps)
            .ok_or_else(|| Error::Format("raster dimensions overflow".into()))?;
        let nbytes = nbits.div_ceil(8);
        if data.len() != 12 + nbytes {
            return Err(Error::Format(format!(
                "expected {} payload bytes, found {}",
                nbytes,
                data.len() - 12
            )));
        }
        let mut raster = Self::zeros(channels, steps)?;
        for i in 0..nbits {
            raster.bits[i] = data[12 + i / 8] & (128 >> (i % 8)) != 0;
        }
        Ok(raster)
    }

    /// Serialize as sparse CSV: one row per channel, `channel,t1 t2 ...` with
    /// spike steps space-separated (empty list for silent channels).
    pub fn to_rle_csv(&self) -> String {
        let mut out = String::from("channel,spike_steps\n");
        for c in 0..self.channels {
            let steps: Vec<String> = self.row_steps(c).iter().map(|t| t.to_string()).collect();
            out.push_str(&format!("{},{}\n", c, steps.join(" ")));
        }
        out
    }

    /// Parse the CSV written by [`SpikeRaster::to_rle_csv`]; `steps` supplies the
    /// horizon, which the sparse form does not carry.
    pub fn from_rle_csv(text: &str, steps: usize) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some("channel,spike_steps") => {}
            _ => return Err(Error::Format("missing raster CSV header".into())),
        }
        let rows: Vec<&str> = lines.filter(|l| !l.trim().is_empty()).collect();
        let mut raster = Self::zeros(rows.len().max(1), steps)?;
        if rows.is_empty() {
            return Err(Error::Format("raster CSV has no channel rows".into()));
        }
        for (i, line) in rows.iter().enumerate() {
            let (ch, list) = line
                .split_once(',')
                .ok_or_else(|| Error::Format(format!("bad raster CSV row: {line}")))?;
            let ch: usize = ch
                .trim()
                .parse()
                .map_err(|_| Error::Format(format!("bad channel index: {ch}")))?;
            if ch != i {
                return Err(Error::Format(format!("channel rows out of order at {ch}")));
            }
            for tok in list.split_whitespace() {
                let t: usize = tok
                    .parse()
                    .map_err(|_| Error::Format(format!("bad spike step: {tok}")))?;
                if t >= steps {
                    return Err(Error::Format(format!("spike step {t} beyond horizon {steps}")));
                }
                raster.set(ch, t, true);
            }
        }
        Ok(raster)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SpikeRaster {
        let mut r = SpikeRaster::zeros(3, 5).unwrap();
        r.set(0, 0, true);
        r.set(0, 4, true);
        r.set(2, 1, true);
        r
    }

    #[test]
    fn spkr_round_trip() {
        let r = sample();
        let bytes = r.to_spkr();
        assert_eq!(&bytes[..4], b"SPKR");
        assert_eq!(bytes.len(), 12 + (3 * 5usize).div_ceil(8));
        assert_eq!(SpikeRaster::from_spkr(&bytes).unwrap(), r);
    }

    #[test]
    fn spkr_packs_msb_first_across_rows() {
        // 2x4 raster: bit stream r0t0..r0t3 r1t0..r1t3 shares one byte.
        let mut r = SpikeRaster::zeros(2, 4).unwrap();
        r.set(0, 0, true); // bit 7
        r.set(1, 0, true); // bit 3
        let bytes = r.to_spkr();
        assert_eq!(bytes[12], 0b1000_1000);
    }

    #[test]
    fn spkr_rejects_bad_magic_and_truncation() {
        assert!(SpikeRaster::from_spkr(b"NOPE").is_err());
        let mut bytes = sample().to_spkr();
        bytes.pop();
        assert!(SpikeRaster::from_spkr(&bytes).is_err());
    }

    #[test]
    fn rle_csv_round_trip() {
        let r = sample();
        let csv = r.to_rle_csv();
        assert_eq!(SpikeRaster::from_rle_csv(&csv, 5).unwrap(), r);
    }

    #[test]
    fn counts_match_bits() {
        let r = sample();
        assert_eq!(r.total_spikes(), 3);
        assert_eq!(r.row_count(0), 2);
        assert_eq!(r.row_count(1), 0);
        assert_eq!(r.row_steps(2), vec![1]);
    }

    #[test]
    fn zero_dimensions_rejected() {
        assert!(SpikeRaster::zeros(0, 4).is_err());
        assert!(SpikeRaster::zeros(4, 0).is_err());
    }
}
