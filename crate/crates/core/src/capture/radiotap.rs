//! Radiotap header (link type 127).

use crate::frame::PhyRate;

const F_TSFT: u32 = 0;
const F_FLAGS: u32 = 1;
const F_RATE: u32 = 2;
const F_CHANNEL: u32 = 3;
const F_DBM_ANTSIGNAL: u32 = 5;
const F_MCS: u32 = 19;
const EXT_BIT: u32 = 31;

const FLAG_FCS_AT_END: u8 = 0x10;
const FLAG_BAD_FCS: u8 = 0x40;

const CHAN_CCK: u16 = 0x0020;
const CHAN_OFDM: u16 = 0x0040;
const CHAN_2GHZ: u16 = 0x0080;
const CHAN_5GHZ: u16 = 0x0100;

/// (alignment, size) of radiotap fields 0..=22.
const FIELDS: [(usize, usize); 23] = [
    (8, 8),  // TSFT
    (1, 1),  // Flags
    (1, 1),  // Rate
    (2, 4),  // Channel
    (1, 2),  // FHSS
    (1, 1),  // dBm antenna signal
    (1, 1),  // dBm antenna noise
    (2, 2),  // lock quality
    (2, 2),  // TX attenuation
    (2, 2),  // dB TX attenuation
    (1, 1),  // dBm TX power
    (1, 1),  // antenna
    (1, 1),  // dB antenna signal
    (1, 1),  // dB antenna noise
    (2, 2),  // RX flags
    (2, 2),  // TX flags
    (1, 1),  // RTS retries
    (1, 1),  // data retries
    (4, 8),  // XChannel
    (1, 3),  // MCS
    (4, 8),  // A-MPDU status
    (2, 12), // VHT
    (8, 12), // timestamp
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadiotapError {
    Truncated,
    BadVersion,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RadiotapInfo {
    pub header_len: usize,
    pub tsft: Option<u64>,
    pub flags: u8,
    pub rate: Option<PhyRate>,
    pub freq_mhz: Option<u16>,
    pub dbm_signal: Option<i8>,
}

impl RadiotapInfo {
    pub fn fcs_len(&self) -> usize {
        if self.flags & FLAG_FCS_AT_END != 0 {
            4
        } else {
            0
        }
    }

    pub fn bad_fcs(&self) -> bool {
        self.flags & FLAG_BAD_FCS != 0
    }
}

pub fn parse(buf: &[u8]) -> Result<RadiotapInfo, RadiotapError> {
    if buf.len() < 8 {
        return Err(RadiotapError::Truncated);
    }
    if buf[0] != 0 {
        return Err(RadiotapError::BadVersion);
    }
    let header_len = u16::from_le_bytes([buf[2], buf[3]]) as usize;
    if header_len < 8 || header_len > buf.len() {
        return Err(RadiotapError::Truncated);
    }
    let hdr = &buf[..header_len];
    let present = u32::from_le_bytes([hdr[4], hdr[5], hdr[6], hdr[7]]);

    // Skip any extended presence words.
    let mut off = 8;
    let mut word = present;
    while word & (1 << EXT_BIT) != 0 {
        if off + 4 > header_len {
            return Err(RadiotapError::Truncated);
        }
        word = u32::from_le_bytes([hdr[off], hdr[off + 1], hdr[off + 2], hdr[off + 3]]);
        off += 4;
    }

    let mut info = RadiotapInfo { header_len, ..Default::default() };
    let mut mcs_rate = None;
    for (bit, &(align, size)) in FIELDS.iter().enumerate() {
        let bit = bit as u32;
        if present & (1 << bit) == 0 {
            continue;
        }
        off = off.next_multiple_of(align);
        if off + size > header_len {
            return Err(RadiotapError::Truncated);
        }
        let f = &hdr[off..off + size];
        match bit {
            F_TSFT => info.tsft = Some(u64::from_le_bytes(f.try_into().unwrap())),
            F_FLAGS => info.flags = f[0],
            F_RATE if f[0] != 0 => info.rate = Some(PhyRate::from_kbps(f[0] as u32 * 500)),
            F_CHANNEL => info.freq_mhz = Some(u16::from_le_bytes([f[0], f[1]])),
            F_DBM_ANTSIGNAL => info.dbm_signal = Some(f[0] as i8),
            F_MCS => mcs_rate = mcs_to_rate(f[0], f[1], f[2]),
            _ => {}
        }
        off += size;
    }
    // Fields past bit 22 are never needed and sit after the ones we read.
    if info.rate.is_none() {
        info.rate = mcs_rate;
    }
    Ok(info)
}

/// HT rate for an MCS index, bandwidth and guard interval.
fn mcs_to_rate(known: u8, flags: u8, index: u8) -> Option<PhyRate> {
    const BW20: [u32; 8] = [6500, 13000, 19500, 26000, 39000, 52000, 58500, 65000];
    const BW40: [u32; 8] = [13500, 27000, 40500, 54000, 81000, 108000, 121500, 135000];
    if known & 0x02 == 0 || index >= 32 {
        return None;
    }
    let bw40 = known & 0x01 != 0 && flags & 0x03 == 1;
    let short_gi = known & 0x04 != 0 && flags & 0x04 != 0;
    let streams = (index / 8 + 1) as u32;
    let base = if bw40 { BW40 } else { BW20 }[(index % 8) as usize] * streams;
    let kbps = if short_gi { (base * 10 + 4) / 9 } else { base };
    Some(PhyRate::from_kbps(kbps))
}

pub fn channel_to_freq(channel: u8) -> Option<u16> {
    match channel {
        1..=13 => Some(2407 + 5 * channel as u16),
        14 => Some(2484),
        32..=177 => Some(5000 + 5 * channel as u16),
        _ => None,
    }
}

pub fn freq_to_channel(freq: u16) -> Option<u8> {
    match freq {
        2484 => Some(14),
        2412..=2472 if (freq - 2407).is_multiple_of(5) => Some(((freq - 2407) / 5) as u8),
        5160..=5885 if freq.is_multiple_of(5) => Some(((freq - 5000) / 5) as u8),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RadiotapWriteError {
    #[error("rate {0} kbps is not a multiple of 500 kbps below 127.5 Mbps")]
    Rate(u32),
    #[error("channel {0} has no known centre frequency")]
    Channel(u8),
}

/// Writes the fixed field set TSFT, Flags, Rate, Channel and, when present,
/// dBm antenna signal.
pub fn write(
    out: &mut Vec<u8>,
    tsft: u64,
    rate: PhyRate,
    channel: u8,
    rssi: Option<i8>,
) -> Result<(), RadiotapWriteError> {
    let kbps = rate.kbps();
    if kbps == 0 || !kbps.is_multiple_of(500) || kbps / 500 > 255 {
        return Err(RadiotapWriteError::Rate(kbps));
    }
    let freq = channel_to_freq(channel).ok_or(RadiotapWriteError::Channel(channel))?;
    let mut present = (1 << F_TSFT) | (1 << F_FLAGS) | (1 << F_RATE) | (1 << F_CHANNEL);
    if rssi.is_some() {
        present |= 1 << F_DBM_ANTSIGNAL;
    }
    let len: u16 = if rssi.is_some() { 23 } else { 22 };
    let mut chan_flags = if channel <= 14 { CHAN_2GHZ } else { CHAN_5GHZ };
    chan_flags |= if rate.is_dsss() { CHAN_CCK } else { CHAN_OFDM };

    out.extend_from_slice(&[0, 0]);
    out.extend_from_slice(&len.to_le_bytes());
    out.extend_from_slice(&(present as u32).to_le_bytes());
    out.extend_from_slice(&tsft.to_le_bytes());
    out.push(0);
    out.push((kbps / 500) as u8);
    out.extend_from_slice(&freq.to_le_bytes());
    out.extend_from_slice(&chan_flags.to_le_bytes());
    if let Some(r) = rssi {
        out.push(r as u8);
    }
    Ok(())
}
