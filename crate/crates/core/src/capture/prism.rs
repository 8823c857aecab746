//! Prism monitoring header (link type 119).
//!
//! Layout: msgcode, msglen, 16-byte device name, then ten 12-byte items
//! (did, status, len, data) in the order hosttime, mactime, channel, rssi,
//! sq, signal, noise, rate, istx, frmlen. Items are host byte order; the
//! order is inferred from msglen.

use crate::frame::PhyRate;

const ITEMS_OFFSET: usize = 24;
const ITEM_LEN: usize = 12;
const ITEM_MACTIME: usize = 1;
const ITEM_CHANNEL: usize = 2;
const ITEM_SIGNAL: usize = 5;
const ITEM_RATE: usize = 7;
const MIN_LEN: usize = ITEMS_OFFSET + 10 * ITEM_LEN;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PrismInfo {
    pub header_len: usize,
    pub mactime: Option<u32>,
    pub channel: Option<u8>,
    pub dbm_signal: Option<i8>,
    pub rate: Option<PhyRate>,
}

pub fn parse(buf: &[u8]) -> Option<PrismInfo> {
    if buf.len() < MIN_LEN {
        return None;
    }
    let le = u32::from_le_bytes(buf[4..8].try_into().unwrap());
    let be = u32::from_be_bytes(buf[4..8].try_into().unwrap());
    let (little, msglen) = if (MIN_LEN as u32..=1024).contains(&le) {
        (true, le as usize)
    } else if (MIN_LEN as u32..=1024).contains(&be) {
        (false, be as usize)
    } else {
        return None;
    };
    if msglen > buf.len() {
        return None;
    }
    let read_u16 = |b: &[u8]| {
        let a = [b[0], b[1]];
        if little { u16::from_le_bytes(a) } else { u16::from_be_bytes(a) }
    };
    let read_u32 = |b: &[u8]| {
        let a = [b[0], b[1], b[2], b[3]];
        if little { u32::from_le_bytes(a) } else { u32::from_be_bytes(a) }
    };
    // status 0 means the item carries a value
    let item = |n: usize| {
        let b = &buf[ITEMS_OFFSET + n * ITEM_LEN..ITEMS_OFFSET + (n + 1) * ITEM_LEN];
        (read_u16(&b[4..6]) == 0).then(|| read_u32(&b[8..12]))
    };
    Some(PrismInfo {
        header_len: msglen,
        mactime: item(ITEM_MACTIME),
        channel: item(ITEM_CHANNEL).and_then(|c| u8::try_from(c).ok()).filter(|&c| c > 0),
        dbm_signal: item(ITEM_SIGNAL).map(|s| s as i32 as i8),
        rate: item(ITEM_RATE).filter(|&r| r > 0).map(|r| PhyRate::from_kbps(r * 500)),
    })
}

/// Builds a little-endian prism header; used by tests and fixtures.
pub fn write(out: &mut Vec<u8>, mactime: u32, channel: u8, signal: Option<i8>, rate: PhyRate) {
    out.extend_from_slice(&0x0000_0044u32.to_le_bytes());
    out.extend_from_slice(&(MIN_LEN as u32).to_le_bytes());
    let mut dev = [0u8; 16];
    dev[..5].copy_from_slice(b"wlan0");
    out.extend_from_slice(&dev);
    let values: [Option<u32>; 10] = [
        Some(0),
        Some(mactime),
        Some(channel as u32),
        None,
        None,
        signal.map(|s| s as i32 as u32),
        None,
        Some(rate.kbps() / 500),
        Some(0),
        None,
    ];
    for (i, v) in values.iter().enumerate() {
        out.extend_from_slice(&(0x0001_0044u32 + ((i as u32 + 1) << 8)).to_le_bytes());
        out.extend_from_slice(&(if v.is_some() { 0u16 } else { 1u16 }).to_le_bytes());
        out.extend_from_slice(&4u16.to_le_bytes());
        out.extend_from_slice(&v.unwrap_or(0).to_le_bytes());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_absent_signal() {
        let mut buf = Vec::new();
        write(&mut buf, 99, 6, Some(-81), PhyRate::from_mbps(2.0));
        let info = parse(&buf).unwrap();
        assert_eq!(info.header_len, 144);
        assert_eq!(info.channel, Some(6));
        assert_eq!(info.dbm_signal, Some(-81));
        assert_eq!(info.rate, Some(PhyRate::from_mbps(2.0)));

        let mut buf = Vec::new();
        write(&mut buf, 99, 6, None, PhyRate::from_mbps(2.0));
        assert_eq!(parse(&buf).unwrap().dbm_signal, None);
        assert!(parse(&buf[..100]).is_none());
    }
}
