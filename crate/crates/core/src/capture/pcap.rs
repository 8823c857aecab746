//! Classic pcap container (not pcapng), both byte orders, micro- and
//! nanosecond timestamp variants.

const MAGIC_US: u32 = 0xa1b2_c3d4;
const MAGIC_NS: u32 = 0xa1b2_3c4d;
pub const GLOBAL_HEADER_LEN: usize = 24;
pub const RECORD_HEADER_LEN: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GlobalHeader {
    pub little_endian: bool,
    pub nanos: bool,
    pub snaplen: u32,
    pub network: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Record<'a> {
    /// Microseconds since the Unix epoch.
    pub ts_micros: u64,
    pub orig_len: u32,
    pub data: &'a [u8],
}

pub fn read_global_header(buf: &[u8]) -> Option<GlobalHeader> {
    if buf.len() < GLOBAL_HEADER_LEN {
        return None;
    }
    let raw: [u8; 4] = buf[0..4].try_into().unwrap();
    let (little_endian, nanos) = match (u32::from_le_bytes(raw), u32::from_be_bytes(raw)) {
        (MAGIC_US, _) => (true, false),
        (MAGIC_NS, _) => (true, true),
        (_, MAGIC_US) => (false, false),
        (_, MAGIC_NS) => (false, true),
        _ => return None,
    };
    let rd = |o: usize| read_u32(buf, o, little_endian);
    let major = if little_endian {
        u16::from_le_bytes([buf[4], buf[5]])
    } else {
        u16::from_be_bytes([buf[4], buf[5]])
    };
    if major != 2 {
        return None;
    }
    Some(GlobalHeader { little_endian, nanos, snaplen: rd(16), network: rd(20) })
}

fn read_u32(buf: &[u8], off: usize, le: bool) -> u32 {
    let b: [u8; 4] = buf[off..off + 4].try_into().unwrap();
    if le {
        u32::from_le_bytes(b)
    } else {
        u32::from_be_bytes(b)
    }
}

/// Iterates records after the global header. Stops at the first record
/// whose header or data runs past the end of the buffer and reports that
/// through [`Records::truncated_tail`].
pub struct Records<'a> {
    buf: &'a [u8],
    off: usize,
    header: GlobalHeader,
    truncated_tail: bool,
}

impl<'a> Records<'a> {
    pub fn new(buf: &'a [u8], header: GlobalHeader) -> Self {
        Records { buf, off: GLOBAL_HEADER_LEN, header, truncated_tail: false }
    }

    pub fn truncated_tail(&self) -> bool {
        self.truncated_tail
    }
}

impl<'a> Iterator for Records<'a> {
    type Item = Record<'a>;

    fn next(&mut self) -> Option<Record<'a>> {
        let remaining = self.buf.len() - self.off;
        if remaining == 0 {
            return None;
        }
        if remaining < RECORD_HEADER_LEN {
            self.truncated_tail = true;
            self.off = self.buf.len();
            return None;
        }
        let le = self.header.little_endian;
        let sec = read_u32(self.buf, self.off, le) as u64;
        let frac = read_u32(self.buf, self.off + 4, le) as u64;
        let incl = read_u32(self.buf, self.off + 8, le) as usize;
        let orig = read_u32(self.buf, self.off + 12, le);
        let start = self.off + RECORD_HEADER_LEN;
        if start + incl > self.buf.len() {
            self.truncated_tail = true;
            self.off = self.buf.len();
            return None;
        }
        self.off = start + incl;
        let sub_us = if self.header.nanos { frac / 1000 } else { frac };
        Some(Record {
            ts_micros: sec * 1_000_000 + sub_us,
            orig_len: orig.max(incl as u32),
            data: &self.buf[start..start + incl],
        })
    }
}

pub fn write_global_header(out: &mut Vec<u8>, network: u32) {
    out.extend_from_slice(&MAGIC_US.to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&4u16.to_le_bytes());
    out.extend_from_slice(&0i32.to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    out.extend_from_slice(&65_535u32.to_le_bytes());
    out.extend_from_slice(&network.to_le_bytes());
}

pub fn write_record(out: &mut Vec<u8>, ts_micros: u64, data: &[u8]) {
    out.extend_from_slice(&((ts_micros / 1_000_000) as u32).to_le_bytes());
    out.extend_from_slice(&((ts_micros % 1_000_000) as u32).to_le_bytes());
    out.extend_from_slice(&(data.len() as u32).to_le_bytes());
    out.extend_from_slice(&(data.len() as u32).to_le_bytes());
    out.extend_from_slice(data);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn swap_header_to_be(buf: &mut [u8]) {
        for range in [0..4, 8..12, 12..16, 16..20, 20..24] {
            buf[range].reverse();
        }
        buf[4..6].reverse();
        buf[6..8].reverse();
    }

    #[test]
    fn big_endian_nanosecond_file() {
        let mut buf = Vec::new();
        write_global_header(&mut buf, 127);
        swap_header_to_be(&mut buf);
        buf[0..4].copy_from_slice(&MAGIC_NS.to_be_bytes());
        buf.extend_from_slice(&3u32.to_be_bytes());
        buf.extend_from_slice(&2_500_000u32.to_be_bytes());
        buf.extend_from_slice(&2u32.to_be_bytes());
        buf.extend_from_slice(&2u32.to_be_bytes());
        buf.extend_from_slice(&[7, 8]);
        let h = read_global_header(&buf).unwrap();
        assert!(!h.little_endian && h.nanos);
        assert_eq!(h.network, 127);
        let recs: Vec<_> = Records::new(&buf, h).collect();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].ts_micros, 3_002_500);
        assert_eq!(recs[0].data, &[7, 8]);
    }

    #[test]
    fn bad_magic_and_truncated_tail() {
        assert!(read_global_header(&[0u8; 24]).is_none());
        let mut buf = Vec::new();
        write_global_header(&mut buf, 127);
        write_record(&mut buf, 1, &[1, 2, 3]);
        buf.extend_from_slice(&[0u8; 10]);
        let h = read_global_header(&buf).unwrap();
        let mut it = Records::new(&buf, h);
        assert!(it.next().is_some());
        assert!(it.next().is_none());
        assert!(it.truncated_tail());
    }
}
