//! 802.11 MAC header and management-body codec.
//!
//! Only the fields carried by [`Frame`] are decoded. Information elements
//! other than SSID and QBSS Load are skipped.

use crate::frame::{Frame, FrameKind, MacAddr, PhyRate, QbssLoad, Subtype, Timestamp};

const FC_TO_DS: u8 = 0x01;
const FC_FROM_DS: u8 = 0x02;
const FC_RETRY: u8 = 0x08;
const FC_PWR_MGMT: u8 = 0x10;
const FC_PROTECTED: u8 = 0x40;

const IE_SSID: u8 = 0;
const IE_QBSS_LOAD: u8 = 11;
const IE_VENDOR: u8 = 221;

/// PHY-layer metadata taken from the radiotap or prism header.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhyMeta {
    pub timestamp: Timestamp,
    pub rssi: Option<i8>,
    pub rate: PhyRate,
    pub channel: u8,
    /// Trailing FCS bytes included in the MPDU.
    pub fcs_len: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeError {
    /// Captured bytes end before the MAC header does.
    Truncated,
    /// Protocol version or frame type this decoder does not handle.
    Unsupported,
}

/// MAC header length for a subtype. `four_addr` only matters for data frames.
pub fn header_len(subtype: Subtype, four_addr: bool) -> u32 {
    match subtype.kind() {
        FrameKind::Management => 24,
        FrameKind::Control => match subtype {
            // ACK and CTS carry only the receiver address.
            Subtype::Ack | Subtype::OtherControl(12) => 10,
            _ => 16,
        },
        FrameKind::Data => {
            let mut len = if four_addr { 30 } else { 24 };
            if subtype.is_qos() {
                len += 2;
            }
            len
        }
    }
}

fn body_fixed_len(subtype: Subtype) -> usize {
    match subtype {
        Subtype::Beacon | Subtype::ProbeResponse => 12,
        Subtype::AssociationRequest => 4,
        Subtype::ReassociationRequest => 10,
        Subtype::AssociationResponse | Subtype::ReassociationResponse => 6,
        Subtype::Authentication => 6,
        Subtype::Deauthentication | Subtype::Disassociation => 2,
        _ => 0,
    }
}

fn u16_le(b: &[u8], off: usize) -> Option<u16> {
    b.get(off..off + 2).map(|s| u16::from_le_bytes([s[0], s[1]]))
}

/// Decodes one MPDU. `orig_len` is the on-air length; `mpdu` may be shorter
/// when the capture snap length cut the record.
pub fn decode(mpdu: &[u8], orig_len: usize, phy: PhyMeta) -> Result<Frame, DecodeError> {
    if mpdu.len() < 2 {
        return Err(DecodeError::Truncated);
    }
    let fc0 = mpdu[0];
    let flags = mpdu[1];
    if fc0 & 0x03 != 0 {
        return Err(DecodeError::Unsupported);
    }
    let kind = match (fc0 >> 2) & 0x03 {
        0 => FrameKind::Management,
        1 => FrameKind::Control,
        2 => FrameKind::Data,
        _ => return Err(DecodeError::Unsupported),
    };
    let subtype = Subtype::from_bits(kind, fc0 >> 4);
    let to_ds = flags & FC_TO_DS != 0;
    let from_ds = flags & FC_FROM_DS != 0;
    let hdr = header_len(subtype, to_ds && from_ds) as usize;
    if mpdu.len() < hdr {
        return Err(DecodeError::Truncated);
    }

    let addr = |n: usize| MacAddr::from_slice(&mpdu[4 + 6 * n..]);
    let receiver = addr(0);
    let mut frame = Frame::new(phy.timestamp, subtype, receiver);
    frame.rssi = phy.rssi;
    frame.phy_rate = phy.rate;
    frame.channel = phy.channel;
    frame.retry = flags & FC_RETRY != 0;
    frame.power_mgmt = flags & FC_PWR_MGMT != 0;
    frame.frame_bytes = orig_len as u32;

    match kind {
        FrameKind::Control => {
            if hdr >= 16 {
                frame.transmitter = Some(addr(1));
            }
        }
        FrameKind::Management => {
            frame.transmitter = Some(addr(1));
            frame.bssid = Some(addr(2));
        }
        FrameKind::Data => {
            frame.transmitter = Some(addr(1));
            frame.bssid = match (to_ds, from_ds) {
                (false, false) => Some(addr(2)),
                (true, false) => Some(receiver),
                (false, true) => Some(addr(1)),
                (true, true) => None,
            };
        }
    }

    if kind == FrameKind::Management && flags & FC_PROTECTED == 0 {
        // Body ends before the FCS, or before the snap cut, whichever is first.
        let body_end = mpdu.len().min(orig_len.saturating_sub(phy.fcs_len));
        if body_end > hdr {
            decode_mgmt_body(&mut frame, &mpdu[hdr..body_end]);
        }
    }
    Ok(frame)
}

fn decode_mgmt_body(frame: &mut Frame, body: &[u8]) {
    let st = frame.subtype;
    if st.has_fixed_beacon_fields() {
        frame.beacon_interval = u16_le(body, 8);
    }
    frame.status_code = match st {
        Subtype::AssociationResponse | Subtype::ReassociationResponse => u16_le(body, 2),
        Subtype::Authentication => u16_le(body, 4),
        _ => None,
    };

    let mut off = body_fixed_len(st);
    while off + 2 <= body.len() {
        let id = body[off];
        let len = body[off + 1] as usize;
        let start = off + 2;
        if start + len > body.len() {
            break;
        }
        let data = &body[start..start + len];
        match id {
            IE_SSID if st.may_carry_ssid() && frame.ssid.is_none() => {
                frame.ssid = Some(String::from_utf8_lossy(data).into_owned());
            }
            IE_QBSS_LOAD if len >= 3 && frame.qbss.is_none() => {
                frame.qbss = Some(QbssLoad {
                    station_count: u16::from_le_bytes([data[0], data[1]]),
                    channel_utilization: data[2],
                });
            }
            _ => {}
        }
        off = start + len;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EncodeError {
    #[error("frame_bytes {declared} is smaller than the {needed} bytes its fields require")]
    TooShort { declared: u32, needed: u32 },
    #[error("SSID longer than 255 bytes")]
    SsidTooLong,
}

fn data_ds_bits(frame: &Frame) -> (bool, bool) {
    match frame.bssid {
        None => (true, true),
        Some(b) if b == frame.receiver => (true, false),
        Some(b) if Some(b) == frame.transmitter => (false, true),
        Some(_) => (false, false),
    }
}

/// Length of the MPDU without padding.
pub fn min_encoded_len(frame: &Frame) -> u32 {
    let st = frame.subtype;
    let four = st.kind() == FrameKind::Data && frame.bssid.is_none();
    let mut len = header_len(st, four);
    if st.kind() == FrameKind::Management {
        len += body_fixed_len(st) as u32;
        if let (Some(ssid), true) = (&frame.ssid, st.may_carry_ssid()) {
            len += 2 + ssid.len() as u32;
        }
        if frame.qbss.is_some() {
            len += 7;
        }
    }
    len
}

/// Encodes `frame` into exactly `frame.frame_bytes` bytes, padding management
/// frames with vendor-specific elements and other frames with zeros.
pub fn encode(frame: &Frame) -> Result<Vec<u8>, EncodeError> {
    let needed = min_encoded_len(frame);
    if needed > frame.frame_bytes {
        return Err(EncodeError::TooShort { declared: frame.frame_bytes, needed });
    }
    let st = frame.subtype;
    let kind = st.kind();
    let mut out = Vec::with_capacity(frame.frame_bytes as usize);

    let mut flags = 0u8;
    if frame.retry {
        flags |= FC_RETRY;
    }
    if frame.power_mgmt {
        flags |= FC_PWR_MGMT;
    }
    let (to_ds, from_ds) = if kind == FrameKind::Data { data_ds_bits(frame) } else { (false, false) };
    if to_ds {
        flags |= FC_TO_DS;
    }
    if from_ds {
        flags |= FC_FROM_DS;
    }
    out.push((kind.type_bits() << 2) | (st.code() << 4));
    out.push(flags);
    out.extend_from_slice(&[0, 0]); // duration
    out.extend_from_slice(&frame.receiver.0);

    let zero = MacAddr::default();
    let tx = frame.transmitter.unwrap_or(zero);
    match kind {
        FrameKind::Control => {
            if header_len(st, false) >= 16 {
                out.extend_from_slice(&tx.0);
            }
        }
        FrameKind::Management => {
            out.extend_from_slice(&tx.0);
            out.extend_from_slice(&frame.bssid.unwrap_or(zero).0);
            out.extend_from_slice(&[0, 0]);
        }
        FrameKind::Data => {
            out.extend_from_slice(&tx.0);
            let addr3 = match (to_ds, from_ds) {
                (false, false) => frame.bssid.unwrap_or(zero),
                _ => zero,
            };
            out.extend_from_slice(&addr3.0);
            out.extend_from_slice(&[0, 0]);
            if to_ds && from_ds {
                out.extend_from_slice(&zero.0);
            }
            if st.is_qos() {
                out.extend_from_slice(&[0, 0]);
            }
        }
    }

    if kind == FrameKind::Management {
        encode_mgmt_body(frame, &mut out)?;
        pad_with_elements(&mut out, frame.frame_bytes as usize);
    } else {
        out.resize(frame.frame_bytes as usize, 0);
    }
    debug_assert_eq!(out.len(), frame.frame_bytes as usize);
    Ok(out)
}

fn encode_mgmt_body(frame: &Frame, out: &mut Vec<u8>) -> Result<(), EncodeError> {
    let st = frame.subtype;
    let status = frame.status_code.unwrap_or(0).to_le_bytes();
    match st {
        Subtype::Beacon | Subtype::ProbeResponse => {
            out.extend_from_slice(&[0; 8]);
            out.extend_from_slice(&frame.beacon_interval.unwrap_or(0).to_le_bytes());
            out.extend_from_slice(&[0x01, 0x00]);
        }
        Subtype::AssociationRequest => out.extend_from_slice(&[0x01, 0x00, 0x0a, 0x00]),
        Subtype::ReassociationRequest => {
            out.extend_from_slice(&[0x01, 0x00, 0x0a, 0x00]);
            out.extend_from_slice(&frame.bssid.unwrap_or_default().0);
        }
        Subtype::AssociationResponse | Subtype::ReassociationResponse => {
            out.extend_from_slice(&[0x01, 0x00]);
            out.extend_from_slice(&status);
            out.extend_from_slice(&[0x01, 0xc0]);
        }
        Subtype::Authentication => {
            out.extend_from_slice(&[0, 0]);
            let seq: u16 = if frame.transmitter == frame.bssid { 2 } else { 1 };
            out.extend_from_slice(&seq.to_le_bytes());
            out.extend_from_slice(&status);
        }
        // Reason code 3: station leaving.
        Subtype::Deauthentication | Subtype::Disassociation => out.extend_from_slice(&[3, 0]),
        _ => {}
    }
    if let (Some(ssid), true) = (&frame.ssid, st.may_carry_ssid()) {
        let bytes = ssid.as_bytes();
        if bytes.len() > 255 {
            return Err(EncodeError::SsidTooLong);
        }
        out.push(IE_SSID);
        out.push(bytes.len() as u8);
        out.extend_from_slice(bytes);
    }
    if let Some(q) = frame.qbss {
        out.push(IE_QBSS_LOAD);
        out.push(5);
        out.extend_from_slice(&q.station_count.to_le_bytes());
        out.push(q.channel_utilization);
        out.extend_from_slice(&[0, 0]);
    }
    Ok(())
}

/// Fills up to `target` bytes with vendor elements. A lone trailing byte is
/// shorter than an element header and the decoder ignores it.
fn pad_with_elements(out: &mut Vec<u8>, target: usize) {
    const MAX_ELEMENT: usize = 2 + 255;
    while out.len() < target {
        let remaining = target - out.len();
        let take = match remaining {
            1 => {
                out.push(IE_VENDOR);
                continue;
            }
            n if n <= MAX_ELEMENT => n,
            n if n == MAX_ELEMENT + 1 => MAX_ELEMENT - 1,
            _ => MAX_ELEMENT,
        };
        out.push(IE_VENDOR);
        out.push((take - 2) as u8);
        out.resize(out.len() + take - 2, 0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phy() -> PhyMeta {
        PhyMeta {
            timestamp: Timestamp(5),
            rssi: Some(-40),
            rate: PhyRate::from_mbps(1.0),
            channel: 6,
            fcs_len: 0,
        }
    }

    fn mac(n: u8) -> MacAddr {
        MacAddr([2, 0, 0, 0, 0, n])
    }

    #[test]
    fn beacon_round_trip_with_padding() {
        for extra in 0..300u32 {
            let mut f = Frame::new(Timestamp(5), Subtype::Beacon, MacAddr::BROADCAST);
            f.rssi = Some(-40);
            f.channel = 6;
            f.transmitter = Some(mac(1));
            f.bssid = Some(mac(1));
            f.ssid = Some("campus".into());
            f.beacon_interval = Some(100);
            f.qbss = Some(QbssLoad { station_count: 4, channel_utilization: 77 });
            f.frame_bytes = min_encoded_len(&f) + extra;
            let bytes = encode(&f).unwrap();
            let back = decode(&bytes, bytes.len(), phy()).unwrap();
            assert_eq!(back, f, "extra = {extra}");
        }
    }

    #[test]
    fn data_directions_round_trip() {
        let ap = mac(1);
        let sta = mac(2);
        for (tx, rx, bssid) in [
            (sta, ap, Some(ap)),
            (ap, sta, Some(ap)),
            (sta, mac(3), Some(mac(9))),
            (sta, mac(3), None),
        ] {
            let mut f = Frame::new(Timestamp(5), Subtype::QosData, rx);
            f.rssi = Some(-40);
            f.channel = 6;
            f.transmitter = Some(tx);
            f.bssid = bssid;
            f.retry = true;
            f.frame_bytes = 200;
            let bytes = encode(&f).unwrap();
            assert_eq!(decode(&bytes, bytes.len(), phy()).unwrap(), f);
        }
    }

    #[test]
    fn truncated_header_is_rejected() {
        let mut f = Frame::new(Timestamp(5), Subtype::ProbeRequest, MacAddr::BROADCAST);
        f.transmitter = Some(mac(2));
        f.bssid = Some(MacAddr::BROADCAST);
        f.frame_bytes = 60;
        let bytes = encode(&f).unwrap();
        assert_eq!(decode(&bytes[..20], 60, phy()), Err(DecodeError::Truncated));
    }

    #[test]
    fn too_short_frame_bytes_is_an_error() {
        let mut f = Frame::new(Timestamp(0), Subtype::Ack, mac(1));
        f.frame_bytes = 4;
        assert!(matches!(encode(&f), Err(EncodeError::TooShort { needed: 10, .. })));
    }

    #[test]
    fn ack_has_no_transmitter() {
        let mut f = Frame::new(Timestamp(5), Subtype::Ack, mac(1));
        f.rssi = Some(-40);
        f.channel = 6;
        f.frame_bytes = 14;
        let bytes = encode(&f).unwrap();
        let back = decode(&bytes, bytes.len(), phy()).unwrap();
        assert_eq!(back.transmitter, None);
        assert_eq!(back, f);
    }
}
