//! RTP fixed header framing.

use super::BridgeError;

pub const RTP_VERSION: u8 = 2;
pub const PAYLOAD_TYPE_PCMU: u8 = 0;
pub const RTP_HEADER_LEN: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RtpPacket {
    pub marker: bool,
    pub payload_type: u8,
    pub sequence: u16,
    pub timestamp: u32,
    pub ssrc: u32,
    pub payload: Vec<u8>,
}

impl RtpPacket {
    pub fn pcmu(marker: bool, sequence: u16, timestamp: u32, ssrc: u32, payload: Vec<u8>) -> Self {
        Self {
            marker,
            payload_type: PAYLOAD_TYPE_PCMU,
            sequence,
            timestamp,
            ssrc,
            payload,
        }
    }
}

/// 12-byte big-endian header (no padding, extension or CSRCs) plus payload.
pub fn serialize_rtp(p: &RtpPacket) -> Vec<u8> {
    let mut out = Vec::with_capacity(RTP_HEADER_LEN + p.payload.len());
    out.push(RTP_VERSION << 6);
    out.push(((p.marker as u8) << 7) | (p.payload_type & 0x7F));
    out.extend_from_slice(&p.sequence.to_be_bytes());
    out.extend_from_slice(&p.timestamp.to_be_bytes());
    out.extend_from_slice(&p.ssrc.to_be_bytes());
    out.extend_from_slice(&p.payload);
    out
}

/// Parses an RTP datagram. CSRC lists, header extensions and padding from
/// other senders are skipped; they are not kept in the returned packet.
pub fn parse_rtp(bytes: &[u8]) -> Result<RtpPacket, BridgeError> {
    if bytes.len() < RTP_HEADER_LEN {
        return Err(BridgeError::ShortPacket(bytes.len()));
    }
    let version = bytes[0] >> 6;
    if version != RTP_VERSION {
        return Err(BridgeError::BadVersion(version));
    }
    let padding = bytes[0] & 0x20 != 0;
    let extension = bytes[0] & 0x10 != 0;
    let csrc_count = (bytes[0] & 0x0F) as usize;

    let mut start = RTP_HEADER_LEN + 4 * csrc_count;
    if extension {
        if bytes.len() < start + 4 {
            return Err(BridgeError::MalformedPacket("header extension"));
        }
        let words = u16::from_be_bytes([bytes[start + 2], bytes[start + 3]]) as usize;
        start += 4 + 4 * words;
    }
    let mut end = bytes.len();
    if padding {
        let pad = *bytes.last().expect("length checked") as usize;
        if pad == 0 || pad > end {
            return Err(BridgeError::MalformedPacket("padding"));
        }
        end -= pad;
    }
    if start > end {
        return Err(BridgeError::MalformedPacket("header longer than packet"));
    }

    Ok(RtpPacket {
        marker: bytes[1] & 0x80 != 0,
        payload_type: bytes[1] & 0x7F,
        sequence: u16::from_be_bytes([bytes[2], bytes[3]]),
        timestamp: u32::from_be_bytes([bytes[4], bytes[5], bytes[6], bytes[7]]),
        ssrc: u32::from_be_bytes([bytes[8], bytes[9], bytes[10], bytes[11]]),
        payload: bytes[start..end].to_vec(),
    })
}
