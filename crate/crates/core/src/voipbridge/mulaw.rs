//! G.711 mu-law companding (PCMU).

const BIAS: i32 = 0x84;
const CLIP: i32 = 32635;

/// Compresses a 16-bit linear sample to a mu-law byte.
pub fn mulaw_encode(sample: i16) -> u8 {
    let s = sample as i32;
    let (sign, magnitude) = if s < 0 { (0x80, -s) } else { (0x00, s) };
    let biased = magnitude.min(CLIP) + BIAS;
    // biased is in 132..=32767, so its top bit sits at position 7..=14
    let segment = (31 - (biased as u32).leading_zeros()) as i32 - 7;
    let mantissa = (biased >> (segment + 3)) & 0x0F;
    !((sign | (segment << 4) | mantissa) as u8)
}

const fn decode_one(byte: u8) -> i16 {
    let u = !byte;
    let segment = ((u >> 4) & 0x07) as i32;
    let mantissa = (u & 0x0F) as i32;
    let magnitude = (((mantissa << 3) + BIAS) << segment) - BIAS;
    if u & 0x80 != 0 {
        -magnitude as i16
    } else {
        magnitude as i16
    }
}

const fn build_decode_table() -> [i16; 256] {
    let mut table = [0i16; 256];
    let mut i = 0;
    while i < 256 {
        table[i] = decode_one(i as u8);
        i += 1;
    }
    table
}

static DECODE_TABLE: [i16; 256] = build_decode_table();

/// Expands a mu-law byte to a 16-bit linear sample.
#[inline]
pub fn mulaw_decode(byte: u8) -> i16 {
    DECODE_TABLE[byte as usize]
}

/// The code for a zero sample, used for silence frames.
pub const MULAW_SILENCE: u8 = 0xFF;
