//! Lossless float saliency container.
//!
//! Layout (all little-endian): `b"SALF"`, version `u32`, width `u32`,
//! height `u32`, then `width × height` IEEE-754 `f32` values, row-major.

use super::FormatError;
use crate::model::SaliencyMap;
use crate::scalar::Scalar;

pub const MAGIC: &[u8; 4] = b"SALF";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 16;

pub fn encode<T: Scalar>(map: &SaliencyMap<T>) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * map.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(map.width() as u32).to_le_bytes());
    out.extend_from_slice(&(map.height() as u32).to_le_bytes());
    for v in map.values() {
        out.extend_from_slice(&v.to_f32().unwrap().to_le_bytes());
    }
    out
}

fn u32_at(bytes: &[u8], offset: usize) -> Result<u32, FormatError> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_le_bytes(b.try_into().unwrap()))
        .ok_or_else(|| FormatError::malformed(bytes.len(), "truncated header"))
}

pub fn decode<T: Scalar>(bytes: &[u8]) -> Result<SaliencyMap<T>, FormatError> {
    if bytes.get(..4) != Some(MAGIC.as_slice()) {
        return Err(FormatError::UnsupportedMagic(
            String::from_utf8_lossy(&bytes[..bytes.len().min(4)]).into_owned(),
        ));
    }
    let version = u32_at(bytes, 4)?;
    if version != VERSION {
        return Err(FormatError::malformed(4, format!("unsupported version {version}")));
    }
    let width = u32_at(bytes, 8)? as usize;
    let height = u32_at(bytes, 12)? as usize;
    if width == 0 || height == 0 {
        return Err(FormatError::malformed(8, format!("zero dimension {width}x{height}")));
    }
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(4))
        .and_then(|n| n.checked_add(HEADER_LEN))
        .ok_or_else(|| FormatError::malformed(8, "dimensions overflow"))?;
    if bytes.len() != expected {
        return Err(FormatError::malformed(
            bytes.len().min(expected),
            format!(
                "payload length {} does not match {width}x{height} (expected {expected} bytes)",
                bytes.len()
            ),
        ));
    }
    let mut values = Vec::with_capacity(width * height);
    for (i, chunk) in bytes[HEADER_LEN..].chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            return Err(FormatError::malformed(HEADER_LEN + 4 * i, "non-finite value"));
        }
        values.push(T::from_f32(v).unwrap());
    }
    Ok(SaliencyMap::with_detected_normalization(width, height, values)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_layout_is_little_endian() {
        let map = SaliencyMap::new(2, 1, vec![1.0f32, -2.5]).unwrap();
        let bytes = encode(&map);
        assert_eq!(&bytes[..16], b"SALF\x01\0\0\0\x02\0\0\0\x01\0\0\0");
        assert_eq!(&bytes[16..20], &1.0f32.to_le_bytes());
        assert_eq!(bytes.len(), 24);
    }

    #[test]
    fn wrong_version_and_trailing_bytes_rejected() {
        let map = SaliencyMap::new(1, 1, vec![0.5f32]).unwrap();
        let mut bytes = encode(&map);
        bytes.push(0);
        assert!(matches!(decode::<f32>(&bytes), Err(FormatError::Malformed { .. })));
        let mut bytes = encode(&map);
        bytes[4] = 2;
        assert!(matches!(
            decode::<f32>(&bytes),
            Err(FormatError::Malformed { offset: 4, .. })
        ));
    }

    proptest! {
        #[test]
        fn float_round_trip_is_bit_exact(w in 1usize..6, h in 1usize..6, seed in proptest::collection::vec(-1e6f32..1e6, 36)) {
            let values: Vec<f32> = seed[..w * h].to_vec();
            let map = SaliencyMap::new(w, h, values.clone()).unwrap();
            let back: SaliencyMap<f32> = decode(&encode(&map)).unwrap();
            let bits = |v: &[f32]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
            prop_assert_eq!(bits(back.values()), bits(&values));
        }
    }
}
