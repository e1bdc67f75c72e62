//! Byte-string helpers shared by the reporters.

use std::borrow::Cow;
use std::fmt::Write;

/// Renders raw line bytes for UTF-8 output. Valid UTF-8 passes through
/// untouched; each undecodable byte is written as `\xNN`.
pub fn display_bytes(bytes: &[u8]) -> Cow<'_, str> {
    if let Ok(s) = std::str::from_utf8(bytes) {
        return Cow::Borrowed(s);
    }
    let mut out = String::with_capacity(bytes.len() + 8);
    for chunk in bytes.utf8_chunks() {
        out.push_str(chunk.valid());
        for b in chunk.invalid() {
            let _ = write!(out, "\\x{b:02X}");
        }
    }
    Cow::Owned(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn passthrough_and_escape() {
        assert_eq!(display_bytes("héllo".as_bytes()), "héllo");
        assert_eq!(display_bytes(b"a\xffb\xc3"), "a\\xFFb\\xC3");
    }
}
