//! Unsigned LEB128 helpers over byte cursors.

use super::CodingError;

pub(crate) fn put(out: &mut Vec<u8>, v: u64) {
    leb128::write::unsigned(out, v).expect("writing to a Vec cannot fail");
}

pub(crate) fn get(cur: &mut &[u8], what: &str) -> Result<u64, CodingError> {
    leb128::read::unsigned(cur)
        .map_err(|_| CodingError::malformed(format!("bad varint for {what}")))
}

pub(crate) fn get_usize(cur: &mut &[u8], what: &str) -> Result<usize, CodingError> {
    usize::try_from(get(cur, what)?)
        .map_err(|_| CodingError::malformed(format!("{what} too large")))
}

pub(crate) fn take<'a>(cur: &mut &'a [u8], n: usize, what: &str) -> Result<&'a [u8], CodingError> {
    if cur.len() < n {
        return Err(CodingError::malformed(format!("input ends inside {what}")));
    }
    let (head, tail) = cur.split_at(n);
    *cur = tail;
    Ok(head)
}
