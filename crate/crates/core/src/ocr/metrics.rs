//! Text normalization and edit-distance error rates.

use unicode_normalization::UnicodeNormalization;

use super::OcrError;

/// NFC, whitespace runs collapsed to a single space, trimmed. Case is kept.
pub fn normalize(text: &str) -> String {
    let nfc: String = text.nfc().collect();
    nfc.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Unit-cost Levenshtein distance over arbitrary comparable tokens.
pub fn edit_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=a.len()).collect();
    let mut cur = vec![0; a.len() + 1];
    for (j, tb) in b.iter().enumerate() {
        cur[0] = j + 1;
        for (i, ta) in a.iter().enumerate() {
            let sub = prev[i] + usize::from(ta != tb);
            cur[i + 1] = sub.min(prev[i + 1] + 1).min(cur[i] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[a.len()]
}

/// Character error rate over Unicode scalar values of the normalized texts.
pub fn cer(reference: &str, hypothesis: &str) -> Result<f64, OcrError> {
    let r: Vec<char> = normalize(reference).chars().collect();
    if r.is_empty() {
        return Err(OcrError::EmptyReference);
    }
    let h: Vec<char> = normalize(hypothesis).chars().collect();
    Ok(edit_distance(&r, &h) as f64 / r.len() as f64)
}

/// Word error rate over whitespace-separated tokens.
pub fn wer(reference: &str, hypothesis: &str) -> Result<f64, OcrError> {
    let r = normalize(reference);
    let r: Vec<&str> = r.split(' ').filter(|t| !t.is_empty()).collect();
    if r.is_empty() {
        return Err(OcrError::EmptyReference);
    }
    let h = normalize(hypothesis);
    let h: Vec<&str> = h.split(' ').filter(|t| !t.is_empty()).collect();
    Ok(edit_distance(&r, &h) as f64 / r.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize("a\n\nb  c "), "a b c");
        assert_eq!(normalize(""), "");
        assert_eq!(normalize("Hulu Error"), "Hulu Error");
        // decomposed e + combining acute composes
        assert_eq!(normalize("e\u{301}"), "\u{e9}");
    }

    #[test]
    fn cer_examples() {
        assert_eq!(cer("hello", "hello").unwrap(), 0.0);
        assert_eq!(cer("abc", "axc").unwrap(), 1.0 / 3.0);
        assert_eq!(cer("abc", "").unwrap(), 1.0);
        assert!(matches!(cer("  \n", "x"), Err(OcrError::EmptyReference)));
    }

    #[test]
    fn wer_examples() {
        assert_eq!(wer("a b c", "a b c").unwrap(), 0.0);
        assert_eq!(wer("a b c", "a x c").unwrap(), 1.0 / 3.0);
        assert_eq!(wer("a b", "").unwrap(), 1.0);
        assert!(wer("", "a").is_err());
    }

    #[test]
    fn case_is_an_error() {
        assert_eq!(cer("Your", "your").unwrap(), 0.25);
    }
}
