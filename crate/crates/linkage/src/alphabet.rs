/// The 30-symbol alphabet over which bigrams are formed: `a..z`, `-`, `.`,
/// space and the catch-all `*`. Ordering is fixed so the encoder and every
/// other component index identically.
pub struct Alphabet;

pub const ALPHABET_SIZE: usize = 30;
/// Number of possible bigrams, i.e. the bigram map length.
pub const BIGRAM_SPACE: usize = ALPHABET_SIZE * ALPHABET_SIZE;
/// The catch-all symbol for characters outside the alphabet.
pub const STAR: char = '*';

/// Position of a symbol within the alphabet. Callers must pass normalized
/// characters; anything else is a bug in normalization.
pub fn symbol_ord(c: char) -> usize {
    match c {
        'a'..='z' => (c as usize) - ('a' as usize),
        '-' => 26,
        '.' => 27,
        ' ' => 28,
        '*' => 29,
        _ => panic!("character {c:?} is not in the linkage alphabet"),
    }
}

/// Index of the bigram `(c1, c2)` in the 900-slot map: `30*ord(c1) + ord(c2)`.
pub fn bigram_index(c1: char, c2: char) -> usize {
    ALPHABET_SIZE * symbol_ord(c1) + symbol_ord(c2)
}
