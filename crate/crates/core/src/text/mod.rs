//! Tokenization, pretrained embeddings and fixed-length sequence encoding.

mod embeddings;
mod encode;
mod stopwords;
mod tokenize;

pub use embeddings::{load_embeddings, load_embeddings_filtered, EmbeddingTable, PAD};
pub use encode::{average_length, decode, encode, in_vocab_len, EncodedSequence};
pub use stopwords::{is_stop_word, STOP_WORDS, STOP_WORDS_VERSION};
pub use tokenize::tokenize;
