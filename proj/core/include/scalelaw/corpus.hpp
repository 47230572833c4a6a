#ifndef SCALELAW_CORPUS_HPP
#define SCALELAW_CORPUS_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace scalelaw {

enum class Tokenization {
  kWhitespace,  // NFC-normalized UTF-8 split on Unicode White_Space
  kByte,        // one token per byte; any byte sequence accepted
};

// A tokenized text. Token ids are local to the corpus; only counts and
// sequence structure are meaningful across corpora.
class Corpus {
 public:
  // Throws Error(kParse) on invalid UTF-8 in whitespace mode and
  // Error(kDomain) when the text is empty or yields no tokens.
  static Corpus from_text(std::string text, Tokenization mode = Tokenization::kWhitespace);
  static Corpus from_file(const std::filesystem::path& path,
                          Tokenization mode = Tokenization::kWhitespace);

  const std::string& text() const noexcept { return text_; }
  std::span<const std::uint32_t> tokens() const noexcept { return tokens_; }
  std::size_t size() const noexcept { return tokens_.size(); }
  std::size_t vocabulary_size() const noexcept { return vocabulary_size_; }
  std::size_t raw_bytes() const noexcept { return text_.size(); }
  Tokenization tokenization() const noexcept { return mode_; }

 private:
  Corpus(std::string text, std::vector<std::uint32_t> tokens, std::size_t vocab, Tokenization mode)
      : text_(std::move(text)), tokens_(std::move(tokens)), vocabulary_size_(vocab), mode_(mode) {}

  std::string text_;
  std::vector<std::uint32_t> tokens_;
  std::size_t vocabulary_size_;
  Tokenization mode_;
};

std::string_view to_string(Tokenization mode) noexcept;

}  // namespace scalelaw

#endif  // SCALELAW_CORPUS_HPP
