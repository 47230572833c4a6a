#include "scalelaw/corpus.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <array>
#include <fstream>
#include <iterator>
#include <unordered_map>

#include "scalelaw/error.hpp"

namespace scalelaw {

namespace {

void check_utf8(std::string_view text) {
  const auto* s = reinterpret_cast<const uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());
  int32_t i = 0;
  while (i < length) {
    const int32_t at = i;
    UChar32 c;
    U8_NEXT(s, i, length, c);
    if (c < 0) throw Error(ErrorCode::kParse, "invalid UTF-8 at byte offset " + std::to_string(at));
  }
}

std::vector<std::string> split_whitespace(const std::string& text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error(ErrorCode::kIo, "ICU NFC normalizer unavailable");
  const icu::UnicodeString normalized =
      nfc->normalize(icu::UnicodeString::fromUTF8(text), status);
  if (U_FAILURE(status)) throw Error(ErrorCode::kParse, "NFC normalization failed");

  std::vector<std::string> words;
  icu::UnicodeString current;
  auto flush = [&] {
    if (current.isEmpty()) return;
    std::string utf8;
    current.toUTF8String(utf8);
    words.push_back(std::move(utf8));
    current.remove();
  };
  for (int32_t i = 0; i < normalized.length();) {
    const UChar32 c = normalized.char32At(i);
    if (u_isUWhiteSpace(c))
      flush();
    else
      current.append(c);
    i += U16_LENGTH(c);
  }
  flush();
  return words;
}

}  // namespace

std::string_view to_string(Tokenization mode) noexcept {
  return mode == Tokenization::kByte ? "byte" : "whitespace";
}

Corpus Corpus::from_text(std::string text, Tokenization mode) {
  if (text.empty()) throw Error(ErrorCode::kDomain, "corpus text is empty");

  std::vector<std::uint32_t> tokens;
  std::size_t vocab = 0;
  if (mode == Tokenization::kByte) {
    std::array<bool, 256> seen{};
    tokens.reserve(text.size());
    for (unsigned char b : text) {
      tokens.push_back(b);
      if (!seen[b]) {
        seen[b] = true;
        ++vocab;
      }
    }
  } else {
    check_utf8(text);
    std::unordered_map<std::string, std::uint32_t> ids;
    for (auto& w : split_whitespace(text)) {
      auto [it, inserted] = ids.emplace(std::move(w), static_cast<std::uint32_t>(ids.size()));
      tokens.push_back(it->second);
    }
    vocab = ids.size();
  }
  if (tokens.empty()) throw Error(ErrorCode::kDomain, "corpus contains no tokens");
  return Corpus(std::move(text), std::move(tokens), vocab, mode);
}

Corpus Corpus::from_file(const std::filesystem::path& path, Tokenization mode) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open corpus file " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::kIo, "error reading " + path.string());
  return from_text(std::move(text), mode);
}

}  // namespace scalelaw
