#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace synmind::text {

/// Lowercases, strips punctuation, splits on whitespace.
/// A "word" everywhere in this codebase is one of these tokens.
std::vector<std::string> tokenize(std::string_view s);

std::size_t word_count(std::string_view s);

/// True for function words that do not carry visual content.
bool is_stopword(const std::string& token);

/// Light suffix-stripping stemmer (plural -s/-es, -ing, -ed). Enough to match
/// caption vocabulary against itself; not a general-purpose stemmer.
std::string stem(const std::string& token);

/// Distinct stemmed non-stopword tokens of `s`, in first-seen order.
std::vector<std::string> content_stems(std::string_view s);

/// Fraction of `reference`'s content stems that appear (stemmed) in
/// `candidate`. Empty reference content vacuously overlaps 1.0.
double content_overlap(std::string_view candidate, std::string_view reference);

/// First `n` words of `s`, joined by single spaces.
std::string truncate_words(std::string_view s, std::size_t n);

}  // namespace synmind::text
