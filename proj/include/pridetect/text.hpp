#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace pridetect {

// An ordered sequence of normalized tokens: lowercase ASCII alphanumerics,
// at least two characters, suffix-stripped, never a stopword.
using TokenSequence = std::vector<std::string>;

// Raw occurrence counts per token.
using CountMap = std::map<std::string, long>;

// Relative frequencies per token; values sum to 1 when non-empty.
using FrequencyMap = std::map<std::string, double>;

// Embedded default stopword list (~120 common English function words).
const std::set<std::string>& default_stopwords();

// Load a stopword file: one word per line, blank lines skipped, '#' starts a
// comment (whole-line or trailing). Words are lowercased.
std::set<std::string> load_stopwords(const std::string& path);

// Strip common suffixes ("ing", "ed", "es", "s", "ly", "ion") from a
// lowercase token, longest-listed first, only when at least three characters
// remain, repeating until no suffix applies (so stemming is idempotent).
std::string stem(std::string word);

// Normalize free text into tokens: ASCII-lowercase, any character outside
// [a-z0-9] separates, stopwords dropped (both before and after stemming,
// since a stem such as "can" from "cans" may itself be a stopword), suffixes
// stripped, tokens shorter than two characters dropped.
TokenSequence tokenize(std::string_view text, const std::set<std::string>& stopwords);
TokenSequence tokenize(std::string_view text); // embedded stopword list

// Occurrence counts of the tokens that appear in `dictionary`; tokens outside
// it are ignored. An empty dictionary is a configuration error.
CountMap count_keywords(const TokenSequence& tokens,
                        const std::unordered_set<std::string>& dictionary);

// Counts normalized to relative frequencies; empty input yields an empty map.
FrequencyMap relative_frequency(const CountMap& counts);

} // namespace pridetect
