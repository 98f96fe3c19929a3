#include "pridetect/text.hpp"

#include <array>
#include <cctype>
#include <fstream>

#include "pridetect/errors.hpp"

namespace pridetect {

namespace {

constexpr std::array<const char*, 137> kDefaultStopwords = {
    "a",          "about",   "above",     "after",    "again",      "against",
    "all",        "am",      "an",        "and",      "any",        "are",
    "as",         "at",      "be",        "because",  "been",       "before",
    "being",      "below",   "between",   "both",     "but",        "by",
    "can",        "cannot",  "could",     "did",      "do",         "does",
    "doing",      "down",    "during",    "each",     "else",       "few",
    "for",        "from",    "further",   "had",      "has",        "have",
    "having",     "he",      "her",       "here",     "hers",       "herself",
    "him",        "himself", "his",       "how",      "i",          "if",
    "in",         "into",    "is",        "it",       "its",        "itself",
    "just",       "may",     "me",        "might",    "more",       "most",
    "must",       "my",      "myself",    "no",       "nor",        "not",
    "now",        "of",      "off",       "on",       "once",       "only",
    "onto",       "or",      "other",     "our",      "ours",       "ourselves",
    "out",        "over",    "own",       "same",     "shall",      "she",
    "should",     "so",      "some",      "such",     "than",       "that",
    "the",        "their",   "theirs",    "them",     "themselves", "then",
    "there",      "these",   "they",      "this",     "those",      "through",
    "to",         "too",     "under",     "until",    "up",         "upon",
    "very",       "was",     "we",        "were",     "what",       "when",
    "where",      "which",   "while",     "who",      "whom",       "whose",
    "why",        "will",    "with",      "within",   "without",    "would",
    "you",        "your",    "yours",     "yourself", "yourselves",
};

// Longest-match-first suffix list. The final entry extends the classic
// five-suffix set so that derivational "-ion" forms collapse onto their verb
// stems ("addiction" -> "addict"), which the worked tokenizer behaviour
// requires.
constexpr std::array<const char*, 6> kSuffixes = {"ing", "ed", "es", "ly", "ion", "s"};

bool ends_with(const std::string& word, std::string_view suffix) {
    return word.size() >= suffix.size() &&
           word.compare(word.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string ascii_lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

} // namespace

const std::set<std::string>& default_stopwords() {
    static const std::set<std::string> words(kDefaultStopwords.begin(), kDefaultStopwords.end());
    return words;
}

std::set<std::string> load_stopwords(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open stopword file: " + path);
    std::set<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::string word;
        for (char c : line) {
            if (!std::isspace(static_cast<unsigned char>(c))) word.push_back(c);
        }
        if (!word.empty()) words.insert(ascii_lower(word));
    }
    return words;
}

std::string stem(std::string word) {
    bool stripped = true;
    while (stripped) {
        stripped = false;
        for (const char* raw : kSuffixes) {
            const std::string_view suffix(raw);
            if (ends_with(word, suffix) && word.size() - suffix.size() >= 3) {
                word.erase(word.size() - suffix.size());
                stripped = true;
                break;
            }
        }
    }
    return word;
}

TokenSequence tokenize(std::string_view text, const std::set<std::string>& stopwords) {
    TokenSequence tokens;
    std::string current;
    auto flush = [&] {
        if (current.empty()) return;
        std::string word = std::move(current);
        current.clear();
        if (stopwords.count(word)) return;
        word = stem(std::move(word));
        if (word.size() < 2) return;
        if (stopwords.count(word)) return; // a stem may itself be a stopword
        tokens.push_back(std::move(word));
    };
    for (char raw : text) {
        const unsigned char c = static_cast<unsigned char>(raw);
        const char lower = static_cast<char>(std::tolower(c));
        if ((lower >= 'a' && lower <= 'z') || (lower >= '0' && lower <= '9')) {
            current.push_back(lower);
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

TokenSequence tokenize(std::string_view text) { return tokenize(text, default_stopwords()); }

CountMap count_keywords(const TokenSequence& tokens,
                        const std::unordered_set<std::string>& dictionary) {
    if (dictionary.empty()) throw ConfigError("count_keywords: empty dictionary");
    CountMap counts;
    for (const std::string& token : tokens) {
        if (dictionary.count(token)) ++counts[token];
    }
    return counts;
}

FrequencyMap relative_frequency(const CountMap& counts) {
    FrequencyMap freq;
    long total = 0;
    for (const auto& [word, count] : counts) total += count;
    if (total == 0) return freq;
    for (const auto& [word, count] : counts) {
        freq[word] = static_cast<double>(count) / static_cast<double>(total);
    }
    return freq;
}

} // namespace pridetect
