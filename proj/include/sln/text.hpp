#ifndef SLN_TEXT_HPP_
#define SLN_TEXT_HPP_

#include <algorithm>
#include <cctype>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace sln {

// ---------------------------------------------------------------------------
// Frozen English stopword list. This exact list is part of the pipeline
// contract: changing it changes vocabularies, topic models, and every
// downstream feature. A copy ships in data/stopwords_en.txt; a unit test
// keeps the two in sync.
// ---------------------------------------------------------------------------

inline const std::set<std::string>& stopwords_en() {
    static const std::set<std::string> words = {
        "a", "about", "above", "after", "again", "against", "all", "also", "am", "an", "and",
        "any", "are", "aren", "as", "at", "be", "because", "been", "before", "being", "below",
        "between", "both", "but", "by", "can", "cannot", "could", "couldn", "did", "didn", "do",
        "does", "doesn", "doing", "don", "down", "during", "each", "else", "ever", "few", "for",
        "from", "further", "get", "got", "had", "hadn", "has", "hasn", "have", "haven", "having",
        "he", "her", "here", "hers", "herself", "him", "himself", "his", "how", "however", "i",
        "if", "in", "into", "is", "isn", "it", "its", "itself", "just", "let", "like", "me",
        "more", "most", "mustn", "my", "myself", "no", "nor", "not", "of", "off", "on", "once",
        "only", "or", "other", "ought", "our", "ours", "ourselves", "out", "over", "own",
        "please", "same", "shan", "she", "should", "shouldn", "so", "some", "such", "than",
        "thank", "thanks", "that", "the", "their", "theirs", "them", "themselves", "then",
        "there", "these", "they", "this", "those", "through", "to", "too", "under", "until",
        "up", "very", "was", "wasn", "we", "well", "were", "weren", "what", "when", "where",
        "which", "while", "who", "whom", "why", "will", "with", "won", "would", "wouldn", "you",
        "your", "yours", "yourself", "yourselves"};
    return words;
}

// ---------------------------------------------------------------------------
// Porter stemmer (the classic 1980 algorithm). Operates on lowercase ASCII;
// tokens with non-ASCII bytes are passed through unchanged.
// ---------------------------------------------------------------------------

namespace porter {

inline bool is_ascii_lower_word(std::string_view w) {
    for (char c : w)
        if (c < 'a' || c > 'z') return false;
    return !w.empty();
}

// A consonant is a letter other than a,e,i,o,u, and other than y preceded by
// a consonant.
inline bool is_consonant(std::string_view w, int i) {
    char c = w[i];
    if (c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u') return false;
    if (c == 'y') return i == 0 ? true : !is_consonant(w, i - 1);
    return true;
}

/// Measure m of w[0..end): number of VC sequences.
inline int measure(std::string_view w, int end) {
    int m = 0;
    int i = 0;
    while (i < end && is_consonant(w, i)) ++i;  // skip initial C*
    while (i < end) {
        while (i < end && !is_consonant(w, i)) ++i;  // V+
        if (i >= end) break;
        ++m;
        while (i < end && is_consonant(w, i)) ++i;  // C+
    }
    return m;
}

inline bool has_vowel(std::string_view w, int end) {
    for (int i = 0; i < end; ++i)
        if (!is_consonant(w, i)) return true;
    return false;
}

inline bool double_consonant(std::string_view w, int end) {
    if (end < 2) return false;
    return w[end - 1] == w[end - 2] && is_consonant(w, end - 1);
}

/// cvc at the end, where the final c is not w, x or y.
inline bool cvc(std::string_view w, int end) {
    if (end < 3) return false;
    if (!is_consonant(w, end - 3) || is_consonant(w, end - 2) || !is_consonant(w, end - 1))
        return false;
    char c = w[end - 1];
    return c != 'w' && c != 'x' && c != 'y';
}

inline bool ends_with(std::string_view w, std::string_view suffix) {
    return w.size() >= suffix.size() &&
           w.compare(w.size() - suffix.size(), suffix.size(), suffix) == 0;
}

struct Rule {
    const char* from;
    const char* to;
    int min_m;  // condition m(stem) > min_m ... encoded as m > min_m-1, see apply
};

/// Replace `from` by `to` when the stem before `from` has measure > min_m.
/// Returns true when the suffix matched (whether or not replaced).
inline bool replace_if(std::string& w, std::string_view from, std::string_view to, int m_gt) {
    if (!ends_with(w, from)) return false;
    int stem_len = static_cast<int>(w.size() - from.size());
    if (measure(w, stem_len) > m_gt) w = w.substr(0, stem_len) + std::string(to);
    return true;
}

inline std::string stem(std::string word) {
    if (!is_ascii_lower_word(word) || word.size() <= 2) return word;
    std::string& w = word;

    // Step 1a
    if (ends_with(w, "sses"))
        w.resize(w.size() - 2);
    else if (ends_with(w, "ies"))
        w.resize(w.size() - 2);
    else if (!ends_with(w, "ss") && ends_with(w, "s"))
        w.resize(w.size() - 1);

    // Step 1b
    bool cleanup = false;
    if (ends_with(w, "eed")) {
        if (measure(w, static_cast<int>(w.size()) - 3) > 0) w.resize(w.size() - 1);
    } else if (ends_with(w, "ed") && has_vowel(w, static_cast<int>(w.size()) - 2)) {
        w.resize(w.size() - 2);
        cleanup = true;
    } else if (ends_with(w, "ing") && has_vowel(w, static_cast<int>(w.size()) - 3)) {
        w.resize(w.size() - 3);
        cleanup = true;
    }
    if (cleanup) {
        if (ends_with(w, "at") || ends_with(w, "bl") || ends_with(w, "iz")) {
            w += 'e';
        } else if (double_consonant(w, static_cast<int>(w.size()))) {
            char last = w.back();
            if (last != 'l' && last != 's' && last != 'z') w.resize(w.size() - 1);
        } else if (measure(w, static_cast<int>(w.size())) == 1 &&
                   cvc(w, static_cast<int>(w.size()))) {
            w += 'e';
        }
    }

    // Step 1c
    if (ends_with(w, "y") && has_vowel(w, static_cast<int>(w.size()) - 1)) w.back() = 'i';

    // Step 2 (m > 0)
    static const Rule step2[] = {
        {"ational", "ate", 0}, {"tional", "tion", 0}, {"enci", "ence", 0}, {"anci", "ance", 0},
        {"izer", "ize", 0},    {"abli", "able", 0},   {"alli", "al", 0},   {"entli", "ent", 0},
        {"eli", "e", 0},       {"ousli", "ous", 0},   {"ization", "ize", 0}, {"ation", "ate", 0},
        {"ator", "ate", 0},    {"alism", "al", 0},    {"iveness", "ive", 0}, {"fulness", "ful", 0},
        {"ousness", "ous", 0}, {"aliti", "al", 0},    {"iviti", "ive", 0}, {"biliti", "ble", 0}};
    for (const Rule& r : step2)
        if (replace_if(w, r.from, r.to, 0)) break;

    // Step 3 (m > 0)
    static const Rule step3[] = {{"icate", "ic", 0}, {"ative", "", 0}, {"alize", "al", 0},
                                 {"iciti", "ic", 0}, {"ical", "ic", 0}, {"ful", "", 0},
                                 {"ness", "", 0}};
    for (const Rule& r : step3)
        if (replace_if(w, r.from, r.to, 0)) break;

    // Step 4 (m > 1); "ion" additionally requires stem ending in s or t.
    static const char* step4[] = {"al",   "ance", "ence", "er",  "ic",  "able", "ible",
                                  "ant",  "ement", "ment", "ent", "ou",  "ism",  "ate",
                                  "iti",  "ous",  "ive",  "ize"};
    bool done4 = false;
    for (const char* suf : step4) {
        if (ends_with(w, suf)) {
            int stem_len = static_cast<int>(w.size() - std::string_view(suf).size());
            if (measure(w, stem_len) > 1) w.resize(stem_len);
            done4 = true;
            break;
        }
    }
    if (!done4 && ends_with(w, "ion")) {
        int stem_len = static_cast<int>(w.size()) - 3;
        if (stem_len > 0 && (w[stem_len - 1] == 's' || w[stem_len - 1] == 't') &&
            measure(w, stem_len) > 1)
            w.resize(stem_len);
    }

    // Step 5a
    if (ends_with(w, "e")) {
        int stem_len = static_cast<int>(w.size()) - 1;
        int m = measure(w, stem_len);
        if (m > 1 || (m == 1 && !cvc(w, stem_len))) w.resize(stem_len);
    }
    // Step 5b
    if (measure(w, static_cast<int>(w.size())) > 1 &&
        double_consonant(w, static_cast<int>(w.size())) && w.back() == 'l')
        w.resize(w.size() - 1);

    return word;
}

}  // namespace porter

// ---------------------------------------------------------------------------
// preprocess: lowercase, strip URLs and punctuation, drop stopwords and
// all-digit tokens, stem. Token order is preserved. Multibyte UTF-8
// sequences are kept as token characters.
// ---------------------------------------------------------------------------

inline bool looks_like_url(std::string_view s) {
    return s.substr(0, 7) == "http://" || s.substr(0, 8) == "https://" ||
           s.substr(0, 4) == "www." || s.find("://") != std::string_view::npos;
}

inline std::vector<std::string> preprocess(std::string_view text,
                                           const std::set<std::string>& stopwords = stopwords_en()) {
    std::vector<std::string> tokens;
    size_t i = 0;
    const size_t n = text.size();
    while (i < n) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        if (std::isspace(c)) {
            ++i;
            continue;
        }
        // whitespace-delimited chunk
        size_t j = i;
        while (j < n && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
        std::string_view chunk = text.substr(i, j - i);
        i = j;
        if (looks_like_url(chunk)) continue;

        // split the chunk on non-alphanumeric ASCII
        std::string cur;
        auto flush = [&]() {
            if (cur.empty()) return;
            std::string tok;
            tok.swap(cur);
            bool all_digit = std::all_of(tok.begin(), tok.end(), [](unsigned char ch) {
                return std::isdigit(ch);
            });
            if (all_digit || tok.size() < 2) return;
            if (stopwords.count(tok)) return;
            tokens.push_back(porter::stem(std::move(tok)));
        };
        for (char ch : chunk) {
            unsigned char uc = static_cast<unsigned char>(ch);
            if (uc >= 0x80) {
                cur += ch;  // UTF-8 continuation / lead byte
            } else if (std::isalnum(uc)) {
                cur += static_cast<char>(std::tolower(uc));
            } else {
                flush();
            }
        }
        flush();
    }
    return tokens;
}

}  // namespace sln

#endif  // SLN_TEXT_HPP_
