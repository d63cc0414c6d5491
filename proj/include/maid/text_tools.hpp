#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "maid/fingerprint.hpp"

namespace maid {

/// Two-way English/Chinese word table. Text form: one "en<TAB>zh" pair per
/// line; lines starting with '#' are comments.
class Lexicon {
public:
    static Lexicon parse(std::string_view text);
    static Lexicon load(const std::filesystem::path& path);
    static const Lexicon& bundled();

    std::size_t size() const noexcept { return entries_.size(); }
    const std::vector<std::pair<std::string, std::string>>& entries() const noexcept { return entries_; }
    const std::string* to_zh(std::string_view en) const;
    const std::string* to_en(std::string_view zh) const;
    std::size_t longest_zh() const noexcept { return longest_zh_; }

private:
    std::vector<std::pair<std::string, std::string>> entries_;
    std::unordered_map<std::string, std::size_t> by_en_;
    std::unordered_map<std::string, std::size_t> by_zh_;
    std::size_t longest_zh_ = 0;
};

enum class TranslateDirection { ZhToEn, EnToZh };

/// Parses "zh-en"/"zh->en"/"en-zh"/"en->zh"; throws Syntax otherwise.
TranslateDirection parse_direction(std::string_view s);

/// Token substitution. English tokens match case-insensitively with
/// surrounding punctuation kept; Chinese runs are segmented by greedy
/// longest match. Unknown material passes through untouched.
std::string mock_translate(std::string_view text, TranslateDirection dir, const Lexicon& lexicon = Lexicon::bundled());

struct KbEntry {
    std::string keyword;
    std::vector<std::string> tags;
    Embedding embedding;
};

/// Prompt keyword knowledge base, one JSON object {keyword, tags} per line.
/// `tags` may be a string or an array of strings.
class KeywordKb {
public:
    static KeywordKb parse(std::string_view jsonl);
    static KeywordKb load(const std::filesystem::path& path);
    static const KeywordKb& bundled();

    void add(std::string keyword, std::vector<std::string> tags);
    const std::vector<KbEntry>& entries() const noexcept { return entries_; }
    bool empty() const noexcept { return entries_.empty(); }

private:
    std::vector<KbEntry> entries_;
};

struct ScoredEntry {
    std::size_t index;
    double score;
};

/// Every KB entry scored against the prompt, best first, file order on ties.
std::vector<ScoredEntry> rank_keywords(std::string_view prompt, const KeywordKb& kb);

/// prompt + ", " + tags of the top-k keywords, comma separated.
/// Throws EmptyKb on an empty knowledge base.
std::string prompt_expand(std::string_view prompt, const KeywordKb& kb, std::size_t k);

// Resources compiled in from data/.
std::string_view bundled_corpus();
std::string_view bundled_lexicon_text();
std::string_view bundled_kb_text();

}  // namespace maid
