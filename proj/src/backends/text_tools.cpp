#include "maid/text_tools.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "maid/codec.hpp"
#include "maid/error.hpp"

namespace maid {
namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

bool is_ascii_punct(unsigned char c) { return c < 0x80 && std::ispunct(c); }

std::size_t utf8_len(unsigned char lead) {
    if (lead < 0x80) return 1;
    if ((lead >> 5) == 0x6) return 2;
    if ((lead >> 4) == 0xE) return 3;
    if ((lead >> 3) == 0x1E) return 4;
    return 1;
}

std::string translate_en_token(std::string_view token, const Lexicon& lex) {
    std::size_t b = 0, e = token.size();
    while (b < e && is_ascii_punct(token[b])) ++b;
    while (e > b && is_ascii_punct(token[e - 1])) --e;
    if (b == e) return std::string(token);
    const auto* zh = lex.to_zh(lower(token.substr(b, e - b)));
    if (!zh) return std::string(token);
    return std::string(token.substr(0, b)) + *zh + std::string(token.substr(e));
}

std::string translate_zh_token(std::string_view token, const Lexicon& lex) {
    std::string out;
    bool last_was_word = false;
    std::size_t pos = 0;
    while (pos < token.size()) {
        const std::string* match = nullptr;
        std::size_t match_len = 0;
        for (std::size_t len = std::min(lex.longest_zh(), token.size() - pos); len > 0; --len) {
            if ((match = lex.to_en(token.substr(pos, len)))) {
                match_len = len;
                break;
            }
        }
        if (match) {
            if (last_was_word) out.push_back(' ');
            out += *match;
            last_was_word = true;
            pos += match_len;
        } else {
            const auto n = std::min(utf8_len(static_cast<unsigned char>(token[pos])), token.size() - pos);
            out.append(token.substr(pos, n));
            last_was_word = false;
            pos += n;
        }
    }
    return out;
}

}  // namespace

Lexicon Lexicon::parse(std::string_view text) {
    Lexicon lex;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0 || tab + 1 == line.size())
            throw Error(ErrorCode::Syntax, fmt::format("lexicon line {}: expected en<TAB>zh", lineno));
        auto en = lower(line.substr(0, tab));
        auto zh = line.substr(tab + 1);
        lex.by_en_.emplace(en, lex.entries_.size());
        lex.by_zh_.emplace(zh, lex.entries_.size());
        lex.longest_zh_ = std::max(lex.longest_zh_, zh.size());
        lex.entries_.emplace_back(std::move(en), std::move(zh));
    }
    return lex;
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    return parse(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

const Lexicon& Lexicon::bundled() {
    static const Lexicon lex = parse(bundled_lexicon_text());
    return lex;
}

const std::string* Lexicon::to_zh(std::string_view en) const {
    auto it = by_en_.find(std::string(en));
    return it == by_en_.end() ? nullptr : &entries_[it->second].second;
}

const std::string* Lexicon::to_en(std::string_view zh) const {
    auto it = by_zh_.find(std::string(zh));
    return it == by_zh_.end() ? nullptr : &entries_[it->second].first;
}

TranslateDirection parse_direction(std::string_view s) {
    if (s == "zh-en" || s == "zh->en") return TranslateDirection::ZhToEn;
    if (s == "en-zh" || s == "en->zh") return TranslateDirection::EnToZh;
    throw Error(ErrorCode::Syntax, fmt::format("unknown translation direction '{}'", s));
}

std::string mock_translate(std::string_view text, TranslateDirection dir, const Lexicon& lexicon) {
    std::string out;
    out.reserve(text.size());
    std::size_t pos = 0;
    while (pos < text.size()) {
        if (std::isspace(static_cast<unsigned char>(text[pos]))) {
            out.push_back(text[pos++]);
            continue;
        }
        std::size_t end = pos;
        while (end < text.size() && !std::isspace(static_cast<unsigned char>(text[end]))) ++end;
        const auto token = text.substr(pos, end - pos);
        out += dir == TranslateDirection::EnToZh ? translate_en_token(token, lexicon) : translate_zh_token(token, lexicon);
        pos = end;
    }
    return out;
}

KeywordKb KeywordKb::parse(std::string_view jsonl) {
    KeywordKb kb;
    std::istringstream in{std::string(jsonl)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            std::vector<std::string> tags;
            const auto& t = j.at("tags");
            if (t.is_string()) tags.push_back(t.get<std::string>());
            else tags = t.get<std::vector<std::string>>();
            kb.add(j.at("keyword").get<std::string>(), std::move(tags));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::Syntax, fmt::format("kb line {}: {}", lineno, e.what()));
        }
    }
    return kb;
}

KeywordKb KeywordKb::load(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    return parse(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

const KeywordKb& KeywordKb::bundled() {
    static const KeywordKb kb = parse(bundled_kb_text());
    return kb;
}

void KeywordKb::add(std::string keyword, std::vector<std::string> tags) {
    auto e = embed_text(keyword);
    entries_.push_back({std::move(keyword), std::move(tags), std::move(e)});
}

std::vector<ScoredEntry> rank_keywords(std::string_view prompt, const KeywordKb& kb) {
    const auto q = embed_text(prompt);
    std::vector<ScoredEntry> scored;
    scored.reserve(kb.entries().size());
    for (std::size_t i = 0; i < kb.entries().size(); ++i) scored.push_back({i, cosine(q, kb.entries()[i].embedding)});
    std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.score > b.score; });
    return scored;
}

std::string prompt_expand(std::string_view prompt, const KeywordKb& kb, std::size_t k) {
    if (kb.empty()) throw Error(ErrorCode::EmptyKb, "keyword knowledge base is empty");
    const auto ranked = rank_keywords(prompt, kb);
    std::vector<std::string_view> tags;
    for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i)
        for (const auto& t : kb.entries()[ranked[i].index].tags) tags.push_back(t);
    return fmt::format("{}, {}", prompt, fmt::join(tags, ", "));
}

}  // namespace maid
