#pragma once

#include <filesystem>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "icsgap/attack_ingest.hpp"
#include "icsgap/common.hpp"
#include "icsgap/taxonomy.hpp"

namespace icsgap {

struct LexiconMatch {
    size_t offset = 0;
    size_t length = 0;
    std::string pattern_id;
    std::string value;
    json tuple;  // classification tuple with any per-token overrides applied
};

// Deterministic pattern set. Patterns run in file order and each match claims its
// span; later matches overlapping a claimed span are dropped. Tokens are
// case-sensitive, word-bounded, and the longest token wins at a given offset.
class Lexicon {
public:
    static Lexicon load(const std::filesystem::path& path);
    static Lexicon from_json(const json& j);

    const std::string& version() const { return version_; }
    size_t pattern_count() const { return patterns_.size(); }

    // Sorted by offset.
    std::vector<LexiconMatch> match(std::string_view text) const;
    std::vector<Observable> extract(const ProcedureRecord& record) const;

private:
    struct Token {
        std::string text;
        json overrides;
    };
    struct Pattern {
        std::string id;
        bool is_regex = false;
        std::regex re;
        size_t group = 0;
        std::vector<Token> tokens;
        json tuple;
    };

    std::string version_;
    std::vector<Pattern> patterns_;
};

inline constexpr std::string_view kLexiconBackendTag = "lexicon";

// Builds an Observable from a lexicon or LLM field tuple; throws Error on bad enums.
Observable observable_from_tuple(const std::string& value, const json& tuple, const ProcedureRecord& record,
                                 std::string_view backend);

}  // namespace icsgap
