#include <algorithm>

#include "icsgap/taxonomy.hpp"

namespace icsgap {

CoverageMap CoverageMap::load(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw Error(path.string() + ": " + e.what());
    }
    try {
        return from_json(j);
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

CoverageMap CoverageMap::from_json(const json& j) {
    if (!j.is_object()) throw Error("coverage map: expected an object");
    if (!j.contains("map_version") || !j["map_version"].is_string()) throw Error("map_version: missing");
    if (!j.contains("rules") || !j["rules"].is_array()) throw Error("rules: missing array");
    CoverageMap m;
    m.version_ = j["map_version"].get<std::string>();
    std::set<std::string> seen;
    for (size_t i = 0; i < j["rules"].size(); ++i) {
        const auto& r = j["rules"][i];
        std::string where = "rules[" + std::to_string(i) + "]";
        if (!r.is_object()) throw Error(where + ": expected object");
        CoverageRule rule;
        if (!r.contains("label") || !r["label"].is_string() || r["label"].get<std::string>().empty())
            throw Error(where + ".label: missing");
        rule.label = r["label"].get<std::string>();
        rule.match = r.value("match", "normalized-synonym");
        if (rule.match != "exact" && rule.match != "normalized-synonym")
            throw Error(where + ".match: expected exact or normalized-synonym");
        if (r.contains("synonyms")) {
            if (!r["synonyms"].is_array()) throw Error(where + ".synonyms: expected array");
            for (const auto& s : r["synonyms"]) {
                if (!s.is_string()) throw Error(where + ".synonyms: expected strings");
                rule.synonyms.push_back(s.get<std::string>());
            }
        }
        if (!r.contains("verdict") || !r["verdict"].is_string()) throw Error(where + ".verdict: missing");
        try {
            rule.verdict = parse_support_string(r["verdict"].get<std::string>());
        } catch (const SupportParseError& e) {
            throw Error(where + ".verdict: " + e.what());
        }
        if (rule.verdict.level != SupportLevel::No && !is_known_sco(rule.verdict.sco_name))
            throw Error(where + ".verdict: unknown STIX object '" + rule.verdict.sco_name + "'");
        rule.rationale = r.value("rationale", "");
        if (!seen.insert(normalize_label(rule.label)).second)
            throw Error(where + ".label: '" + rule.label + "' duplicates another rule after normalization");
        m.rules_.push_back(std::move(rule));
    }
    if (m.rules_.empty()) throw Error("rules: map must not be empty");
    m.build_index();
    return m;
}

CoverageMap::CoverageMap(const CoverageMap& other) { *this = other; }

CoverageMap& CoverageMap::operator=(const CoverageMap& other) {
    if (this == &other) return *this;
    std::scoped_lock lk(mu_, other.mu_);
    version_ = other.version_;
    rules_ = other.rules_;
    unmapped_count_ = other.unmapped_count_;
    unmapped_ = other.unmapped_;
    build_index();
    return *this;
}

void CoverageMap::build_index() {
    index_.clear();
    for (size_t i = 0; i < rules_.size(); ++i) {
        const auto& r = rules_[i];
        if (r.match == "exact") {
            index_["=" + r.label].push_back(i);
            continue;
        }
        std::set<std::string> keys{normalize_label(r.label)};
        for (const auto& s : r.synonyms) keys.insert(normalize_label(s));
        for (const auto& k : keys) index_["~" + k].push_back(i);
    }
}

CoverageVerdict CoverageMap::lookup(std::string_view label) const {
    std::vector<size_t> cands;
    if (auto it = index_.find("=" + std::string(label)); it != index_.end())
        cands.insert(cands.end(), it->second.begin(), it->second.end());
    if (auto it = index_.find("~" + normalize_label(label)); it != index_.end())
        cands.insert(cands.end(), it->second.begin(), it->second.end());
    if (cands.empty()) return {};
    auto better = [&](size_t a, size_t b) {
        size_t la = normalize_label(rules_[a].label).size(), lb = normalize_label(rules_[b].label).size();
        if (la != lb) return la > lb;
        auto va = rules_[a].verdict.level, vb = rules_[b].verdict.level;
        if (va != vb) return static_cast<int>(va) > static_cast<int>(vb);
        return a < b;
    };
    size_t best = *std::min_element(cands.begin(), cands.end(), better);
    return {rules_[best].verdict, true, &rules_[best]};
}

StixSupport CoverageMap::classify(std::string_view label) const {
    auto v = lookup(label);
    if (!v.mapped) {
        std::lock_guard lk(mu_);
        ++unmapped_count_;
        unmapped_.insert(std::string(label));
    }
    return v.support;
}

std::uint64_t CoverageMap::unmapped_count() const {
    std::lock_guard lk(mu_);
    return unmapped_count_;
}

std::vector<std::string> CoverageMap::unmapped_labels() const {
    std::lock_guard lk(mu_);
    return {unmapped_.begin(), unmapped_.end()};
}

void classify_dataset(std::vector<Observable>& dataset, const CoverageMap& map) {
    for (auto& o : dataset) {
        if (o.review_status == ReviewStatus::Rejected) continue;
        auto v = map.lookup(o.classification);
        if (!v.mapped) map.classify(o.classification);
        o.stix_support = v.support;
        auto it = std::find(o.flags.begin(), o.flags.end(), kFlagUnmappedLabel);
        if (v.mapped && it != o.flags.end()) o.flags.erase(it);
        if (!v.mapped) o.add_flag(kFlagUnmappedLabel);
    }
}

}  // namespace icsgap
