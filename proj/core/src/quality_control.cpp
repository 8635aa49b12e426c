#include "icsgap/quality_control.hpp"

#include <algorithm>
#include <sstream>
#include <tuple>

namespace icsgap {

ojson to_json(const RemovedObservable& r) {
    ojson j;
    j["reason"] = r.reason;
    j["observable"] = to_json(r.observable);
    return j;
}

std::string normalize_value(std::string_view v) { return to_lower(collapse_whitespace(v)); }

std::vector<Observable> dedupe(std::vector<Observable> observables, std::vector<RemovedObservable>* removed) {
    sort_canonical(observables);
    std::set<std::tuple<std::string, std::string, std::string>> seen;
    std::vector<Observable> kept;
    kept.reserve(observables.size());
    for (auto& o : observables) {
        if (seen.emplace(normalize_value(o.observable_value), o.classification, o.description_id).second)
            kept.push_back(std::move(o));
        else if (removed)
            removed->push_back({std::move(o), "duplicate"});
    }
    return kept;
}

const std::set<std::string>& software_identity_labels() {
    static const std::set<std::string> s = {"software/tool", "software", "malware", "malware family",
                                            "malware name",  "tool"};
    return s;
}

FilterResult filter_malware_entities(const std::vector<Observable>& observables,
                                     const std::set<std::string>& malware_names) {
    FilterResult r;
    for (const auto& o : observables) {
        bool named = malware_names.count(to_lower(trim(o.observable_value))) > 0;
        bool identity = software_identity_labels().count(normalize_label(o.classification)) > 0;
        if (named || identity)
            r.removed.push_back({o, "stix-domain-object"});
        else
            r.kept.push_back(o);
    }
    return r;
}

const std::vector<std::string>& editable_fields() {
    static const std::vector<std::string> f = {"observable_value", "artifact_details",     "data_source",
                                               "classification",   "STIX_supported",       "proprietary_artifact",
                                               "parser",           "notes"};
    return f;
}

ojson to_json(const Correction& c) {
    ojson j;
    ojson t;
    t["description_id"] = c.target.description_id;
    t["observable_value"] = c.target.observable_value;
    if (c.target.classification) t["classification"] = *c.target.classification;
    j["target"] = t;
    j["action"] = c.action == CorrectionAction::Edit ? "edit" : "reject";
    if (c.action == CorrectionAction::Edit) {
        j["field"] = c.field;
        j["old_value"] = ojson::parse(c.old_value.dump());
        j["new_value"] = ojson::parse(c.new_value.dump());
    }
    j["reviewer"] = c.reviewer;
    j["rationale"] = c.rationale;
    j["timestamp"] = c.timestamp;
    return j;
}

Correction correction_from_json(const json& j) {
    if (!j.is_object()) throw Error("expected an object");
    Correction c;
    if (!j.contains("target") || !j["target"].is_object()) throw Error("target: missing");
    const auto& t = j["target"];
    for (const char* f : {"description_id", "observable_value"})
        if (!t.contains(f) || !t[f].is_string()) throw Error(std::string("target.") + f + ": missing");
    c.target.description_id = t["description_id"];
    c.target.observable_value = t["observable_value"];
    if (t.contains("classification")) {
        if (!t["classification"].is_string()) throw Error("target.classification: expected string");
        c.target.classification = t["classification"].get<std::string>();
    }
    std::string action = j.value("action", "");
    if (action == "edit") {
        c.action = CorrectionAction::Edit;
        if (!j.contains("field") || !j["field"].is_string()) throw Error("field: missing");
        c.field = j["field"];
        const auto& ef = editable_fields();
        if (std::find(ef.begin(), ef.end(), c.field) == ef.end()) throw Error("field: '" + c.field + "' is not editable");
        if (!j.contains("old_value")) throw Error("old_value: missing");
        if (!j.contains("new_value")) throw Error("new_value: missing");
        c.old_value = j["old_value"];
        c.new_value = j["new_value"];
    } else if (action == "reject") {
        c.action = CorrectionAction::Reject;
    } else {
        throw Error("action: expected edit or reject");
    }
    c.reviewer = j.value("reviewer", "");
    c.rationale = j.value("rationale", "");
    c.timestamp = j.value("timestamp", "");
    if (c.reviewer.empty()) throw Error("reviewer: missing");
    return c;
}

CorrectionSet parse_corrections(const json& j) {
    CorrectionSet s;
    const json* list = &j;
    if (j.is_object()) {
        s.schema_version = j.value("schema_version", 0);
        if (s.schema_version != 1) throw Error("schema_version: expected 1");
        s.description = j.value("description", "");
        if (j.contains("breakdown")) s.breakdown = j["breakdown"];
        if (!j.contains("corrections")) throw Error("corrections: missing");
        list = &j["corrections"];
    }
    if (!list->is_array()) throw Error("corrections: expected an array");
    for (size_t i = 0; i < list->size(); ++i) {
        try {
            s.corrections.push_back(correction_from_json((*list)[i]));
        } catch (const Error& e) {
            throw Error("corrections[" + std::to_string(i) + "]." + e.what());
        }
    }
    return s;
}

CorrectionSet load_corrections(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw Error(path.string() + ": " + e.what());
    }
    try {
        return parse_corrections(j);
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

ojson to_json(const AuditEntry& a) {
    ojson j;
    j["seq"] = a.seq;
    j["pre_hash"] = a.pre_hash;
    j["post_hash"] = a.post_hash;
    j["correction"] = to_json(a.correction);
    return j;
}

AuditEntry audit_entry_from_json(const json& j) {
    AuditEntry a;
    if (!j.is_object() || !j.contains("seq") || !j["seq"].is_number_unsigned()) throw Error("seq: missing");
    for (const char* f : {"pre_hash", "post_hash"})
        if (!j.contains(f) || !j[f].is_string()) throw Error(std::string(f) + ": missing");
    if (!j.contains("correction")) throw Error("correction: missing");
    a.seq = j["seq"];
    a.pre_hash = j["pre_hash"];
    a.post_hash = j["post_hash"];
    a.correction = correction_from_json(j["correction"]);
    return a;
}

std::string dump_audit(const std::vector<AuditEntry>& log) {
    std::vector<ojson> rows;
    for (const auto& a : log) rows.push_back(to_json(a));
    return dump_ndjson(rows);
}

std::vector<AuditEntry> read_audit(const std::filesystem::path& path) {
    std::vector<AuditEntry> out;
    size_t line = 0;
    for (const auto& j : read_ndjson(path)) {
        ++line;
        try {
            out.push_back(audit_entry_from_json(j));
        } catch (const Error& e) {
            throw Error(path.string() + ": line " + std::to_string(line) + ": " + e.what());
        }
    }
    return out;
}

ojson to_json(const QcIssue& i) {
    ojson j;
    j["index"] = i.index;
    j["kind"] = i.kind;
    j["message"] = i.message;
    return j;
}

namespace {

std::string describe(const CorrectionTarget& t) {
    return t.description_id + " / '" + t.observable_value + "'" +
           (t.classification ? " [" + *t.classification + "]" : std::string());
}

// Applies one correction to a canonical dataset. Returns an issue instead of mutating
// when the correction cannot be applied.
std::optional<QcIssue> apply_one(std::vector<Observable>& ds, const Correction& c, size_t index,
                                 const CoverageMap* map) {
    std::vector<size_t> hits;
    for (size_t i = 0; i < ds.size(); ++i) {
        const auto& o = ds[i];
        if (o.review_status == ReviewStatus::Rejected) continue;
        if (o.description_id != c.target.description_id || o.observable_value != c.target.observable_value) continue;
        if (c.target.classification && o.classification != *c.target.classification) continue;
        hits.push_back(i);
    }
    if (hits.empty()) return QcIssue{index, "unknown-target", "no observable matches " + describe(c.target)};
    if (hits.size() > 1)
        return QcIssue{index, "ambiguous-target", std::to_string(hits.size()) + " observables match " + describe(c.target)};
    Observable& o = ds[hits.front()];
    if (c.action == CorrectionAction::Reject) {
        o.review_status = ReviewStatus::Rejected;
        return std::nullopt;
    }
    json cur = json::parse(to_json(o).dump());
    if (cur[c.field] != c.old_value)
        return QcIssue{index, "conflict",
                       c.field + " of " + describe(c.target) + " is " + cur[c.field].dump() + ", correction expects " +
                           c.old_value.dump()};
    cur[c.field] = c.new_value;
    Observable edited;
    try {
        edited = observable_from_json(cur);
    } catch (const Error& e) {
        return QcIssue{index, "invalid", e.what()};
    }
    if (c.field == "classification" && map) {
        std::vector<Observable> one{edited};
        classify_dataset(one, *map);
        edited = std::move(one.front());
    }
    edited.review_status = ReviewStatus::Corrected;
    o = std::move(edited);
    return std::nullopt;
}

}  // namespace

ApplyResult apply_corrections(std::vector<Observable> dataset, const std::vector<Correction>& corrections,
                              const CoverageMap* map, size_t first_seq) {
    ApplyResult r;
    sort_canonical(dataset);
    std::string hash = dataset_hash(dataset);
    size_t seq = first_seq;
    for (size_t i = 0; i < corrections.size(); ++i) {
        std::vector<Observable> next = dataset;
        if (auto issue = apply_one(next, corrections[i], i, map)) {
            r.issues.push_back(std::move(*issue));
            continue;
        }
        sort_canonical(next);
        std::string post = dataset_hash(next);
        r.audit.push_back({seq++, hash, post, corrections[i]});
        dataset = std::move(next);
        hash = std::move(post);
    }
    r.dataset = std::move(dataset);
    return r;
}

std::vector<Observable> replay_audit(std::vector<Observable> machine, const std::vector<AuditEntry>& log,
                                     const CoverageMap* map) {
    sort_canonical(machine);
    std::string hash = dataset_hash(machine);
    for (const auto& a : log) {
        std::string at = "audit seq " + std::to_string(a.seq);
        if (a.pre_hash != hash) throw Error(at + ": pre_hash does not match the dataset");
        if (auto issue = apply_one(machine, a.correction, a.seq, map)) throw Error(at + ": " + issue->message);
        sort_canonical(machine);
        hash = dataset_hash(machine);
        if (a.post_hash != hash) throw Error(at + ": post_hash does not match the replayed dataset");
    }
    return machine;
}

std::string render_diff(const ApplyResult& result) {
    std::ostringstream out;
    for (const auto& a : result.audit) {
        const auto& c = a.correction;
        out << "#" << a.seq << " " << describe(c.target) << "\n";
        if (c.action == CorrectionAction::Reject)
            out << "  - rejected";
        else
            out << "  " << c.field << ": " << c.old_value.dump() << " -> " << c.new_value.dump();
        out << "  (" << c.reviewer << (c.rationale.empty() ? "" : ": " + c.rationale) << ")\n";
    }
    for (const auto& i : result.issues)
        out << "skipped correction " << i.index << " [" << i.kind << "]: " << i.message << "\n";
    out << result.audit.size() << " applied, " << result.issues.size() << " skipped\n";
    return out.str();
}

}  // namespace icsgap
