#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "icsgap/common.hpp"
#include "icsgap/taxonomy.hpp"

namespace icsgap {

struct RemovedObservable {
    Observable observable;
    std::string reason;  // "duplicate" or "stix-domain-object"
};

ojson to_json(const RemovedObservable& r);

// Lower-cased, whitespace-collapsed value used in the dedupe key.
std::string normalize_value(std::string_view v);

// Keeps the first observable (canonical order) per (normalized value, classification,
// description_id). Output is in canonical order.
std::vector<Observable> dedupe(std::vector<Observable> observables, std::vector<RemovedObservable>* removed = nullptr);

// Classification labels that name malware or software identities rather than observables.
const std::set<std::string>& software_identity_labels();

struct FilterResult {
    std::vector<Observable> kept;
    std::vector<RemovedObservable> removed;
};

// malware_names holds lower-cased names and aliases.
FilterResult filter_malware_entities(const std::vector<Observable>& observables,
                                     const std::set<std::string>& malware_names);

enum class CorrectionAction { Edit, Reject };

struct CorrectionTarget {
    std::string description_id;
    std::string observable_value;
    std::optional<std::string> classification;
};

struct Correction {
    CorrectionTarget target;
    CorrectionAction action = CorrectionAction::Edit;
    std::string field;  // edit only
    json old_value;     // edit only
    json new_value;     // edit only
    std::string reviewer;
    std::string rationale;
    std::string timestamp;
};

ojson to_json(const Correction& c);
Correction correction_from_json(const json& j);  // throws Error naming the field

struct CorrectionSet {
    int schema_version = 1;
    std::string description;
    json breakdown = json::object();
    std::vector<Correction> corrections;
};

CorrectionSet load_corrections(const std::filesystem::path& path);
CorrectionSet parse_corrections(const json& j);

// Fields a correction may edit.
const std::vector<std::string>& editable_fields();

struct AuditEntry {
    size_t seq = 0;
    std::string pre_hash;
    std::string post_hash;
    Correction correction;
};

ojson to_json(const AuditEntry& a);
AuditEntry audit_entry_from_json(const json& j);
std::string dump_audit(const std::vector<AuditEntry>& log);
std::vector<AuditEntry> read_audit(const std::filesystem::path& path);

struct QcIssue {
    size_t index = 0;  // position in the corrections list
    std::string kind;  // conflict, unknown-target, ambiguous-target, invalid
    std::string message;
};

ojson to_json(const QcIssue& i);

struct ApplyResult {
    std::vector<Observable> dataset;  // canonical order
    std::vector<AuditEntry> audit;
    std::vector<QcIssue> issues;
};

// Applies corrections in order. A failing correction is skipped and reported; the rest
// still apply. Classification edits recompute STIX support when a map is given.
// first_seq numbers the audit entries.
ApplyResult apply_corrections(std::vector<Observable> dataset, const std::vector<Correction>& corrections,
                              const CoverageMap* map = nullptr, size_t first_seq = 1);

// Replays an audit log over the machine dataset, checking every hash in the chain.
// Throws Error on the first mismatch.
std::vector<Observable> replay_audit(std::vector<Observable> machine, const std::vector<AuditEntry>& log,
                                     const CoverageMap* map = nullptr);

// Human-readable list of the changes an ApplyResult made and the corrections it skipped.
std::string render_diff(const ApplyResult& result);

}  // namespace icsgap
