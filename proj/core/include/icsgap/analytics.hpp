#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "icsgap/common.hpp"
#include "icsgap/taxonomy.hpp"

namespace icsgap {

using Count = std::uint64_t;
// Indexed by DetailLevel.
using DetailRow = std::array<Count, 4>;

struct GapReport {
    Count total = 0;
    std::map<SupportLevel, Count> support_histogram;
    std::map<DetailLevel, Count> detail_histogram;
    std::map<ProprietaryClass, Count> proprietary_histogram;
    Count actionable_unsupported = 0;  // Actionable with Partial or No support
    std::map<std::string, Count> by_data_source;
    std::map<std::string, Count> by_classification;
    std::map<std::string, Count> by_malware;
    std::map<std::string, Count> by_technique;
    std::map<std::string, DetailRow> classification_by_detail;
    std::map<std::string, DetailRow> data_source_by_detail;
    std::set<std::string> unmapped_labels;

    GapReport();
    bool operator==(const GapReport&) const = default;
};

// Rejected observables are skipped.
GapReport aggregate(const std::vector<Observable>& dataset);
// Partitions the dataset across workers and merges the partial reports.
GapReport aggregate_parallel(const std::vector<Observable>& dataset, unsigned workers);
GapReport merge(const GapReport& a, const GapReport& b);

// count/total as a percentage with one decimal, rounded half to even ("52.9%").
std::string format_percent(Count count, Count total);

// Highest counts first, ties by label.
std::vector<std::pair<std::string, Count>> top_k(const std::map<std::string, Count>& counts, size_t k);

enum class ReportFormat { Json, Csv, Markdown };

std::optional<ReportFormat> parse_report_format(std::string_view s);
std::string_view extension_for(ReportFormat f);

std::string render(const GapReport& r, ReportFormat f);
std::string render_json(const GapReport& r);
std::string render_csv(const GapReport& r);
std::string render_markdown(const GapReport& r);

GapReport report_from_json(const json& j);

}  // namespace icsgap
