#pragma once

#include <map>
#include <string>
#include <vector>

namespace prion {

enum class Status { pass, fail, not_applicable, sampled_only };

inline const char* to_string(Status s) {
    switch (s) {
        case Status::pass: return "pass";
        case Status::fail: return "fail";
        case Status::not_applicable: return "not-applicable";
        case Status::sampled_only: return "sampled-only";
    }
    return "unknown";
}

/// Outcome of one audited condition. Constants are extrema over the declared
/// sample grid; the witness holds the sample point attaining them.
struct HypothesisReport {
    std::string condition_id;
    Status status = Status::not_applicable;
    std::map<std::string, double> constants;
    std::map<std::string, double> witness;
    std::string note;
};

using ReportList = std::vector<HypothesisReport>;

inline const HypothesisReport* find_report(const ReportList& reports, const std::string& id) {
    for (const auto& r : reports)
        if (r.condition_id == id) return &r;
    return nullptr;
}

}  // namespace prion
